"""Quaternion scalars and vectorized arithmetic on component planes.

Array-valued quaternion data in this package is stored as a float64
ndarray whose leading axis has length 4 and holds the w, x, y, z
component planes: w is the real part, x, y, z are the i, j, k
coefficients.  The helpers at the bottom of this module operate on such
component stacks and back every matrix and tensor operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion w + x*i + y*j + z*k."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = np.asarray(arr, dtype=float)
        return cls(float(w), float(x), float(y), float(z))

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __rmul__(self, other) -> "Quaternion":
        # other is a real scalar; reals commute with everything.
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x
                         + self.y * self.y + self.z * self.z)

    __abs__ = norm

    def inverse(self) -> "Quaternion":
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def is_close(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product a*b.  Order matters: i*j = k but j*i = -k."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def hamilton(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise Hamilton product of two component stacks.

    Both arguments are (4, ...) arrays; trailing shapes broadcast the
    usual numpy way.  Entries of `a` multiply from the left.
    """
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def hamilton_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of component stacks over their last two axes.

    `a` is (4, ..., m, p), `b` is (4, ..., p, n); leading batch axes
    broadcast through np.matmul.  Entries of `a` multiply from the left,
    which is the only order compatible with row-times-column summation.
    """
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.stack([
        aw @ bw - ax @ bx - ay @ by - az @ bz,
        aw @ bx + ax @ bw + ay @ bz - az @ by,
        aw @ by - ax @ bz + ay @ bw + az @ bx,
        aw @ bz + ax @ by - ay @ bx + az @ bw,
    ])


def conjugate_planes(a: np.ndarray) -> np.ndarray:
    """Elementwise quaternion conjugate of a component stack."""
    out = a.copy()
    out[1:] = -out[1:]
    return out


def magnitude(a: np.ndarray) -> np.ndarray:
    """Elementwise quaternion modulus of a component stack."""
    return np.sqrt((a * a).sum(axis=0))
