"""Quaternion tensor linear algebra with transform-domain products,
slicewise SVD, optimal truncation, and a color-video compression
pipeline."""

from .algebra import (
    RANK_TOLERANCE,
    TqtSvd,
    conjugate_transpose,
    from_hat,
    identity_tensor,
    is_unitary_tensor,
    qt_product,
    to_hat,
    tqt_rank,
    tqt_svd,
    truncate,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    FixtureFormatError,
    NumericalError,
    OptimalityWarning,
    QtsvdError,
    ShapeMismatchError,
    SingularMatrixError,
)
from .media import (
    FrameStack,
    decode,
    encode,
    load_frame_dir,
    load_input,
    psnr,
    save_frame_dir,
    synthetic_clip,
)
from .qmatrix import (
    QMatrix,
    complex_adjoint,
    from_complex_adjoint,
    is_unitary,
    qmat_inverse,
    qmat_mul,
    qmat_qr,
    qmat_svd,
)
from .qtensor import (
    QTensor,
    QTensorBuilder,
    facewise_conjugate_transpose,
    facewise_product,
    fold,
    frobenius_norm,
    frontal_slices,
    is_f_diagonal,
    load_qtensor,
    mode_k_product,
    save_qtensor,
    unfold,
)
from .quaternion import Quaternion, qmul
from .transforms import (
    TRANSFORM_NAMES,
    TransformSet,
    data_driven_transform,
    data_driven_transforms,
    identity_transforms,
    qdct_matrix,
    qdct_transforms,
    qdft_matrix,
    qdft_transforms,
    random_transforms,
    random_unitary,
    transform_set,
    validate,
)

__version__ = "0.1.0"
