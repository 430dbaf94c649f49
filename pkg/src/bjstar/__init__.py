"""Birkhoff-James orthogonality in finite-dimensional real and complex C*-algebras."""

import os as _os

# BLAS thread caps must be in place before numpy loads; results do not depend on them.
_threads = _os.environ.get("BJSTAR_THREADS", "")
if _threads.isdigit() and int(_threads) >= 1:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .algebra import AlgebraSignature, Element, m0_subspace, matrix_unit, spectral_norm  # noqa: E402
from .oracle import Config, bj_orthogonal, bj_orthogonal_direct, is_smooth  # noqa: E402
from .scalars import FieldTag, RingTag  # noqa: E402

__all__ = [
    "AlgebraSignature",
    "Config",
    "Element",
    "FieldTag",
    "RingTag",
    "bj_orthogonal",
    "bj_orthogonal_direct",
    "is_smooth",
    "m0_subspace",
    "matrix_unit",
    "spectral_norm",
]
