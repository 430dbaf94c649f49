"""Scalars over R, C and H stored uniformly as quaternion 4-tuples.

Every scalar carries four real components ``(w, x, y, z)`` meaning
``w + x i + y j + z k``.  The ring tag only restricts which components may be
nonzero, so one multiplication table serves all three division rings.

Vectors and matrices over a ring are numpy arrays whose trailing axis has
length 4.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class FieldTag(str, enum.Enum):
    R = "R"
    C = "C"


class RingTag(str, enum.Enum):
    R = "R"
    C = "C"
    H = "H"

    @property
    def dim(self) -> int:
        return _RING_DIM[self]

    @property
    def order(self) -> int:
        return _RING_ORDER[self]


_RING_DIM = {RingTag.R: 1, RingTag.C: 2, RingTag.H: 4}
_RING_ORDER = {RingTag.R: 0, RingTag.C: 1, RingTag.H: 2}

# _MULT[a, b, c]: coefficient of unit c in (unit a) * (unit b), units 1, i, j, k.
_MULT = np.zeros((4, 4, 4))
for _a, _b, _c, _s in [
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
]:
    _MULT[_a, _b, _c] = _s

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])

UNITS = np.eye(4)


def qmul(p, q):
    """Elementwise quaternion product of arrays with trailing axis 4."""
    outer = np.asarray(p)[..., :, None] * np.asarray(q)[..., None, :]
    return np.tensordot(outer, _MULT, axes=([-2, -1], [0, 1]))


def qconj(q):
    return np.asarray(q) * _CONJ


def qabs(q):
    return np.sqrt(np.sum(np.asarray(q) ** 2, axis=-1))


def qmatmul(a, b):
    """Matrix product of quaternion matrices shaped (n, m, 4) and (m, p, 4)."""
    prod = np.einsum("ika,kjb->ijab", a, b)
    return np.tensordot(prod, _MULT, axes=([-2, -1], [0, 1]))


def qmatvec(a, v):
    prod = np.einsum("ika,kb->iab", a, v)
    return np.tensordot(prod, _MULT, axes=([-2, -1], [0, 1]))


def qadjoint(a):
    """Conjugate transpose of a quaternion matrix."""
    return np.swapaxes(a, 0, 1) * _CONJ


def left_mult_matrix(q, d: int = 4):
    """Real d x d matrix of p -> q p, truncated to the first d components."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    full = np.stack(
        [
            np.stack([w, -x, -y, -z], axis=-1),
            np.stack([x, w, -z, y], axis=-1),
            np.stack([y, z, w, -x], axis=-1),
            np.stack([z, -y, x, w], axis=-1),
        ],
        axis=-2,
    )
    return full[..., :d, :d]


def unit_basis(ring: RingTag):
    """Canonical unimodular units {1, i, j, k} that live in ``ring``."""
    return [UNITS[a] for a in range(ring.dim)]


def random_unimodular(ring: RingTag, rng, size=None):
    """Uniform draw on the unit sphere of ``ring`` (normalized Gaussian)."""
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (4,)
    g = np.zeros(shape)
    g[..., : ring.dim] = rng.standard_normal(shape[:-1] + (ring.dim,))
    return g / qabs(g)[..., None]


def random_imaginary_unit(ring: RingTag, rng):
    """Uniform purely imaginary unimodular number of ``ring`` (C or H)."""
    if ring is RingTag.R:
        raise ValueError("R has no purely imaginary units")
    g = np.zeros(4)
    g[1 : ring.dim] = rng.standard_normal(ring.dim - 1)
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class Scalar:
    """A member of R, C or H; components beyond the ring's dimension are zero."""

    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    ring: RingTag = RingTag.H

    def __post_init__(self):
        comps = (self.x, self.y, self.z)
        if any(c != 0.0 for c in comps[self.ring.dim - 1 :]):
            raise ValueError(f"components {comps} not allowed in ring {self.ring.value}")

    @classmethod
    def from_array(cls, q, ring: RingTag) -> "Scalar":
        q = np.asarray(q, dtype=float)
        return cls(*(float(c) for c in q), ring=ring)

    @property
    def array(self):
        return np.array([self.w, self.x, self.y, self.z])

    def _wrap(self, q, ring):
        q = np.array(q, dtype=float)
        q[ring.dim :] = 0.0
        return Scalar.from_array(q, ring)

    def _join(self, other: "Scalar") -> RingTag:
        if other.ring != self.ring:
            raise ValueError("ring mismatch")
        return self.ring

    def __mul__(self, other: "Scalar") -> "Scalar":
        return self._wrap(qmul(self.array, other.array), self._join(other))

    def __add__(self, other: "Scalar") -> "Scalar":
        return self._wrap(self.array + other.array, self._join(other))

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self._wrap(self.array - other.array, self._join(other))

    def __neg__(self) -> "Scalar":
        return self._wrap(-self.array, self.ring)

    def scale(self, t: float) -> "Scalar":
        return self._wrap(t * self.array, self.ring)

    def conj(self) -> "Scalar":
        return self._wrap(qconj(self.array), self.ring)

    def __abs__(self) -> float:
        return float(np.linalg.norm(self.array))

    @property
    def real(self) -> float:
        return self.w

    def isclose(self, other: "Scalar", tol: float = 1e-12) -> bool:
        return bool(np.linalg.norm(self.array - other.array) <= tol)


def sgn0(alpha: Scalar) -> Scalar:
    """alpha / |alpha|, with the convention sgn0(0) = 1."""
    a = abs(alpha)
    if a == 0.0:
        return Scalar(1.0, ring=alpha.ring)
    return alpha.scale(1.0 / a)


def _as_vector(v, ring: RingTag):
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[1] != 4:
        raise ValueError("ring vectors must have shape (n, 4)")
    if np.any(v[:, ring.dim :] != 0.0):
        raise ValueError(f"vector has components outside ring {ring.value}")
    return v


def inner_K(x, y, ring: RingTag) -> Scalar:
    """The ring-valued pairing y* x."""
    x = _as_vector(x, ring)
    y = _as_vector(y, ring)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    return Scalar.from_array(qmul(qconj(y), x).sum(axis=0), ring)


def inner_F(x, y, ring: RingTag, field: FieldTag):
    """Real part of y* x for F = R, the full complex value for F = C."""
    if field is FieldTag.C and ring is not RingTag.C:
        raise ValueError("complex pairing requires a complex ring")
    s = inner_K(x, y, ring)
    if field is FieldTag.R:
        return s.w
    return complex(s.w, s.x)
