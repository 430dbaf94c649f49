import numpy as np
import pytest
from hypothesis import given

from bjstar.algebra import AlgebraSignature, Element, spectral_norm
from bjstar.isometry import BJIso, random_bj_isomorphism, random_unitary, unitarity_defect
from bjstar.oracle import bj_orthogonal, is_smooth, sample_orthogonal
from bjstar.scalars import RingTag

from strategies import seeds, signatures


def test_unitary_examples(rng):
    u = random_unitary(1, RingTag.R, rng)
    assert abs(u[0, 0, 0]) == 1.0
    for ring in RingTag:
        v = random_unitary(3, ring, rng, fix_e1=True)
        e1 = np.zeros((3, 4))
        e1[0, 0] = 1.0
        assert np.array_equal(v[:, 0], e1)
    assert unitarity_defect(random_unitary(3, RingTag.H, rng)) <= 1e-10


def test_identity_and_swaps(rng):
    sig = AlgebraSignature.of("R", (2, RingTag.R), (2, RingTag.R))
    assert BJIso.identity(sig).is_identity()
    perms = {random_bj_isomorphism(sig, rng).perm for _ in range(30)}
    assert perms == {(0, 1), (1, 0)}


def test_same_seed_same_map():
    sig = AlgebraSignature.of("R", (2, RingTag.H), (1, RingTag.C))
    a = random_bj_isomorphism(sig, np.random.default_rng(9))
    b = random_bj_isomorphism(sig, np.random.default_rng(9))
    assert np.array_equal(a.matrix, b.matrix)


@given(signatures(min_dim=2), seeds)
def test_maps_are_orthogonal_isometries(sig, seed):
    rng = np.random.default_rng(seed)
    phi = random_bj_isomorphism(sig, rng)
    m = phi.matrix
    assert np.allclose(m.T @ m, np.eye(len(m)), atol=1e-10)
    a = Element.random(sig, rng)
    assert spectral_norm(phi(a)) == pytest.approx(spectral_norm(a), rel=1e-10)
    assert np.allclose(phi.pull_back_coords(phi.apply_coords(a.coords)), a.coords, atol=1e-10)


@given(signatures(min_dim=2), seeds)
def test_complex_maps_commute_or_anticommute_with_i(sig, seed):
    rng = np.random.default_rng(seed)
    phi = random_bj_isomorphism(sig, rng)
    if sig.field.value != "C":
        return
    a = Element.random(sig, rng)
    lhs = phi(a * 1j)
    sign = -1j if phi.adjoint[0] else 1j
    assert np.allclose(lhs.coords, (phi(a) * sign).coords, atol=1e-10)


@given(signatures(max_blocks=2, max_n=2, min_dim=2), seeds)
def test_orthogonality_and_smoothness_transport(sig, seed):
    rng = np.random.default_rng(seed)
    phi = random_bj_isomorphism(sig, rng)
    a = Element.random(sig, rng)
    b = sample_orthogonal(a, None, rng)
    assert bj_orthogonal(phi(a), phi(b)).orthogonal
    c = Element.random(sig, rng)
    v1, v2 = bj_orthogonal(a, c), bj_orthogonal(phi(a), phi(c))
    if min(abs(v1.margin), abs(v2.margin)) > 1e-6:
        assert v1.orthogonal == v2.orthogonal
    assert (is_smooth(a) is None) == (is_smooth(phi(a)) is None)
