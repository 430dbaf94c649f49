import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bjstar.algebra import AlgebraSignature, Element, quat_complex_adjoint, spectral_norm
from bjstar.families import (
    ExcludedCase,
    check_pair,
    corner_family_attaining_vector,
    corner_family_matrix,
    corner_family_norm,
    corner_free,
    corner_restricted,
    random_family_triple,
    technical1_counterexample,
    unimodular_family_check,
    unimodular_grid,
)
from bjstar.oracle import DEFAULT
from bjstar.scalars import UNITS, FieldTag, RingTag, qabs, qmatvec, random_imaginary_unit

from strategies import seeds

R, C, H = RingTag.R, RingTag.C, RingTag.H


def chi_norm(m):
    """Spectral norm through the complex adjoint, independent of the realified route."""
    return float(np.sqrt(np.linalg.eigvalsh(quat_complex_adjoint(m).conj().T @ quat_complex_adjoint(m))[-1]))


def test_corner_norm_unit_entries():
    # a = b = 1 gives the golden ratio
    one = UNITS[0]
    for second in (False, True):
        want = np.sqrt((3 + np.sqrt(5)) / 2) if not second else np.sqrt((np.sqrt(5) + 3) / 2)
        assert corner_family_norm(one, one, second) == pytest.approx(want, abs=1e-12)


@given(st.sampled_from([C, H]), seeds, st.booleans())
def test_corner_norms_match_eigenvalues(ring, seed, second):
    rng = np.random.default_rng(seed)
    a, b = np.zeros(4), np.zeros(4)
    a[: ring.dim] = rng.standard_normal(ring.dim)
    b[: ring.dim] = rng.standard_normal(ring.dim)
    q = random_imaginary_unit(ring, rng)
    m = corner_family_matrix(a, b, q, second)
    norm = chi_norm(m)
    assert abs(norm**2 - corner_family_norm(a, b, second) ** 2) <= 1e-9
    x = corner_family_attaining_vector(a, b, q, second)
    assert abs(np.linalg.norm(qmatvec(m, x)) - norm * np.linalg.norm(x)) <= 1e-8 * np.linalg.norm(x)


def test_corner_subspaces():
    assert corner_free(R).real_dim == 3
    assert corner_free(H).real_dim == 12
    assert corner_free(C, FieldTag.C).dim == 3
    v = corner_restricted(2, C, FieldTag.R, (UNITS[0],))
    assert v.real_dim == 7


def single(n, diag):
    sig = AlgebraSignature.of("R", (n, R))
    return Element.from_blocks(sig, [np.diag(diag)])


def test_counterexample_examples():
    a = single(3, [0.0, 1.0, 1.0])
    b = technical1_counterexample(a)
    assert np.allclose(b.blocks[0][..., 0], np.diag([0.0, 1.0, 0.0]))
    pc = check_pair(a, b)
    assert pc.confirms(DEFAULT)
    a = single(3, [0.0, 1.0, 0.5])
    b = technical1_counterexample(a)
    assert np.allclose(b.blocks[0][..., 0], np.diag([0.0, 0.0, 0.5]))
    assert check_pair(a, b).confirms(DEFAULT)
    with pytest.raises(ExcludedCase):
        technical1_counterexample(single(2, [0.0, 1.0]))


def test_counterexample_rejects_members_outside_subspace():
    with pytest.raises(ValueError):
        technical1_counterexample(single(3, [1.0, 1.0, 0.0]))


@pytest.mark.parametrize(
    "n,ring,corner",
    [(3, R, ()), (3, C, ()), (2, C, (UNITS[0],)), (2, H, ())],
)
def test_counterexamples_are_confirmed(n, ring, corner, rng):
    space = corner_restricted(n, ring, FieldTag.R, corner)
    for _ in range(10):
        a = space.random_element(rng)
        b = technical1_counterexample(a, corner, DEFAULT, rng)
        assert space.contains(b)
        pc = check_pair(a * (1.0 / spectral_norm(a)), b)
        assert min(pc.forward) >= -1e-8 and max(pc.backward) <= -1e-8


def test_unimodular_examples():
    e = np.eye(3)
    for ring in (R, C, H):
        x, y, z = (np.pad(e[i][:, None], ((0, 0), (0, 3))) for i in range(3))
        assert unimodular_family_check(x, y, z, ring) == (True, True)
        assert unimodular_family_check(x, x, x, ring) == (False, False)


def test_unimodular_grid_is_unimodular():
    for ring in (R, C, H):
        g = unimodular_grid(ring)
        assert np.allclose([qabs(m) for m in g], 1.0)
        assert np.all(g[:, ring.dim :] == 0.0)


@given(st.sampled_from([(R, FieldTag.R), (C, FieldTag.R), (H, FieldTag.R), (C, FieldTag.C)]), seeds, st.integers(0, 4))
def test_unimodular_family_sides_agree(case, seed, kind):
    ring, field = case
    x, y, z = random_family_triple(3, ring, field, np.random.default_rng(seed), kind)
    left, right = unimodular_family_check(x, y, z, ring, field)
    assert left == right
