import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bjstar.algebra import AlgebraSignature, Element, matrix_unit, spectral_norm
from bjstar.oracle import (
    DEFAULT,
    NotSmooth,
    bj_orthogonal,
    bj_orthogonal_direct,
    is_smooth,
    sample_orthogonal,
    sample_orthogonal_with_witness,
    smooth_hyperplane,
    zero_in_numrange_complex,
    zero_in_range_real,
)
from bjstar.scalars import RingTag
from bjstar.subspace import FSubspace

from strategies import elements, seeds, signatures

R = RingTag.R
M2R = AlgebraSignature.of("R", (2, R))


def el(*mats, sig=M2R):
    return Element.from_blocks(sig, mats)


def grid_min_norm(a, b, field, radius=2.0, count=401):
    """min over a lambda grid of ||A + lambda B||, as an independent check."""
    ts = np.linspace(-radius, radius, count)
    if field == "R":
        lams = ts
    else:
        lams = (ts[:, None] + 1j * ts[None, :]).ravel()
    return min(spectral_norm(a + b * complex(l) if field == "C" else a + b * float(l)) for l in lams)


E11 = el(np.diag([1.0, 0.0]))
E22 = el(np.diag([0.0, 1.0]))


def test_criterion_examples():
    v = bj_orthogonal(E11, E22)
    assert v.orthogonal and not v.indeterminate and v.margin > 0
    assert np.allclose(np.abs(v.witness), [1.0, 0.0])
    v = bj_orthogonal(E11, E11)
    assert not v.orthogonal and v.margin == pytest.approx(-1.0)
    v = bj_orthogonal(el(np.eye(2)), el(np.diag([1.0, -1.0])))
    assert v.orthogonal
    assert abs(abs(v.witness[0]) - abs(v.witness[1])) < 1e-9
    assert not bj_orthogonal(el(np.diag([1.0, 0.5])), E11).orthogonal


def test_direct_examples_agree_with_criterion():
    pairs = [(E11, E22, True), (E11, E11, False), (el(np.eye(2)), el(np.diag([1.0, -1.0])), True)]
    for a, b, want in pairs:
        assert bj_orthogonal_direct(a, b).orthogonal is want
        assert (grid_min_norm(a, b, "R") >= spectral_norm(a) - 1e-9) is want


def test_direct_self_pair_and_zero_entry():
    rng = np.random.default_rng(3)
    a = Element.random(M2R, rng)
    assert not bj_orthogonal_direct(a, a).orthogonal
    e12 = matrix_unit(M2R, 0, 0, 1)
    b = el(np.array([[0.7, 0.0], [-1.2, 0.4]]))
    assert bj_orthogonal_direct(e12, b).orthogonal
    assert bj_orthogonal(e12, b).orthogonal


def test_zero_arguments_are_flagged():
    z = Element.zeros(M2R)
    assert bj_orthogonal(z, E11).note == "A is zero"
    assert bj_orthogonal(E11, z).orthogonal
    assert bj_orthogonal_direct(E11, z).orthogonal


def test_range_examples():
    assert zero_in_range_real(np.eye(2)) == (False, -1.0)
    assert zero_in_range_real(np.diag([1.0, -1.0])) == (True, 1.0)
    inside, margin = zero_in_range_real(np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert inside and margin == pytest.approx(1.0)
    inside, margin = zero_in_numrange_complex(np.array([[1.0]]))
    assert not inside and margin == pytest.approx(-1.0)
    assert zero_in_numrange_complex(np.diag([1.0, -1.0]))[0]
    inside, margin = zero_in_numrange_complex(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert inside and margin == pytest.approx(0.5, abs=1e-9)


def test_numerical_range_disk_by_sampling():
    # unit-vector sampling: every sampled value of y* C y lies in the disk of radius 1/2
    rng = np.random.default_rng(5)
    c = np.array([[0.0, 1.0], [0.0, 0.0]])
    ys = rng.standard_normal((5000, 2)) + 1j * rng.standard_normal((5000, 2))
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    vals = np.einsum("ni,ij,nj->n", ys.conj(), c, ys)
    assert np.abs(vals).max() <= 0.5 + 1e-12
    assert np.abs(vals).max() > 0.49


@given(signatures(max_blocks=2, max_n=2, min_dim=2), seeds)
def test_oracles_agree_outside_band(sig, seed):
    rng = np.random.default_rng(seed)
    a = Element.random(sig, rng)
    b = sample_orthogonal(a, None, rng) + Element.random(sig, rng) * float(10 ** rng.uniform(-2, 0) * rng.choice([-1, 1]))
    v1, v2 = bj_orthogonal(a, b), bj_orthogonal_direct(a, b)
    if min(abs(v1.margin), abs(v2.margin)) >= 1e-6:
        assert v1.orthogonal == v2.orthogonal


@given(elements(), seeds)
def test_sampled_elements_are_orthogonal(a, seed):
    rng = np.random.default_rng(seed)
    b, x = sample_orthogonal_with_witness(a, None, rng)
    assert bj_orthogonal(a, b).orthogonal
    assert bj_orthogonal_direct(a, b).margin >= -1e-7


@given(elements(), seeds, st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_orthogonality_is_homogeneous(a, seed, s, t):
    rng = np.random.default_rng(seed)
    b = sample_orthogonal(a, None, rng)
    assert bj_orthogonal(a * s, b * (-t)).orthogonal


def test_sampled_orthogonal_margin_is_positive_on_average():
    rng = np.random.default_rng(11)
    ident = el(np.eye(2))
    margins = []
    for _ in range(50):
        v = bj_orthogonal(ident, sample_orthogonal(ident, None, rng))
        assert v.orthogonal
        margins.append(v.margin)
    assert np.mean(margins) > 0


def test_witness_e1_forces_zero_entry():
    rng = np.random.default_rng(1)
    for _ in range(20):
        b, x = sample_orthogonal_with_witness(E11, None, rng)
        assert abs(b.blocks[0][0, 0, 0]) < 1e-12


def test_smoothness_examples():
    cert = is_smooth(el(np.diag([1.0, 0.5])))
    assert cert is not None and cert.block == 0
    assert np.allclose(np.abs(cert.u[:, 0]), [1, 0])
    assert is_smooth(el(np.eye(2))) is None
    sig = AlgebraSignature.of("R", (2, R), (1, R))
    assert is_smooth(matrix_unit(sig, 0, 0, 1)) is not None
    assert is_smooth(Element.from_blocks(sig, [np.diag([1.0, 0.0]), [[1.0]]])) is None


def test_hyperplane_examples():
    h = smooth_hyperplane(matrix_unit(M2R, 0, 0, 1))
    assert h.equals(FSubspace.kernel(M2R, [matrix_unit(M2R, 0, 0, 1)]))
    assert h.real_dim == 3
    h = smooth_hyperplane(el(np.diag([1.0, 0.5])))
    assert h.equals(FSubspace.kernel(M2R, [E11]))
    sig = AlgebraSignature.of("R", (2, RingTag.H))
    j = np.eye(4)[2]
    h = smooth_hyperplane(matrix_unit(sig, 0, 0, 0, j))
    assert h.equals(FSubspace.kernel(sig, [matrix_unit(sig, 0, 0, 0, j)]))
    with pytest.raises(NotSmooth):
        smooth_hyperplane(el(np.eye(2)))


@given(signatures(max_blocks=2, max_n=3, min_dim=2), seeds)
def test_hyperplane_is_the_orthogonal_set(sig, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(len(sig.blocks)))
    a = Element.random(sig, rng).block_only(k)
    if is_smooth(a) is None:
        return
    h = smooth_hyperplane(a)
    for _ in range(3):
        assert h.contains(sample_orthogonal(a, None, rng), 1e-7)
        v = bj_orthogonal(a, h.random_element(rng))
        assert v.orthogonal or abs(v.margin) < 1e-8
    off = h.complement().random_element(rng)
    assert not bj_orthogonal(a, off).orthogonal


def test_vanishing_compression_is_exact():
    v = bj_orthogonal(E11, E22)
    assert v.margin == math.inf and v.note == "compression vanishes"
    assert DEFAULT.eps_ortho == 1e-9
