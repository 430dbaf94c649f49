import numpy as np
import pytest

from bjstar.algebra import AlgebraSignature, Element, matrix_unit
from bjstar.leftsym import LeftSymStatus, certified_case, left_symmetric_test
from bjstar.families import corner_free
from bjstar.oracle import bj_orthogonal, bj_orthogonal_direct
from bjstar.scalars import UNITS, FieldTag, RingTag

R, C, H = RingTag.R, RingTag.C, RingTag.H
M2R = AlgebraSignature.of("R", (2, R))


@pytest.mark.parametrize("ring,field", [(R, FieldTag.R), (C, FieldTag.R), (H, FieldTag.R), (C, FieldTag.C)])
def test_bottom_right_unit_survives_corner_free(ring, field, rng):
    sig = AlgebraSignature.of(field, (2, ring))
    v = left_symmetric_test(matrix_unit(sig, 0, 1, 1), corner_free(ring, field), rng=rng, samples=1000)
    assert v.status is LeftSymStatus.CERTIFIED
    assert v.samples == 1000 and v.counterexample is None


def test_off_diagonal_unit_falsified_in_full_algebra(rng):
    a = matrix_unit(M2R, 0, 0, 1)
    v = left_symmetric_test(a, None, rng=rng, samples=500)
    assert v.falsified
    b = v.counterexample
    assert bj_orthogonal(a, b).orthogonal and bj_orthogonal_direct(a, b).orthogonal
    assert not bj_orthogonal(b, a).orthogonal and not bj_orthogonal_direct(b, a).orthogonal
    assert max(v.check.backward) <= -1e-8


def test_diagonal_falsified_by_unit(rng):
    a = Element.from_blocks(M2R, [np.diag([1.0, 0.5])])
    v = left_symmetric_test(a, None, rng=rng, samples=200)
    assert v.falsified
    b = v.counterexample
    assert np.allclose(b.blocks[0][..., 0] / b.blocks[0][1, 1, 0], np.diag([0.0, 1.0]))
    assert v.to_dict()["status"] == "falsified"


def test_certified_labels():
    sig = AlgebraSignature.of("R", (2, H))
    space = corner_free(H)
    assert certified_case(matrix_unit(sig, 0, 0, 1, UNITS[3]), space)
    assert certified_case(matrix_unit(sig, 0, 0, 0), space) is None
    mixed = np.array([0.6, 0.8, 0.0, 0.0])
    assert certified_case(matrix_unit(sig, 0, 1, 0, mixed), space) is None
    assert certified_case(matrix_unit(sig, 0, 1, 1), None) is None


def test_rejects_elements_outside_subspace():
    with pytest.raises(ValueError):
        left_symmetric_test(matrix_unit(M2R, 0, 0, 0), corner_free(R))
    with pytest.raises(ValueError):
        left_symmetric_test(Element.zeros(M2R))
