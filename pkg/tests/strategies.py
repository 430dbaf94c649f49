"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import assume
from hypothesis import strategies as st

from bjstar.algebra import AlgebraSignature, Element
from bjstar.scalars import FieldTag, RingTag

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
rings = st.sampled_from([RingTag.R, RingTag.C, RingTag.H])


@st.composite
def quaternions(draw, ring=RingTag.H):
    q = np.zeros(4)
    q[: ring.dim] = draw(st.lists(finite, min_size=ring.dim, max_size=ring.dim))
    return q


@st.composite
def signatures(draw, max_blocks=3, max_n=3, min_dim=1):
    field = draw(st.sampled_from([FieldTag.R, FieldTag.C]))
    k = draw(st.integers(1, max_blocks))
    blocks = []
    for _ in range(k):
        n = draw(st.integers(1, max_n))
        ring = RingTag.C if field is FieldTag.C else draw(rings)
        blocks.append((n, ring))
    sig = AlgebraSignature.of(field, *blocks)
    assume(sig.dimension >= min_dim)
    return sig


@st.composite
def elements(draw, sig=None, min_dim=2):
    sig = draw(signatures(min_dim=min_dim)) if sig is None else sig
    seed = draw(st.integers(0, 2**32 - 1))
    return Element.random(sig, np.random.default_rng(seed))


seeds = st.integers(0, 2**32 - 1)
