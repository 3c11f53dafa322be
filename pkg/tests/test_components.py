import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomsat.components import (SupportDigraph, check_product_form, contradictory_components, decompose,
                                 strongly_connected)
from inhomsat.kernel import BlockDigraphon, BlockSet, TypeSpace, implication_digraphon, indicator_digraphon

from helpers import random_kernel

ONE = TypeSpace.uniform(1)
TWO = TypeSpace.uniform(2)


def dg(space, m):
    return BlockDigraphon(space, m)


def test_strongly_connected_examples():
    G = dg(ONE, [[0, 2], [2, 0]])
    assert strongly_connected(G, BlockSet([0, 1]))
    assert not strongly_connected(G, BlockSet([0]))
    assert strongly_connected(dg(ONE, np.full((2, 2), 0.3)), BlockSet.full(ONE))
    with pytest.raises(ValueError):
        strongly_connected(G, BlockSet())


def test_single_block_needs_self_loop():
    G = dg(ONE, [[1, 0], [0, 0]])
    assert strongly_connected(G, BlockSet([0]))
    assert not strongly_connected(G, BlockSet([1]))


def test_decompose_examples():
    d = decompose(dg(ONE, [[3, 0], [0, 3]]))
    assert d.components == (BlockSet([0]), BlockSet([1]))
    assert d.fragmented == BlockSet()
    d = decompose(BlockDigraphon.zeros(ONE))
    assert d.components == () and d.fragmented == BlockSet([0, 1])
    d = decompose(dg(ONE, [[0, 2], [2, 0]]))
    assert d.components == (BlockSet([0, 1]),)


def test_contradictory_examples():
    d = decompose(dg(ONE, [[0, 2], [2, 0]]))
    assert contradictory_components(dg(ONE, [[0, 2], [2, 0]]), d) == [0]
    G = dg(ONE, [[3, 0], [0, 3]])
    assert contradictory_components(G) == []
    # t = 2: component {(t0,+), (t1,-)} only
    m = np.zeros((4, 4))
    m[0, 3] = m[3, 0] = 1
    assert decompose(dg(TWO, m)).contradictory == []


def test_product_form_examples():
    m = np.zeros((4, 4))
    m[0, 1] = m[1, 0] = 1
    assert check_product_form(decompose(dg(TWO, m))) == {0: True}
    m[1, 2] = m[2, 0] = 1  # (t1,+) joins the component with one sign only
    d = decompose(dg(TWO, m))
    assert d.components == (BlockSet([0, 1, 2]),)
    assert check_product_form(d) == {0: False}


def _random_digraphon(seed):
    rng = np.random.default_rng(seed)
    t = int(rng.integers(1, 4))
    nb = 2 * t
    vals = rng.uniform(0, 1, (nb, nb)) * (rng.random((nb, nb)) < 0.3)
    return BlockDigraphon(TypeSpace.uniform(t), vals)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decomposition_invariants(seed):
    G = _random_digraphon(seed)
    d = decompose(G)
    nb = G.space.n_blocks
    parts = [d.fragmented.members] + [c.members for c in d.components]
    assert sum(len(p) for p in parts) == nb
    assert set().union(*parts) == set(range(nb))
    sup = SupportDigraph.of(G).arcs
    for comp in d.components:
        assert strongly_connected(G, comp)
        for extra in set(range(nb)) - comp.members:
            assert not strongly_connected(G, BlockSet(comp.members | {extra}))
    frag = d.fragmented.sorted()
    assert not any((b, b) in sup for b in frag)
    # no cycle inside the fragmented part: every nonempty subset has a block with no successor in it
    for r in range(1, len(frag) + 1):
        for sub in itertools.combinations(frag, r):
            assert any(all((u, v) not in sup for v in sub) for u in sub)
    assert decompose(indicator_digraphon(G)) == d


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negation_permutes_components(seed):
    G = implication_digraphon(random_kernel(np.random.default_rng(seed)))
    d = decompose(G)
    comps = set(d.components)
    for i, comp in enumerate(d.components):
        assert comp.negated() in comps
        if d.contradictory_flags[i]:
            assert comp.negated() == comp
    assert all(check_product_form(d).values())
