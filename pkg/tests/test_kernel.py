import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomsat.kernel import (BlockDigraphon, BlockKernel, BlockSet, InvalidKernelError, TypeSpace,
                             block_index, implication_digraphon, indicator_digraphon, l1_norm,
                             negate_block, power_law_kernel, restrict, scale, validate_kernel)

from helpers import random_kernel


def one_type(m):
    return BlockKernel(TypeSpace.uniform(1), m)


def test_block_indexing():
    assert block_index(0, "+") == 0
    assert block_index(0, "-") == 1
    assert block_index(2, "-") == 5
    assert negate_block(4) == 5 and negate_block(5) == 4


def test_validate_symmetric_ok():
    assert validate_kernel(one_type([[1, 2], [2, 3]])) == []


def test_validate_reports_asymmetry():
    problems = validate_kernel(one_type([[1, 2], [5, 3]]))
    assert len(problems) == 1
    assert "asymmetry at (0,+),(0,-)" in problems[0]


def test_validate_reports_weight_sum():
    W = BlockKernel(TypeSpace(["a", "b"], [0.6, 0.5]), np.ones((4, 4)))
    assert any("weights sum 1.1" in p for p in validate_kernel(W))


def test_validate_rejects_zero_weight_and_negative_entries():
    W = BlockKernel(TypeSpace(["a", "b"], [1.0, 0.0]), np.ones((4, 4)))
    assert any("must be > 0" in p for p in validate_kernel(W))
    assert any("negative entry" in p for p in validate_kernel(one_type([[1, -1], [-1, 0]])))


def test_digraphon_skips_symmetry():
    G = BlockDigraphon(TypeSpace.uniform(1), [[0, 1], [4, 0]])
    assert validate_kernel(G) == []


@pytest.mark.parametrize("abc, expected", [
    ((4, 0, 1), [[0, 1], [4, 0]]),
    ((2.5, 2.5, 2.5), [[2.5, 2.5], [2.5, 2.5]]),
    ((0, 3, 0), [[3, 0], [0, 3]]),
])
def test_implication_digraphon_examples(abc, expected):
    G = implication_digraphon(BlockKernel.from_abc(*abc))
    assert np.array_equal(G.values, expected)


def test_implication_digraphon_rejects_invalid():
    with pytest.raises(InvalidKernelError):
        implication_digraphon(one_type([[1, 2], [5, 3]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_skew_symmetry_and_negation_inverse(seed):
    W = random_kernel(np.random.default_rng(seed))
    G = implication_digraphon(W).values
    nb = W.space.n_blocks
    for x in range(nb):
        for y in range(nb):
            assert G[x, y] == G[y ^ 1, x ^ 1]
            assert G[x ^ 1, y] == W.values[x, y]


def test_restrict_examples():
    G = BlockDigraphon(TypeSpace.uniform(1), [[0, 1], [4, 0]])
    assert np.array_equal(restrict(G, BlockSet.full(G.space)).values, G.values)
    assert not restrict(G, BlockSet()).values.any()
    assert not restrict(G, BlockSet([0])).values.any()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.data())
def test_restrict_idempotent(seed, data):
    G = implication_digraphon(random_kernel(np.random.default_rng(seed)))
    A = BlockSet(data.draw(st.sets(st.integers(0, G.space.n_blocks - 1))))
    once = restrict(G, A)
    assert np.array_equal(restrict(once, A).values, once.values)


def test_l1_norm_examples():
    assert l1_norm(BlockKernel.constant(2.5)) == pytest.approx(2.5, rel=1e-15)
    assert l1_norm(BlockKernel.from_abc(4, 0, 0)) == 1.0
    assert l1_norm(BlockKernel.constant(0.0)) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 100))
def test_l1_norm_scales_linearly(seed, c):
    W = random_kernel(np.random.default_rng(seed))
    assert l1_norm(scale(W, c)) == pytest.approx(c * l1_norm(W), rel=1e-12, abs=1e-300)


def test_scale_examples():
    W = BlockKernel.from_abc(1, 2, 3)
    assert scale(W, 1).equals(W)
    assert not scale(W, 0).values.any()
    assert np.all(scale(BlockKernel.constant(1.0), 2.5).values == 2.5)
    with pytest.raises(ValueError):
        scale(W, -1)


def test_power_law_examples():
    assert np.allclose(power_law_kernel(0, 0, 0, 0, 7).values, 1.0, rtol=0, atol=1e-15)
    assert power_law_kernel(0.5, 0, 0, 0, 1)[0, 0] == pytest.approx(4.0, rel=1e-14)
    W = power_law_kernel(0, 0.3, 0.2, 0.1, 2)
    assert np.all(W.values[0::2, 0::2] == 1.0)
    with pytest.raises(ValueError):
        power_law_kernel(1.0, 0, 0, 0, 3)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 0.99), st.floats(0, 0.99), st.floats(0, 0.99), st.integers(1, 6))
def test_power_law_valid_and_norm_exact(a, b, g, d, m):
    W = power_law_kernel(a, b, g, d, m)
    assert validate_kernel(W) == []
    # cell averages preserve the integral of every slice: sum of all cell means / m^2
    pp = W.values[0::2, 0::2].sum() / m**2
    assert pp == pytest.approx(1 / (1 - a) ** 2, rel=1e-9)


def test_indicator_examples():
    sp = TypeSpace.uniform(1)
    assert not indicator_digraphon(BlockDigraphon.zeros(sp)).values.any()
    assert np.array_equal(indicator_digraphon(BlockDigraphon(sp, [[0, 1], [4, 0]])).values, [[0, 1], [1, 0]])
    assert np.all(indicator_digraphon(BlockDigraphon(sp, np.full((2, 2), 3.0))).values == 1)


def test_values_are_read_only():
    W = BlockKernel.constant(1.0)
    with pytest.raises(ValueError):
        W.values[0, 0] = 5
