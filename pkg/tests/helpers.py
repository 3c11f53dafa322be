"""Random instance generators and deliberately naive oracles for the tests."""

import itertools
import math

import numpy as np

from inhomsat.kernel import BlockDigraphon, BlockKernel, BlockSet, TypeSpace
from inhomsat.components import strongly_connected
from inhomsat.sampler import Formula, clause
from inhomsat.spectra import period


def random_weights(rng, t):
    w = rng.dirichlet(np.full(t, 2.0))
    w[-1] = 1.0 - w[:-1].sum()
    return w


def random_kernel(rng, t_max=5, hi=4.0, zero_p=0.5) -> BlockKernel:
    """Symmetric block kernel, entries uniform in [0, hi], each zeroed with probability zero_p."""
    t = int(rng.integers(1, t_max + 1))
    nb = 2 * t
    vals = rng.uniform(0, hi, (nb, nb)) * (rng.random((nb, nb)) >= zero_p)
    vals = np.triu(vals) + np.triu(vals, 1).T
    return BlockKernel(TypeSpace(range(t), random_weights(rng, t)), vals)


def random_aperiodic_digraphon(rng, t_max=4, hi=4.0, zero_p=0.3) -> BlockDigraphon:
    """Strongly connected, aperiodic block digraphon on the full space (rejection sampling)."""
    while True:
        t = int(rng.integers(1, t_max + 1))
        nb = 2 * t
        vals = rng.uniform(0, hi, (nb, nb)) * (rng.random((nb, nb)) >= zero_p)
        G = BlockDigraphon(TypeSpace(range(t), random_weights(rng, t)), vals)
        X = BlockSet.full(G.space)
        if strongly_connected(G, X) and period(G, X)[0] == 1:
            return G


def random_formula(rng, n, m) -> Formula:
    cl = set()
    for _ in range(m):
        i, j = rng.choice(n, 2, replace=False)
        cl.add(clause(2 * int(i) + int(rng.integers(2)), 2 * int(j) + int(rng.integers(2))))
    return Formula(n, frozenset(cl))


def all_clauses(n):
    lits = range(2 * n)
    return [(a, b) for a, b in itertools.combinations(lits, 2) if a >> 1 != b >> 1]


# ---------------------------------------------------------------------------
# naive oracles


def truth_table_sat(f: Formula) -> bool:
    for bits in itertools.product((False, True), repeat=f.n):
        if f.satisfied_by(bits):
            return True
    return False


def naive_snake_clauses(f, ls, a, b):
    def c(x, y):
        return (min(x, y), max(x, y))
    out = {c(f ^ 1, ls[0])}
    for i in range(a - 2):
        out.add(c(ls[i] ^ 1, ls[i + 1]))
    out.add(c(ls[a - 2] ^ 1, f ^ 1))
    out.add(c(f, ls[a - 1]))
    for i in range(a - 1, a + b - 3):
        out.add(c(ls[i] ^ 1, ls[i + 1]))
    out.add(c(ls[a + b - 3] ^ 1, f))
    return frozenset(out)


def enumerate_snakes(N, a, b):
    """Every distinct (a, b)-snake on N variables, by brute force over literal tuples."""
    seen = set()
    for vs in itertools.permutations(range(N), a + b - 1):
        for signs in itertools.product((0, 1), repeat=a + b - 1):
            lits = [2 * v + s for v, s in zip(vs, signs)]
            seen.add(naive_snake_clauses(lits[0], lits[1:], a, b))
    return seen


def naive_count_bicycles(arcs, n, k, a, b):
    """Nested loops over all literal k-tuples."""
    total = 0
    for u in itertools.product(range(2 * n), repeat=k):
        if len({x >> 1 for x in u}) != k:
            continue
        if not all((u[i], u[i + 1]) in arcs for i in range(k - 1)):
            continue
        if (u[a - 1] ^ 1, u[0]) in arcs and (u[k - 1], u[b - 1] ^ 1) in arcs:
            total += 1
    return total


def falling(N, r):
    return math.perm(N, r)
