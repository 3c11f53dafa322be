"""Witness substructures in implication digraphs and formulas.

* A basis of a ``(k, a, b)``-bicycle is a path ``u_1 -> ... -> u_k`` on pairwise
  distinct variables together with arcs ``not u_a -> u_1`` and
  ``u_k -> not u_b`` (``2 <= a <= k``, ``1 <= b <= k - 1``).
* An ``(a, b)``-snake with center ``f`` and chain ``l_1 ... l_{a+b-2}`` (all on
  distinct variables) is the clause set of the implication cycle
  ``f -> l_1 -> ... -> l_{a-1} -> not f -> l_a -> ... -> l_{a+b-2} -> f``.
* A serpent is such a cycle, rooted at its center.

Indices ``a`` and ``b`` are 1-based as in the definitions; literals are the
integer encoding of :mod:`inhomsat.sampler`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import bfs_path, csr, tarjan_scc
from .sampler import Formula, clause

DEFAULT_BUDGET = 10**6


class SearchBudgetExceeded(RuntimeError):
    pass


def _arc_set(dg) -> frozenset:
    arcs = dg.arcs
    return arcs() if callable(arcs) else arcs


def _successors(n_nodes: int, arcs) -> list[list[int]]:
    succ: list[list[int]] = [[] for _ in range(n_nodes)]
    for u, v in arcs:
        succ[u].append(v)
    for s in succ:
        s.sort()
    return succ


def _distinct_vars(lits) -> bool:
    vs = [l >> 1 for l in lits]
    return len(set(vs)) == len(vs)


# ---------------------------------------------------------------------------
# bicycles


@dataclass(frozen=True)
class Bicycle:
    basis: tuple
    a: int
    b: int

    @property
    def k(self) -> int:
        return len(self.basis)

    def arcs(self) -> list[tuple[int, int]]:
        u = self.basis
        path = list(zip(u, u[1:]))
        return path + [(u[self.a - 1] ^ 1, u[0]), (u[-1], u[self.b - 1] ^ 1)]

    def problems(self, arcs=None) -> list[str]:
        out = []
        k, a, b = self.k, self.a, self.b
        if k < 2 or not (2 <= a <= k) or not (1 <= b <= k - 1):
            out.append(f"index bounds violated: k={k}, a={a}, b={b}")
            return out
        if not _distinct_vars(self.basis):
            out.append("basis literals repeat a variable")
        if arcs is not None:
            out += [f"missing arc {e}" for e in self.arcs() if e not in arcs]
        return out


def _check_params(k: int, a: int, b: int) -> None:
    if k < 2 or not (2 <= a <= k) or not (1 <= b <= k - 1):
        raise ValueError(f"need k >= 2, 2 <= a <= k, 1 <= b <= k-1; got k={k}, a={a}, b={b}")


def contradictory_sccs(dg) -> list[list[int]]:
    """Strong components holding a literal and its negation, ordered by least literal."""
    n_nodes = 2 * dg.n
    arr = np.array(sorted(_arc_set(dg)), dtype=np.int64).reshape(-1, 2)
    indptr, indices = csr(n_nodes, arr[:, 0], arr[:, 1])
    comp, count = tarjan_scc(n_nodes, indptr, indices)
    groups: list[list[int]] = [[] for _ in range(count)]
    for lit, c in enumerate(comp.tolist()):
        groups[c].append(lit)
    out = [g for g in groups if len(g) > 1 and any(comp[l] == comp[l ^ 1] for l in g)]
    return sorted(out, key=min)


def simple_contradictory_cycle(dg, budget: int = DEFAULT_BUDGET) -> list[int] | None:
    """A simple cycle through some literal and its negation, or None.

    Complementary pairs ``(v, not v)`` of contradictory strong components are
    tried in literal order. A quick pass joins a shortest path one way with a
    shortest return path avoiding its interior. If that fails everywhere,
    simple paths ``v ~> not v`` are enumerated depth-first (pruning branches
    that can no longer reach ``not v``), each closed by a shortest return
    path. Returns the cycle as a literal list without repeating the first
    literal; None if there is none or the budget of search steps runs out.
    """
    arcs = _arc_set(dg)
    arr = np.array(sorted(arcs), dtype=np.int64).reshape(-1, 2)
    indptr, indices = csr(2 * dg.n, arr[:, 0], arr[:, 1])
    succ = _successors(2 * dg.n, arcs)
    sccs = contradictory_sccs(dg)
    pairs = [(v, set(scc)) for scc in sccs for v in sorted(scc) if v & 1 == 0 and v ^ 1 in scc]

    for v, members in pairs:
        for s, t in ((v, v ^ 1), (v ^ 1, v)):
            there = bfs_path(indptr, indices, s, t, allowed=members)
            back = bfs_path(indptr, indices, t, s, allowed=members, banned=set(there[1:-1]))
            if back is not None:
                return there + back[1:-1]

    spent = 0
    for v, members in pairs:
        target = v ^ 1
        path = [v]
        on_path = {v}
        stack = [iter(w for w in succ[v] if w in members)]
        while stack:
            spent += 1
            if spent > budget:
                return None
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if w in on_path:
                continue
            if w == target:
                back = bfs_path(indptr, indices, target, v, allowed=members, banned=on_path - {v})
                if back is not None:
                    return path + back[:-1]
                continue
            if bfs_path(indptr, indices, w, target, allowed=members, banned=on_path) is None:
                continue
            path.append(w)
            on_path.add(w)
            stack.append(iter(x for x in succ[w] if x in members))
    return None


def _bicycle_from_cycle(cycle: list[int]) -> Bicycle:
    m = len(cycle)
    best = None
    for i in range(m):
        seen = set()
        k = 0
        while k < m and (cycle[(i + k) % m] >> 1) not in seen:
            seen.add(cycle[(i + k) % m] >> 1)
            k += 1
        if best is None or k > best[1]:
            best = (i, k)
    i, k = best
    basis = tuple(cycle[(i + j) % m] for j in range(k))
    before, after = cycle[(i - 1) % m], cycle[(i + k) % m]
    a = basis.index(before ^ 1) + 1
    b = basis.index(after ^ 1) + 1
    return Bicycle(basis, a, b)


def _bicycle_dfs(dg, budget: int) -> Bicycle | None:
    """Direct search: grow distinct-variable paths and test the closing arcs."""
    arcs = _arc_set(dg)
    succ = _successors(2 * dg.n, arcs)
    pred: dict[int, set] = {}
    for u, v in arcs:
        pred.setdefault(v, set()).add(u)
    spent = 0
    for scc in contradictory_sccs(dg):
        members = set(scc)
        for start in sorted(scc):
            into = pred.get(start, set())
            path = [start]
            used = {start >> 1}
            stack = [iter(succ[start])]
            while stack:
                spent += 1
                if spent > budget:
                    return None
                k = len(path)
                tail = path[-1]
                if k >= 2:
                    a = next((j + 1 for j in range(1, k) if path[j] ^ 1 in into), None)
                    b = next((j + 1 for j in range(k - 1) if (tail, path[j] ^ 1) in arcs), None)
                    if a is not None and b is not None:
                        return Bicycle(tuple(path), a, b)
                w = next(stack[-1], None)
                if w is None:
                    stack.pop()
                    used.discard(path.pop() >> 1)
                    continue
                if w >> 1 in used or w not in members:
                    continue
                path.append(w)
                used.add(w >> 1)
                stack.append(iter(succ[w]))
    return None


def find_bicycle(dg, budget: int = DEFAULT_BUDGET) -> Bicycle | None:
    """A bicycle inside a contradictory cycle of ``dg``, or None.

    Takes a simple contradictory cycle, its first longest run of literals on
    distinct variables (by rotation), and extends the run by one arc at each
    end. Falls back to a direct depth-first search when no simple
    contradictory cycle is found within ``budget`` steps.
    """
    arcs = _arc_set(dg)
    if not arcs:
        return None
    cycle = simple_contradictory_cycle(dg, budget)
    bike = _bicycle_from_cycle(cycle) if cycle is not None else _bicycle_dfs(dg, budget)
    if bike is None:
        return None
    problems = bike.problems(arcs)
    if problems:
        raise AssertionError(f"constructed bicycle failed validation: {problems}")
    return bike


def count_bicycles(dg, k: int, a: int, b: int) -> int:
    """Number of ``(k, a, b)``-bicycle bases in ``dg``, by exhaustive search.

    Cost grows like ``(2n)^k``; intended for small digraphs.
    """
    _check_params(k, a, b)
    arcs = _arc_set(dg)
    succ = _successors(2 * dg.n, arcs)
    count = 0

    def extend(path, used):
        nonlocal count
        if len(path) == k:
            if (path[a - 1] ^ 1, path[0]) in arcs and (path[-1], path[b - 1] ^ 1) in arcs:
                count += 1
            return
        for w in succ[path[-1]]:
            if w >> 1 not in used:
                path.append(w)
                used.add(w >> 1)
                extend(path, used)
                used.discard(w >> 1)
                path.pop()

    for u in range(2 * dg.n):
        extend([u], {u >> 1})
    return count


# ---------------------------------------------------------------------------
# snakes and serpents


@dataclass(frozen=True)
class Snake:
    f: int
    ls: tuple
    a: int
    b: int

    def __post_init__(self):
        if self.a < 2 or self.b < 2:
            raise ValueError(f"snake needs a, b >= 2, got a={self.a}, b={self.b}")
        if len(self.ls) != self.a + self.b - 2:
            raise ValueError(f"an ({self.a},{self.b})-snake has {self.a + self.b - 2} chain literals, got {len(self.ls)}")
        if not _distinct_vars((self.f,) + tuple(self.ls)):
            raise ValueError("snake literals must be on distinct variables")

    def cycle(self) -> list[int]:
        """``f, l_1, ..., l_{a-1}, not f, l_a, ..., l_{a+b-2}`` (closing back to f)."""
        a = self.a
        return [self.f, *self.ls[:a - 1], self.f ^ 1, *self.ls[a - 1:]]

    def clauses(self) -> frozenset:
        c = self.cycle()
        return frozenset(clause(u ^ 1, v) for u, v in zip(c, c[1:] + c[:1]))

    def lits(self) -> frozenset:
        return frozenset(l for cl in self.clauses() for l in cl)

    def variables(self) -> frozenset:
        return frozenset(l >> 1 for l in self.lits())

    def as_formula(self, n: int | None = None) -> Formula:
        n = n if n is not None else max(self.variables()) + 1
        return Formula(n, self.clauses())


@dataclass(frozen=True)
class Serpent:
    cycle: tuple  # rooted at cycle[0]; cycle[a] is its negation
    a: int
    b: int

    @property
    def root(self) -> int:
        return self.cycle[0]

    def arcs(self) -> list[tuple[int, int]]:
        c = self.cycle
        return list(zip(c, c[1:] + c[:1]))

    def snake(self) -> Snake:
        c, a = self.cycle, self.a
        if c[a] != c[0] ^ 1:
            raise ValueError("serpent does not pass through the negated root at position a")
        return Snake(c[0], tuple(c[1:a]) + tuple(c[a + 1:]), self.a, self.b)

    def clauses(self) -> frozenset:
        return self.snake().clauses()


@dataclass(frozen=True)
class SerpentFamily:
    """Distinct serpents of one snake. ``symmetric`` marks ``a == b`` snakes,
    which also read as snakes centred at ``not f`` and so have 8 serpents."""

    serpents: tuple
    symmetric: bool

    def __len__(self) -> int:
        return len(self.serpents)

    def __iter__(self):
        return iter(self.serpents)

    def __getitem__(self, i):
        return self.serpents[i]


def _four(f: int, first: list[int], second: list[int], a: int, b: int) -> list[Serpent]:
    out = []
    for x in (first, [l ^ 1 for l in reversed(first)]):
        for y in (second, [l ^ 1 for l in reversed(second)]):
            out.append(Serpent((f, *x, f ^ 1, *y), a, b))
    return out


def serpents_of(s: Snake) -> SerpentFamily:
    a = s.a
    first, second = list(s.ls[:a - 1]), list(s.ls[a - 1:])
    found = _four(s.f, first, second, s.a, s.b)
    if s.a == s.b:
        found += _four(s.f ^ 1, second, first, s.b, s.a)
    unique = tuple(dict.fromkeys(found))
    return SerpentFamily(unique, s.a == s.b)


def count_snake_universe(N: int, a: int, b: int) -> int:
    """Number of distinct ``(a, b)``-snakes on ``N`` variables.

    Each choice of center and chain gives a snake and each snake arises from
    exactly 4 choices, or 8 when ``a == b`` (the roles of ``f`` and
    ``not f`` can then be swapped). So the count is ``2^(a+b-3) (N)_(a+b-1)``
    for ``a != b`` and half of that for ``a == b``.
    """
    if a < 2 or b < 2:
        raise ValueError(f"need a, b >= 2, got a={a}, b={b}")
    if a + b - 1 > N:
        raise ValueError(f"an ({a},{b})-snake needs {a + b - 1} variables, N={N}")
    r = a + b - 1
    total = 2 ** r * math.perm(N, r)  # ordered choices of (f, l_1, ...) with signs
    return total // (8 if a == b else 4)


def detect_snake(f: Formula, budget: int = DEFAULT_BUDGET, max_len: int | None = None) -> Snake | None:
    """Find a snake contained in ``f``, trying centers in variable order.

    A snake is a pair of distinct-variable implication paths ``g ~> not g`` and
    ``not g ~> g`` with at least one intermediate literal each and no variable
    shared between them. The search is depth-first and gives up after
    ``budget`` node expansions, returning None; None therefore means "not
    found", never "absent". ``max_len`` caps the intermediate literals per leg.
    """
    if not f.clauses:
        return None
    arcs = set()
    for x, y in f.clauses:
        arcs.add((x ^ 1, y))
        arcs.add((y ^ 1, x))
    succ = _successors(2 * f.n, arcs)
    cap = max_len if max_len is not None else f.n
    spent = 0

    def legs(src, dst, used):
        """Yield intermediate literal lists of distinct-variable paths src ~> dst."""
        nonlocal spent
        path: list[int] = []
        stack = [iter(succ[src])]
        while stack:
            spent += 1
            if spent > budget:
                raise SearchBudgetExceeded
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                if path:
                    used.discard(path.pop() >> 1)
                continue
            if w == dst:
                if path:
                    yield list(path)
                continue
            if w >> 1 in used or len(path) >= cap:
                continue
            path.append(w)
            used.add(w >> 1)
            stack.append(iter(succ[w]))

    try:
        for g in range(2 * f.n):
            used = {g >> 1}
            for first in legs(g, g ^ 1, used):
                inner = used | {l >> 1 for l in first}
                for second in legs(g ^ 1, g, inner):
                    s = Snake(g, tuple(first + second), len(first) + 1, len(second) + 1)
                    if not s.clauses() <= f.clauses:
                        raise AssertionError("detected snake is not a subformula")
                    return s
    except SearchBudgetExceeded:
        return None
    return None
