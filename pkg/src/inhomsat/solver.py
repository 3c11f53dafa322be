"""2-SAT through the implication digraph.

``solve_scc`` is the certified solver: it returns a satisfying assignment or a
contradictory closed walk. ``is_satisfiable`` answers only the decision
question and is what the Monte Carlo harness calls in bulk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .components import Decomposition
from .graph import bfs_path, csr, tarjan_scc
from .sampler import Digraph, Formula, TypeAssignment

SAT, UNSAT = "SAT", "UNSAT"
BRUTEFORCE_MAX_N = 25


@dataclass(frozen=True, eq=False)
class ImplicationDigraph:
    """Arcs ``not l1 -> l2`` and ``not l2 -> l1`` for every clause ``{l1, l2}``.

    ``source[k]`` is the index (in ``formula.array()`` order) of the clause
    that produced arc ``k``.
    """

    n: int
    tails: np.ndarray
    heads: np.ndarray
    source: np.ndarray

    @property
    def n_nodes(self) -> int:
        return 2 * self.n

    def arcs(self) -> frozenset:
        return frozenset(zip(self.tails.tolist(), self.heads.tolist()))

    def as_digraph(self) -> Digraph:
        return Digraph(self.n, self.arcs())

    def csr(self):
        return csr(self.n_nodes, self.tails, self.heads)

    def __len__(self) -> int:
        return len(self.tails)


def implication_digraph(f: Formula) -> ImplicationDigraph:
    cl = f.array()
    a, b = cl[:, 0], cl[:, 1]
    tails = np.concatenate([a ^ 1, b ^ 1])
    heads = np.concatenate([b, a])
    src = np.concatenate([np.arange(len(cl)), np.arange(len(cl))])
    return ImplicationDigraph(f.n, tails, heads, src)


def digraph_csr(dg):
    """CSR arrays of a Digraph or ImplicationDigraph."""
    if isinstance(dg, ImplicationDigraph):
        return dg.csr()
    arr = dg.array()
    return csr(2 * dg.n, arr[:, 0], arr[:, 1])


@dataclass
class Verdict:
    status: str
    assignment: np.ndarray | None = None
    witness: list | None = field(default=None)

    @property
    def satisfiable(self) -> bool:
        return self.status == SAT


def _witness(indptr, indices, comp, var: int) -> list[int]:
    v, nv = 2 * var, 2 * var + 1
    members = set(np.nonzero(comp == comp[v])[0].tolist())
    there = bfs_path(indptr, indices, v, nv, allowed=members)
    back = bfs_path(indptr, indices, nv, v, allowed=members)
    return there + back[1:]


def solve_scc(f: Formula) -> Verdict:
    """Linear-time 2-SAT: UNSAT iff some variable shares a strong component with its negation."""
    n = f.n
    dg = implication_digraph(f)
    indptr, indices = dg.csr()
    comp, _ = tarjan_scc(2 * n, indptr, indices)
    pos, negs = comp[0::2], comp[1::2]
    clash = np.nonzero(pos == negs)[0]
    if len(clash):
        return Verdict(UNSAT, None, _witness(indptr, indices, comp, int(clash[0])))
    # components close in reverse topological order: a literal whose component
    # closes first is downstream of its negation and is set true
    return Verdict(SAT, pos < negs, None)


def strong_labels(n_nodes: int, tails, heads) -> np.ndarray:
    g = csr_matrix((np.ones(len(tails), dtype=np.int8), (tails, heads)), shape=(n_nodes, n_nodes))
    _, labels = connected_components(g, directed=True, connection="strong")
    return labels


def is_satisfiable(f: Formula) -> bool:
    if not f.clauses:
        return True
    dg = implication_digraph(f)
    labels = strong_labels(2 * f.n, dg.tails, dg.heads)
    return not np.any(labels[0::2] == labels[1::2])


def solve_bruteforce(f: Formula) -> Verdict:
    """Exhaustive search over all ``2**n`` assignments (``n <= 25``)."""
    n = f.n
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    alive = np.arange(1 << n, dtype=np.int64)
    for a, b in f.clauses:
        va = ((alive >> (a >> 1)) & 1) ^ (a & 1)
        vb = ((alive >> (b >> 1)) & 1) ^ (b & 1)
        alive = alive[(va | vb).astype(bool)]
        if len(alive) == 0:
            return Verdict(UNSAT)
    x = int(alive[0])
    return Verdict(SAT, np.array([(x >> i) & 1 for i in range(n)], dtype=bool))


def is_closed_walk(dg, walk) -> bool:
    arcs = dg.arcs() if isinstance(dg, ImplicationDigraph) else dg.arcs
    if len(walk) < 2 or walk[0] != walk[-1]:
        return False
    return all((u, v) in arcs for u, v in zip(walk, walk[1:]))


def is_contradictory(walk) -> bool:
    lits = set(walk)
    return any(l ^ 1 in lits for l in lits)


@dataclass
class ConfinementReport:
    cyclic_sccs: int
    contradictory_sccs: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def confinement_check(dg: ImplicationDigraph, tau: TypeAssignment, d: Decomposition) -> ConfinementReport:
    """Check that every cycle's literal types lie in one strong component of the
    implication digraphon, and contradictory cycles in a contradictory one.

    Every literal in a strong component of size >= 2 lies on a cycle, and the
    cycles of a strong component connect all its literals, so it is enough to
    check whole components.
    """
    indptr, indices = dg.csr()
    comp, count = tarjan_scc(dg.n_nodes, indptr, indices)
    block_var = tau.block_of_variable()
    members: dict[int, list[int]] = {}
    for lit, c in enumerate(comp.tolist()):
        members.setdefault(c, []).append(lit)
    violations = []
    cyclic = contradictory = 0
    for c, lits in members.items():
        if len(lits) < 2:
            continue
        cyclic += 1
        blocks = {int(block_var[l >> 1]) ^ (l & 1) for l in lits}
        owners = {d.component_of(b) for b in blocks}
        contra = is_contradictory(lits)
        contradictory += contra
        if None in owners or len(owners) != 1:
            violations.append(f"cycle component {c} spans blocks {sorted(blocks)} across components {owners}")
            continue
        owner = owners.pop()
        if contra and not d.contradictory_flags[owner]:
            violations.append(f"contradictory cycle component {c} lies in non-contradictory component {owner}")
    return ConfinementReport(cyclic, contradictory, violations)
