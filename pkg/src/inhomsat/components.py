"""Strong components, fragmented part and contradictory components of block digraphons.

For a step kernel the measure-theoretic notions reduce to the support
digraph on blocks (arc ``a -> b`` iff ``Gamma[a][b] > 0``):

* A union ``X`` of blocks lying in one support SCC is strongly connected.
  Take any split ``A, B`` of ``X`` with positive measures and suppose the
  cross integral vanishes. Start from a block meeting ``A``; every arc out of
  it forces its head to lie inside ``A`` up to a null set. Following a path of
  the SCC to a block meeting ``B`` then gives a contradiction. With a single
  block this argument needs the self-loop; without one, any split of the block
  has zero cross integral.
* Blocks in trivial SCCs (one block, no self-loop) span an acyclic part of
  the support digraph; any positive-measure subset has a sink block whose
  piece can be split off with zero integral, so the union is fragmented.

Hence the decomposition is exactly the SCC decomposition of the support
digraph, with trivial SCCs moved into the fragmented part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import csr, tarjan_scc
from .kernel import BlockDigraphon, BlockSet, negate_block


@dataclass(frozen=True)
class SupportDigraph:
    n: int
    arcs: frozenset

    @classmethod
    def of(cls, G: BlockDigraphon) -> "SupportDigraph":
        a, b = np.nonzero(G.values > 0)
        return cls(G.space.n_blocks, frozenset(zip(a.tolist(), b.tolist())))

    def restricted(self, blocks) -> "SupportDigraph":
        keep = set(blocks)
        return SupportDigraph(self.n, frozenset((u, v) for u, v in self.arcs if u in keep and v in keep))

    def scc(self) -> tuple[np.ndarray, int]:
        tails = [u for u, _ in self.arcs]
        heads = [v for _, v in self.arcs]
        indptr, indices = csr(self.n, tails, heads)
        return tarjan_scc(self.n, indptr, indices)


@dataclass(frozen=True)
class Decomposition:
    fragmented: BlockSet
    components: tuple  # of BlockSet, ordered by least block index
    contradictory_flags: tuple  # of bool

    @property
    def contradictory(self) -> list[int]:
        return [i for i, f in enumerate(self.contradictory_flags) if f]

    def component_of(self, block: int) -> int | None:
        for i, comp in enumerate(self.components):
            if block in comp:
                return i
        return None

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Decomposition)
            and self.fragmented == other.fragmented
            and self.components == other.components
            and self.contradictory_flags == other.contradictory_flags
        )


def strongly_connected(G: BlockDigraphon, X: BlockSet) -> bool:
    if len(X) == 0:
        raise ValueError("strong connectivity needs a nonempty block set")
    blocks = X.sorted()
    sub = G.values[np.ix_(blocks, blocks)] > 0
    if len(blocks) == 1:
        return bool(sub[0, 0])
    idx = {b: i for i, b in enumerate(blocks)}
    sup = SupportDigraph.of(G).restricted(blocks)
    tails = [idx[u] for u, _ in sup.arcs]
    heads = [idx[v] for _, v in sup.arcs]
    indptr, indices = csr(len(blocks), tails, heads)
    _, count = tarjan_scc(len(blocks), indptr, indices)
    return count == 1


def _is_contradictory(members) -> bool:
    return any(m ^ 1 in members for m in members)


def decompose(G: BlockDigraphon) -> Decomposition:
    sup = SupportDigraph.of(G)
    comp, count = sup.scc()
    groups: list[list[int]] = [[] for _ in range(count)]
    for b, c in enumerate(comp.tolist()):
        groups[c].append(b)
    nontrivial = []
    fragmented = []
    for g in groups:
        if len(g) > 1 or (g[0], g[0]) in sup.arcs:
            nontrivial.append(BlockSet(g))
        else:
            fragmented.extend(g)
    nontrivial.sort(key=lambda s: min(s.members))
    flags = tuple(_is_contradictory(s.members) for s in nontrivial)
    return Decomposition(BlockSet(fragmented), tuple(nontrivial), flags)


def contradictory_components(G: BlockDigraphon, d: Decomposition | None = None) -> list[int]:
    """Indices of components holding both signs of some type."""
    d = d if d is not None else decompose(G)
    return [i for i, comp in enumerate(d.components) if _is_contradictory(comp.members)]


def check_product_form(d: Decomposition) -> dict[int, bool]:
    """For each contradictory component: does every type in it appear with both signs?"""
    out = {}
    for i in d.contradictory:
        members = d.components[i].members
        out[i] = all(negate_block(m) in members for m in members)
    return out
