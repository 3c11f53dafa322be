"""Seeded samplers for TwoSAT(n, W), its sign-randomised twin, DensestTwoSAT and G(n, Gamma).

Literals are integers: variable ``i`` (0-based) with sign bit ``s`` (0 for the
positive literal) is ``2 * i + s``, so negation is ``lit ^ 1``. A clause is a
sorted pair of literals on distinct variables.

Randomness. Every potential clause (or arc) has a virtual uniform ``U`` and is
present iff ``U < p``. Potential clauses are grouped into classes of equal
probability; within a class of ``size`` members the uniforms are realised
lazily from thresholds ``4**-k0, 4**(1-k0), ..., 1`` with ``4**k0 >= size``
(about one member below the finest threshold): the members below each
threshold are drawn from a class-specific Philox stream, finest threshold
first, and only as many levels as ``p`` needs are generated. Because the
stream of a class does not depend on ``p``, two samples with the same seed and
trial are nested whenever their probabilities are (the monotone coupling),
while the cost is proportional to the number of clauses produced rather than
to ``n**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import BlockDigraphon, BlockKernel, TypeSpace, require_valid

MODELS = ("twosat", "dagger", "densest", "digraph")

_RATIO = 4

# stream keys
_TYPES, _SIGNS, _CLAUSE, _ARC, _MASK = 0, 1, 2, 3, 4


class Stream:
    """Counter-based random source keyed by ``(seed, *path)``.

    Each call to :meth:`generator` with the same key returns a fresh Philox
    generator in the same state, so draws never depend on call order.
    """

    def __init__(self, seed: int, *path: int):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)

    def child(self, *key: int) -> "Stream":
        return Stream(self.seed, *self.path, *key)

    def generator(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path + tuple(int(k) for k in key))
        return np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, path={self.path})"


def literal(var: int, negated: bool = False) -> int:
    return 2 * var + int(negated)


def neg(lit: int) -> int:
    return lit ^ 1


def var_of(lit: int) -> int:
    return lit >> 1


def clause(a: int, b: int) -> tuple[int, int]:
    if a >> 1 == b >> 1:
        raise ValueError(f"clause literals {a}, {b} share a variable")
    return (a, b) if a < b else (b, a)


def to_dimacs(lit: int) -> int:
    return -((lit >> 1) + 1) if lit & 1 else (lit >> 1) + 1


def from_dimacs(x: int) -> int:
    if x == 0:
        raise ValueError("0 is not a literal")
    return 2 * (abs(x) - 1) + (x < 0)


def lit_str(lit: int) -> str:
    return ("¬" if lit & 1 else "") + f"v{(lit >> 1) + 1}"


@dataclass(frozen=True)
class Formula:
    n: int
    clauses: frozenset
    provenance: dict = field(default_factory=dict, compare=False, hash=False)
    clamped: int = field(default=0, compare=False)
    # sorted (m, 2) clause array; samplers pass it in, otherwise built on first use
    _array: np.ndarray | None = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self._array is not None:
            arr = np.asarray(self._array, dtype=np.int64).reshape(-1, 2)
            a, b = arr[:, 0], arr[:, 1]
            bad = (a < 0) | (a >= b) | (b >= 2 * self.n) | ((a >> 1) == (b >> 1))
            if bad.any() or len(arr) != len(self.clauses):
                k = int(np.argmax(bad)) if bad.any() else 0
                raise ValueError(f"bad clause array for n={self.n} at row {k}")
            arr.setflags(write=False)
            object.__setattr__(self, "_array", arr)
            return
        for a, b in self.clauses:
            if not (0 <= a < b < 2 * self.n) or a >> 1 == b >> 1:
                raise ValueError(f"bad clause {(a, b)} for n={self.n}")

    @classmethod
    def from_pairs(cls, n: int, pairs, **kw) -> "Formula":
        return cls(n, frozenset(clause(int(a), int(b)) for a, b in pairs), **kw)

    @classmethod
    def from_dimacs_clauses(cls, n: int, clauses, **kw) -> "Formula":
        return cls.from_pairs(n, ((from_dimacs(a), from_dimacs(b)) for a, b in clauses), **kw)

    def array(self) -> np.ndarray:
        """Clauses as a read-only ``(m, 2)`` array in sorted order."""
        if self._array is None:
            arr = (np.array(sorted(self.clauses), dtype=np.int64) if self.clauses
                   else np.zeros((0, 2), dtype=np.int64))
            arr.setflags(write=False)
            object.__setattr__(self, "_array", arr)
        return self._array

    def satisfied_by(self, assignment) -> bool:
        """``assignment[i]`` is the truth value of variable ``i``."""
        def val(lit):
            return bool(assignment[lit >> 1]) != bool(lit & 1)
        return all(val(a) or val(b) for a, b in self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True, eq=False)
class TypeAssignment:
    types: np.ndarray
    signs: np.ndarray | None = None  # sign bit of tau(v_i), only for sign-randomised models

    @property
    def n(self) -> int:
        return len(self.types)

    def block_of_variable(self) -> np.ndarray:
        s = self.signs if self.signs is not None else np.zeros_like(self.types)
        return 2 * self.types + s

    def block_of_literal(self, lit: int) -> int:
        """tau(lit) as a block index; ``tau(not l) = not tau(l)``."""
        return int(self.block_of_variable()[lit >> 1]) ^ (lit & 1)


@dataclass(frozen=True)
class Digraph:
    n: int
    arcs: frozenset
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        for u, v in self.arcs:
            if not (0 <= u < 2 * self.n and 0 <= v < 2 * self.n) or u >> 1 == v >> 1:
                raise ValueError(f"bad arc {(u, v)} for n={self.n}")

    def array(self) -> np.ndarray:
        if not self.arcs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.arcs), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.arcs)


# ---------------------------------------------------------------------------
# coupled subset sampling


def _distinct_outside(gen: np.random.Generator, size: int, m: int, existing: np.ndarray) -> np.ndarray:
    """``m`` distinct uniform indices from ``range(size)`` minus ``existing`` (sorted)."""
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    free = size - len(existing)
    if 2 * m > free:
        comp = np.setdiff1d(np.arange(size, dtype=np.int64), existing, assume_unique=True)
        return gen.choice(comp, size=m, replace=False)
    chosen: list[int] = []
    seen: set[int] = set()
    while len(chosen) < m:
        need = m - len(chosen)
        cand = gen.integers(0, size, size=need + need // 4 + 8)
        if len(existing):
            cand = cand[~np.isin(cand, existing)]
        for c in cand.tolist():
            if c not in seen:
                seen.add(c)
                chosen.append(c)
                if len(chosen) == m:
                    break
    return np.asarray(chosen, dtype=np.int64)


def coupled_subset(gen: np.random.Generator, size: int, p: float) -> np.ndarray:
    """Sorted indices ``i < size`` with virtual uniform ``U_i < p``.

    Each index is included independently with probability ``p``; for a fixed
    generator state the result is monotone in ``p``.
    """
    if size <= 0 or p <= 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(size, dtype=np.int64)
    k = 0
    while _RATIO ** k < size:
        k += 1
    hi = float(_RATIO) ** -k
    m = int(gen.binomial(size, hi))
    members = [_distinct_outside(gen, size, m, np.zeros(0, dtype=np.int64))]
    uvals = [gen.random(m) * hi]
    count = m
    while hi < p:
        k -= 1
        lo, hi = hi, float(_RATIO) ** -k
        if k == 0:
            existing = np.sort(np.concatenate(members))
            new = np.setdiff1d(np.arange(size, dtype=np.int64), existing, assume_unique=True)
        else:
            q = (hi - lo) / (1.0 - lo)
            m = int(gen.binomial(size - count, q))
            if m == 0:
                continue  # an empty level draws nothing further from the stream
            existing = np.sort(np.concatenate(members)) if count else np.zeros(0, dtype=np.int64)
            new = _distinct_outside(gen, size, m, existing)
        members.append(new)
        uvals.append(lo + gen.random(len(new)) * (hi - lo))
        count += len(new)
    members_arr = np.concatenate(members)
    return np.sort(members_arr[np.concatenate(uvals) < p])


def _unordered_pairs(idx: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode lexicographic indices of pairs ``r < c < m``."""
    idx = idx.astype(np.int64)
    b = 2 * m - 1
    r = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * idx, 0.0))) / 2).astype(np.int64)
    r = np.clip(r, 0, max(m - 2, 0))
    for _ in range(3):
        start = r * m - r * (r + 1) // 2
        r = np.where(start > idx, r - 1, r)
        nxt = (r + 1) * m - (r + 1) * (r + 2) // 2
        r = np.where(nxt <= idx, r + 1, r)
    start = r * m - r * (r + 1) // 2
    return r, idx - start + r + 1


def _ordered_pairs(idx: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode indices of ordered pairs ``r != c`` among ``m`` items."""
    r = idx // (m - 1)
    c = idx % (m - 1)
    return r, c + (c >= r)


# ---------------------------------------------------------------------------
# types


def _check_stream(stream) -> Stream:
    if isinstance(stream, Stream):
        return stream
    return Stream(int(stream))


def sample_types(n: int, space: TypeSpace, stream, signs: bool = False) -> TypeAssignment:
    """i.i.d. types by inverse CDF over the weights, optionally with fair signs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    stream = _check_stream(stream)
    u = stream.generator(_TYPES).random(n)
    cdf = np.cumsum(space.weights)
    types = np.minimum(np.searchsorted(cdf, u, side="right"), space.t - 1).astype(np.int64)
    sg = stream.generator(_SIGNS).integers(0, 2, size=n).astype(np.int64) if signs else None
    return TypeAssignment(types, sg)


def _groups(labels: np.ndarray, count: int) -> list[np.ndarray]:
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    return [order[bounds[g]:bounds[g + 1]] for g in range(count)]


def _clause_classes(n, groups, value, stream, dense=False):
    """Sample unordered literal pairs. ``groups[g]`` lists variables of group g and
    ``value(g1, q, g2, r)`` gives the kernel value for literals with sign bits q, r."""
    a_parts, b_parts = [], []
    clamped = 0
    G = len(groups)
    for g1 in range(G):
        for g2 in range(g1, G):
            m1, m2 = len(groups[g1]), len(groups[g2])
            size = m1 * (m1 - 1) // 2 if g1 == g2 else m1 * m2
            if size == 0:
                continue
            for q in (0, 1):
                for r in (0, 1):
                    w = value(g1, q, g2, r)
                    if dense:
                        p = 1.0 if w > 0 else 0.0
                    else:
                        p = w / (2 * n)
                        if p > 1:
                            clamped += size
                    if p <= 0:
                        continue
                    idx = coupled_subset(stream.generator(_CLAUSE, g1, g2, q, r), size, p)
                    if g1 == g2:
                        ri, ci = _unordered_pairs(idx, m1)
                        vi, vj = groups[g1][ri], groups[g1][ci]
                    else:
                        vi, vj = groups[g1][idx // m2], groups[g2][idx % m2]
                    a_parts.append(2 * vi + q)
                    b_parts.append(2 * vj + r)
    if a_parts:
        a = np.concatenate(a_parts)
        b = np.concatenate(b_parts)
        code = np.unique(np.minimum(a, b) * (2 * n) + np.maximum(a, b))
        arr = np.stack([code // (2 * n), code % (2 * n)], axis=1)
    else:
        arr = np.zeros((0, 2), dtype=np.int64)
    pairs = frozenset(zip(arr[:, 0].tolist(), arr[:, 1].tolist()))
    return pairs, arr, clamped


def _provenance(stream: Stream, kernel, model: str) -> dict:
    return {"seed": stream.seed, "trial": list(stream.path), "kernel": kernel.digest(), "model": model}


def sample_formula(n: int, W: BlockKernel, stream, dense: bool = False) -> Formula:
    """TwoSAT(n, W): clause {q v_i, s v_j} with probability min(1, W((x_i,q),(x_j,s)) / 2n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    require_valid(W)
    stream = _check_stream(stream)
    tau = sample_types(n, W.space, stream)
    groups = _groups(tau.types, W.space.t)
    vals = W.values
    pairs, arr, clamped = _clause_classes(
        n, groups, lambda g1, q, g2, r: vals[2 * g1 + q, 2 * g2 + r], stream, dense=dense)
    model = "densest" if dense else "twosat"
    return Formula(n, pairs, _provenance(stream, W, model), clamped, arr)


def sample_densest(n: int, W: BlockKernel, stream) -> Formula:
    """DensestTwoSAT(n, W): a clause is present iff its kernel value is positive."""
    return sample_formula(n, W, stream, dense=True)


def sample_formula_dagger(n: int, W: BlockKernel, stream) -> tuple[Formula, TypeAssignment]:
    """Single-step TwoSAT-dagger: tau over blocks, clause {l1, l2} with
    probability min(1, W(tau(l1), tau(l2)) / 2n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    require_valid(W)
    stream = _check_stream(stream)
    tau = sample_types(n, W.space, stream, signs=True)
    groups = _groups(tau.block_of_variable(), W.space.n_blocks)
    vals = W.values
    pairs, arr, clamped = _clause_classes(
        n, groups, lambda b1, q, b2, r: vals[b1 ^ q, b2 ^ r], stream)
    return Formula(n, pairs, _provenance(stream, W, "dagger"), clamped, arr), tau


def sample_digraph(n: int, G: BlockDigraphon, stream) -> tuple[Digraph, TypeAssignment]:
    """G(n, Gamma): every ordered literal pair on distinct variables is an arc
    with probability min(1, Gamma(tau(l1), tau(l2)) / 2n), independently."""
    if n < 1:
        raise ValueError("n must be >= 1")
    require_valid(G)
    stream = _check_stream(stream)
    tau = sample_types(n, G.space, stream, signs=True)
    groups = _groups(tau.block_of_variable(), G.space.n_blocks)
    vals = G.values
    tails, heads = [], []
    nb = len(groups)
    for g1 in range(nb):
        for g2 in range(nb):
            m1, m2 = len(groups[g1]), len(groups[g2])
            size = m1 * (m1 - 1) if g1 == g2 else m1 * m2
            if size == 0:
                continue
            for q in (0, 1):
                for r in (0, 1):
                    p = vals[g1 ^ q, g2 ^ r] / (2 * n)
                    if p <= 0:
                        continue
                    idx = coupled_subset(stream.generator(_ARC, g1, g2, q, r), size, p)
                    if g1 == g2:
                        ri, ci = _ordered_pairs(idx, m1)
                        vi, vj = groups[g1][ri], groups[g1][ci]
                    else:
                        vi, vj = groups[g1][idx // m2], groups[g2][idx % m2]
                    tails.append(2 * vi + q)
                    heads.append(2 * vj + r)
    if tails:
        arcs = frozenset(zip(np.concatenate(tails).tolist(), np.concatenate(heads).tolist()))
    else:
        arcs = frozenset()
    return Digraph(n, arcs, _provenance(stream, G, "digraph")), tau


def flip_variables(f: Formula, mask) -> Formula:
    """Negate every literal of the masked variables."""
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != f.n:
        raise ValueError(f"mask has length {len(mask)}, formula has {f.n} variables")
    flip = mask.astype(np.int64)
    out = frozenset(clause(a ^ int(flip[a >> 1]), b ^ int(flip[b >> 1])) for a, b in f.clauses)
    return Formula(f.n, out, dict(f.provenance), f.clamped)


def random_mask(n: int, stream) -> np.ndarray:
    return _check_stream(stream).generator(_MASK).integers(0, 2, size=n).astype(bool)


def sample(model: str, n: int, W: BlockKernel, stream):
    """Dispatch on a model tag; returns a Formula, or a Digraph for ``digraph``."""
    from .kernel import implication_digraphon

    if model == "twosat":
        return sample_formula(n, W, stream)
    if model == "dagger":
        return sample_formula_dagger(n, W, stream)[0]
    if model == "densest":
        return sample_densest(n, W, stream)
    if model == "digraph":
        return sample_digraph(n, implication_digraphon(W), stream)[0]
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
