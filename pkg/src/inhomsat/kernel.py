"""Block kernels on the signed type space K = types x {+, -}.

Blocks are enumerated ``(type 0, +), (type 0, -), (type 1, +), ...`` so the
block of type ``i`` and sign bit ``s`` (0 for ``+``, 1 for ``-``) has index
``2 * i + s`` and negation is ``index ^ 1``. Every kernel is a ``2t x 2t``
float64 matrix over these blocks; a block carries measure ``weight_i / 2``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SIGNS = ("+", "-")


class InvalidKernelError(ValueError):
    """Raised when an operation needs a valid kernel and gets a broken one."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def block_index(type_index: int, sign: str | int) -> int:
    bit = SIGNS.index(sign) if isinstance(sign, str) else int(sign)
    return 2 * type_index + bit


def negate_block(index: int) -> int:
    return index ^ 1


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TypeSpace:
    """Finite type space: labels with probability weights."""

    labels: tuple
    weights: np.ndarray

    def __init__(self, labels: Iterable, weights: Iterable[float]):
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "weights", _frozen(list(weights)))

    @classmethod
    def uniform(cls, t: int) -> "TypeSpace":
        return cls(range(t), [1.0 / t] * t)

    @property
    def t(self) -> int:
        return len(self.labels)

    @property
    def n_blocks(self) -> int:
        return 2 * self.t

    def block_measures(self) -> np.ndarray:
        """kappa of every signed block, ``weight / 2``."""
        return np.repeat(self.weights, 2) / 2.0

    def block_name(self, index: int) -> str:
        return f"({self.labels[index // 2]},{SIGNS[index % 2]})"

    def index_of(self, label) -> int:
        if label in self.labels:
            return self.labels.index(label)
        if isinstance(label, int) and not isinstance(label, bool) and 0 <= label < self.t:
            return label
        raise KeyError(f"unknown type {label!r}")

    def same_as(self, other: "TypeSpace") -> bool:
        return self.labels == other.labels and np.array_equal(self.weights, other.weights)


@dataclass(frozen=True, eq=False)
class BlockSet:
    """A union of signed blocks."""

    members: frozenset

    def __init__(self, members: Iterable[int] = ()):
        object.__setattr__(self, "members", frozenset(int(m) for m in members))

    @classmethod
    def full(cls, space: TypeSpace) -> "BlockSet":
        return cls(range(space.n_blocks))

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def measure(self, space: TypeSpace) -> float:
        kappa = space.block_measures()
        return float(sum(kappa[m] for m in self.members))

    def negated(self) -> "BlockSet":
        return BlockSet(negate_block(m) for m in self.members)

    def __contains__(self, item) -> bool:
        return item in self.members

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockSet) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return f"BlockSet({self.sorted()})"


@dataclass(frozen=True, eq=False)
class _BlockMatrix:
    space: TypeSpace
    values: np.ndarray = field(repr=False)

    def __init__(self, space: TypeSpace, values):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", _frozen(values))

    def __getitem__(self, key) -> float:
        return float(self.values[key])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.space.labels).encode())
        h.update(np.ascontiguousarray(self.space.weights).tobytes())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()[:16]

    def equals(self, other: "_BlockMatrix") -> bool:
        return (
            type(self) is type(other)
            and self.space.same_as(other.space)
            and np.array_equal(self.values, other.values)
        )


class BlockKernel(_BlockMatrix):
    """Symmetric nonnegative clause kernel ``W`` on blocks."""

    @classmethod
    def constant(cls, c: float, space: TypeSpace | None = None) -> "BlockKernel":
        space = space or TypeSpace.uniform(1)
        return cls(space, np.full((space.n_blocks,) * 2, float(c)))

    @classmethod
    def from_abc(cls, a: float, b: float, c: float) -> "BlockKernel":
        """One-type kernel with ``W(+,+) = a``, ``W(+,-) = W(-,+) = b``, ``W(-,-) = c``."""
        return cls(TypeSpace.uniform(1), [[a, b], [b, c]])


class BlockDigraphon(_BlockMatrix):
    """Nonnegative, not necessarily symmetric block kernel."""

    @classmethod
    def zeros(cls, space: TypeSpace) -> "BlockDigraphon":
        return cls(space, np.zeros((space.n_blocks,) * 2))


def validate_kernel(W: _BlockMatrix, symmetric: bool | None = None) -> list[str]:
    """Return the list of violations of ``W``; empty means valid.

    Symmetry is checked for :class:`BlockKernel` (exact equality) unless
    ``symmetric`` says otherwise.
    """
    if symmetric is None:
        symmetric = isinstance(W, BlockKernel)
    out: list[str] = []
    space = W.space
    weights = space.weights
    if len(set(space.labels)) != len(space.labels):
        out.append("duplicate type labels")
    if weights.ndim != 1 or len(weights) != len(space.labels):
        out.append("weights and labels differ in length")
    if space.t == 0:
        out.append("empty type space")
    for lab, w in zip(space.labels, weights):
        if not (w > 0) or not math.isfinite(w):
            out.append(f"weight of type {lab} is {w}, must be > 0")
    total = float(np.sum(weights)) if weights.size else 0.0
    if abs(total - 1.0) > 1e-12:
        out.append(f"weights sum {total:.12g}")
    vals = W.values
    nb = 2 * len(space.labels)
    if vals.shape != (nb, nb):
        out.append(f"values have shape {vals.shape}, expected {(nb, nb)}")
        return out
    bad = ~np.isfinite(vals)
    for a, b in zip(*np.nonzero(bad)):
        out.append(f"non-finite entry at {space.block_name(a)},{space.block_name(b)}")
    neg = np.isfinite(vals) & (vals < 0)
    for a, b in zip(*np.nonzero(neg)):
        out.append(f"negative entry {vals[a, b]} at {space.block_name(a)},{space.block_name(b)}")
    if symmetric:
        for a in range(nb):
            for b in range(a + 1, nb):
                if vals[a, b] != vals[b, a]:
                    out.append(
                        f"asymmetry at {space.block_name(a)},{space.block_name(b)} vs "
                        f"{space.block_name(b)},{space.block_name(a)}: {vals[a, b]} != {vals[b, a]}"
                    )
    return out


def require_valid(W: _BlockMatrix) -> None:
    problems = validate_kernel(W)
    if problems:
        raise InvalidKernelError(problems)


def implication_digraphon(W: BlockKernel) -> BlockDigraphon:
    """``Gamma(x, y) = W(not x, y)``: swap each pair of sign rows."""
    require_valid(W)
    perm = np.arange(W.space.n_blocks) ^ 1
    return BlockDigraphon(W.space, W.values[perm, :])


def restrict(G: BlockDigraphon, A: BlockSet) -> BlockDigraphon:
    nb = G.space.n_blocks
    if any(m < 0 or m >= nb for m in A.members):
        raise ValueError(f"block set {A} out of range for {nb} blocks")
    mask = np.zeros(nb, dtype=bool)
    mask[list(A.members)] = True
    return type(G)(G.space, np.where(np.outer(mask, mask), G.values, 0.0))


def l1_norm(W: _BlockMatrix) -> float:
    kappa = W.space.block_measures()
    return float(kappa @ W.values @ kappa)


def scale(W: BlockKernel, c: float) -> BlockKernel:
    if not (c >= 0) or not math.isfinite(c):
        raise ValueError(f"scale factor must be finite and >= 0, got {c}")
    return type(W)(W.space, W.values * c)


def indicator_digraphon(G: BlockDigraphon) -> BlockDigraphon:
    return BlockDigraphon(G.space, (G.values > 0).astype(np.float64))


def _cell_means(exponent: float, m: int) -> np.ndarray:
    # mean of x**-a over (j/m, (j+1)/m) from the antiderivative x**(1-a)/(1-a)
    edges = np.arange(m + 1) / m
    prim = edges ** (1.0 - exponent) / (1.0 - exponent)
    return (prim[1:] - prim[:-1]) * m


def power_law_kernel(alpha: float, beta: float, gamma: float, delta: float, m: int) -> BlockKernel:
    """Exact cell averages of the separable scale-free kernel on ``m`` cells of (0, 1).

    ``W((x,+),(y,+)) = x^-alpha y^-alpha``, ``W((x,+),(y,-)) = x^-gamma y^-delta``,
    ``W((x,-),(y,-)) = (1-x)^-beta (1-y)^-beta``.
    """
    for name, e in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)):
        if not (0 <= e < 1):
            raise ValueError(f"exponent {name}={e} must lie in [0, 1)")
    if m < 1:
        raise ValueError("grid size must be >= 1")
    a = _cell_means(alpha, m)
    g = _cell_means(gamma, m)
    d = _cell_means(delta, m)
    b = _cell_means(beta, m)[::-1]  # (1-x)^-beta on cell j is x^-beta on cell m-1-j
    vals = np.empty((2 * m, 2 * m))
    vals[0::2, 0::2] = np.outer(a, a)
    vals[0::2, 1::2] = np.outer(g, d)
    vals[1::2, 0::2] = np.outer(d, g)
    vals[1::2, 1::2] = np.outer(b, b)
    labels = [f"c{j}" for j in range(m)]
    return BlockKernel(TypeSpace(labels, [1.0 / m] * m), vals)
