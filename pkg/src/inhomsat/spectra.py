"""Spectral radius, Perron eigenfunctions, powers and periodicity of block digraphons.

Conventions. The operator of a digraphon acts by
``(T f)(x) = sum_y kappa(y) f(y) Gamma(y, x)``; on blocks this is the matrix
``M[x][y] = kappa(y) Gamma[y][x]`` (:func:`operator_matrix`). ``v_right`` is the
Perron eigenvector of ``M``; ``v_left`` is the Perron eigenvector of the
operator of the transposed kernel, ``kappa(y) Gamma[x][y]``. They are scaled
so that ``sum kappa v_right = 1`` and ``sum kappa v_left v_right = 1``. With
these conventions the high powers satisfy
``Gamma^l(x, y) ~ D rho^l v_left(x) v_right(y)`` on period-compatible pairs,
where ``D`` is the period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .components import Decomposition, decompose, strongly_connected, SupportDigraph
from .kernel import BlockDigraphon, BlockKernel, BlockSet, implication_digraphon, restrict

RESIDUAL_TOL = 1e-12


def operator_matrix(G: BlockDigraphon) -> np.ndarray:
    kappa = G.space.block_measures()
    return G.values.T * kappa[np.newaxis, :]


def _transpose_operator(G: BlockDigraphon) -> np.ndarray:
    kappa = G.space.block_measures()
    return G.values * kappa[np.newaxis, :]


@dataclass
class PerronResult:
    rho: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool
    decay_ratio: float | None


def perron_pair(A: np.ndarray, weights: np.ndarray, max_iter: int | None = None) -> PerronResult:
    """Perron root and nonnegative eigenvector of a nonnegative square matrix.

    Shifted power iteration on ``A + s I`` with ``s`` equal to the largest row
    sum, which bounds the Perron root from above; the shift makes every
    peripheral eigenvalue other than the Perron root strictly smaller in
    modulus, so periodic matrices converge. The estimate is then polished by
    inverse iteration. The vector is normalised to ``weights @ v = 1``.
    """
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    if max_iter is None:
        max_iter = 100 * d
    w = np.asarray(weights, dtype=np.float64)
    if not np.any(A > 0):
        v = np.ones(d) / w.sum()
        return PerronResult(0.0, v, 0, 0.0, True, None)
    shift = float(A.sum(axis=1).max())
    B = A + shift * np.eye(d)
    v = np.ones(d) / w.sum()
    rho = 0.0
    residuals: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        y = B @ v
        v_new = y / (w @ y)
        rho = float(w @ (A @ v_new))
        res = float(np.max(np.abs(A @ v_new - rho * v_new)))
        residuals.append(res)
        v = v_new
        if res <= RESIDUAL_TOL * max(1.0, rho):
            break
        if len(residuals) > 20 and res <= 1e-6 * max(1.0, rho):
            break
    decay = None
    if len(residuals) >= 6 and residuals[-6] > 0:
        decay = (residuals[-1] / residuals[-6]) ** (1 / 5)
    # inverse-iteration polish around the current estimate
    for _ in range(8):
        res = float(np.max(np.abs(A @ v - rho * v)))
        if res <= RESIDUAL_TOL * max(1.0, rho):
            break
        try:
            y = np.linalg.solve(A - rho * np.eye(d), v)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(y)) or w @ y == 0:
            break
        y = y / (w @ y)
        if np.any(y < -1e-9 * np.max(np.abs(y))):
            break
        y = np.clip(y, 0.0, None)
        y = y / (w @ y)
        rho = float(w @ (A @ y))
        v = y
        it += 1
    res = float(np.max(np.abs(A @ v - rho * v)))
    return PerronResult(rho, v, it, res, res <= 1e-10 * max(1.0, rho), decay)


def period(G: BlockDigraphon, X: BlockSet) -> tuple[int, tuple]:
    """Period of the support of ``G`` on ``X`` and its cyclic classes.

    Classes are ordered so that arcs go from class ``j`` to class ``j + 1 mod D``,
    with the least block of ``X`` in class 0.
    """
    if len(X) == 0 or not strongly_connected(G, X):
        raise ValueError(f"{X} is not strongly connected")
    blocks = X.sorted()
    arcs = SupportDigraph.of(G).restricted(blocks).arcs
    succ: dict[int, list[int]] = {b: [] for b in blocks}
    for u, v in arcs:
        succ[u].append(v)
    level = {blocks[0]: 0}
    frontier = [blocks[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(succ[u]):
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    D = reduce(math.gcd, (abs(level[u] + 1 - level[v]) for u, v in arcs), 0)
    parts = tuple(frozenset(b for b in blocks if level[b] % D == j) for j in range(D))
    return D, parts


@dataclass
class SpectralReport:
    rho: float
    v_right: np.ndarray
    v_left: np.ndarray
    period: int
    cyclic_parts: tuple
    iterations: int
    residual: float
    left_residual: float
    converged: bool
    strongly_connected: bool
    blocks: tuple
    decay_ratio: float | None = None
    notes: list = field(default_factory=list)

    def part_of(self, block: int) -> int | None:
        for j, p in enumerate(self.cyclic_parts):
            if block in p:
                return j
        return None


def spectral_radius(G: BlockDigraphon, X: BlockSet | None = None) -> SpectralReport:
    """Perron data of ``G`` restricted to ``X`` (whole space by default)."""
    if X is None:
        X = BlockSet.full(G.space)
    if len(X) == 0:
        raise ValueError("spectral radius needs a nonempty block set")
    nb = G.space.n_blocks
    blocks = X.sorted()
    kappa = G.space.block_measures()[blocks]
    GX = restrict(G, X)
    M = operator_matrix(GX)[np.ix_(blocks, blocks)]
    L = _transpose_operator(GX)[np.ix_(blocks, blocks)]
    sc = strongly_connected(G, X)
    notes = []
    if not sc:
        notes.append("block set is not strongly connected; rho is the largest over its strong components")
    has_cycle = bool(decompose(GX).components)
    v_right = np.zeros(nb)
    v_left = np.zeros(nb)
    if not has_cycle:
        # acyclic support: the restricted operator is nilpotent
        return SpectralReport(0.0, v_right, v_left, 1, (frozenset(blocks),), 0, 0.0, 0.0, True, sc,
                              tuple(blocks), None, notes + ["nilpotent: no cycle in the support"])
    right = perron_pair(M, kappa)
    left = perron_pair(L, kappa)
    vr = right.vector
    vl = left.vector
    inner = float(np.sum(kappa * vl * vr))
    if inner > 0:
        vl = vl / inner
    else:
        notes.append("left and right Perron vectors are orthogonal; left vector left unscaled")
    v_right[blocks] = vr
    v_left[blocks] = vl
    left_res = float(np.max(np.abs(L @ vl - right.rho * vl)))
    if sc:
        D, parts = period(G, X)
    else:
        D, parts = 1, (frozenset(blocks),)
    converged = right.converged and left.converged
    if not converged:
        notes.append("power iteration did not reach the residual target")
    return SpectralReport(right.rho, v_right, v_left, D, parts, right.iterations + left.iterations,
                          right.residual, left_res, converged, sc, tuple(blocks), right.decay_ratio, notes)


@dataclass
class RhoStarReport:
    rho_star: float
    decomposition: Decomposition
    reports: dict  # component index -> SpectralReport, contradictory components only
    digraphon: BlockDigraphon

    @property
    def threshold_scale(self) -> float:
        return 1.0 / self.rho_star if self.rho_star > 0 else math.inf


def rho_star(W: BlockKernel) -> RhoStarReport:
    """Largest spectral radius of the implication digraphon over contradictory components (0 if none)."""
    G = implication_digraphon(W)
    d = decompose(G)
    reports = {i: spectral_radius(G, d.components[i]) for i in d.contradictory}
    value = max((r.rho for r in reports.values()), default=0.0)
    return RhoStarReport(value, d, reports, G)


def compose(A: BlockDigraphon, B: BlockDigraphon) -> BlockDigraphon:
    """``(A * B)(x, y) = sum_z kappa(z) A(x, z) B(z, y)``."""
    kappa = A.space.block_measures()
    return BlockDigraphon(A.space, (A.values * kappa[np.newaxis, :]) @ B.values)


def kernel_power(G: BlockDigraphon, k: int) -> BlockDigraphon:
    if k < 1:
        raise ValueError("kernel powers are defined for k >= 1")
    kappa = G.space.block_measures()
    step = G.values * kappa[np.newaxis, :]
    out = G.values
    # binary exponentiation of Gamma K, then one trailing Gamma: Gamma^k = (Gamma K)^(k-1) Gamma
    e = k - 1
    acc = np.eye(G.space.n_blocks)
    base = step
    while e:
        if e & 1:
            acc = acc @ base
        base = base @ base
        e >>= 1
    return BlockDigraphon(G.space, acc @ out)


def _weighted_norm(values: np.ndarray, kappa: np.ndarray) -> float:
    top = float(np.max(np.abs(values))) if values.size else 0.0
    if top == 0.0:
        return 0.0
    scaled = values / top
    return top * float(np.sqrt(np.sum(np.outer(kappa, kappa) * scaled ** 2)))


def gelfand_estimate(G: BlockDigraphon, k_max: int) -> np.ndarray:
    """``(||Gamma^k||_2)^(1/k)`` for ``k = 1..k_max``, with the measure-weighted L2 norm.

    ``Gamma`` is first divided by its largest entry ``s`` (so ``(s Gamma)^k =
    s^k Gamma^k`` contributes a plain factor ``s``), and powers are carried as
    ``P_k * exp(log_scale)`` renormalised every step, so large ``k`` or huge
    entries neither overflow nor underflow.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    out = np.zeros(k_max)
    s = float(np.max(G.values)) if G.values.size else 0.0
    if s == 0.0:
        return out
    kappa = G.space.block_measures()
    base = G.values / s
    step = base * kappa[np.newaxis, :]
    P = base.copy()
    log_scale = 0.0
    for k in range(1, k_max + 1):
        if k > 1:
            P = step @ P
        norm = _weighted_norm(P, kappa)
        if norm == 0:
            break  # nilpotent from here on; remaining terms stay 0
        log_scale += math.log(norm)
        out[k - 1] = s * math.exp(log_scale / k)
        P = P / norm
    return out


@dataclass
class AsymptoticCheck:
    actual: float
    predicted: float
    relative_error: float
    compatible: bool


def asymptotic_check(G: BlockDigraphon, X: BlockSet, ell: int, x: int, y: int,
                     report: SpectralReport | None = None) -> AsymptoticCheck:
    """Compare ``Gamma^ell(x, y)`` on ``X`` with ``D rho^ell v_left(x) v_right(y)``.

    ``D`` is the period; each of the ``D`` peripheral eigenvalues contributes a
    rank-one term, and on compatible pairs they add up. Pairs whose cyclic
    classes are incompatible with ``ell`` get prediction 0.
    The relative error is computed on ``Gamma / rho`` so it stays finite when
    ``rho^ell`` overflows.
    """
    if not strongly_connected(G, X):
        raise ValueError(f"{X} is not strongly connected")
    if x not in X or y not in X:
        raise ValueError("x and y must be blocks of X")
    rep = report if report is not None else spectral_radius(G, X)
    GX = restrict(G, X)
    D = rep.period
    i, j = rep.part_of(x), rep.part_of(y)
    compatible = (ell - (j - i)) % D == 0
    rho = rep.rho
    normed = kernel_power(BlockDigraphon(G.space, GX.values / rho), ell)[x, y]
    with np.errstate(over="ignore"):
        scale_l = rho ** ell
    actual = normed * scale_l
    if not compatible:
        return AsymptoticCheck(actual, 0.0, 0.0 if normed == 0 else math.inf, False)
    pred_normed = D * rep.v_left[x] * rep.v_right[y]
    rel = abs(normed / pred_normed - 1.0)
    return AsymptoticCheck(actual, pred_normed * scale_l, rel, True)
