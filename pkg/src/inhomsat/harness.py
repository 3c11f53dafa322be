"""Monte Carlo sweeps over the scaling factor, threshold bisection and the
marginal-equality check between G(n, Gamma) and the implication digraph of the
sign-randomised formula model.

Trial ``i`` of every cell draws from ``Stream(seed, i)`` whatever the scale,
so within one ``n`` the clause sets of a trial are nested in the scale and the
satisfiable fraction is non-increasing in it.
"""

from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .kernel import BlockKernel, implication_digraphon, scale as scale_kernel
from .sampler import (MODELS, Digraph, Stream, sample, sample_digraph, sample_formula_dagger)
from .solver import implication_digraph, is_satisfiable, strong_labels
from .spectra import RhoStarReport, rho_star

CRITICAL_TOL = 1e-9
CSV_HEADER = ("scale", "n", "trials", "sat", "frac", "lo95", "hi95")


def wilson_interval(k: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = stats.binomtest(k, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def classify(rho: float) -> str:
    """Predicted regime for a kernel with the given rho*."""
    if abs(rho - 1.0) <= CRITICAL_TOL:
        return "critical"
    return "sat" if rho < 1.0 else "unsat"


@dataclass
class ExperimentConfig:
    kernel: BlockKernel
    ns: tuple = (1000,)
    scales: tuple = (1.0,)
    trials: int = 100
    seed: int = 0
    model: str = "twosat"
    workers: int = 1
    cell_timeout: float | None = None
    kernel_ref: str = ""

    def __post_init__(self):
        self.ns = tuple(int(n) for n in self.ns)
        self.scales = tuple(float(c) for c in self.scales)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(n < 2 for n in self.ns):
            raise ValueError("every n must be >= 2")
        if any(not (c >= 0 and math.isfinite(c)) for c in self.scales):
            raise ValueError("scales must be finite and >= 0")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class CellResult:
    scale: float
    n: int
    trials: int  # trials actually completed
    sat: int
    requested: int
    lo95: float = 0.0
    hi95: float = 1.0
    timed_out: bool = False
    error: str | None = None
    seconds: float = 0.0

    @property
    def frac(self) -> float:
        return self.sat / self.trials if self.trials else math.nan

    @property
    def complete(self) -> bool:
        return self.trials == self.requested and self.error is None


def _trial_sat(model: str, n: int, W: BlockKernel, stream: Stream) -> bool:
    x = sample(model, n, W, stream)
    if isinstance(x, Digraph):
        # G(n, Gamma) is "satisfiable" when no strong component is contradictory
        arr = x.array()
        labels = strong_labels(2 * n, arr[:, 0], arr[:, 1])
        return not np.any(labels[0::2] == labels[1::2])
    return is_satisfiable(x)


def run_cell(cfg: ExperimentConfig, c: float, n: int) -> CellResult:
    start = time.perf_counter()
    cell = CellResult(c, n, 0, 0, cfg.trials)
    try:
        W = scale_kernel(cfg.kernel, c)
        for i in range(cfg.trials):
            if cfg.cell_timeout is not None and time.perf_counter() - start > cfg.cell_timeout:
                cell.timed_out = True
                break
            cell.sat += _trial_sat(cfg.model, n, W, Stream(cfg.seed, i))
            cell.trials += 1
    except Exception as e:  # recorded against the cell; the sweep carries on
        cell.error = f"cell (scale={c}, n={n}): {type(e).__name__}: {e}"
    cell.lo95, cell.hi95 = wilson_interval(cell.sat, cell.trials)
    cell.seconds = time.perf_counter() - start
    return cell


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class SweepResult:
    cells: list
    rho_star: float
    config: ExperimentConfig = field(repr=False)

    @property
    def predicted_scale(self) -> float:
        return 1.0 / self.rho_star if self.rho_star > 0 else math.inf

    def prediction(self, c: float) -> str:
        return classify(c * self.rho_star)

    def cell(self, c: float, n: int) -> CellResult:
        for x in self.cells:
            if x.scale == c and x.n == n:
                return x
        raise KeyError((c, n))

    def monotone_violations(self) -> list[tuple]:
        """Adjacent scale pairs (per n) where the satisfiable fraction increases."""
        out = []
        for n in self.config.ns:
            row = sorted((x for x in self.cells if x.n == n and x.trials), key=lambda x: x.scale)
            for lo, hi in zip(row, row[1:]):
                if hi.frac > lo.frac:
                    out.append((n, lo.scale, hi.scale))
        return out

    def problems(self) -> list[str]:
        msgs = [x.error for x in self.cells if x.error]
        msgs += [f"cell (scale={x.scale}, n={x.n}) timed out after {x.trials}/{x.requested} trials"
                 for x in self.cells if x.timed_out]
        return msgs


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run every (scale, n) cell; results are sorted by (scale, n) whatever the execution order."""
    jobs = [(cfg, c, n) for c, n in itertools.product(cfg.scales, cfg.ns)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            cells = list(pool.map(_run_cell_args, jobs))
    else:
        cells = [run_cell(*j) for j in jobs]
    cells.sort(key=lambda x: (x.scale, x.n))
    return SweepResult(cells, rho_star(cfg.kernel).rho_star, cfg)


def write_csv(result: SweepResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for x in result.cells:
        w.writerow([repr(x.scale), x.n, x.trials, x.sat,
                    "nan" if not x.trials else f"{x.frac:.6g}", f"{x.lo95:.6g}", f"{x.hi95:.6g}"])


def plot_sweep(result: SweepResult, path) -> None:
    """SVG line plot of the satisfiable fraction against scale, one line per n."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise RuntimeError("plotting needs matplotlib (pip install 'artifact[plot]')") from e
    fig, ax = plt.subplots(figsize=(6, 4))
    for n in result.config.ns:
        row = sorted((x for x in result.cells if x.n == n and x.trials), key=lambda x: x.scale)
        xs = [x.scale for x in row]
        ax.plot(xs, [x.frac for x in row], marker="o", label=f"n={n}")
        ax.fill_between(xs, [x.lo95 for x in row], [x.hi95 for x in row], alpha=0.2)
    if math.isfinite(result.predicted_scale):
        ax.axvline(result.predicted_scale, color="k", linestyle="--", label="1/rho*")
    ax.set_xlabel("scale")
    ax.set_ylabel("fraction satisfiable")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# threshold


@dataclass
class ThresholdEstimate:
    estimate: float
    lo: float
    hi: float
    predicted: float
    probes: list  # (scale, CellResult)
    notes: list

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2


def estimate_threshold(cfg: ExperimentConfig, lo: float | None = None, hi: float | None = None,
                       probes: int = 8) -> ThresholdEstimate:
    """Bisect on the scale for the point where the satisfiable fraction crosses 1/2.

    Uses ``cfg.ns[0]``. The default bracket is ``[0.5, 2] / rho*``. Returns the
    final bracketing interval and its midpoint.
    """
    rep = rho_star(cfg.kernel)
    if rep.rho_star == 0:
        return ThresholdEstimate(math.inf, math.inf, math.inf, math.inf, [],
                                 ["rho* = 0: no contradictory component, satisfiable at every scale"])
    pred = 1.0 / rep.rho_star
    lo = 0.5 * pred if lo is None else float(lo)
    hi = 2.0 * pred if hi is None else float(hi)
    if not 0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    n = cfg.ns[0]
    notes = []
    seen: list[tuple[float, CellResult]] = []

    def probe(c):
        cell = run_cell(cfg, c, n)
        if cell.error:
            raise RuntimeError(cell.error)
        if cell.timed_out:
            notes.append(f"probe at scale {c} timed out after {cell.trials} trials")
        seen.append((c, cell))
        return cell.frac

    if probe(lo) < 0.5:
        notes.append(f"lower end {lo} already has satisfiable fraction below 1/2")
    if probe(hi) >= 0.5:
        notes.append(f"upper end {hi} still has satisfiable fraction at least 1/2")
    for _ in range(probes):
        mid = (lo + hi) / 2
        if probe(mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    ordered = sorted(seen, key=lambda p: p[0])
    for (c1, a), (c2, b) in zip(ordered, ordered[1:]):
        if b.frac > a.frac:
            notes.append(f"non-monotone: fraction {a.frac:.3f} at {c1:g} but {b.frac:.3f} at {c2:g}")
    return ThresholdEstimate((lo + hi) / 2, lo, hi, pred, seen, notes)


@dataclass
class PredictionReport:
    rho: RhoStarReport
    estimate: ThresholdEstimate | None = None

    @property
    def regime(self) -> str:
        return classify(self.rho.rho_star)

    def text(self) -> str:
        r = self.rho
        G = r.digraphon
        sp = G.space
        lines = [f"rho* = {r.rho_star:.12g}", f"1/rho* = {r.threshold_scale:.12g}"]
        if self.regime == "critical":
            lines.append("regime at scale 1: critical - no prediction")
        else:
            lines.append(f"regime at scale 1: {self.regime}")
        d = r.decomposition
        frag = ", ".join(sp.block_name(b) for b in d.fragmented.sorted()) or "-"
        lines.append(f"fragmented blocks: {frag}")
        for i, comp in enumerate(d.components):
            names = ", ".join(sp.block_name(b) for b in comp.sorted())
            tag = "contradictory" if d.contradictory_flags[i] else "non-contradictory"
            lines.append(f"component {i} ({tag}): {names}")
            if i in r.reports:
                s = r.reports[i]
                lines.append(f"  rho = {s.rho:.12g}, period = {s.period}, residual = {s.residual:.2e}, "
                             f"converged = {s.converged}")
                for note in s.notes:
                    lines.append(f"  note: {note}")
        if self.estimate is not None:
            e = self.estimate
            lines.append(f"empirical threshold = {e.estimate:.6g} in [{e.lo:.6g}, {e.hi:.6g}] "
                         f"(predicted {e.predicted:.6g})")
            for note in e.notes:
                lines.append(f"  note: {note}")
        return "\n".join(lines)


def compare_to_prediction(W: BlockKernel, estimate: ThresholdEstimate | None = None) -> PredictionReport:
    return PredictionReport(rho_star(W), estimate)


# ---------------------------------------------------------------------------
# marginal equality


@dataclass
class MarginalTest:
    p_value: float
    statistic: float
    patterns: list  # observed patterns (bitmask over F)
    counts_digraph: list
    counts_dagger: list
    degenerate: bool


def check_pair_free(F) -> None:
    arcs = set(F)
    for u, v in arcs:
        if u >> 1 == v >> 1:
            raise ValueError(f"arc {(u, v)} stays on one variable")
        if (v ^ 1, u ^ 1) in arcs:
            raise ValueError(f"F contains the mirrored pair {(u, v)} and {(v ^ 1, u ^ 1)}")


def _pattern(arcs, F) -> int:
    return sum(1 << i for i, e in enumerate(F) if e in arcs)


def marginal_equality_test(W: BlockKernel, n: int, trials: int, F, seed: int = 0) -> MarginalTest:
    """Chi-square homogeneity test of the pattern of ``F``-arcs present in
    G(n, W-arrow) against the implication digraph of the sign-randomised model."""
    F = [tuple(int(x) for x in e) for e in F]
    check_pair_free(F)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    G = implication_digraphon(W)
    a = np.zeros(1 << len(F), dtype=np.int64)
    b = np.zeros(1 << len(F), dtype=np.int64)
    for t in range(trials):
        dg, _ = sample_digraph(n, G, Stream(seed, 0, t))
        a[_pattern(dg.arcs, F)] += 1
        f, _ = sample_formula_dagger(n, W, Stream(seed, 1, t))
        b[_pattern(implication_digraph(f).arcs(), F)] += 1
    keep = np.nonzero(a + b)[0]
    if len(keep) < 2:
        return MarginalTest(1.0, 0.0, keep.tolist(), a[keep].tolist(), b[keep].tolist(), True)
    res = stats.chi2_contingency(np.vstack([a[keep], b[keep]]), correction=False)
    return MarginalTest(float(res.pvalue), float(res.statistic), keep.tolist(),
                        a[keep].tolist(), b[keep].tolist(), False)
