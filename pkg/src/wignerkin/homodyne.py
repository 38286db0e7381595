"""Simulated balanced homodyne detection as a Wigner-negativity witness.

Rotated quadratures ``x_theta = x cos(theta) + p sin(theta)`` are sampled
from the marginals of a Wigner grid.  Scaling by ``1 / cos(theta)`` gives
``chi_tau = x + p tau`` with ``tau = tan(theta)``, i.e. the position after a
unit-mass free flight of duration tau, so the curvature of ``<|chi_tau|>`` at
tau = 0 equals ``2 int p^2 W(0, p) dp``.  For a nonnegative W it cannot be
negative.
"""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import NonpositiveMarginalError
from .phase_space import WignerGrid, integrate_2d, rotated_marginal

__all__ = [
    "QuadratureAngle",
    "QuadratureSampler",
    "HomodyneRun",
    "Verdict",
    "CurvatureEstimate",
    "HomodyneExperiment",
    "sample_quadrature",
    "estimate_abs_chi",
    "abs_chi_direct",
    "abs_chi_quadrature",
    "curvature_witness",
    "run_record",
    "dumps_record",
    "write_samples_csv",
]

log = logging.getLogger(__name__)

NEGATIVE_MASS_TOL = 1e-6
DEFAULT_RESAMPLES = 10_000
DEFAULT_CONFIDENCE = 0.99
DEFAULT_BLOCKS = 256
DEFAULT_TAU_STEP = 0.2


@dataclass(frozen=True)
class QuadratureAngle:
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and abs(self.theta) < 0.5 * math.pi):
            raise ValueError(f"|theta| must be < pi/2 so that cos(theta) > 0, got {self.theta!r}")

    @classmethod
    def from_tau(cls, tau: float) -> "QuadratureAngle":
        return cls(math.atan(tau))

    @property
    def tau(self) -> float:
        return math.tan(self.theta)


class QuadratureSampler:
    """Inverse-CDF sampler for one rotated quadrature of a Wigner grid.

    The marginal is tabulated on the node grid of ``rotated_marginal``;
    slightly negative interpolation artefacts (total below
    ``NEGATIVE_MASS_TOL`` of the mass) are clipped, anything larger is an
    error.  Draws interpolate the tabulated CDF linearly.
    """

    def __init__(self, g: WignerGrid, angle: QuadratureAngle):
        self.angle = angle
        m = rotated_marginal(g, angle.theta)
        q = np.asarray(m.axis_values, dtype=float)
        dens = np.asarray(m.density, dtype=float)
        widths = np.diff(q)
        total = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * widths))
        neg = np.minimum(dens, 0.0)
        neg_mass = -float(np.sum(0.5 * (neg[1:] + neg[:-1]) * widths))
        if not total > 0:
            raise NonpositiveMarginalError(
                f"marginal at theta={angle.theta!r} has nonpositive total mass {total:.3g}")
        if neg_mass > NEGATIVE_MASS_TOL * total:
            raise NonpositiveMarginalError(
                f"marginal at theta={angle.theta!r} has negative mass {neg_mass:.3g} "
                f"({neg_mass / total:.3g} of total)")
        dens = np.maximum(dens, 0.0)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * widths)))
        self.q = q
        self.cdf = cdf / cdf[-1]
        self.marginal_mass = total

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(int(n))
        cdf, q = self.cdf, self.q
        k = np.searchsorted(cdf, u, side="right") - 1
        k = np.clip(k, 0, cdf.size - 2)
        frac = (u - cdf[k]) / (cdf[k + 1] - cdf[k])
        return q[k] + frac * (q[k + 1] - q[k])


def sample_quadrature(g: WignerGrid, a: QuadratureAngle, n: int, seed) -> np.ndarray:
    """``n`` homodyne outcomes at angle ``a``; deterministic given ``seed``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return QuadratureSampler(g, a).sample(n, np.random.default_rng(seed))


def estimate_abs_chi(samples: np.ndarray, a: QuadratureAngle) -> tuple[float, float]:
    """Sample mean of ``|x_theta| / cos(theta)`` and its standard error."""
    v = np.abs(np.asarray(samples, dtype=float)) / math.cos(a.theta)
    if v.size == 0:
        raise ValueError("no samples")
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, se


def abs_chi_direct(g: WignerGrid, tau: float) -> float:
    """Trapezoid value of ``int int |x + p tau| W``."""
    return integrate_2d(g, lambda x, p: np.abs(x + p * tau))


def abs_chi_quadrature(g: WignerGrid, tau: float) -> float:
    """``<|chi_tau|>`` via the substitution ``x' = x + p tau``.

    Every fixed-p row is translated by ``p tau`` with an exact Fourier phase
    shift, so the kink of ``|x'|`` sits on the x = 0 grid line instead of
    cutting cells obliquely.  Assumes W has decayed at the x edges.
    """
    spec = g.spec
    n = spec.nx
    k = 2.0 * np.pi * np.fft.rfftfreq(n, spec.dx)
    spectrum = np.fft.rfft(g.values, axis=0)
    shifted = np.fft.irfft(spectrum * np.exp(-1j * np.outer(k, spec.ps * tau)), n=n, axis=0)
    weight = np.abs(spec.xs) * spec.wx
    return float(np.sum(np.sum(shifted * spec.wp, axis=1) * weight))


class Verdict(enum.Enum):
    CLASSICAL_CONSISTENT = "ClassicalConsistent"
    NEGATIVITY_WITNESSED = "NegativityWitnessed"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CurvatureEstimate:
    tau_values: np.ndarray
    abs_chi_means: np.ndarray
    abs_chi_std_errors: np.ndarray
    curvature_at_zero: float
    std_error: float
    ci_low: float
    ci_high: float
    confidence: float
    tau_step: float
    verdict: Verdict
    expected_curvature: float | None = None
    resolvable: bool = True

    def to_dict(self) -> dict:
        return {
            "tau_values": [float(t) for t in self.tau_values],
            "abs_chi_means": [float(v) for v in self.abs_chi_means],
            "abs_chi_std_errors": [float(v) for v in self.abs_chi_std_errors],
            "curvature_at_zero": self.curvature_at_zero,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "tau_step": self.tau_step,
            "verdict": self.verdict.value,
            "expected_curvature": self.expected_curvature,
            "resolvable": self.resolvable,
        }


@dataclass
class HomodyneRun:
    angles: list
    samples_per_angle: int
    seed: int
    sample_stats: list = field(default_factory=list)
    samples: list = field(default_factory=list)


def _central_offsets(taus: np.ndarray) -> tuple[int, int, int, float]:
    zero = np.flatnonzero(taus == 0.0)
    if zero.size != 1:
        raise ValueError("tau grid must contain 0 exactly once (degenerate tau grid)")
    for h in np.sort(taus[taus > 0]):
        minus = np.flatnonzero(taus == -h)
        if minus.size:
            return int(minus[0]), int(zero[0]), int(np.flatnonzero(taus == h)[0]), float(h)
    raise ValueError("tau grid needs a symmetric pair +-h around 0 (degenerate tau grid)")


def _block_bootstrap_means(values: np.ndarray, resamples: int, rng: np.random.Generator,
                           blocks: int) -> np.ndarray:
    """Bootstrap replicates of the mean of ``values``.

    The sorted sample is cut into ``blocks`` equal-count quantile blocks;
    multinomial resampling counts are drawn per block and the spread inside
    each block is restored with a Gaussian term.  With one sample per block
    this is the ordinary nonparametric bootstrap.
    """
    n = values.size
    v = np.sort(values)
    nb = min(blocks, n)
    edges = np.round(np.linspace(0, n, nb + 1)).astype(np.intp)
    sizes = np.diff(edges)
    means = np.add.reduceat(v, edges[:-1]) / sizes
    dev = v - np.repeat(means, sizes)
    var = np.add.reduceat(dev * dev, edges[:-1]) / sizes
    counts = rng.multinomial(n, sizes / n, size=resamples).astype(float)
    reps = np.sum(counts * means, axis=1) / n
    spread = np.sqrt(np.sum(counts * var, axis=1)) / n
    return reps + spread * rng.standard_normal(resamples)


class HomodyneExperiment:
    """Reusable curvature-witness setup for one grid and tau schedule.

    Marginals and CDF tables are computed once; each :meth:`run` draws fresh
    samples.  Angle ``k`` uses its own random streams spawned from
    ``(seed, k)``, so results do not depend on evaluation order.
    """

    def __init__(self, g: WignerGrid, tau_grid: Sequence[float], samples_per_angle: int,
                 confidence: float = DEFAULT_CONFIDENCE, resamples: int = DEFAULT_RESAMPLES,
                 blocks: int = DEFAULT_BLOCKS):
        if samples_per_angle < 1:
            raise ValueError("samples_per_angle must be positive")
        if not 0.0 < confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        if resamples < 1 or blocks < 1:
            raise ValueError("resamples and blocks must be positive")
        self.grid = g
        self.taus = np.asarray(tau_grid, dtype=float)
        self.i_minus, self.i_zero, self.i_plus, self.h = _central_offsets(self.taus)
        self.angles = [QuadratureAngle.from_tau(float(t)) for t in self.taus]
        self.samplers = [QuadratureSampler(g, a) for a in self.angles]
        self.samples_per_angle = int(samples_per_angle)
        self.confidence = float(confidence)
        self.resamples = int(resamples)
        self.blocks = int(blocks)
        # scale normalised sample averages back to the grid's own normalisation
        self.mass = g.integral
        i0 = g.spec.x_index(0.0)
        if i0 is not None:
            col = g.values[i0]
            self.expected_curvature = 2.0 * float(np.sum(col * g.spec.wp * g.spec.ps ** 2))
        else:
            self.expected_curvature = None

    def run(self, seed: int, keep_samples: bool = False) -> tuple[CurvatureEstimate, HomodyneRun]:
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        streams = np.random.SeedSequence(seed).spawn(len(self.angles))
        n = self.samples_per_angle
        means, ses, reps, stats, kept = [], [], [], [], []
        centre = {self.i_minus, self.i_zero, self.i_plus}
        for k, (angle, sampler, ss) in enumerate(zip(self.angles, self.samplers, streams)):
            sample_ss, boot_ss = ss.spawn(2)
            x = sampler.sample(n, np.random.default_rng(sample_ss))
            m, se = estimate_abs_chi(x, angle)
            stats.append((float(np.mean(x)), float(np.var(x, ddof=1)) if n > 1 else 0.0))
            means.append(m * self.mass)
            ses.append(se * self.mass)
            if k in centre:
                chi = np.abs(x) / math.cos(angle.theta)
                reps.append(_block_bootstrap_means(chi, self.resamples,
                                                   np.random.default_rng(boot_ss), self.blocks))
            else:
                reps.append(None)
            if keep_samples:
                kept.append(x)

        means = np.array(means)
        ses = np.array(ses)
        h2 = self.h * self.h
        im, i0, ip = self.i_minus, self.i_zero, self.i_plus
        curv = (means[im] - 2.0 * means[i0] + means[ip]) / h2
        se_curv = math.sqrt(ses[im] ** 2 + 4.0 * ses[i0] ** 2 + ses[ip] ** 2) / h2
        boot = self.mass * (reps[im] - 2.0 * reps[i0] + reps[ip]) / h2
        alpha = 1.0 - self.confidence
        lo, hi = np.quantile(boot, [0.5 * alpha, 1.0 - 0.5 * alpha])
        # percentile bounds can miss the point estimate for tiny samples
        lo, hi = min(float(lo), curv), max(float(hi), curv)
        if hi < 0.0:
            verdict = Verdict.NEGATIVITY_WITNESSED
        elif lo > 0.0:
            verdict = Verdict.CLASSICAL_CONSISTENT
        else:
            verdict = Verdict.INCONCLUSIVE

        resolvable = True
        if self.expected_curvature is not None:
            noise = math.sqrt(ses[im] ** 2 + 4.0 * ses[i0] ** 2 + ses[ip] ** 2)
            resolvable = abs(self.expected_curvature) * h2 >= 10.0 * noise
            if not resolvable:
                log.warning("tau step %g resolves the expected curvature %.4g only at "
                            "%.2g x the sampling noise (want >= 10)", self.h,
                            self.expected_curvature,
                            abs(self.expected_curvature) * h2 / noise if noise else math.inf)

        est = CurvatureEstimate(self.taus.copy(), means, ses, curv, se_curv, lo, hi,
                                self.confidence, self.h, verdict,
                                self.expected_curvature, resolvable)
        run = HomodyneRun(list(self.angles), n, seed, stats, kept)
        return est, run


def curvature_witness(g: WignerGrid, tau_grid: Sequence[float] = (-DEFAULT_TAU_STEP, 0.0,
                                                                   DEFAULT_TAU_STEP),
                      n: int = 1_000_000, seed: int = 0,
                      confidence: float = DEFAULT_CONFIDENCE,
                      resamples: int = DEFAULT_RESAMPLES) -> CurvatureEstimate:
    """Estimate the curvature of ``<|chi_tau|>`` at tau = 0 from sampled data.

    The point estimate is the central second difference over the innermost
    symmetric offsets ``+-h``; its confidence interval is a percentile
    bootstrap resampling within each angle's sample set.
    """
    return HomodyneExperiment(g, tau_grid, n, confidence, resamples).run(seed)[0]


def run_record(est: CurvatureEstimate, run: HomodyneRun, grid: WignerGrid,
               state: dict) -> dict:
    """JSON-ready record of a homodyne run; key order is fixed."""
    per_angle = []
    for k, angle in enumerate(run.angles):
        entry = {"theta": angle.theta, "tau": angle.tau,
                 "abs_chi_mean": float(est.abs_chi_means[k]),
                 "abs_chi_std_error": float(est.abs_chi_std_errors[k])}
        if run.sample_stats:
            entry["sample_mean"], entry["sample_variance"] = run.sample_stats[k]
        per_angle.append(entry)
    return {
        "state": state,
        "convention": grid.convention_tag,
        "grid": grid.spec.to_dict(),
        "grid_integral": grid.integral,
        "angles": [{"theta": a.theta, "tau": a.tau} for a in run.angles],
        "samples_per_angle": run.samples_per_angle,
        "seed": run.seed,
        "per_angle": per_angle,
        "curvature": est.to_dict(),
        "curvature_at_zero": est.curvature_at_zero,
        "ci": [est.ci_low, est.ci_high],
        "verdict": est.verdict.value,
        "kernel_backend": kernels.BACKEND,
    }


def dumps_record(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def write_samples_csv(run: HomodyneRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "sample"])
        for angle, x in zip(run.angles, run.samples):
            th = f"{angle.theta:.17g}"
            w.writerows([th, f"{v:.17g}"] for v in x)
