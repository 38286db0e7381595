"""Free-particle evolution and the absolute-deviation diagnostics.

Free flight acts on a Wigner function by the shear ``W(x, p; t) =
W(x - p t / m, p; 0)``.  It is applied to evaluators, never to a stored lattice,
so an evolved grid carries no interpolation error.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import IllConditionedConditionalError
from .phase_space import (GridSpec, WignerGrid, check_window, integrate_2d,
                          rasterize)

__all__ = [
    "EvolutionSpec",
    "FreeEvolved",
    "MomentProfile",
    "AbsDevCurve",
    "ClassicalityReport",
    "evolve_free",
    "moment_profile",
    "conditional_kinetic_energy",
    "pi2_origin_analytic",
    "pi2_origin_numeric",
    "pi2_zero_crossing",
    "negativity_window",
    "default_grid_for_time",
    "absdev_point",
    "absdev_curve",
    "absdev_finite_differences",
    "classicality_check",
    "write_moment_csv",
    "write_absdev_csv",
]

MAX_MOMENT_ORDER = 4
CONDITIONAL_FLOOR = 1e-12
TOL_NEG = 1e-6


@dataclass(frozen=True)
class EvolutionSpec:
    mass: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be positive and finite, got {self.mass!r}")
        if not math.isfinite(self.t):
            raise ValueError(f"t must be finite, got {self.t!r}")

    @property
    def shear(self) -> float:
        return self.t / self.mass


class FreeEvolved:
    """Evaluator ``(x, p) -> f(x - shear * p, p)``."""

    def __init__(self, base: Callable, shear: float):
        self.base = base
        self.shear = float(shear)

    @property
    def convention_tag(self) -> str:
        return getattr(self.base, "convention_tag", "")

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return self.base(x - self.shear * p, p)

    def raster(self, xs: np.ndarray, ps: np.ndarray, shear: float = 0.0) -> np.ndarray:
        total = self.shear + shear
        if hasattr(self.base, "raster"):
            return self.base.raster(xs, ps, total)
        return np.broadcast_to(
            np.asarray(self.base(xs[:, None] - total * ps[None, :], ps[None, :]), dtype=float),
            (xs.size, ps.size))

    def __repr__(self):
        return f"FreeEvolved({self.base!r}, shear={self.shear!r})"


def evolve_free(f: Callable, ev: EvolutionSpec) -> Callable:
    """Return the evaluator of ``f`` after free flight for ``ev.t``."""
    if ev.t == 0.0:
        return f
    if isinstance(f, FreeEvolved):
        return FreeEvolved(f.base, f.shear + ev.shear)
    return FreeEvolved(f, ev.shear)


@dataclass(frozen=True)
class MomentProfile:
    x_values: np.ndarray
    pi_values: np.ndarray
    order_n: int
    t: float
    convention_tag: str = ""

    def at(self, x: float) -> float:
        """Value at ``x``, linearly interpolated between nodes."""
        xs = self.x_values
        if not xs[0] <= x <= xs[-1]:
            raise ValueError(f"x={x} outside profile range [{xs[0]}, {xs[-1]}]")
        return float(np.interp(x, xs, self.pi_values))


def moment_profile(g: WignerGrid, n: int, t: float = 0.0) -> MomentProfile:
    """Momentum moment ``pi_n(x) = int p^n W(x, p) dp`` at every x node."""
    if int(n) != n or not 0 <= n <= MAX_MOMENT_ORDER:
        raise ValueError(f"moment order must be an integer in 0..{MAX_MOMENT_ORDER}, got {n!r}")
    spec = g.spec
    ps = spec.ps
    w = spec.wp * ps ** int(n)
    return MomentProfile(spec.xs, np.sum(g.values * w, axis=1), int(n), float(t),
                         g.convention_tag)


def conditional_kinetic_energy(g: WignerGrid, x: float, mass: float = 1.0,
                               floor: float = CONDITIONAL_FLOOR) -> float:
    """Classical reading of ``pi_2 / (2 m pi_0)`` at position ``x``.

    Negative values cannot arise from a nonnegative phase-space density.
    """
    if not mass > 0:
        raise ValueError("mass must be positive")
    i = g.spec.x_index(x)
    if i is not None:
        col = g.values[i]
        wp, ps = g.spec.wp, g.spec.ps
        pi0 = float(np.sum(col * wp))
        pi2 = float(np.sum(col * wp * ps * ps))
    else:
        pi0 = moment_profile(g, 0).at(x)
        pi2 = moment_profile(g, 2).at(x)
    if abs(pi0) < floor:
        raise IllConditionedConditionalError(
            f"|pi_0({x})| = {abs(pi0):.3g} is below the floor {floor:g}; "
            "the conditional average is undefined where the position density vanishes")
    return pi2 / (2.0 * mass * pi0)


def pi2_origin_analytic(t: float, x0: float) -> float:
    """Closed-form pi_2(0; t) of the even-cat state with p0 = 0 and m = 1.

    Normalised so that it equals half the value obtained from the three-term
    cat Wigner function as written (i.e. the paper-scaled convention).
    """
    s = 1.0 + t * t
    return (math.exp(-x0 * x0 / s) * (1.0 - x0 * x0 + t * t + x0 * x0 * t * t)
            / (s ** 2.5 * math.sqrt(math.pi)))


def negativity_window(x0: float) -> float | None:
    """End of the interval 0 <= t < t* on which pi_2(0; t) < 0, or None."""
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    if x0 <= 1.0:
        return None
    return math.sqrt((x0 * x0 - 1.0) / (x0 * x0 + 1.0))


def default_grid_for_time(t: float, n: int = 1024) -> GridSpec:
    """Desk-scale grid: +-12 window up to |t| = 1.5, +-16 beyond."""
    return GridSpec.symmetric(12.0 if abs(t) <= 1.5 else 16.0, n)


def _zero_column(spec: GridSpec) -> int:
    i = spec.x_index(0.0)
    if i is None:
        raise ValueError("x = 0 must be a grid line for this diagnostic; use a window "
                         "symmetric in x with an odd node count (GridSpec.symmetric)")
    return i


def pi2_origin_numeric(f: Callable, t: float, mass: float = 1.0,
                       spec: GridSpec | None = None) -> float:
    """pi_2(0; t) from the rasterised evolved state."""
    spec = spec if spec is not None else default_grid_for_time(t / mass)
    g = rasterize(evolve_free(f, EvolutionSpec(mass, t)), spec)
    return float(moment_profile(g, 2, t).pi_values[_zero_column(spec)])


def pi2_zero_crossing(f: Callable, bracket: tuple[float, float], mass: float = 1.0,
                      spec: GridSpec | None = None, xtol: float = 1e-12) -> float:
    """Time at which the numerical pi_2(0; t) changes sign inside ``bracket``."""
    return brentq(lambda t: pi2_origin_numeric(f, t, mass, spec), *bracket, xtol=xtol)


@dataclass(frozen=True)
class AbsDevCurve:
    t_values: np.ndarray
    absdev: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    mass: float = 1.0


def absdev_point(f: Callable, t: float, mass: float, spec: GridSpec,
                 check: bool = True) -> tuple[float, float, float]:
    """<|x|>, its first and its second time derivative at time ``t``.

    All three come from one grid of the evolved state; the second derivative
    uses only the x = 0 grid line.
    """
    i0 = _zero_column(spec)
    g = rasterize(evolve_free(f, EvolutionSpec(mass, t)), spec)
    if check:
        check_window(g)
    absdev = integrate_2d(g, lambda x, p: np.abs(x))
    d1 = integrate_2d(g, lambda x, p: p * np.sign(x)) / mass
    ps = spec.ps
    d2 = 2.0 / mass ** 2 * float(np.sum(g.values[i0] * spec.wp * ps * ps))
    return absdev, d1, d2


def absdev_curve(f: Callable, t_values: Sequence[float], mass: float = 1.0,
                 spec: GridSpec | None = None, check: bool = True) -> AbsDevCurve:
    spec = spec if spec is not None else GridSpec.symmetric()
    if not mass > 0:
        raise ValueError("mass must be positive")
    ts = np.asarray(t_values, dtype=float)
    rows = np.array([absdev_point(f, float(t), mass, spec, check) for t in ts]).reshape(-1, 3)
    return AbsDevCurve(ts, rows[:, 0], rows[:, 1], rows[:, 2], float(mass))


def absdev_finite_differences(f: Callable, t: float, step: float = 1e-2,
                              mass: float = 1.0, spec: GridSpec | None = None
                              ) -> tuple[float, float]:
    """Central first and second differences of the numerical <|x|>(t)."""
    spec = spec if spec is not None else GridSpec.symmetric()
    a_m, a_0, a_p = (absdev_point(f, t + k * step, mass, spec)[0] for k in (-1, 0, 1))
    return (a_p - a_m) / (2.0 * step), (a_p - 2.0 * a_0 + a_m) / step ** 2


@dataclass(frozen=True)
class ClassicalityReport:
    violation_times: tuple
    violation_mask: np.ndarray
    tol_neg: float

    @property
    def consistent(self) -> bool:
        return not self.violation_times


def classicality_check(curve: AbsDevCurve, tol_neg: float = TOL_NEG) -> ClassicalityReport:
    """Times where the curvature of <|x|> is negative beyond ``tol_neg``.

    Any such time is impossible for a nonnegative phase-space density in free
    flight.
    """
    mask = np.asarray(curve.d2) < -tol_neg
    return ClassicalityReport(tuple(float(t) for t in curve.t_values[mask]), mask, tol_neg)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_moment_csv(profile: MomentProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", f"pi_{profile.order_n}"])
        w.writerows([_fmt(x), _fmt(v)] for x, v in zip(profile.x_values, profile.pi_values))


def write_absdev_csv(curve: AbsDevCurve, path, report: ClassicalityReport | None = None) -> None:
    header = ["t", "absdev", "d1", "d2"]
    if report is not None:
        header.append("violation_flag")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, t in enumerate(curve.t_values):
            row = [_fmt(t), _fmt(curve.absdev[k]), _fmt(curve.d1[k]), _fmt(curve.d2[k])]
            if report is not None:
                row.append("true" if report.violation_mask[k] else "false")
            w.writerow(row)
