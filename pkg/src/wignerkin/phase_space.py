"""Uniform phase-space grids, trapezoid quadrature and (rotated) marginals.

Grids are indexed ``values[i, j] = W(x_i, p_j)``.  Every reduction sums in a
fixed order (numpy pairwise summation along the contiguous axis), so results
do not depend on BLAS threading.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import kernels
from .errors import NonFiniteValueError, WindowTooSmallError

__all__ = [
    "GridSpec",
    "WignerGrid",
    "Marginal",
    "rasterize",
    "integrate_2d",
    "marginal_along_p",
    "marginal_along_x",
    "rotated_marginal",
    "check_window",
    "write_grid_csv",
    "write_grid_sidecar",
]

DEFAULT_WINDOW = 12.0
DEFAULT_POINTS = 1024
BOUNDARY_REL_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Rectangular window sampled with ``nx`` by ``np_`` equally spaced nodes
    (both end points included)."""

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np_: int

    def __post_init__(self):
        for name in ("x_min", "x_max", "p_min", "p_max"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min ({self.x_min}) must be < x_max ({self.x_max})")
        if not self.p_min < self.p_max:
            raise ValueError(f"p_min ({self.p_min}) must be < p_max ({self.p_max})")
        for name in ("nx", "np_"):
            n = getattr(self, name)
            if int(n) != n or n < 8:
                raise ValueError(f"{name} must be an integer >= 8, got {n!r}")
            object.__setattr__(self, name, int(n))

    @classmethod
    def symmetric(cls, window: float = DEFAULT_WINDOW, n: int = DEFAULT_POINTS,
                  p_window: float | None = None, odd: bool = True) -> "GridSpec":
        """Square-ish window ``[-window, window]`` in x (and ``p_window`` in p).

        With ``odd`` set (the default) an even ``n`` is bumped to ``n + 1`` so
        that x = 0 and p = 0 are grid lines.
        """
        if not window > 0:
            raise ValueError(f"window must be positive, got {window!r}")
        pw = window if p_window is None else p_window
        if not pw > 0:
            raise ValueError(f"p_window must be positive, got {p_window!r}")
        if odd and n % 2 == 0:
            n += 1
        return cls(-window, window, -pw, pw, n, n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np_ - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np_)

    @property
    def wx(self) -> np.ndarray:
        return _trapezoid_weights(self.nx, self.dx)

    @property
    def wp(self) -> np.ndarray:
        return _trapezoid_weights(self.np_, self.dp)

    def x_index(self, x: float) -> int | None:
        """Index of the node at ``x``, or None if ``x`` is not a grid line."""
        k = (x - self.x_min) / self.dx
        i = int(round(k))
        if 0 <= i < self.nx and abs(k - i) < 1e-9:
            return i
        return None

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "p_min": self.p_min,
                "p_max": self.p_max, "nx": self.nx, "np": self.np_}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(d["x_min"], d["x_max"], d["p_min"], d["p_max"], d["nx"], d["np"])


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _trapz2(values: np.ndarray, wx: np.ndarray, wp: np.ndarray) -> float:
    return float(np.sum(np.sum(values * wp, axis=1) * wx))


@dataclass(frozen=True)
class WignerGrid:
    spec: GridSpec
    values: np.ndarray
    convention_tag: str = ""
    integral: float = field(init=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != (self.spec.nx, self.spec.np_):
            raise ValueError(f"values shape {v.shape} does not match grid "
                             f"({self.spec.nx}, {self.spec.np_})")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValueError("Wigner grid contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "integral", _trapz2(v, self.spec.wx, self.spec.wp))

    def column(self, x: float) -> np.ndarray:
        """W(x, p) along p at the grid line ``x``."""
        i = self.spec.x_index(x)
        if i is None:
            raise ValueError(f"x={x} is not a grid line of {self.spec}")
        return self.values[i]


@dataclass(frozen=True)
class Marginal:
    axis_values: np.ndarray
    density: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.axis_values) != len(self.density):
            raise ValueError("axis_values and density differ in length")

    def integral(self) -> float:
        a = self.axis_values
        return float(np.sum(0.5 * (self.density[1:] + self.density[:-1]) * np.diff(a)))


def rasterize(f: Callable, spec: GridSpec, convention_tag: str | None = None) -> WignerGrid:
    """Sample the evaluator ``f(x, p)`` on every node of ``spec``.

    Evaluators exposing ``raster(xs, ps)`` are filled by the kernel backend;
    anything else is called once on broadcast coordinate arrays.
    """
    xs, ps = spec.xs, spec.ps
    if hasattr(f, "raster"):
        values = f.raster(xs, ps)
    else:
        values = np.broadcast_to(np.asarray(f(xs[:, None], ps[None, :]), dtype=float),
                                 (spec.nx, spec.np_))
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"evaluator {f!r} returned non-finite values")
    if convention_tag is None:
        convention_tag = getattr(f, "convention_tag", "")
    return WignerGrid(spec, values, convention_tag)


def integrate_2d(g: WignerGrid, weight: Callable | None = None) -> float:
    """Trapezoid value of the double integral of ``weight(x, p) * W(x, p)``."""
    if weight is None:
        return g.integral
    spec = g.spec
    w = np.broadcast_to(np.asarray(weight(spec.xs[:, None], spec.ps[None, :]), dtype=float),
                        g.values.shape)
    return _trapz2(w * g.values, spec.wx, spec.wp)


def marginal_along_p(g: WignerGrid) -> Marginal:
    """Position density pi_0(x): W integrated over p at every x node."""
    return Marginal(g.spec.xs, np.sum(g.values * g.spec.wp, axis=1), "x")


def marginal_along_x(g: WignerGrid) -> Marginal:
    """Momentum density: W integrated over x at every p node."""
    spec = g.spec
    return Marginal(spec.ps, np.sum(g.values.T * spec.wx, axis=1), "p")


def check_window(g: WignerGrid, rel_tol: float = BOUNDARY_REL_TOL) -> None:
    """Raise ``WindowTooSmallError`` if |W| on the window edge exceeds
    ``rel_tol`` times its peak."""
    v = g.values
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        return
    edge = max(np.max(np.abs(v[0])), np.max(np.abs(v[-1])),
               np.max(np.abs(v[:, 0])), np.max(np.abs(v[:, -1])))
    if edge > rel_tol * peak:
        raise WindowTooSmallError(
            f"boundary |W| is {edge / peak:.3g} of the peak (limit {rel_tol:g}); "
            f"enlarge the grid window {g.spec.to_dict()}")


def _axis_angle(theta: float) -> int | None:
    quarter = theta / (0.5 * math.pi)
    k = round(quarter)
    if abs(quarter - k) < 1e-14:
        return k % 4
    return None


def _is_square_symmetric(spec: GridSpec) -> bool:
    return (spec.nx == spec.np_ and math.isclose(spec.x_min, -spec.x_max, rel_tol=1e-12)
            and math.isclose(spec.p_min, -spec.p_max, rel_tol=1e-12)
            and math.isclose(spec.x_max, spec.p_max, rel_tol=1e-12))


def _shift_rows(values: np.ndarray, h: float, shifts: np.ndarray) -> np.ndarray:
    """``out[:, j](x) = values[:, j](x + shifts[j])`` by a Fourier phase shift."""
    n = values.shape[0]
    k = 2.0 * np.pi * np.fft.rfftfreq(n, h)
    spectrum = np.fft.rfft(values, axis=0)
    spectrum *= np.exp(1j * np.outer(k, shifts))
    return np.fft.irfft(spectrum, n=n, axis=0)


def _rotate_fft(values: np.ndarray, nodes: np.ndarray, h: float, theta: float) -> np.ndarray:
    """Samples of ``W(x cos - p sin, x sin + p cos)`` on the same square grid.

    Three shears x -> x + a p, p -> p + b x, x -> x + a p with
    a = -tan(theta/2), b = sin(theta) compose to the rotation.  Each shear
    translates whole rows, which leaves every row sum unchanged.
    """
    a = -math.tan(0.5 * theta)
    b = math.sin(theta)
    w = _shift_rows(values, h, a * nodes)
    w = _shift_rows(w.T, h, b * nodes).T
    return _shift_rows(w, h, a * nodes)


def rotated_marginal(g: WignerGrid, theta: float, check: bool = True) -> Marginal:
    """Density of the rotated quadrature ``x cos(theta) + p sin(theta)``.

    Multiples of pi/2 reduce to the axis marginals.  On square grids centred
    at the origin the remaining angle is brought into [-pi/4, pi/4] with
    exact quarter turns of the node array and W is rotated by three Fourier
    shears, so the total mass equals the grid mass to rounding and the
    density is spectrally accurate.  W must have decayed well inside the
    window, since the shears wrap periodically.  Other grids integrate along
    each line with bilinear interpolation (zero outside the window) on a
    symmetric line grid with spacing ``min(dx, dp)``.
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    if check:
        check_window(g)
    axis = _axis_angle(theta)
    if axis is not None:
        if axis % 2 == 0:
            m = marginal_along_p(g)
        else:
            m = marginal_along_x(g)
        if axis >= 2:
            return Marginal(-m.axis_values[::-1], m.density[::-1].copy(), f"theta={theta!r}")
        return Marginal(m.axis_values, m.density, f"theta={theta!r}")

    spec = g.spec
    if _is_square_symmetric(spec):
        quarters = round(theta / (0.5 * math.pi))
        rest = theta - quarters * 0.5 * math.pi
        # W(R_{k pi/2} v): one quarter turn maps node (i, j) to (n-1-j, i)
        v = np.rot90(g.values, -(quarters % 4))
        rotated = _rotate_fft(v, spec.xs, spec.dx, rest)
        density = np.sum(rotated * spec.wp, axis=1)
        return Marginal(spec.xs.copy(), density, f"theta={theta!r}")

    h = min(spec.dx, spec.dp)
    reach = max(math.hypot(x, p) for x in (spec.x_min, spec.x_max)
                for p in (spec.p_min, spec.p_max))
    m = int(math.ceil(reach / h))
    q = np.arange(-m, m + 1) * h
    wu = _trapezoid_weights(q.size, h)
    density = kernels.line_integrals(g.values, spec.x_min, spec.dx, spec.p_min, spec.dp,
                                     q, q, wu, math.cos(theta), math.sin(theta))
    return Marginal(q, density, f"theta={theta!r}")


def write_grid_csv(g: WignerGrid, path) -> None:
    """One ``x,p,w`` row per cell, x-major, 17 significant digits."""
    spec = g.spec
    xs, ps = spec.xs, spec.ps
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "p", "w"])
        for i, x in enumerate(xs):
            xf = f"{x:.17g}"
            row = g.values[i]
            writer.writerows([xf, f"{p:.17g}", f"{w:.17g}"] for p, w in zip(ps, row))


def write_grid_sidecar(g: WignerGrid, path, extra: dict | None = None) -> None:
    doc = {"grid": g.spec.to_dict(), "convention": g.convention_tag,
           "integral": g.integral}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
