"""Closed-form Wigner functions of coherent and even-cat states.

Units have hbar = 1 and the dimensionless quadratures x, p.  All evaluators
broadcast over numpy arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "Convention",
    "PhasePoint",
    "CatStateParams",
    "CoherentStateParams",
    "eval_cat_wigner",
    "eval_coherent_wigner",
    "cat_norm_integral",
    "CatWigner",
    "CoherentWigner",
]


class Convention(enum.Enum):
    """Overall scale applied to the even-cat Wigner function.

    ``AS_PRINTED`` is the three-term expression for |a> + |-a> itself,
    integrating to ``2 + 2 exp(-(x0^2 + p0^2))``.  ``PAPER_SCALED`` halves it,
    which is the scale under which the closed-form pi_2(0; t) holds exactly.
    ``UNIT_NORM`` divides by the full phase-space integral.
    """

    AS_PRINTED = "as-printed"
    PAPER_SCALED = "paper"
    UNIT_NORM = "unit-norm"

    @classmethod
    def parse(cls, value: "Convention | str") -> "Convention":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"asprinted": "as-printed", "paper-scaled": "paper",
                   "paperscaled": "paper", "unitnorm": "unit-norm"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown convention {value!r}; expected one of "
                         f"{[m.value for m in cls]}")


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        _check_finite(x=self.x, p=self.p)


@dataclass(frozen=True)
class CoherentStateParams:
    x0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        _check_finite(x0=self.x0, p0=self.p0)


@dataclass(frozen=True)
class CatStateParams:
    """Displacement of the even superposition |a> + |-a>.

    The second Gaussian is centred at (-x0, -p0); the state is symmetric under
    a -> -a, so a single displacement pair describes it.
    """

    x0: float = math.sqrt(2.0)
    p0: float = 0.0
    convention: Convention = Convention.PAPER_SCALED

    def __post_init__(self):
        _check_finite(x0=self.x0, p0=self.p0)
        object.__setattr__(self, "convention", Convention.parse(self.convention))

    @property
    def scale(self) -> float:
        """Factor multiplying the as-printed expression."""
        if self.convention is Convention.AS_PRINTED:
            return 1.0
        if self.convention is Convention.PAPER_SCALED:
            return 0.5
        return 1.0 / cat_norm_integral(self)


def cat_norm_integral(s: CatStateParams) -> float:
    """Phase-space integral of the as-printed cat Wigner function.

    Equals the squared norm of |a> + |-a>; the convention field is ignored.
    """
    return 2.0 + 2.0 * math.exp(-(s.x0 * s.x0 + s.p0 * s.p0))


def _cat_as_printed(x, p, x0, p0):
    return (np.exp(-(p - p0) ** 2 - (x - x0) ** 2)
            + np.exp(-(p + p0) ** 2 - (x + x0) ** 2)
            + 2.0 * np.exp(-x * x - p * p) * np.cos(2.0 * (p0 * x - p * x0))) / np.pi


def eval_cat_wigner(pt: PhasePoint, s: CatStateParams) -> float:
    return float(s.scale * _cat_as_printed(pt.x, pt.p, s.x0, s.p0))


def eval_coherent_wigner(pt: PhasePoint, s: CoherentStateParams) -> float:
    return math.exp(-(pt.p - s.p0) ** 2 - (pt.x - s.x0) ** 2) / math.pi


class CatWigner:
    """Vectorised evaluator ``W(x, p)`` for the even-cat state.

    Instances are immutable and may be shared between threads.  The
    ``raster`` hook lets grid builders use the compiled kernel, optionally
    composed with a free-flight shear ``x -> x - shear * p``.
    """

    def __init__(self, params: CatStateParams | None = None):
        self.params = params if params is not None else CatStateParams()
        self._scale = self.params.scale

    @property
    def convention_tag(self) -> str:
        return self.params.convention.value

    @property
    def total_integral(self) -> float:
        return self._scale * cat_norm_integral(self.params)

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return self._scale * _cat_as_printed(x, p, self.params.x0, self.params.p0)

    def raster(self, xs: np.ndarray, ps: np.ndarray, shear: float = 0.0) -> np.ndarray:
        return kernels.cat_grid(xs, ps, self.params.x0, self.params.p0,
                                shear, self._scale)

    def __repr__(self):
        return f"CatWigner({self.params!r})"


class CoherentWigner:
    """Vectorised evaluator for a coherent state; nonnegative everywhere."""

    convention_tag = "unit-norm"
    total_integral = 1.0

    def __init__(self, params: CoherentStateParams | None = None):
        self.params = params if params is not None else CoherentStateParams()

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return np.exp(-(p - self.params.p0) ** 2 - (x - self.params.x0) ** 2) / np.pi

    def raster(self, xs: np.ndarray, ps: np.ndarray, shear: float = 0.0) -> np.ndarray:
        return kernels.gauss_grid(xs, ps, self.params.x0, self.params.p0, shear, 1.0)

    def __repr__(self):
        return f"CoherentWigner({self.params!r})"
