import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import erf

from wignerkin import (CatStateParams, CatWigner, CoherentStateParams, CoherentWigner,
                       Convention, EvolutionSpec, GridSpec, absdev_curve, classicality_check,
                       conditional_kinetic_energy, evolve_free, marginal_along_x,
                       moment_profile, negativity_window, pi2_origin_analytic, rasterize)
from wignerkin import dynamics as dyn
from wignerkin.errors import IllConditionedConditionalError, WindowTooSmallError

SQRT2 = math.sqrt(2.0)
PI2_T0 = -math.exp(-2) / math.sqrt(math.pi)


def cat(convention=Convention.PAPER_SCALED, x0=SQRT2):
    return CatWigner(CatStateParams(x0, 0.0, convention))


def test_evolution_spec_validation():
    assert EvolutionSpec(2.0, 3.0).shear == 1.5
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(ValueError):
            EvolutionSpec(bad, 1.0)
    with pytest.raises(ValueError):
        EvolutionSpec(1.0, math.inf)


class TestEvolveFree:
    def test_identity_at_t0(self):
        f = cat()
        assert evolve_free(f, EvolutionSpec(1.0, 0.0)) is f

    def test_ballistic_drift(self):
        f = CoherentWigner(CoherentStateParams(1.0, 1.0))
        g = evolve_free(f, EvolutionSpec(1.0, 1.0))
        assert g(2.0, 1.0) == pytest.approx(1 / math.pi)
        spec = GridSpec.symmetric(12.0, 512)
        grid = rasterize(g, spec)
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        assert spec.xs[i] == pytest.approx(2.0, abs=spec.dx)
        assert spec.ps[j] == pytest.approx(1.0, abs=spec.dp)

    def test_composition(self):
        f = cat()
        once = evolve_free(f, EvolutionSpec(2.0, 1.4))
        twice = evolve_free(evolve_free(f, EvolutionSpec(2.0, 0.6)), EvolutionSpec(2.0, 0.8))
        assert twice.shear == pytest.approx(once.shear)
        assert twice(0.3, -0.4) == pytest.approx(once(0.3, -0.4), rel=1e-13)

    def test_generic_callable(self):
        base = cat()
        f = evolve_free(lambda x, p: base(x, p), EvolutionSpec(1.0, 0.7))
        spec = GridSpec.symmetric(6.0, 64)
        ref = rasterize(evolve_free(base, EvolutionSpec(1.0, 0.7)), spec)
        np.testing.assert_allclose(rasterize(f, spec).values, ref.values, rtol=1e-12, atol=1e-15)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-3, 3), st.floats(1.0, 3))
    def test_momentum_marginal_invariant(self, t, mass):
        # |t/m| <= 3 keeps the sheared state inside a +-16 window
        spec = GridSpec.symmetric(16.0, 512)
        f = cat(Convention.AS_PRINTED)
        m0 = marginal_along_x(rasterize(f, spec)).density
        mt = marginal_along_x(rasterize(evolve_free(f, EvolutionSpec(mass, t)), spec)).density
        np.testing.assert_allclose(mt, m0, rtol=0, atol=1e-8)


class TestMoments:
    def test_first_moment_vanishes(self, cat_grid):
        assert np.max(np.abs(moment_profile(cat_grid, 1).pi_values)) < 1e-10

    def test_second_moment_at_origin(self, cat_grid):
        s = CatStateParams(SQRT2, 0.0, Convention.PAPER_SCALED)
        oracle, _ = integrate.quad(lambda p: p * p * CatWigner(s)(0.0, p), -30, 30)
        assert oracle == pytest.approx(PI2_T0, rel=1e-10)
        assert PI2_T0 == pytest.approx(-0.076355, abs=1e-6)
        prof = moment_profile(cat_grid, 2)
        assert prof.pi_values[512] == pytest.approx(PI2_T0, rel=1e-10)
        assert prof.at(0.0) == prof.pi_values[512]
        assert prof.convention_tag == "paper"

    def test_zeroth_moment_coherent(self, default_spec):
        g = rasterize(CoherentWigner(CoherentStateParams(0.9, 0.4)), default_spec)
        prof = moment_profile(g, 0)
        expected = np.exp(-(prof.x_values - 0.9) ** 2) / math.sqrt(math.pi)
        np.testing.assert_allclose(prof.pi_values, expected, atol=1e-13)

    @pytest.mark.parametrize("n", [-1, 5, 1.5])
    def test_order_range(self, cat_grid, n):
        with pytest.raises(ValueError):
            moment_profile(cat_grid, n)


class TestConditionalKineticEnergy:
    def test_gaussian(self, vacuum_grid):
        assert conditional_kinetic_energy(vacuum_grid, 0.0, 1.0) == pytest.approx(0.25, rel=1e-10)
        assert conditional_kinetic_energy(vacuum_grid, 1.01, 2.0) == pytest.approx(0.125, rel=1e-4)

    @pytest.mark.parametrize("conv", list(Convention))
    def test_cat_negative_for_every_convention(self, default_spec, conv):
        g = rasterize(cat(conv), default_spec)
        ke = conditional_kinetic_energy(g, 0.0, 1.0)
        assert ke < 0
        # ratio is scale free
        pi0 = 2 * (1 + 1) * math.exp(-2) / math.sqrt(math.pi)
        assert ke == pytest.approx(2 * PI2_T0 / (2 * pi0), rel=1e-9)

    def test_zero_grid(self):
        g = rasterize(lambda x, p: 0.0, GridSpec.symmetric(3.0, 16))
        with pytest.raises(IllConditionedConditionalError):
            conditional_kinetic_energy(g, 0.0)


class TestClosedForms:
    def test_pi2_at_t0(self):
        assert pi2_origin_analytic(0.0, SQRT2) == pytest.approx(PI2_T0, rel=1e-15)

    def test_pi2_zero_at_window(self):
        assert abs(pi2_origin_analytic(1 / math.sqrt(3), SQRT2)) < 1e-15

    def test_pi2_decays_as_inverse_cube(self):
        a, b = pi2_origin_analytic(100.0, 2.0), pi2_origin_analytic(200.0, 2.0)
        assert a > 0 and b > 0
        assert a / b == pytest.approx(8.0, rel=1e-3)

    @pytest.mark.parametrize("x0, expected", [
        (SQRT2, 1 / math.sqrt(3)), (3.0, math.sqrt(0.8)), (1.0, None), (0.5, None), (0.0, None)])
    def test_negativity_window(self, x0, expected):
        w = negativity_window(x0)
        if expected is None:
            assert w is None
        else:
            assert w == pytest.approx(expected, abs=1e-15)
        assert negativity_window(3.0) == pytest.approx(0.894427, abs=1e-6)

    @pytest.mark.parametrize("x0", [1.2, SQRT2, 2.0, 3.0])
    def test_window_brackets_sign_change(self, x0):
        w = negativity_window(x0)
        assert pi2_origin_analytic(0.999 * w, x0) < 0 < pi2_origin_analytic(1.001 * w, x0)

    @pytest.mark.parametrize("t, x0", [(0.0, SQRT2), (0.45, 2.0), (1.3, 1.0), (2.2, 3.0)])
    def test_analytic_matches_quadrature_oracle(self, t, x0):
        # independent route: integrate p^2 W(-p t, p) of the paper-scaled state by quad
        f = CatWigner(CatStateParams(x0, 0.0, Convention.PAPER_SCALED))
        oracle, _ = integrate.quad(lambda p: p * p * f(-p * t, p), -40, 40, limit=200,
                                   epsabs=1e-14, epsrel=1e-12)
        assert pi2_origin_analytic(t, x0) == pytest.approx(oracle, rel=1e-9, abs=1e-13)

    @pytest.mark.parametrize("t", [0.0, 0.4, 1.0, 2.5])
    def test_grid_moment_matches_closed_form(self, t):
        f = cat()
        assert dyn.pi2_origin_numeric(f, t) == pytest.approx(pi2_origin_analytic(t, SQRT2),
                                                             rel=1e-6, abs=1e-9)
        g = cat(Convention.AS_PRINTED)
        assert dyn.pi2_origin_numeric(g, t) == pytest.approx(2 * pi2_origin_analytic(t, SQRT2),
                                                             rel=1e-6, abs=1e-9)

    def test_mass_rescales_time(self):
        f = cat()
        assert dyn.pi2_origin_numeric(f, 0.8, mass=2.0) == pytest.approx(
            pi2_origin_analytic(0.4, SQRT2), rel=1e-9)


class TestAbsDev:
    def test_cat_curvature_at_t0(self, default_spec):
        curve = absdev_curve(cat(), [0.0], 1.0, default_spec)
        assert curve.d2[0] == pytest.approx(2 * PI2_T0, rel=1e-9)
        assert curve.d2[0] == pytest.approx(-0.152710, abs=1e-6)
        assert abs(curve.d1[0]) < 1e-8

    def test_coherent_drift_rate(self, default_spec):
        f = CoherentWigner(CoherentStateParams(1.0, 1.0))
        curve = absdev_curve(f, [0.0], 1.0, default_spec)
        oracle, _ = integrate.quad(lambda x: np.sign(x) * np.exp(-(x - 1) ** 2) / math.sqrt(math.pi),
                                   -30, 30, points=[0.0])
        assert oracle == pytest.approx(erf(1.0), rel=1e-10)
        assert curve.d1[0] == pytest.approx(erf(1.0), abs=1e-4)
        assert erf(1.0) == pytest.approx(0.842701, abs=1e-6)

    def test_mass_scaling(self, default_spec):
        a = absdev_curve(cat(), [0.6], 1.0, default_spec)
        b = absdev_curve(cat(), [1.2], 2.0, default_spec)
        assert b.absdev[0] == pytest.approx(a.absdev[0], rel=1e-12)
        assert b.d1[0] == pytest.approx(a.d1[0] / 2, rel=1e-9, abs=1e-14)
        assert b.d2[0] == pytest.approx(a.d2[0] / 4, rel=1e-9)

    def test_finite_difference_consistency(self, default_spec):
        fd1, fd2 = dyn.absdev_finite_differences(cat(), 0.3, 1e-2, 1.0, default_spec)
        _, d1, d2 = dyn.absdev_point(cat(), 0.3, 1.0, default_spec)
        assert fd1 == pytest.approx(d1, abs=1e-4)
        assert fd2 == pytest.approx(d2, abs=1e-4)

    def test_window_too_small(self):
        with pytest.raises(WindowTooSmallError):
            absdev_curve(cat(), [3.0], 1.0, GridSpec.symmetric(6.0, 128))

    def test_requires_zero_column(self):
        with pytest.raises(ValueError):
            absdev_curve(cat(), [0.0], 1.0, GridSpec.symmetric(12.0, 128, odd=False))


class TestClassicalityCheck:
    def test_coherent_has_no_violations(self, default_spec):
        curve = absdev_curve(CoherentWigner(), np.linspace(0, 1, 6), 1.0, default_spec)
        assert classicality_check(curve).consistent

    def test_cat_violations_before_window(self, default_spec):
        ts = np.linspace(0, 1, 21)
        curve = absdev_curve(cat(), ts, 1.0, default_spec)
        report = classicality_check(curve)
        assert report.violation_times == tuple(float(t) for t in ts[ts < 1 / math.sqrt(3)])

    def test_zero_curvature(self):
        ts = np.linspace(0, 1, 5)
        z = np.zeros(5)
        assert classicality_check(dyn.AbsDevCurve(ts, z, z, z)).violation_times == ()

    @pytest.mark.parametrize("conv", list(Convention))
    def test_sign_pattern_independent_of_convention(self, default_spec, conv):
        ts = [0.2, 0.5, 0.7]
        report = classicality_check(absdev_curve(cat(conv), ts, 1.0, default_spec))
        assert report.violation_times == (0.2, 0.5)


def test_csv_writers(tmp_path, cat_grid, default_spec):
    dyn.write_moment_csv(moment_profile(cat_grid, 2), tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "x,pi_2"
    assert len(lines) == 1 + default_spec.nx
    assert float(lines[1 + 512].split(",")[1]) == pytest.approx(PI2_T0, rel=1e-10)

    curve = absdev_curve(cat(), [0.0, 0.8], 1.0, default_spec)
    dyn.write_absdev_csv(curve, tmp_path / "a.csv", classicality_check(curve))
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "t,absdev,d1,d2,violation_flag"
    assert lines[1].endswith(",true") and lines[2].endswith(",false")
