"""Acceptance criteria 1-8 at their stated tolerances.

Each test records a single ``criterion N: PASS|FAIL`` line, which is printed
in the pytest terminal summary.
"""
import math
import subprocess
import sys
import time

import numpy as np
from scipy.optimize import minimize_scalar

from wignerkin import (CatStateParams, CatWigner, CoherentStateParams, CoherentWigner,
                       Convention, EvolutionSpec, GridSpec, absdev_curve, classicality_check,
                       evolve_free, marginal_along_x, moment_profile, negativity_window,
                       pi2_origin_analytic, rasterize, rotated_marginal)
from wignerkin import dynamics as dyn
from wignerkin import homodyne as hd

SQRT2 = math.sqrt(2.0)
X0S = (1.0, SQRT2, 2.0, 3.0)
TIMES = np.linspace(0.0, 3.0, 61)
TAUS = (-0.2, 0.0, 0.2)
CAT_TARGET = -0.152705


def _moment_mismatches(convention, factor):
    bad = []
    for x0 in X0S:
        f = CatWigner(CatStateParams(x0, 0.0, convention))
        for t in TIMES:
            num = dyn.pi2_origin_numeric(f, float(t))
            ref = factor * pi2_origin_analytic(float(t), x0)
            if abs(num - ref) > max(1e-6 * abs(ref), 1e-9):
                bad.append((x0, float(t), num, ref))
    return bad


def test_criterion_1_closed_form_moment(acceptance):
    start = time.perf_counter()
    bad = _moment_mismatches(Convention.PAPER_SCALED, 1.0)
    elapsed = time.perf_counter() - start
    acceptance(1, not bad and elapsed < 30.0,
               f"{len(X0S) * TIMES.size} points, {len(bad)} outside rel 1e-6 / abs 1e-9, "
               f"{elapsed:.1f} s")


def test_criterion_2_factor_two(acceptance):
    bad = _moment_mismatches(Convention.AS_PRINTED, 2.0)
    acceptance(2, not bad, f"as-printed moments equal 2x closed form; {len(bad)} mismatches")


def test_criterion_3_negativity_window(acceptance):
    t_star = dyn.pi2_zero_crossing(CatWigner(CatStateParams(SQRT2, 0.0)), (0.3, 0.9))
    w3 = negativity_window(3.0)
    ok = abs(t_star - 1 / math.sqrt(3)) <= 1e-4 and abs(w3 - 0.894427190999916) <= 1e-12
    acceptance(3, ok, f"measured crossing {t_star:.9f} (1/sqrt3 = {1 / math.sqrt(3):.9f}), "
                      f"window(3) = {w3:.15f}")


def test_criterion_4_curvature_identity(acceptance):
    spec = GridSpec.symmetric(12.0, 1024)
    worst = 0.0
    states = (CatWigner(CatStateParams(SQRT2, 0.0)), CoherentWigner(CoherentStateParams(1.0, 1.0)))
    start = time.perf_counter()
    for f in states:
        for t in (0.0, 0.3, 1 / math.sqrt(3), 1.0):
            _, fd2 = dyn.absdev_finite_differences(f, t, 1e-2, 1.0, spec)
            exact = 2.0 * dyn.pi2_origin_numeric(f, t, 1.0, spec)
            worst = max(worst, abs(fd2 - exact))
    elapsed = time.perf_counter() - start
    acceptance(4, worst <= 1e-4 and elapsed < 60.0,
               f"max |FD d2 - 2 pi2| = {worst:.2e} over cat and coherent, {elapsed:.1f} s")


def test_criterion_5_classical_bound(acceptance):
    ts = np.linspace(0.0, 3.0, 31)
    # the (x0, p0) = (2, 2) packet sheared to t = 3 needs +-24 to stay clear of the edge
    spec = GridSpec.symmetric(24.0, 1024)
    min_d2, violations = math.inf, 0
    for x0 in (0.0, 1.0, 2.0):
        for p0 in (0.0, 1.0, 2.0):
            curve = absdev_curve(CoherentWigner(CoherentStateParams(x0, p0)), ts, 1.0, spec)
            min_d2 = min(min_d2, float(curve.d2.min()))
            violations += len(classicality_check(curve).violation_times)
    acceptance(5, min_d2 >= -1e-8 and violations == 0,
               f"min d2 = {min_d2:.3e} over 9 coherent states, {violations} violations")


def test_criterion_6_minimum_location(acceptance):
    res = minimize_scalar(lambda x0: pi2_origin_analytic(0.0, x0), bounds=(1.05, 2.5),
                          method="bounded", options={"xatol": 1e-10})
    xs = np.linspace(1.05, 2.5, 14501)
    dense = xs[np.argmin([pi2_origin_analytic(0.0, x) for x in xs])]
    ok = abs(res.x - SQRT2) <= 1e-3 and abs(dense - SQRT2) <= 1e-3
    acceptance(6, ok, f"argmin {res.x:.8f} (bounded search), {dense:.4f} (dense scan)")


def test_criterion_7_homodyne_witness(acceptance):
    spec = GridSpec.symmetric(12.0, 1024)
    n = 10 ** 6

    start = time.perf_counter()
    cat = hd.HomodyneExperiment(rasterize(CatWigner(CatStateParams(SQRT2, 0.0)), spec), TAUS, n)
    est_cat, _ = cat.run(42)
    cat_time = time.perf_counter() - start
    cat_ok = (abs(est_cat.curvature_at_zero - CAT_TARGET) <= 3 * est_cat.std_error
              and est_cat.ci_high < 0
              and est_cat.verdict is hd.Verdict.NEGATIVITY_WITNESSED)

    start = time.perf_counter()
    coh = hd.HomodyneExperiment(rasterize(CoherentWigner(), spec), TAUS, n)
    est_coh, _ = coh.run(42)
    coh_time = time.perf_counter() - start
    coh_ok = est_coh.verdict is hd.Verdict.CLASSICAL_CONSISTENT

    witnessed = [s for s in range(100) if coh.run(s)[0].verdict is hd.Verdict.NEGATIVITY_WITNESSED]
    ok = cat_ok and coh_ok and not witnessed and max(cat_time, coh_time) < 120.0
    acceptance(7, ok,
               f"cat seed 42: {est_cat.curvature_at_zero:.4f} +- {est_cat.std_error:.4f}, "
               f"CI [{est_cat.ci_low:.4f}, {est_cat.ci_high:.4f}], {est_cat.verdict.value}, "
               f"{cat_time:.1f} s; coherent: {est_coh.verdict.value}, {coh_time:.1f} s; "
               f"coherent seeds witnessing negativity: {len(witnessed)}/100")


_RECORD_SCRIPT = """
import sys
from wignerkin import CatWigner, GridSpec, rasterize
from wignerkin import homodyne as hd
g = rasterize(CatWigner(), GridSpec.symmetric(12.0, 256))
est, run = hd.HomodyneExperiment(g, (-0.2, 0.0, 0.2), 20000, resamples=500).run(7)
sys.stdout.write(hd.dumps_record(hd.run_record(est, run, g, {"kind": "cat"})))
"""


def test_criterion_8_conservation_and_symmetry(acceptance):
    spec = GridSpec.symmetric(16.0, 1024)
    cat = CatWigner(CatStateParams(SQRT2, 0.0, Convention.AS_PRINTED))
    g0 = rasterize(cat, spec)
    p0 = marginal_along_x(g0).density
    norm_drift = shear_drift = 0.0
    for t in np.linspace(0.0, 3.0, 7):
        gt = rasterize(evolve_free(cat, EvolutionSpec(1.0, float(t))), spec)
        norm_drift = max(norm_drift, abs(gt.integral - g0.integral))
        shear_drift = max(shear_drift, float(np.max(np.abs(marginal_along_x(gt).density - p0))))

    # p -> -p symmetry of p0 = 0 states at t = 0; free flight builds up a current
    pi1 = 0.0
    for f in (cat, CatWigner(CatStateParams(3.0, 0.0)), CoherentWigner(CoherentStateParams(1.0, 0.0))):
        pi1 = max(pi1, float(np.max(np.abs(moment_profile(rasterize(f, spec), 1).pi_values))))

    mass_err = max(abs(rotated_marginal(g0, th).integral() - g0.integral)
                   for th in np.linspace(0.0, math.pi, 13))

    runs = [subprocess.run([sys.executable, "-c", _RECORD_SCRIPT], capture_output=True,
                           check=True).stdout for _ in range(2)]
    g = rasterize(CatWigner(), GridSpec.symmetric(12.0, 256))
    est, run = hd.HomodyneExperiment(g, TAUS, 20000, resamples=500).run(7)
    local = hd.dumps_record(hd.run_record(est, run, g, {"kind": "cat"})).encode()
    same = runs[0] == runs[1] == local

    ok = norm_drift <= 1e-7 and shear_drift <= 1e-8 and pi1 <= 1e-10 and mass_err <= 1e-6 and same
    acceptance(8, ok, f"norm drift {norm_drift:.1e}, p-marginal drift {shear_drift:.1e}, "
                      f"max |pi1| {pi1:.1e}, rotated mass error {mass_err:.1e}, "
                      f"run records byte-identical across processes: {same}")
