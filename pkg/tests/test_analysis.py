import math

import numpy as np
import pytest

from lindstep.analysis import (
    CurvePoint,
    ErrorCurve,
    cfl_threshold,
    coefficient_c,
    error_curve,
    estimate_order,
    eval_times,
    log_spaced_dts,
    opcount,
    plan_sample_grid,
    record_stride,
    snap_steps,
)
from lindstep.errors import GridMismatch, InsufficientPoints
from lindstep.fock import truncated_power_loss
from lindstep.lindblad import build_model, maximally_mixed
from lindstep.reference import AdaptiveConfig, solve_reference
from lindstep.schemes import Scheme, integrate, make_stepper
from lindstep.trajectory import Trajectory

from conftest import random_density, random_model


class TestCoefficientC:
    def test_values(self):
        assert coefficient_c(2, 5) == 20.0
        assert coefficient_c(1, 10) == 10.0
        assert coefficient_c(3, 2) == 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            coefficient_c(0, 3)
        with pytest.raises(ValueError):
            coefficient_c(2, -1)


class TestCflThreshold:
    def test_published_thresholds(self):
        assert cfl_threshold(2, 31) == pytest.approx(2.2e-3, rel=0.03)
        assert cfl_threshold(2, 63) == pytest.approx(5.1e-4, rel=0.01)
        assert cfl_threshold(2, 127) == pytest.approx(1.25e-4, rel=0.01)

    def test_exact_product(self):
        for l, n in ((1, 5), (2, 31), (3, 40)):
            assert cfl_threshold(l, n) * coefficient_c(l, n) == pytest.approx(2.0, rel=1e-15)

    def test_requires_n_ge_l(self):
        with pytest.raises(ValueError):
            cfl_threshold(3, 2)


class TestOpcount:
    def test_published_rows(self):
        assert opcount(Scheme.QC1, 1) == opcount("lucao1", 1)
        assert (opcount("qc1", 1).matrix_mults, opcount("qc1", 1).matrix_adds) == (4, 1)
        assert (opcount("rk4", 2).matrix_mults, opcount("rk4", 2).matrix_adds) == (24, 22)
        assert (opcount("euler1", 1).matrix_mults, opcount("euler1", 1).matrix_adds) == (4, 4)

    def test_second_order_growth(self):
        oc = opcount("qc2", 3)
        assert (oc.matrix_mults, oc.matrix_adds) == (2 * 9 + 6 + 2, 2 * 9 + 6)


class TestGrids:
    def test_snap_steps(self):
        n, dt = snap_steps(1.0, 0.3)
        assert n == 3
        assert dt == pytest.approx(1.0 / 3.0)

    def test_stride_small_runs(self):
        assert record_stride(200) == 1
        assert record_stride(201) == 2
        assert record_stride(5000) == 25

    def test_eval_times_every_step(self):
        times = eval_times(1.0, 0.01)  # n = 100 <= 200
        assert times.size == 101
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(1.0)

    def test_eval_times_thinned(self):
        times = eval_times(1.0, 1e-3)  # n = 1000, stride 5
        assert times.size == 201
        assert times[-1] == pytest.approx(1.0)

    def test_plan_union(self):
        grid = plan_sample_grid(1.0, [0.5, 0.25])
        assert np.allclose(grid, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_log_spaced(self):
        dts = log_spaced_dts(1e-1, 1e-3, 5)
        assert dts.size == 5
        assert dts[0] == pytest.approx(1e-1)
        assert dts[-1] == pytest.approx(1e-3)
        with pytest.raises(ValueError):
            log_spaced_dts(1e-3, 1e-1, 5)


def synthetic_curve(coeffs):
    pts = [
        CurvePoint(dt, int(round(1.0 / dt)), err, 0.0, False) for dt, err in coeffs
    ]
    return ErrorCurve(Scheme.QC1, 4, "synthetic", pts)


class TestEstimateOrder:
    def test_linear(self):
        dts = np.geomspace(1e-3, 1e-5, 6)
        curve = synthetic_curve([(dt, 3.0 * dt) for dt in dts])
        assert estimate_order(curve, 1e-12, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_quadratic(self):
        dts = np.geomspace(1e-2, 1e-4, 6)
        curve = synthetic_curve([(dt, 0.5 * dt**2) for dt in dts])
        assert estimate_order(curve, 1e-12, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_noisy_cubic(self, rng):
        dts = np.geomspace(1e-1, 1e-2, 10)
        noise = 1.0 + 0.01 * rng.normal(size=dts.size)
        curve = synthetic_curve([(dt, dt**3 * f) for dt, f in zip(dts, noise)])
        assert estimate_order(curve, 1e-12, 1.0) == pytest.approx(3.0, abs=0.1)

    def test_window_filters_saturation(self):
        dts = np.geomspace(1.0, 1e-5, 11)
        curve = synthetic_curve([(dt, min(2.0, 7.0 * dt)) for dt in dts])
        slope = estimate_order(curve, 1e-8, 1e-2)
        assert slope == pytest.approx(1.0, abs=1e-10)

    def test_insufficient_points(self):
        curve = synthetic_curve([(1e-2, 1e-3), (5e-3, 5e-4)])
        with pytest.raises(InsufficientPoints):
            estimate_order(curve, 1e-8, 1e-2)


class TestErrorCurve:
    def test_small_pipeline(self, rng):
        m = random_model(rng, 4, 1, scale=0.6)
        rho0 = random_density(rng, 4)
        T = 0.4
        dts = [0.1, 0.05, 0.02, 0.01, 0.005]
        ref = solve_reference(m, rho0, plan_sample_grid(T, dts), AdaptiveConfig())
        curve = error_curve(m, "qc1", rho0, T, dts, ref, "toy")
        assert len(curve.points) == 5
        errs = [p.sup_error for p in curve.points]
        assert all(e > 0 for e in errs)
        assert errs[0] > errs[-1]
        assert [p.dt for p in curve.points] == sorted((p.dt for p in curve.points), reverse=True)

    def test_blowup_sentinel(self):
        m = build_model(np.zeros((32, 32)), [truncated_power_loss(32, 2)])
        dummy_ref = Trajectory(np.array([0.0]), [maximally_mixed(32)])
        curve = error_curve(m, "euler1", maximally_mixed(32), 1.0, [3e-3], dummy_ref, "cfl")
        p = curve.points[0]
        assert p.blowup
        assert math.isinf(p.sup_error)

    def test_grid_mismatch(self, rng):
        m = random_model(rng, 3, 1)
        rho0 = random_density(rng, 3)
        ref = Trajectory(np.array([0.0]), [rho0])
        with pytest.raises(GridMismatch):
            error_curve(m, "qc1", rho0, 0.5, [0.25], ref, "bad")


class TestEulerDivergenceRate:
    def test_blowup_within_predicted_steps(self):
        # growth factor |1 - dt c_n| on the top mode bounds the blowup time
        dim, l, dt = 16, 2, 2e-2
        n = dim - 1
        cn = coefficient_c(l, n)
        assert dt * cn > 2
        budget = int(5.0 / (dt * cn - 2.0) / dt)
        m = build_model(np.zeros((dim, dim)), [truncated_power_loss(dim, l)])
        st = make_stepper(m, Scheme.EULER1, dt)
        traj = integrate(st, maximally_mixed(dim), budget, record_every=budget)
        final_norm = np.linalg.norm(traj.states[-1])
        assert traj.blowup or final_norm > 1e3
