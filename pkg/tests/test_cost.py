import numpy as np
import pytest

from reachopt.controller import TrajectoryParams, build_joint_trajectory
from reachopt.cost import (
    STRATEGIES,
    CostSpec,
    calibrate_lambda0,
    com_integral,
    composite_cost,
    evaluate,
    power_integral,
    task_error,
)
from reachopt.dynamics import evaluate_movement
from reachopt.errors import CalibrationError, ConfigurationError, ContractError


class TestTaskError:
    def test_zero(self):
        assert np.array_equal(task_error([1, 1, 1], [1, 1, 1]), np.zeros(3))

    def test_unit(self):
        e = task_error([1, 0, 0], [0, 0, 0])
        assert np.array_equal(e, [1, 0, 0])
        assert np.linalg.norm(e) == 1.0

    def test_millimetre_scale_below_tolerance(self):
        e = task_error([0.001, 0.001, 0.001], [0.0, 0.0, 0.0])
        assert np.linalg.norm(e) == pytest.approx(np.sqrt(3) * 1e-3, rel=1e-12)
        assert np.linalg.norm(e) < 0.002


class TestCompositeCost:
    def test_zero_error_annihilates_all_strategies(self):
        for strategy in STRATEGIES:
            c = composite_cost(0.0, 123.0, 4.5, strategy, 1e-3, 1e2)
            assert c == 0.0

    def test_zero_weights_reduce_to_min_error(self):
        task_sq = 0.04
        for strategy in STRATEGIES:
            assert composite_cost(task_sq, 500.0, 0.02, strategy, 0.0, 0.0) == task_sq

    def test_tolerance_calibration_arithmetic(self):
        # 2 mm error with a unit physiological term doubles the cost.
        task_sq = 4e-6
        c = composite_cost(task_sq, 1.0, 0.0, "minPower", lambda0_power=1.0)
        assert c == pytest.approx(8e-6, rel=1e-12)

    def test_monotone_in_integrals(self):
        base = composite_cost(0.01, 10.0, 1.0, "minPowerCOM", 0.1, 0.1)
        more_power = composite_cost(0.01, 20.0, 1.0, "minPowerCOM", 0.1, 0.1)
        more_com = composite_cost(0.01, 10.0, 2.0, "minPowerCOM", 0.1, 0.1)
        assert more_power > base
        assert more_com > base

    def test_strategy_selects_terms(self):
        c_err = composite_cost(0.01, 10.0, 5.0, "minError", 1.0, 1.0)
        c_pow = composite_cost(0.01, 10.0, 5.0, "minPower", 1.0, 1.0)
        c_com = composite_cost(0.01, 10.0, 5.0, "minCOM", 1.0, 1.0)
        c_both = composite_cost(0.01, 10.0, 5.0, "minPowerCOM", 1.0, 1.0)
        assert c_err == 0.01
        assert c_pow == pytest.approx(0.01 * 11.0)
        assert c_com == pytest.approx(0.01 * 6.0)
        assert c_both == pytest.approx(0.01 * 16.0)

    def test_negative_integral_rejected(self):
        with pytest.raises(ContractError):
            composite_cost(0.01, -1.0, 0.0, "minPower", 1.0, 0.0)

    def test_unknown_strategy(self):
        with pytest.raises(ConfigurationError):
            composite_cost(0.01, 0.0, 0.0, "minJerk")


class TestCalibration:
    def test_unit(self):
        assert calibrate_lambda0(1.0) == 1.0

    def test_power_scale(self):
        assert calibrate_lambda0(3436.0) == pytest.approx(2.9103e-4, rel=1e-3)

    def test_com_scale(self):
        assert calibrate_lambda0(1e-3) == pytest.approx(1e3, rel=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate_lambda0(0.0)
        with pytest.raises(CalibrationError):
            calibrate_lambda0(-5.0)


class TestWeightReciprocity:
    def test_scaling_r_equals_scaling_lambda(self):
        rng = np.random.default_rng(4)
        times = np.linspace(0, 0.5, 501)
        power = rng.normal(size=(501, 6))
        r = np.abs(rng.normal(size=6)) + 0.1
        c = 3.7
        i_scaled_r = power_integral(power, times, c * r)
        i_plain = power_integral(power, times, r)
        lam = 0.02
        a = composite_cost(0.01, i_scaled_r, 0.0, "minPower", lam)
        b = composite_cost(0.01, i_plain, 0.0, "minPower", c * lam)
        assert a == pytest.approx(b, rel=1e-12)

    def test_com_weights(self):
        rng = np.random.default_rng(8)
        times = np.linspace(0, 0.5, 101)
        com = rng.normal(size=(101, 3)) * 0.05
        r = np.array([1.0, 2.0, 0.5])
        assert com_integral(com, times, 3.0 * r) == pytest.approx(
            3.0 * com_integral(com, times, r), rel=1e-12
        )


class TestEvaluate:
    def test_on_real_movement(self, two_link):
        active = np.array([0, 3])
        params = TrajectoryParams(
            theta_f=np.array([45.0, -30.0]),
            p6=np.zeros(2),
            t_f=0.5,
            active=active,
        )
        traj = build_joint_trajectory(two_link, params)
        out = evaluate_movement(two_link, traj)
        target = out.end_effector[-1]
        spec = CostSpec(
            strategy="minPowerCOM",
            target=target,
            t_f=0.5,
            lambda0_power=1e-4,
            lambda0_com=10.0,
        )
        report = evaluate(spec, out)
        assert report.task_error_sq == 0.0
        assert report.composite == 0.0
        assert report.phys_power == pytest.approx(out.power_squared_integral)
        assert report.phys_com == pytest.approx(out.com_displacement_squared_integral)
        # Off-target version has positive composite cost.
        spec2 = CostSpec(
            strategy="minPowerCOM",
            target=target + np.array([0.1, 0.0, 0.0]),
            t_f=0.5,
            lambda0_power=1e-4,
            lambda0_com=10.0,
        )
        report2 = evaluate(spec2, out)
        assert report2.task_error_sq == pytest.approx(0.01, rel=1e-12)
        assert report2.composite > 0.01

    def test_custom_r_dof_changes_power_term(self, two_link):
        active = np.array([0, 3])
        params = TrajectoryParams(
            theta_f=np.array([45.0, -30.0]),
            p6=np.zeros(2),
            t_f=0.5,
            active=active,
        )
        out = evaluate_movement(two_link, build_joint_trajectory(two_link, params))
        spec = CostSpec(
            strategy="minPower",
            target=np.zeros(3),
            t_f=0.5,
            lambda0_power=1.0,
            r_dof=np.full(two_link.n_dof, 2.0),
        )
        report = evaluate(spec, out)
        assert report.phys_power == pytest.approx(2.0 * out.power_squared_integral, rel=1e-12)


class TestCostSpecValidation:
    def test_unknown_strategy(self):
        with pytest.raises(ConfigurationError):
            CostSpec(strategy="bogus", target=np.zeros(3), t_f=0.5)

    def test_require_weights(self):
        spec = CostSpec(strategy="minPower", target=np.zeros(3), t_f=0.5)
        with pytest.raises(ConfigurationError, match="lambda0_power"):
            spec.require_weights()
        ok = CostSpec(
            strategy="minPower", target=np.zeros(3), t_f=0.5, lambda0_power=0.1
        )
        ok.require_weights()

    def test_negative_lambda_rejected(self):
        with pytest.raises(ConfigurationError):
            CostSpec(strategy="minError", target=np.zeros(3), t_f=0.5, lambda0_power=-1.0)
