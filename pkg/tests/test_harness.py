import numpy as np
import pytest
import scipy.signal

from reachopt.body_model import DEFAULT_HEIGHT_M
from reachopt.controller import closure_coefficients, eval_polynomials
from reachopt.dynamics import _trapz, compute_motion
from reachopt.errors import ConfigurationError, ContractError, ParseError
from reachopt.harness import (
    MocapSeries,
    ScenarioConfig,
    ingest_mocap,
    load_mocap,
    load_scenario,
    min_jerk_reference,
    place_target,
    resolve_active,
    run_scenario,
    save_mocap,
    savgol_filter,
    virtual_posture,
)
from reachopt.harness.reports import recompute_total_energy
from reachopt.kinematics import forward_kinematics


class TestPlaceTarget:
    def test_height_ordering(self, model):
        z = {f: place_target(model, f)[2] for f in (15.0, 30.0, 60.0)}
        assert z[15.0] > z[30.0] > z[60.0]

    def test_zero_flexion_geometry(self, model):
        target = place_target(model, 0.0)
        h = DEFAULT_HEIGHT_M
        shoulder_z = (0.246 + 0.245 + 0.050 + 0.110 + 0.85 * 0.180) * h
        arm = (0.186 + 0.146 + 0.108) * h
        assert target[0] == pytest.approx(arm, abs=1e-12)
        assert target[2] == pytest.approx(shoulder_z, abs=1e-12)

    def test_thirty_degrees_against_trig_oracle(self, model):
        """Planar reduction: stack the torso joints with explicit cosines
        and sines, independent of the package kinematics."""
        h = DEFAULT_HEIGHT_M
        phi_l = np.radians(30.0 * 43.0 / 70.0)
        phi_t = np.radians(30.0 * 27.0 / 70.0)
        phi = phi_l + phi_t
        lumbar_z = (0.246 + 0.245 + 0.050) * h
        abdomen = 0.110 * h
        thoracic = np.array(
            [abdomen * np.sin(phi_l), 0.0, lumbar_z + abdomen * np.cos(phi_l)]
        )
        sh_long = 0.85 * 0.180 * h
        shoulder = thoracic + np.array(
            [sh_long * np.sin(phi), -0.104 * h, sh_long * np.cos(phi)]
        )
        arm = (0.186 + 0.146 + 0.108) * h
        want = shoulder + arm * np.array([np.cos(phi), 0.0, -np.sin(phi)])
        got = place_target(model, 30.0)
        assert np.allclose(got, want, atol=1e-12)

    def test_virtual_posture_within_limits(self, model):
        for f in (15.0, 30.0, 60.0):
            posture = virtual_posture(model, f)
            assert np.all(model.limit_violations(posture) == 0)

    def test_excessive_flexion_rejected(self, model):
        with pytest.raises(ConfigurationError, match="limits"):
            place_target(model, 200.0)


class TestPresets:
    def test_planar6(self, model):
        active = resolve_active(model, "planar6")
        names = [model.dof_names()[i] for i in active]
        assert names == [
            "ankle.flexion",
            "knee.flexion",
            "hip.flexion",
            "lumbar.flexion",
            "r_shoulder.flexion",
            "r_elbow.flexion",
        ]

    def test_full_excludes_locked(self, model):
        assert resolve_active(model, "full").size == 29
        assert resolve_active(model, None).size == 29

    def test_unknown_preset(self, model):
        with pytest.raises(ConfigurationError):
            resolve_active(model, "planar99")


class TestSavgol:
    def test_constant_unchanged(self):
        series = np.full(200, 3.7)
        assert np.allclose(savgol_filter(series), series, atol=1e-12)

    def test_cubic_reproduced(self):
        t = np.linspace(-1, 1, 151)
        series = 2.0 - 0.5 * t + 3.0 * t**2 - 1.2 * t**3
        assert np.abs(savgol_filter(series, 61, 4) - series).max() <= 1e-10

    def test_noise_suppression(self):
        rng = np.random.default_rng(21)
        t = np.linspace(0, 5, 600)
        clean = np.sin(2 * np.pi * 0.8 * t)
        noisy = clean + 0.05 * rng.standard_normal(t.size)
        smooth = savgol_filter(noisy, 61, 4)
        interior = slice(30, -30)
        rms_in = np.sqrt(((noisy - clean)[interior] ** 2).mean())
        rms_out = np.sqrt(((smooth - clean)[interior] ** 2).mean())
        assert rms_out < rms_in

    def test_weights_match_normal_equations_oracle(self):
        # Independent derivation: w = e0^T (A^T A)^{-1} A^T from the
        # Vandermonde of window offsets.
        window, order = 61, 4
        half = window // 2
        offsets = np.arange(-half, half + 1, dtype=float)
        vander = offsets[:, None] ** np.arange(order + 1)[None, :]
        normal = np.linalg.inv(vander.T @ vander) @ vander.T
        oracle = normal[0]
        spike = np.zeros(3 * window)
        spike[3 * window // 2] = 1.0
        response = savgol_filter(spike, window, order)
        got = response[3 * window // 2 - half : 3 * window // 2 + half + 1][::-1]
        assert np.abs(got - oracle).max() <= 1e-10

    def test_interior_matches_scipy(self):
        rng = np.random.default_rng(3)
        series = rng.standard_normal(400).cumsum()
        ours = savgol_filter(series, 21, 3)
        theirs = scipy.signal.savgol_filter(series, 21, 3)
        interior = slice(10, -10)
        assert np.allclose(ours[interior], theirs[interior], atol=1e-10)

    def test_multicolumn(self):
        rng = np.random.default_rng(5)
        data = rng.standard_normal((200, 3)).cumsum(axis=0)
        smooth = savgol_filter(data, 31, 2)
        for j in range(3):
            assert np.allclose(smooth[:, j], savgol_filter(data[:, j], 31, 2), atol=1e-12)

    def test_contract_errors(self):
        with pytest.raises(ContractError):
            savgol_filter(np.zeros(100), window=60)
        with pytest.raises(ContractError):
            savgol_filter(np.zeros(100), window=61, order=61)
        with pytest.raises(ContractError):
            savgol_filter(np.zeros(30), window=61)


class TestMinJerkReference:
    def test_path_colinear(self):
        x0 = np.array([0.1, -0.2, 0.5])
        xf = np.array([0.8, 0.1, 1.1])
        ref = min_jerk_reference(x0, xf, 0.575)
        direction = xf - x0
        rel = ref["position"] - x0[None, :]
        cross = np.cross(rel, direction[None, :])
        assert np.abs(cross).max() <= 1e-12

    def test_peak_speed_factor(self):
        # Grid with an even interval count contains t = T/2 exactly, where
        # the quintic's derivative peaks at 15/8.
        duration = 0.5
        ref = min_jerk_reference(np.zeros(3), np.array([1.0, 0, 0]), duration)
        speed = np.linalg.norm(ref["velocity"], axis=1)
        assert speed.max() == pytest.approx(1.875 / duration, abs=1e-9)
        i_peak = speed.argmax()
        assert ref["times"][i_peak] == duration / 2

    def test_peak_speed_at_paper_duration(self):
        duration = 0.575
        ref = min_jerk_reference(np.zeros(3), np.array([1.0, 0, 0]), duration)
        speed = np.linalg.norm(ref["velocity"], axis=1)
        # The millisecond grid misses T/2 by half a step; compare at grid
        # resolution.
        assert speed.max() == pytest.approx(1.875 / duration, abs=1e-4)
        assert 1.875 / duration == pytest.approx(3.2609, abs=1e-4)

    def test_velocity_matches_finite_difference(self):
        ref = min_jerk_reference(np.zeros(3), np.array([0.5, 0.2, -0.1]), 0.5)
        fd = np.gradient(ref["position"], ref["times"], axis=0)
        assert np.allclose(ref["velocity"][2:-2], fd[2:-2], atol=1e-4)


class TestMocap:
    def make_recording(self, model, t_f=1.5, t0=1.5, rate=120.0, n=600):
        names = model.dof_names()
        moving = {
            names.index("lumbar.flexion"): 25.0,
            names.index("r_shoulder.flexion"): -70.0,
            names.index("r_elbow.flexion"): -30.0,
        }
        times = np.arange(n) / rate
        theta = np.tile(model.neutral_posture, (n, 1))
        theta_dot = np.zeros_like(theta)
        theta_ddot = np.zeros_like(theta)
        s = np.clip(times - t0, 0.0, t_f)
        inside = (times >= t0) & (times <= t0 + t_f)
        for idx, amp in moving.items():
            c = closure_coefficients(0.0, amp, 0.0, t_f)
            pos, vel, acc = eval_polynomials(c, s)
            theta[:, idx] += pos[:, 0]
            theta_dot[inside, idx] = vel[inside, 0]
            theta_ddot[inside, idx] = acc[inside, 0]
        return times, theta, theta_dot, theta_ddot, (t0, t0 + t_f)

    def test_five_second_recording_round_trip(self, model, tmp_path):
        times, theta, theta_dot, theta_ddot, window = self.make_recording(model)
        ref = compute_motion(model, theta, theta_dot, theta_ddot)
        series = MocapSeries(
            times=times, angles=theta, rate_hz=120.0, metadata={"source": "synthetic"}
        )
        path = tmp_path / "recording.csv"
        save_mocap(series, path, model.dof_names())
        loaded, output = ingest_mocap(model, path)
        assert loaded.times.size == 600
        assert loaded.rate_hz == pytest.approx(120.0, rel=1e-6)
        assert loaded.metadata["source"] == "synthetic"
        mask = (times >= window[0] - 0.1) & (times <= window[1] + 0.1)
        err = output.torque[mask] - ref.torque[mask]
        rel = np.sqrt((err**2).mean()) / np.sqrt((ref.torque[mask] ** 2).mean())
        assert rel <= 0.02

    def test_empty_file(self, model, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            ingest_mocap(model, path)

    def test_wrong_column_count(self, model, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,a,b\n0.0,1.0\n")
        with pytest.raises(ParseError, match="bad.csv:2"):
            load_mocap(path)

    def test_nonuniform_sampling_rejected(self):
        with pytest.raises(ContractError, match="uniform"):
            MocapSeries(
                times=np.array([0.0, 0.1, 0.3]),
                angles=np.zeros((3, 2)),
                rate_hz=10.0,
            )


class TestScenario:
    def test_degenerate_target_is_immediately_optimal(self, model):
        neutral_ee = forward_kinematics(model, model.neutral_posture).end_effector
        config = ScenarioConfig(
            strategy="minError",
            preset="planar6",
            target_m=tuple(neutral_ee),
            duration_s=0.5,
        )
        result = run_scenario(config)
        assert result.opt.termination == "cost-tol"
        assert result.opt.iterations == 0
        assert result.summary["final_error_m"] == 0.0
        assert np.array_equal(result.params.theta_f, np.zeros(6))

    def test_initial_cost_equals_zero_motion_cost(self, model):
        from reachopt.cost import CostSpec
        from reachopt.harness.objective import ReachingObjective

        target = place_target(model, 30.0)
        spec = CostSpec(strategy="minError", target=target, t_f=0.575)
        objective = ReachingObjective(model, spec)
        r0 = objective.residuals(objective.initial_params())
        neutral_ee = forward_kinematics(model, model.neutral_posture).end_effector
        assert float(r0 @ r0) == pytest.approx(
            float((neutral_ee - target) @ (neutral_ee - target)), rel=1e-12
        )

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            ScenarioConfig(strategy="minError")  # no target at all
        with pytest.raises(ConfigurationError):
            ScenarioConfig(
                strategy="minError", trunk_flexion_deg=30.0, target_m=(1, 0, 1)
            )
        with pytest.raises(ConfigurationError):
            ScenarioConfig(strategy="minError", target_m=(1, 0, 1))  # needs duration

    def test_scenario_file_round_trip(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text(
            "strategy: minPowerCOM\n"
            "preset: planar6\n"
            "target:\n  trunk_flexion_deg: 30\n"
            "lambda0:\n  power: auto\n  com: 250.0\n"
            "optimizer:\n  max_iterations: 7\n  threads: 2\n"
        )
        config = load_scenario(path)
        assert config.strategy == "minPowerCOM"
        assert config.preset == "planar6"
        assert config.trunk_flexion_deg == 30.0
        assert config.lambda0_power == "auto"
        assert config.lambda0_com == 250.0
        assert config.optimizer.max_iterations == 7
        assert config.optimizer.threads == 2
        assert config.optimizer.error_components == 3

    def test_auto_lambda_requires_primary_when_missing(self):
        config = ScenarioConfig(
            strategy="minCOM",
            preset="planar6",
            trunk_flexion_deg=30.0,
            optimizer=__import__("reachopt").OptimizerConfig(
                error_components=3, max_iterations=4
            ),
        )
        result = run_scenario(config)
        assert result.lambda0_com > 0
        assert result.primary is not None

    def test_compare_annotates_failed_cells(self, tmp_path):
        from reachopt import OptimizerConfig
        from reachopt.harness import compare_strategies

        config = ScenarioConfig(
            strategy="minError",
            preset="planar6",
            trunk_flexion_deg=30.0,
            lambda0_power=0.0,  # minPower cannot run with a zero weight
            optimizer=OptimizerConfig(error_components=3, max_iterations=2),
            output_dir=str(tmp_path),
        )
        report = compare_strategies(
            config, strategies=("minError", "minPower"), trunk_flexions=(30.0,)
        )
        by_strategy = {row["strategy"]: row for row in report["rows"]}
        assert by_strategy["minError"]["status"] in (
            "cost-tol", "error-tol", "param-tol", "max-iter",
        )
        assert by_strategy["minPower"]["status"].startswith("failed:")
        text = (tmp_path / "comparison.csv").read_text()
        assert "failed:" in text


@pytest.fixture(scope="module")
def quick_result(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("run")
    from reachopt import OptimizerConfig

    config = ScenarioConfig(
        strategy="minError",
        preset="planar6",
        trunk_flexion_deg=30.0,
        optimizer=OptimizerConfig(error_components=3, max_iterations=3),
        output_dir=str(out_dir),
    )
    return run_scenario(config), out_dir


class TestOutputs:

    def test_timeseries_row_count(self, quick_result):
        result, out_dir = quick_result
        lines = (out_dir / "timeseries.csv").read_text().splitlines()
        assert len(lines) == 1 + result.trajectory.times.size

    def test_energy_recomputable_from_file(self, quick_result):
        result, out_dir = quick_result
        energy = recompute_total_energy(out_dir / "timeseries.csv")
        assert energy == pytest.approx(result.summary["total_energy_J"], rel=1e-6)

    def test_summary_scalars_recomputable(self, quick_result):
        result, _ = quick_result
        dyn = result.dynamics
        assert result.summary["total_power_squared_J2"] == pytest.approx(
            float(_trapz((dyn.power**2).sum(axis=1), dyn.times)), rel=1e-12
        )
        disp = dyn.com[-1] - dyn.com[0]
        assert result.summary["final_com_squared_m2"] == pytest.approx(
            float(disp @ disp), rel=1e-12
        )

    def test_rerun_byte_identical(self, quick_result, tmp_path):
        result, out_dir = quick_result
        from dataclasses import replace

        rerun_dir = tmp_path / "rerun"
        run_scenario(replace(result.config, output_dir=str(rerun_dir)))
        for name in ("timeseries.csv", "summary.csv", "optimizer_log.csv", "minjerk.csv"):
            assert (out_dir / name).read_bytes() == (rerun_dir / name).read_bytes(), name

    def test_thread_count_byte_identical(self, quick_result, tmp_path):
        result, out_dir = quick_result
        from dataclasses import replace

        threaded_dir = tmp_path / "threaded"
        config = replace(
            result.config,
            optimizer=replace(result.config.optimizer, threads=4),
            output_dir=str(threaded_dir),
        )
        run_scenario(config)
        for name in ("timeseries.csv", "summary.csv", "optimizer_log.csv", "minjerk.csv"):
            assert (out_dir / name).read_bytes() == (threaded_dir / name).read_bytes(), name

    def test_optimizer_log_matches_history(self, quick_result):
        result, out_dir = quick_result
        lines = (out_dir / "optimizer_log.csv").read_text().splitlines()
        assert len(lines) == 1 + len(result.opt.history)
        assert lines[0] == "iteration,cost,step_norm,sigma,alpha,error_norm"
