"""Unit tests for initial data, the integrator, snapshots and the time loop."""
from dataclasses import replace

import numpy as np
import pytest

from src.domain_model.types import AnalyticInitialData, Scheme, WeightVector
from src.domain_model.validation import validate_config
from src.dynamics.convergence import fitted_order, z_residual
from src.dynamics.initial_data import (
    calibrate_initial_data,
    initial_height,
    initial_second_moment,
    max_initial_height,
    sample_initial_cloud,
)
from src.dynamics.integrator import SolverSettings, initial_state, rotate, step, velocity_field
from src.dynamics.simulation import conservation_summary, simulate
from src.dynamics.snapshot import snapshot_from_state, state_from_snapshot
from src.envelope_geometry.decomposition import decompose
from src.errors import EmptyCellError, SolverConvergenceError

from tests.conftest import SINGLE_DIRAC_VELOCITY


@pytest.fixture
def settings(grid64):
    return SolverSettings(grid=grid64, tol=grid64.spec.min_solver_tol, max_iter=2000)


@pytest.fixture
def slab_data():
    return AnalyticInitialData(alpha=1.0, beta=1.0, gamma1=0.0, gamma2=0.0, b3=-1.0, samples=2000, seed=5)


class TestInitialData:
    """Test calibration and sampling of analytic initial data."""

    def test_calibration_gives_unit_volume(self, slab_data, grid64):
        data = calibrate_initial_data(slab_data, grid64)
        assert grid64.integrate(initial_height(data, grid64.centers)) == pytest.approx(1.0, abs=1e-12)
        # P0 - q is constant here, so the fluid is the unit cube
        assert data.const == pytest.approx(1.0, abs=1e-12)

    def test_uncalibrated_height_refused(self, slab_data, grid64):
        with pytest.raises(ValueError):
            initial_height(slab_data, grid64.centers)

    def test_max_height_tilted(self, unit_square, grid64):
        data = calibrate_initial_data(
            AnalyticInitialData(alpha=1.0, beta=1.0, gamma1=0.2, gamma2=0.0, b3=-1.0, samples=10, seed=0), grid64,
        )
        assert max_initial_height(data, unit_square) == pytest.approx(float(initial_height(data, np.array([[1.0, 0.0]]))[0]))

    def test_sampling_is_deterministic(self, slab_data, unit_square, grid64):
        a = sample_initial_cloud(slab_data, unit_square, grid64)
        b = sample_initial_cloud(slab_data, unit_square, grid64)
        assert a == b
        assert a.count == 2000
        assert np.all(a.points[:, 2] == -1.0)

    def test_samples_are_gradient_images(self, slab_data, unit_square, grid64):
        cloud = sample_initial_cloud(slab_data, unit_square, grid64)
        # alpha = beta = 1 and no shift: y_h = x_h lies in the square
        assert np.all(unit_square.contains(cloud.points[:, :2]))
        assert np.allclose(cloud.masses, 1.0 / 2000)

    def test_second_moment_within_sampling_error(self, slab_data, unit_square, grid64):
        cloud = sample_initial_cloud(slab_data, unit_square, grid64)
        empirical = float(np.sum(cloud.masses * np.sum(cloud.points ** 2, axis=1)))
        exact = initial_second_moment(slab_data, grid64)
        spread = float(np.std(np.sum(cloud.points ** 2, axis=1)))
        assert abs(empirical - exact) <= 4.0 * spread / np.sqrt(2000)


class TestVelocity:
    def test_rotate(self):
        v = np.array([[1.0, 2.0, 3.0]])
        assert rotate(v).tolist() == [[-2.0, 1.0, 0.0]]

    def test_single_dirac_velocity(self, single_dirac, settings):
        state = initial_state(single_dirac, WeightVector.quadratic_start(single_dirac), settings)
        w = velocity_field(state.cloud, state.stats)
        assert w[0].tolist() == pytest.approx(list(SINGLE_DIRAC_VELOCITY), abs=2e-4)
        assert w[0, 2] == 0.0

    def test_empty_cell_refused(self, single_dirac, grid64):
        stats = decompose(single_dirac, WeightVector([10.0]), grid64)
        with pytest.raises(EmptyCellError) as exc_info:
            velocity_field(single_dirac, stats)
        assert exc_info.value.indices == [0]


class TestStep:
    """Test a single time step of each scheme."""

    def test_euler_moves_by_frozen_velocity(self, three_atoms, settings):
        state = initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings)
        w = velocity_field(state.cloud, state.stats)
        after = step(state, 0.01, Scheme.EULER, settings)
        assert np.array_equal(after.cloud.points, three_atoms.points + 0.01 * w)
        assert after.step_index == 1
        assert after.time == 0.01
        assert after.report.converged

    @pytest.mark.parametrize("scheme", [Scheme.EULER, Scheme.RK4])
    def test_third_coordinates_exact(self, scheme, three_atoms, settings):
        state = initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings)
        for _ in range(3):
            state = step(state, 0.01, scheme, settings)
        assert np.array_equal(state.cloud.points[:, 2], three_atoms.points[:, 2])
        assert np.array_equal(state.cloud.masses, three_atoms.masses)

    def test_support_limit_grows(self, three_atoms, settings):
        state = initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings)
        after = step(state, 0.01, Scheme.EULER, settings)
        assert after.support_limit > state.support_limit
        assert after.cloud.horizontal_radius <= after.support_limit
        assert after.peak_speed >= state.peak_speed

    def test_unconverged_solve_raises(self, three_atoms, grid64):
        tight = SolverSettings(grid=grid64, tol=grid64.spec.min_solver_tol, max_iter=1)
        with pytest.raises(SolverConvergenceError):
            initial_state(three_atoms, WeightVector.zeros(three_atoms), tight)


class TestSnapshot:
    def test_restore_reproduces_state(self, three_atoms, settings):
        state = initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings)
        snapshot = snapshot_from_state(state)
        restored = state_from_snapshot(snapshot, settings)
        assert np.array_equal(restored.stats.volumes, state.stats.volumes)
        assert np.array_equal(restored.stats.centroids, state.stats.centroids)
        assert snapshot_from_state(restored) == snapshot

    def test_mass_error(self, three_atoms, settings):
        snapshot = snapshot_from_state(initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings))
        assert snapshot.mass_error <= three_atoms.count * settings.tol

    def test_equality_ignores_height_file(self, three_atoms, settings):
        snapshot = snapshot_from_state(initial_state(three_atoms, WeightVector.quadratic_start(three_atoms), settings))
        assert replace(snapshot, height_file="heights/x.csv") == snapshot
        assert replace(snapshot, energy=snapshot.energy + 1.0) != snapshot


class TestSimulate:
    """Test the time loop."""

    def test_zero_steps_emits_initial_snapshot(self, single_dirac_config):
        result = simulate(validate_config(single_dirac_config))
        assert [s.step for s in result.snapshots] == [0]
        assert result.snapshots[0].time == 0.0

    def test_stride_and_last_step(self, single_dirac_config):
        single_dirac_config.update(steps=5, output={"stride": 2})
        result = simulate(validate_config(single_dirac_config))
        assert [s.step for s in result.snapshots] == [0, 2, 4, 5]
        assert result.final_state.step_index == 5

    def test_hook_sees_every_snapshot(self, single_dirac_config):
        single_dirac_config.update(steps=3)
        seen = []
        result = simulate(validate_config(single_dirac_config), on_snapshot=seen.append)
        assert seen == result.snapshots

    def test_equilibrium_stops_early(self, single_dirac_config):
        # a single atom over the center of the square sits at its own centroid
        single_dirac_config["initial"]["points"] = [[0.5, 0.5, -1.0]]
        single_dirac_config.update(steps=4, stop_at_equilibrium=True)
        cfg = validate_config(single_dirac_config)
        result = simulate(cfg)
        assert result.equilibrium
        assert result.stopped_early
        assert len(result.snapshots) == 1

    def test_resume_matches_uninterrupted(self, three_atom_config):
        three_atom_config.update(steps=6)
        cfg = validate_config(three_atom_config)
        full = simulate(cfg).snapshots
        resumed = simulate(cfg, resume=full[3]).snapshots
        assert [s.step for s in resumed] == [4, 5, 6]
        for a, b in zip(resumed, full[4:]):
            assert a == b

    def test_conservation_summary(self, single_dirac_config):
        single_dirac_config.update(steps=20)
        cfg = validate_config(single_dirac_config)
        snapshots = simulate(cfg).snapshots
        summary = conservation_summary(snapshots, cfg.domain, cfg.solver_tol)
        assert summary.slab_exact
        assert summary.ok, [c.to_dict() for c in summary.failed()]
        assert summary.to_dict()["ok"] is True

    def test_conservation_summary_flags_jumps(self, single_dirac_config):
        single_dirac_config.update(steps=2)
        cfg = validate_config(single_dirac_config)
        snapshots = simulate(cfg).snapshots
        jumped = replace(snapshots[-1], positions=snapshots[-1].positions + np.array([[1.0, 0.0, 0.0]]))
        summary = conservation_summary(snapshots[:-1] + [jumped], cfg.domain, cfg.solver_tol)
        assert "w1_measured_speed" in {check.name for check in summary.failed()}

    def test_conservation_summary_needs_snapshots(self, unit_square):
        with pytest.raises(ValueError):
            conservation_summary([], unit_square, 1e-6)


class TestConvergenceHelpers:
    def test_fitted_order_of_linear_errors(self):
        dts = [0.04, 0.02, 0.01]
        assert fitted_order(dts, [0.4, 0.2, 0.1]) == pytest.approx(1.0)
        assert fitted_order(dts, [0.16, 0.04, 0.01]) == pytest.approx(2.0)

    def test_fitted_order_needs_two_positive(self):
        assert np.isnan(fitted_order([0.1, 0.05], [0.0, 0.01]))

    def test_z_residual_of_exact_rotation(self):
        """Points circling a fixed centroid at unit angular speed have small residual."""
        times = np.linspace(0.0, 0.1, 11)
        positions = np.stack([
            np.array([[np.cos(t), np.sin(t), -1.0]]) for t in times
        ])
        centroids = np.zeros_like(positions)
        centroids[:, :, 2] = -1.0
        assert z_residual(times, positions, centroids) <= 1e-4

    def test_z_residual_needs_three_samples(self):
        with pytest.raises(ValueError):
            z_residual(np.array([0.0, 0.1]), np.zeros((2, 1, 3)), np.zeros((2, 1, 3)))

    def test_z_residual_needs_uniform_times(self):
        with pytest.raises(ValueError):
            z_residual(np.array([0.0, 0.1, 0.3]), np.zeros((3, 1, 3)), np.zeros((3, 1, 3)))
