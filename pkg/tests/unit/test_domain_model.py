"""Unit tests for domain types, config validation and cloud hygiene."""
import math

import numpy as np
import pytest

from src.domain_model.cloud import default_merge_tolerance, merge_coincident
from src.domain_model.types import DiracCloud, DomainSpec, QuadratureSpec, Scheme, SimConfig, WeightVector
from src.domain_model.validation import max_speed_bound, support_horizon_check, validate_config
from src.errors import ConfigValidationError

from tests.conftest import UNIT_SQUARE


class TestDomainSpec:
    """Test derived quantities and invariants of the horizontal domain."""

    def test_unit_square_derived_quantities(self, unit_square):
        """Area, max|x| and diameter of the unit square."""
        assert unit_square.area_omega2 == pytest.approx(1.0)
        assert unit_square.max_abs_x == pytest.approx(math.sqrt(2.0))
        assert unit_square.diam_omega2 == pytest.approx(math.sqrt(2.0))
        assert unit_square.slab == (-2.0, -0.5)

    def test_cap_threshold_value(self, unit_square):
        """2/area + (2 max|x| + 2D)/delta * diam = 10 + 12 sqrt(2)."""
        assert unit_square.cap_threshold == pytest.approx(10.0 + 12.0 * math.sqrt(2.0))
        assert unit_square.cap_threshold == pytest.approx(26.97, abs=0.01)

    def test_cap_height_below_threshold_rejected(self):
        """H = 20 is below the threshold and names it."""
        with pytest.raises(ConfigValidationError, match="threshold"):
            DomainSpec(omega2_polygon=UNIT_SQUARE, delta=0.5, cap_height=20.0, horizontal_radius=3.0)

    def test_clockwise_polygon_rejected(self):
        with pytest.raises(ConfigValidationError, match="convex"):
            DomainSpec(omega2_polygon=tuple(reversed(UNIT_SQUARE)), delta=0.5, cap_height=60.0, horizontal_radius=3.0)

    def test_nonconvex_polygon_rejected(self):
        dart = ((0.0, 0.0), (1.0, 0.0), (0.3, 0.3), (0.0, 1.0))
        with pytest.raises(ConfigValidationError):
            DomainSpec(omega2_polygon=dart, delta=0.5, cap_height=1000.0, horizontal_radius=3.0)

    @pytest.mark.parametrize("delta", [0.0, -0.1, 1.5])
    def test_delta_out_of_range(self, delta):
        with pytest.raises(ConfigValidationError, match="delta"):
            DomainSpec(omega2_polygon=UNIT_SQUARE, delta=delta, cap_height=60.0, horizontal_radius=3.0)

    def test_radius_smaller_than_domain_rejected(self):
        with pytest.raises(ConfigValidationError, match="horizontal_radius"):
            DomainSpec(omega2_polygon=UNIT_SQUARE, delta=0.5, cap_height=60.0, horizontal_radius=1.0)

    def test_contains_closed_polygon(self, unit_square):
        inside = unit_square.contains(np.array([[0.5, 0.5], [1.0, 1.0], [1.1, 0.5], [-0.01, 0.2]]))
        assert inside.tolist() == [True, True, False, False]


class TestDiracCloud:
    """Test cloud invariants."""

    def test_masses_must_sum_to_one(self):
        with pytest.raises(ConfigValidationError, match="sum to 1"):
            DiracCloud(points=[[0.0, 0.0, -1.0], [0.5, 0.5, -1.0]], masses=[0.5, 0.6])

    def test_masses_must_be_positive(self):
        with pytest.raises(ConfigValidationError, match="positive"):
            DiracCloud(points=[[0.0, 0.0, -1.0], [0.5, 0.5, -1.0]], masses=[1.5, -0.5])

    def test_points_are_read_only(self, three_atoms):
        with pytest.raises(ValueError):
            three_atoms.points[0, 0] = 1.0

    def test_slab_violation_names_point(self, unit_square):
        cloud = DiracCloud(points=[[0.0, 0.0, -1.0], [0.5, 0.5, -0.1]], masses=[0.5, 0.5])
        with pytest.raises(ConfigValidationError, match="Point 1"):
            cloud.check_support(unit_square)

    def test_radius_violation(self, unit_square):
        cloud = DiracCloud(points=[[5.0, 0.0, -1.0]], masses=[1.0])
        with pytest.raises(ConfigValidationError, match="radius"):
            cloud.check_support(unit_square)

    def test_with_points_keeps_masses(self, three_atoms):
        moved = three_atoms.with_points(three_atoms.points + 0.01)
        assert np.array_equal(moved.masses, three_atoms.masses)
        assert moved != three_atoms


class TestWeightVector:
    def test_quadratic_start(self, three_atoms):
        w = WeightVector.quadratic_start(three_atoms)
        expected = 0.5 * (three_atoms.points[:, 0] ** 2 + three_atoms.points[:, 1] ** 2)
        assert np.array_equal(w.weights, expected)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            WeightVector([0.0, np.nan])

    def test_alignment(self, three_atoms):
        with pytest.raises(ValueError):
            WeightVector([0.0]).check_aligned(three_atoms)


class TestQuadratureSpec:
    def test_noise_floor(self):
        assert QuadratureSpec(64).min_solver_tol == pytest.approx(0.1 / 4096)
        assert QuadratureSpec(256).min_solver_tol == pytest.approx(1.52587890625e-6)

    def test_too_few_columns(self):
        with pytest.raises(ConfigValidationError):
            QuadratureSpec(4)


class TestMergeCoincident:
    """Test merging of points closer than the tolerance."""

    def test_default_tolerance_scales_with_diameter(self):
        assert default_merge_tolerance(1.0) == 1e-9
        assert default_merge_tolerance(np.sqrt(2.0)) == pytest.approx(np.sqrt(2.0) * 1e-9)

    def test_merges_duplicates_into_weighted_mean(self):
        cloud = DiracCloud(
            points=[[0.2, 0.2, -1.0], [0.2, 0.2, -1.0], [0.8, 0.8, -1.0]],
            masses=[0.25, 0.25, 0.5],
        )
        merged = merge_coincident(cloud, 1e-9)
        assert merged.count == 2
        assert merged.masses.tolist() == pytest.approx([0.5, 0.5])
        assert merged.points[0].tolist() == pytest.approx([0.2, 0.2, -1.0])

    def test_chain_merges_transitively(self):
        cloud = DiracCloud(
            points=[[0.0, 0.0, -1.0], [0.6e-9, 0.0, -1.0], [1.2e-9, 0.0, -1.0]],
            masses=[1 / 3, 1 / 3, 1 / 3],
        )
        assert merge_coincident(cloud, 1e-9).count == 1

    def test_idempotent(self):
        cloud = DiracCloud(
            points=[[0.2, 0.2, -1.0], [0.2, 0.2 + 1e-12, -1.0], [0.8, 0.8, -1.0]],
            masses=[0.25, 0.25, 0.5],
        )
        once = merge_coincident(cloud, 1e-9)
        assert merge_coincident(once, 1e-9) is once

    def test_no_merge_returns_same_object(self, three_atoms):
        assert merge_coincident(three_atoms, 1e-9) is three_atoms


class TestValidateConfig:
    """Test validation of configuration trees."""

    def test_valid_mapping(self, single_dirac_config):
        cfg = validate_config(single_dirac_config)
        assert isinstance(cfg, SimConfig)
        assert cfg.scheme is Scheme.EULER
        assert cfg.solver_tol == pytest.approx(0.1 / 64 ** 2)
        assert cfg.initial.count == 1

    def test_default_tolerance_on_fine_grid(self, single_dirac_config):
        single_dirac_config["quadrature"] = {"columns_per_axis": 2048}
        assert validate_config(single_dirac_config).solver_tol == pytest.approx(1e-7)

    def test_unknown_key_is_named(self, single_dirac_config):
        single_dirac_config["dtt"] = 0.01
        with pytest.raises(ConfigValidationError, match="dtt"):
            validate_config(single_dirac_config)

    def test_tolerance_below_floor(self, single_dirac_config):
        single_dirac_config["solver_tol"] = 1e-9
        with pytest.raises(ConfigValidationError, match="noise floor"):
            validate_config(single_dirac_config)

    def test_cfl_violation(self, single_dirac_config):
        single_dirac_config["dt"] = 1.0
        with pytest.raises(ConfigValidationError, match="too large"):
            validate_config(single_dirac_config)

    def test_point_outside_slab(self, single_dirac_config):
        single_dirac_config["initial"]["points"] = [[0.0, 0.0, -3.0]]
        with pytest.raises(ConfigValidationError, match="slab"):
            validate_config(single_dirac_config)

    def test_masses_default_to_uniform(self, single_dirac_config):
        single_dirac_config["initial"] = {"kind": "explicit", "points": [[0.2, 0.2, -1.0], [0.7, 0.7, -1.0]]}
        cfg = validate_config(single_dirac_config)
        assert cfg.initial.masses.tolist() == [0.5, 0.5]

    def test_coincident_points_are_merged(self, single_dirac_config):
        single_dirac_config["initial"] = {
            "kind": "explicit", "points": [[0.2, 0.2, -1.0], [0.2, 0.2, -1.0]], "masses": [0.5, 0.5],
        }
        assert validate_config(single_dirac_config).initial.count == 1

    def test_validating_twice_is_stable(self, three_atom_config):
        cfg = validate_config(three_atom_config)
        assert validate_config(cfg) == cfg

    def test_analytic_b3_outside_slab(self, quadratic_config):
        quadratic_config["initial"]["b3"] = -5.0
        with pytest.raises(ConfigValidationError, match="b3"):
            validate_config(quadratic_config)


class TestSpeedAndHorizon:
    def test_max_speed_bound(self, unit_square):
        assert max_speed_bound(unit_square) == pytest.approx(3.0 + math.sqrt(2.0))

    def test_support_horizon(self, single_dirac_config):
        single_dirac_config["steps"] = 100
        required, ok = support_horizon_check(validate_config(single_dirac_config))
        assert required == pytest.approx(math.sqrt(2.0) * 2.0)
        assert ok
