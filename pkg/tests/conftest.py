"""Shared fixtures: domains, Dirac clouds, quadrature grids and run configs."""
import json

import numpy as np
import pytest

from src.domain_model.types import DiracCloud, DomainSpec, QuadratureSpec, WeightVector
from src.dual_solver.solver import solve_weights
from src.envelope_geometry.quadrature import build_grid

UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
CENTERED_STRIP = ((-0.5, 0.0), (0.5, 0.0), (0.5, 1.0), (-0.5, 1.0))

SINGLE_DIRAC_WEIGHT = -4.0 / 3.0
SINGLE_DIRAC_CENTROID = (11.0 / 24.0, 11.0 / 24.0, 47.0 / 90.0)
SINGLE_DIRAC_VELOCITY = (11.0 / 24.0, -11.0 / 24.0, 0.0)
SINGLE_DIRAC_ENERGY = 73.0 / 90.0


@pytest.fixture
def unit_square():
    """Unit square, delta = 0.5, D = 3, H = 60 (threshold is about 26.97)."""
    return DomainSpec(omega2_polygon=UNIT_SQUARE, delta=0.5, cap_height=60.0, horizontal_radius=3.0)


@pytest.fixture
def centered_strip():
    """[-0.5, 0.5] x [0, 1], symmetric about x1 = 0."""
    return DomainSpec(omega2_polygon=CENTERED_STRIP, delta=0.5, cap_height=60.0, horizontal_radius=3.0)


@pytest.fixture
def single_dirac():
    return DiracCloud(points=[[0.0, 0.0, -1.0]], masses=[1.0])


@pytest.fixture
def symmetric_pair():
    return DiracCloud(points=[[-0.25, 0.5, -1.0], [0.25, 0.5, -1.0]], masses=[0.5, 0.5])


@pytest.fixture
def two_atoms():
    return DiracCloud(points=[[0.3, 0.4, -1.0], [0.7, 0.6, -0.8]], masses=[0.4, 0.6])


@pytest.fixture
def three_atoms():
    return DiracCloud(
        points=[[0.3, 0.4, -1.0], [0.7, 0.5, -0.8], [0.5, 0.7, -1.2]],
        masses=[0.3, 0.3, 0.4],
    )


@pytest.fixture
def sixteen_atoms():
    rng = np.random.default_rng(7)
    ticks = np.linspace(0.15, 0.85, 4)
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    horizontal = np.column_stack([gx.ravel(), gy.ravel()]) + rng.uniform(-0.03, 0.03, size=(16, 2))
    vertical = rng.uniform(-1.5, -0.7, size=(16, 1))
    return DiracCloud(points=np.hstack([horizontal, vertical]), masses=np.full(16, 1.0 / 16.0))


@pytest.fixture
def grid64(unit_square):
    return build_grid(unit_square, QuadratureSpec(64))


@pytest.fixture
def grid256(unit_square):
    return build_grid(unit_square, QuadratureSpec(256))


@pytest.fixture
def strip_grid(centered_strip):
    return build_grid(centered_strip, QuadratureSpec(64))


def solved(cloud, grid, tol=None, max_iter=2000):
    """Converged (weights, stats, report) from the quadratic start."""
    tol = tol if tol is not None else grid.spec.min_solver_tol
    weights, stats, report = solve_weights(cloud, WeightVector.quadratic_start(cloud), tol, max_iter, grid)
    assert report.converged, report.to_dict()
    return weights, stats, report


@pytest.fixture
def single_dirac_config():
    """Run configuration tree of the single-Dirac fixture."""
    return {
        "domain": {
            "omega2_polygon": [list(v) for v in UNIT_SQUARE],
            "delta": 0.5,
            "cap_height": 60.0,
            "horizontal_radius": 3.0,
        },
        "initial": {"kind": "explicit", "points": [[0.0, 0.0, -1.0]], "masses": [1.0]},
        "dt": 0.01,
        "steps": 0,
        "scheme": "euler",
        "quadrature": {"columns_per_axis": 64},
    }


@pytest.fixture
def three_atom_config(single_dirac_config):
    config = dict(single_dirac_config)
    config["initial"] = {
        "kind": "explicit",
        "points": [[0.3, 0.4, -1.0], [0.7, 0.5, -0.8], [0.5, 0.7, -1.2]],
        "masses": [0.3, 0.3, 0.4],
    }
    return config


@pytest.fixture
def quadratic_config(single_dirac_config):
    """Analytic initial data P0 = q + b3 x3 + const: a unit-height fluid slab."""
    config = dict(single_dirac_config)
    config["initial"] = {
        "kind": "analytic", "alpha": 1.0, "beta": 1.0, "gamma1": 0.0, "gamma2": 0.0,
        "b3": -1.0, "samples": 8, "seed": 11,
    }
    return config


@pytest.fixture
def write_config(tmp_path):
    """Write a config tree to a JSON file and return its path."""
    def _write(config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        return path
    return _write
