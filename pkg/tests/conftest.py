"""Shared fixtures: canonical plant, weight sets, LQG-stabilized loops."""

import numpy as np
import pytest

from qefsyn.freq import QuadratureConfig
from qefsyn.instances import (
    canonical_plant_spec,
    canonical_weights_lqg,
    canonical_weights_square,
)
from qefsyn.model import assemble_closed_loop, derive_plant
from qefsyn.synth import lqg_controller


@pytest.fixture(scope="session")
def canonical_spec():
    return canonical_plant_spec()


@pytest.fixture(scope="session")
def canonical_plant(canonical_spec):
    return derive_plant(canonical_spec)


@pytest.fixture(scope="session")
def weights_square():
    return canonical_weights_square()


@pytest.fixture(scope="session")
def weights_lqg():
    return canonical_weights_lqg()


@pytest.fixture(scope="session")
def cl_square(canonical_plant, weights_square):
    """Canonical plant, square (invertible-transfer) weights, LQG controller."""
    ctrl = lqg_controller(canonical_plant, weights_square)
    return assemble_closed_loop(canonical_plant, weights_square, ctrl)


@pytest.fixture(scope="session")
def cl_lqg(canonical_plant, weights_lqg):
    """Canonical plant, stacked state/control weights, LQG controller."""
    ctrl = lqg_controller(canonical_plant, weights_lqg)
    return assemble_closed_loop(canonical_plant, weights_lqg, ctrl)


@pytest.fixture(scope="session")
def quad_fast():
    """Loose quadrature for tests where speed matters more than digits."""
    return QuadratureConfig(abs_tol=1e-8, rel_tol=1e-7)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
