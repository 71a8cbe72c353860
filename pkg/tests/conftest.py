import numpy as np
import pytest

from nafd_isac.beamforming import compute_beams
from nafd_isac.channel import child_seed, draw_channels, split_estimate_error
from nafd_isac.config import build_scenario, validate_config
from nafd_isac.geometry import make_circle_deployment
from nafd_isac.scenario import AllocationEvaluator


@pytest.fixture(scope="session")
def layout():
    return make_circle_deployment(16, 200.0, 3, 3, 300.0, seed=0)


@pytest.fixture(scope="session")
def scenario20():
    return build_scenario(validate_config({"trials": 20}))


@pytest.fixture(scope="session")
def evaluator20(scenario20):
    return AllocationEvaluator(scenario20)


@pytest.fixture(scope="session")
def realization(scenario20):
    """One channel draw with estimates split out, plus its beams."""
    ch = draw_channels(scenario20.layout, scenario20.fading,
                       child_seed(scenario20.seed, 0))
    ch = split_estimate_error(ch, scenario20.fading,
                              child_seed(scenario20.seed, 0))
    beams = compute_beams(ch, scenario20.layout)
    return ch, beams


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
