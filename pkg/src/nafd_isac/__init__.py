"""Desk-scale simulator of a cell-free full-duplex network that senses
while it communicates.

The package builds a deployment, draws channels, forms beams, and scores
power allocations on two axes: a weighted sum rate and a reciprocal of the
combined position/orientation error bounds. Two optimizers search the
allocation space, an evolutionary one for the whole trade-off front and a
value-learning agent for a single weighted point.
"""

from .beamforming import BeamformingError, BeamSet, compute_beams
from .channel import ChannelSet, FadingParams, draw_channels, split_estimate_error
from .comm import (BeamPolicy, LinkStats, PowerAllocation, RateReport,
                   downlink_sinr, ergodic_rates, link_stats, uplink_sinr)
from .config import ConfigError, build_scenario, dbm_to_watt, load_config
from .dqn import DqnConfig, DqnDivergenceError, DqnResult, train_dqn
from .geometry import (NetworkLayout, PlacementError, make_circle_deployment,
                       make_random_deployment)
from .moo import Nsga2Config, ParetoFront, evolve_nsga2
from .scenario import (AllocationEvaluator, AllocationProblem, ObjectiveWeights,
                       PerformancePoint, Scenario, epa_allocation)
from .sensing import RadarParams, SensingReport, sensing_report

__version__ = "0.1.0"

__all__ = [
    "AllocationEvaluator", "AllocationProblem", "BeamformingError",
    "BeamPolicy", "BeamSet", "ChannelSet", "ConfigError", "DqnConfig",
    "DqnDivergenceError", "DqnResult", "FadingParams", "LinkStats",
    "NetworkLayout", "Nsga2Config", "ObjectiveWeights", "ParetoFront",
    "PerformancePoint", "PlacementError", "PowerAllocation", "RadarParams",
    "RateReport", "Scenario", "SensingReport", "build_scenario",
    "compute_beams", "dbm_to_watt", "downlink_sinr", "draw_channels",
    "epa_allocation", "ergodic_rates", "evolve_nsga2", "link_stats",
    "load_config", "make_circle_deployment", "make_random_deployment",
    "sensing_report", "split_estimate_error", "train_dqn", "uplink_sinr",
    "__version__",
]
