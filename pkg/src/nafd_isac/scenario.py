"""Scenario assembly and fast repeated evaluation of power allocations.

An AllocationEvaluator freezes one set of Monte Carlo channel realizations
(common random numbers) plus a reference beam set, then evaluates any number
of candidate allocations against them. Rates reduce to closed arithmetic on
cached beam-level scalars and sensing bounds to a cached coefficient matrix,
so optimizer populations can be scored in microseconds per candidate.

The reference realization (its beams in particular) also anchors everything
that depends on beam norms: the power constraint, its repair, and the
equal-share baseline allocation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .beamforming import BeamSet
from .channel import FadingParams, as_seed_sequence, child_seed
from .comm import (BeamPolicy, LinkStats, PowerAllocation, RateReport,
                   link_stats, max_constraint_violation, realize_trial,
                   sinr_profile, summarize_rates, trial_seeds)
from .geometry import NetworkLayout
from .moo import repair_to_constraint
from .sensing import RadarParams, SensingReport, aggregate_errors, crlb_coefficients


@dataclass(frozen=True)
class ObjectiveWeights:
    rate_dl: float = 1.0
    rate_ul: float = 1.0
    position: float = 1.0
    orientation: float = 1.0


@dataclass(frozen=True)
class Scenario:
    layout: NetworkLayout
    fading: FadingParams
    radar: RadarParams
    policy: BeamPolicy
    weights: ObjectiveWeights
    p_max: float
    p_ul: np.ndarray
    trials: int
    seed: int


@dataclass(frozen=True)
class PerformancePoint:
    """One allocation scored on both objectives."""

    f1: float
    f2: float
    speb: float
    soeb: float
    rates: RateReport
    sensing: SensingReport
    allocation: PowerAllocation


def epa_allocation(beams: BeamSet, k_dl: int, p_max: float = 1.0,
                   p_ul=None) -> PowerAllocation:
    """Equal-share baseline: every RRU splits its budget evenly.

    Each of the K_dl data streams and the sensing pilot receives effective
    share 1/(K_dl + 1) of the RRU budget, making the power constraint tight
    at every RRU.
    """
    share = 1.0 / (k_dl + 1)
    alpha = share / beams.data_block_power()
    beta = share / beams.sense_power()
    if p_ul is None:
        p_ul = np.zeros(0)
    return PowerAllocation(alpha=alpha, beta=beta, p_max=p_max,
                           p_ul=np.asarray(p_ul, dtype=float))


class AllocationEvaluator:
    """Scores PowerAllocations against frozen channel realizations."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        layout, fading, policy = scenario.layout, scenario.fading, scenario.policy

        root = as_seed_sequence(scenario.seed)
        ref_channels, ref_beams = realize_trial(layout, fading, policy,
                                                child_seed(root, 0))
        self.reference_beams: BeamSet = ref_beams
        per_trial = []
        for ts in trial_seeds(root, scenario.trials):
            channels, beams = realize_trial(layout, fading, policy, ts)
            per_trial.append(link_stats(channels, beams))
        self._stats = LinkStats(**{
            name: np.stack([getattr(s, name) for s in per_trial])
            for name in ("mu_data", "mu_pilot_err", "gain_uu", "ul_signal",
                         "cross_data", "cross_pilot")
        })
        coef = crlb_coefficients(layout, scenario.radar, ref_beams, scenario.p_max)
        self._coef_range, self._coef_doa, self._coef_dod = coef
        self._ref_channels = ref_channels

    # -- allocation handling -------------------------------------------------

    @property
    def n_genes(self) -> int:
        return self.scenario.layout.m_dl * (self.scenario.layout.k_dl + 1)

    def repair(self, genes) -> PowerAllocation:
        return repair_to_constraint(genes, self.reference_beams,
                                    self.scenario.p_max, self.scenario.p_ul)

    def epa(self) -> PowerAllocation:
        return epa_allocation(self.reference_beams, self.scenario.layout.k_dl,
                              self.scenario.p_max, self.scenario.p_ul)

    def constraint_violation(self, alloc: PowerAllocation) -> float:
        return max_constraint_violation(alloc, self.reference_beams)

    # -- objectives ----------------------------------------------------------

    def rates(self, alloc: PowerAllocation) -> RateReport:
        gamma_dl, gamma_ul = sinr_profile(self._stats, alloc, self.scenario.fading,
                                          mode=self.scenario.policy.numerator_mode)
        return summarize_rates(np.log2(1.0 + gamma_dl), np.log2(1.0 + gamma_ul),
                               self.scenario.weights.rate_dl,
                               self.scenario.weights.rate_ul)

    def sensing(self, alloc: PowerAllocation) -> SensingReport:
        beta = alloc.beta
        triples = np.stack([
            _reciprocal(self._coef_range @ beta),
            _reciprocal(self._coef_doa @ beta),
            _reciprocal(self._coef_dod @ beta),
        ], axis=1)
        return aggregate_errors(triples, self.scenario.weights.position,
                                self.scenario.weights.orientation)

    def f1(self, alloc: PowerAllocation) -> float:
        return self.rates(alloc).f1

    def f2(self, alloc: PowerAllocation) -> float:
        return self.sensing(alloc).f2

    def objectives(self, alloc: PowerAllocation) -> tuple:
        return (self.f1(alloc), self.f2(alloc))

    def performance(self, alloc: PowerAllocation) -> PerformancePoint:
        rates = self.rates(alloc)
        sensing = self.sensing(alloc)
        return PerformancePoint(f1=rates.f1, f2=sensing.f2, speb=sensing.speb,
                                soeb=sensing.soeb, rates=rates, sensing=sensing,
                                allocation=alloc)

    # -- optimizer state features -------------------------------------------

    def csi_features(self) -> np.ndarray:
        """Standardized log-scale large-scale gains, fixed per scenario."""
        layout = self.scenario.layout
        dl = np.abs(self._ref_channels.g_dl).mean(axis=2).ravel()
        ul = np.abs(self._ref_channels.g_ul).mean(axis=2).ravel()
        feats = np.log10(np.concatenate([dl, ul]) + 1e-300)
        spread = feats.std()
        if spread == 0.0:
            spread = 1.0
        return (feats - feats.mean()) / spread


def _reciprocal(info: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(info > 0.0, 1.0 / info, np.inf)


class AllocationProblem:
    """Adapter exposing the evaluator under the optimizer's protocol."""

    def __init__(self, evaluator: AllocationEvaluator):
        self._evaluator = evaluator
        self.n_genes = evaluator.n_genes

    def decode(self, genes) -> PowerAllocation:
        return self._evaluator.repair(genes)

    def evaluate(self, genes) -> tuple:
        return self._evaluator.objectives(self.decode(genes))
