"""Experiment runners: single points, field maps, sweeps, fronts, baselines.

Every runner returns its rows in memory and, when given an output directory,
writes one CSV artifact with a fixed column schema. Numbers are formatted
with a fixed precision so identical configurations produce byte-identical
files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .beamforming import BeamSet
from .comm import PowerAllocation
from .dqn import DqnConfig, DqnResult, calibrate_reward_scale, train_dqn
from .geometry import MIN_NODE_SEPARATION, NetworkLayout, Rru, half_wavelength_ula
from .moo import Nsga2Config, ParetoFront, evolve_nsga2
from .scenario import (AllocationEvaluator, AllocationProblem, PerformancePoint,
                       Scenario, epa_allocation)
from .sensing import crlb_field

__all__ = [
    "epa_allocation", "shared_split_allocation", "GridSpec", "SchemeSpec",
    "run_point", "run_contour", "run_power_sweeps", "run_pareto",
    "run_dqn", "compare_schemes", "write_csv", "write_layout_csv",
    "with_antenna_count",
]

_FLOAT_FORMAT = "%.12g"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return _FLOAT_FORMAT % v


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_layout_csv(layout: NetworkLayout, path) -> None:
    """Node table used to overlay deployments on field maps."""
    rows = []
    for kind, rrus in (("dl_rru", layout.dl_rrus), ("ul_rru", layout.ul_rrus)):
        rows.extend([kind, r.position[0], r.position[1], r.orientation] for r in rrus)
    rows.extend(["dl_user", p[0], p[1], None] for p in layout.dl_users)
    rows.extend(["ul_user", p[0], p[1], None] for p in layout.ul_users)
    rows.append(["target", layout.target[0], layout.target[1], None])
    write_csv(path, ["kind", "x", "y", "orientation"], rows)


def with_antenna_count(layout: NetworkLayout, n_antennas: int) -> NetworkLayout:
    """Same deployment with every RRU array rebuilt at a new element count."""
    def rebuild(rru: Rru) -> Rru:
        return Rru(position=rru.position, orientation=rru.orientation,
                   array=half_wavelength_ula(n_antennas, layout.wavelength,
                                             rru.orientation))
    return NetworkLayout(
        dl_rrus=[rebuild(r) for r in layout.dl_rrus],
        ul_rrus=[rebuild(r) for r in layout.ul_rrus],
        dl_users=layout.dl_users,
        ul_users=layout.ul_users,
        target=layout.target,
        wavelength=layout.wavelength,
    )


def shared_split_allocation(beams: BeamSet, k_dl: int, data_share: float,
                            pilot_share: float, p_max: float,
                            p_ul) -> PowerAllocation:
    """Every RRU gives `data_share` to data (split evenly) and `pilot_share`
    to the sensing pilot, as effective beam-weighted fractions of its budget.
    """
    if data_share < 0 or pilot_share < 0 or data_share + pilot_share > 1 + 1e-12:
        raise ValueError(
            f"shares must be non-negative with sum <= 1, got "
            f"data {data_share} and pilot {pilot_share}"
        )
    alpha = (data_share / k_dl) / beams.data_block_power()
    beta = pilot_share / beams.sense_power()
    return PowerAllocation(alpha=alpha, beta=beta, p_max=p_max,
                           p_ul=np.asarray(p_ul, dtype=float))


# -- single point ------------------------------------------------------------


def point_header(k_dl: int, k_ul: int) -> list:
    return (["f1", "f2", "speb", "soeb"]
            + [f"rate_dl_{i}" for i in range(k_dl)]
            + [f"rate_ul_{i}" for i in range(k_ul)]
            + ["std_err", "trials"])


def point_row(point: PerformancePoint) -> list:
    return ([point.f1, point.f2, point.speb, point.soeb]
            + list(point.rates.rate_dl) + list(point.rates.rate_ul)
            + [point.rates.std_err, point.rates.trials])


def run_point(scenario: Scenario, out_dir=None):
    """Score the equal-share baseline allocation on the scenario."""
    evaluator = AllocationEvaluator(scenario)
    point = evaluator.performance(evaluator.epa())
    paths = []
    if out_dir is not None:
        path = f"{out_dir}/point.csv"
        write_csv(path, point_header(scenario.layout.k_dl, scenario.layout.k_ul),
                  [point_row(point)])
        paths.append(path)
    return point, paths


# -- sensing-accuracy field map ---------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    cells: int = 61
    extent: float = 300.0  # half-width of the square, meters


def run_contour(layout: NetworkLayout, radar, pilot_share: float = 0.25,
                p_max: float = 1.0, grid: GridSpec = GridSpec(), out_dir=None):
    """Sensing error bounds with the target swept over a square grid.

    The sensing beams re-aim at each candidate cell. Cells closer than the
    minimum node separation to any RRU are masked rather than evaluated.
    """
    axis = np.linspace(-grid.extent, grid.extent, grid.cells)
    xx, yy = np.meshgrid(axis, axis)
    targets = np.column_stack([xx.ravel(), yy.ravel()])
    rru_pos = np.asarray([r.position for r in layout.dl_rrus + layout.ul_rrus])
    dist = np.linalg.norm(targets[:, None, :] - rru_pos[None, :, :], axis=-1)
    mask = dist.min(axis=1) < MIN_NODE_SEPARATION

    beta = np.full(layout.m_dl, pilot_share)  # unit-norm sensing beams
    speb, soeb = crlb_field(layout, radar, targets, beta, p_max)
    speb = np.where(mask, np.nan, speb)
    soeb = np.where(mask, np.nan, soeb)

    rows = [(targets[i, 0], targets[i, 1], int(mask[i]),
             None if mask[i] else speb[i], None if mask[i] else soeb[i])
            for i in range(len(targets))]
    paths = []
    if out_dir is not None:
        path = f"{out_dir}/contour.csv"
        write_csv(path, ["x", "y", "mask", "speb", "soeb"], rows)
        layout_path = f"{out_dir}/layout.csv"
        write_layout_csv(layout, layout_path)
        paths = [path, layout_path]
    return {"x": targets[:, 0], "y": targets[:, 1], "mask": mask,
            "speb": speb, "soeb": soeb}, paths


# -- power-split sweeps ------------------------------------------------------


def run_power_sweeps(scenario: Scenario, variable: str = "pilot", values=None,
                     antenna_counts=(4, 16), out_dir=None):
    """Sweep the pilot (or data) effective share, the other side absorbing
    the remainder under an equal per-stream split; repeated per antenna count.
    """
    if variable not in ("pilot", "data"):
        raise ValueError(f"unknown sweep variable: {variable!r}")
    if values is None:
        values = np.linspace(0.05, 0.95, 10)
    rows = []
    for n_ant in antenna_counts:
        sub = replace(scenario, layout=with_antenna_count(scenario.layout, n_ant))
        evaluator = AllocationEvaluator(sub)
        beams = evaluator.reference_beams
        for v in values:
            pilot = v if variable == "pilot" else 1.0 - v
            data = 1.0 - pilot
            alloc = shared_split_allocation(beams, sub.layout.k_dl, data, pilot,
                                            sub.p_max, sub.p_ul)
            point = evaluator.performance(alloc)
            rows.append([variable, v, n_ant, point.f1, point.rates.std_err,
                         point.f2, point.speb, point.soeb])
    paths = []
    if out_dir is not None:
        path = f"{out_dir}/sweep.csv"
        write_csv(path, ["variable", "value", "n_antennas", "f1", "std_err",
                         "f2", "speb", "soeb"], rows)
        paths.append(path)
    return rows, paths


# -- optimizer runs ----------------------------------------------------------


@dataclass
class ParetoRunResult:
    front: ParetoFront | None
    dqn: DqnResult | None
    epa_point: PerformancePoint
    rows: list
    paths: list


def run_pareto(scenario: Scenario, optimizers=("nsga2", "dqn"),
               nsga: Nsga2Config | None = None, dqn_cfg: DqnConfig | None = None,
               out_dir=None) -> ParetoRunResult:
    """Trade-off front plus baseline points on common objective axes."""
    evaluator = AllocationEvaluator(scenario)
    epa_point = evaluator.performance(evaluator.epa())
    n_genes = evaluator.n_genes
    header = (["source", "f1", "f2", "speb", "soeb"]
              + [f"gene_{i}" for i in range(n_genes)])
    rows = []

    front = None
    if "nsga2" in optimizers:
        front = evolve_nsga2(AllocationProblem(evaluator), nsga or Nsga2Config())
        for member in front.members:
            sense = evaluator.sensing(member.allocation)
            rows.append(["front", member.objectives[0], member.objectives[1],
                         sense.speb, sense.soeb] + list(member.genes))

    rows.append(["epa", epa_point.f1, epa_point.f2, epa_point.speb,
                 epa_point.soeb] + [None] * n_genes)

    dqn_result = None
    if "dqn" in optimizers:
        dqn_result = train_dqn(evaluator, dqn_cfg or DqnConfig())
        best = evaluator.performance(dqn_result.best_allocation)
        rows.append(["dqn", best.f1, best.f2, best.speb, best.soeb]
                    + list(dqn_result.best_genes))

    paths = []
    if out_dir is not None:
        path = f"{out_dir}/pareto.csv"
        write_csv(path, header, rows)
        paths.append(path)
    return ParetoRunResult(front=front, dqn=dqn_result, epa_point=epa_point,
                           rows=rows, paths=paths)


def run_dqn(scenario: Scenario, dqn_cfg: DqnConfig | None = None, out_dir=None):
    """Train the value-learning agent alone and emit its reward trace."""
    evaluator = AllocationEvaluator(scenario)
    result = train_dqn(evaluator, dqn_cfg or DqnConfig())
    rows = [[ep, r, b] for ep, (r, b) in enumerate(
        zip(result.episode_rewards, result.best_reward_history))]
    paths = []
    if out_dir is not None:
        path = f"{out_dir}/dqn_trace.csv"
        write_csv(path, ["episode", "mean_reward", "best_reward"], rows)
        best = evaluator.performance(result.best_allocation)
        best_path = f"{out_dir}/dqn_best.csv"
        write_csv(best_path,
                  point_header(scenario.layout.k_dl, scenario.layout.k_ul),
                  [point_row(best)])
        paths = [path, best_path]
    return result, paths


# -- duplexing-scheme comparison ---------------------------------------------


@dataclass(frozen=True)
class SchemeSpec:
    """Block-time accounting for one duplexing architecture.

    Fractions partition one coherence block and must sum to 1. When
    `duplex` is set the uplink and downlink fractions run simultaneously,
    so each link direction is active for t_ul + t_dl of the block.
    """

    name: str
    t_sense: float
    t_ul: float
    t_dl: float
    duplex: bool

    def __post_init__(self):
        fracs = (self.t_sense, self.t_ul, self.t_dl)
        if any(f < -1e-12 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(
                f"time fractions must be non-negative and sum to 1, got {fracs}"
            )

    @property
    def ul_time(self) -> float:
        return self.t_ul + self.t_dl if self.duplex else self.t_ul

    @property
    def dl_time(self) -> float:
        return self.t_ul + self.t_dl if self.duplex else self.t_dl


def compare_schemes(scenario: Scenario, sensing_symbols=(10, 25, 50, 75, 100, 150, 190),
                    block_symbols: int = 200, out_dir=None):
    """Rate and sensing accuracy of three duplexing architectures.

    The proposed scheme senses through pilots superimposed on the whole
    block. The baselines spend a dedicated slot of `s` symbols sensing at
    full power, then either alternate uplink and downlink (time-division) or
    run both simultaneously without pilots. Error bounds scale inversely
    with the number of sensing symbols integrated.
    """
    evaluator = AllocationEvaluator(scenario)
    layout = scenario.layout
    w = scenario.weights
    k_dl = layout.k_dl
    beams = evaluator.reference_beams
    no_ul = np.zeros_like(scenario.p_ul)

    def sum_rate(report):
        return w.rate_dl * report.rate_dl.sum() + w.rate_ul * report.rate_ul.sum()

    # Proposed: pilots superimposed, both directions all block long.
    epa = evaluator.epa()
    r_prop = evaluator.rates(epa)
    prop_rate = sum_rate(r_prop)
    prop_speb = evaluator.sensing(epa).speb / block_symbols
    prop_soeb = evaluator.sensing(epa).soeb / block_symbols

    # Baseline communication phases: full data power, no pilots.
    data_full = shared_split_allocation(beams, k_dl, 1.0, 0.0, scenario.p_max,
                                        scenario.p_ul)
    data_full_silent_ul = shared_split_allocation(beams, k_dl, 1.0, 0.0,
                                                  scenario.p_max, no_ul)
    ul_only = shared_split_allocation(beams, k_dl, 0.0, 0.0, scenario.p_max,
                                      scenario.p_ul)
    r_nafd = evaluator.rates(data_full)
    r_dl_clean = evaluator.rates(data_full_silent_ul)
    r_ul_clean = evaluator.rates(ul_only)
    dl_clean = w.rate_dl * r_dl_clean.rate_dl.sum()
    ul_clean = w.rate_ul * r_ul_clean.rate_ul.sum()
    dl_nafd = w.rate_dl * r_nafd.rate_dl.sum()
    ul_nafd = w.rate_ul * r_nafd.rate_ul.sum()

    # Baseline sensing slot: every RRU pours its whole budget into the beam.
    full_pilot = shared_split_allocation(beams, k_dl, 0.0, 1.0, scenario.p_max,
                                         no_ul)
    slot_sense = evaluator.sensing(full_pilot)

    rows = []
    for s in sensing_symbols:
        if not 0 < s < block_symbols:
            raise ValueError(
                f"sensing_symbols must lie strictly inside the block "
                f"(0, {block_symbols}), got {s}"
            )
        t_sense = s / block_symbols
        half = (1.0 - t_sense) / 2.0
        schemes = [
            (SchemeSpec("nafd_isac", 0.0, 0.5, 0.5, duplex=True),
             prop_rate, prop_speb, prop_soeb),
            (SchemeSpec("tdd_nafd_isac", t_sense, half, half, duplex=True),
             None, slot_sense.speb / s, slot_sense.soeb / s),
            (SchemeSpec("tdd_isac", t_sense, half, half, duplex=False),
             None, slot_sense.speb / s, slot_sense.soeb / s),
        ]
        for spec_, rate, speb, soeb in schemes:
            if rate is None:
                if spec_.duplex:
                    rate = spec_.dl_time * dl_nafd + spec_.ul_time * ul_nafd
                else:
                    rate = spec_.dl_time * dl_clean + spec_.ul_time * ul_clean
            rows.append([spec_.name, s, spec_.t_sense, spec_.t_ul, spec_.t_dl,
                         int(spec_.duplex), rate, speb, soeb])
    paths = []
    if out_dir is not None:
        path = f"{out_dir}/schemes.csv"
        write_csv(path, ["scheme", "sensing_symbols", "t_sense", "t_ul", "t_dl",
                         "duplex", "sum_rate", "speb", "soeb"], rows)
        paths.append(path)
    return rows, paths
