"""Bi-objective power-allocation search (NSGA-II, maximization convention).

The genome is one fraction in [0, 1] per (RRU, data stream) pair plus one
pilot fraction per RRU. A proportional repair rescales any RRU whose
requested beam-weighted load exceeds its unit power budget, so every
evaluated individual is feasible.

The evolved population follows the usual elitist (rank, crowding) selection.
Separately, an unbounded archive keeps every non-dominated point found so
far; the returned front and the per-generation hypervolume trace come from
the archive, which makes both immune to crowding-truncation losses inside
the fixed-size population.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamforming import BeamSet
from .comm import PowerAllocation


class EvaluationError(RuntimeError):
    """Objective evaluation failed; offending genes are attached."""

    def __init__(self, message, genes):
        super().__init__(message)
        self.genes = np.asarray(genes)


@dataclass
class Nsga2Config:
    population: int = 100
    generations: int = 200
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # default 1 / n_genes
    mutation_eta: float = 20.0
    seed: int = 0


@dataclass(frozen=True)
class FrontMember:
    genes: np.ndarray
    allocation: object
    objectives: tuple


@dataclass
class ParetoFront:
    members: list
    generations: int
    evaluations: int
    seed: int
    hypervolume_history: np.ndarray
    best_f1_history: np.ndarray
    best_f2_history: np.ndarray

    def objective_array(self) -> np.ndarray:
        return np.array([m.objectives for m in self.members])


def repair_to_constraint(genes: np.ndarray, beams: BeamSet, p_max: float,
                         p_ul: np.ndarray) -> PowerAllocation:
    """Decode a genome into a feasible PowerAllocation.

    Genes lay out per RRU as [data stream 0 .. K_dl-1, pilot]. Any RRU whose
    load exceeds 1 has all its factors scaled by 1/load; feasible RRUs are
    returned untouched (repair is idempotent).
    """
    m_dl, k_dl = beams.w_data.shape[:2]
    g = np.asarray(genes, dtype=float).reshape(m_dl, k_dl + 1).copy()
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError("genes must lie in [0, 1]")
    data_power = beams.data_block_power()          # (M_dl, K_dl)
    sense_power = beams.sense_power()              # (M_dl,)
    load = (g[:, :k_dl] * data_power).sum(axis=1) + g[:, k_dl] * sense_power
    over = load > 1.0
    g[over] /= load[over, None]
    return PowerAllocation(alpha=g[:, :k_dl], beta=g[:, k_dl], p_max=p_max,
                           p_ul=np.asarray(p_ul, dtype=float))


# -- dominance machinery -----------------------------------------------------


def _domination_matrix(objs: np.ndarray) -> np.ndarray:
    """dom[i, j] True when i dominates j (>= in all, > in at least one)."""
    ge = (objs[:, None, :] >= objs[None, :, :]).all(axis=2)
    gt = (objs[:, None, :] > objs[None, :, :]).any(axis=2)
    return ge & gt


def fast_nondominated_sort(objs) -> list:
    """Front indices, best first, under the maximization convention."""
    objs = np.asarray(objs, dtype=float)
    if objs.ndim != 2:
        raise ValueError(f"expected (n, n_obj) objectives, got shape {objs.shape}")
    n = objs.shape[0]
    dom = _domination_matrix(objs)
    n_dominators = dom.sum(axis=0)
    fronts = []
    remaining = n_dominators.copy()
    current = np.flatnonzero(remaining == 0)
    assigned = np.zeros(n, dtype=bool)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        remaining = remaining - dom[current].sum(axis=0)
        remaining[assigned] = -1
        current = np.flatnonzero(remaining == 0)
    return fronts

def crowding_distance(front: list, objs) -> dict:
    """Per-index crowding distance within one front (boundaries infinite)."""
    objs = np.asarray(objs, dtype=float)
    k = len(front)
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
        return dict(zip(front, dist))
    sub = objs[front]
    for j in range(sub.shape[1]):
        order = np.argsort(sub[:, j], kind="stable")
        lo, hi = sub[order[0], j], sub[order[-1], j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if hi > lo:
            gaps = (sub[order[2:], j] - sub[order[:-2], j]) / (hi - lo)
            dist[order[1:-1]] += gaps
    return dict(zip(front, dist))


def hypervolume_2d(objs, ref=(0.0, 0.0)) -> float:
    """Dominated area between `ref` and the non-dominated subset (maximization)."""
    objs = np.asarray(objs, dtype=float)
    if objs.size == 0:
        return 0.0
    pts = objs[(objs[:, 0] > ref[0]) & (objs[:, 1] > ref[1])]
    if pts.size == 0:
        return 0.0
    order = np.argsort(-pts[:, 0], kind="stable")
    area = 0.0
    best_f2 = ref[1]
    for f1, f2 in pts[order]:
        if f2 > best_f2:
            area += (f1 - ref[0]) * (f2 - best_f2)
            best_f2 = f2
    return float(area)


def nondominated_subset(objs: np.ndarray) -> np.ndarray:
    dom = _domination_matrix(np.asarray(objs, dtype=float))
    return np.flatnonzero(~dom.any(axis=0))


# -- variation operators -----------------------------------------------------


def _sbx_pair(rng, p1, p2, eta):
    """Simulated binary crossover on the unit box, one child pair."""
    c1, c2 = p1.copy(), p2.copy()
    for j in range(p1.size):
        if rng.random() > 0.5:
            continue
        y1, y2 = p1[j], p2[j]
        if abs(y1 - y2) < 1e-14:
            continue
        lo, hi = min(y1, y2), max(y1, y2)
        u = rng.random()

        def child(beta_bound):
            a = 2.0 - beta_bound ** (-(eta + 1.0))
            if u <= 1.0 / a:
                return (u * a) ** (1.0 / (eta + 1.0))
            return (1.0 / (2.0 - u * a)) ** (1.0 / (eta + 1.0))

        bq1 = child(1.0 + 2.0 * lo / (hi - lo))
        bq2 = child(1.0 + 2.0 * (1.0 - hi) / (hi - lo))
        v1 = 0.5 * ((lo + hi) - bq1 * (hi - lo))
        v2 = 0.5 * ((lo + hi) + bq2 * (hi - lo))
        if rng.random() > 0.5:
            v1, v2 = v2, v1
        c1[j] = min(max(v1, 0.0), 1.0)
        c2[j] = min(max(v2, 0.0), 1.0)
    return c1, c2


def _polynomial_mutation(rng, genes, prob, eta):
    out = genes.copy()
    for j in range(genes.size):
        if rng.random() >= prob:
            continue
        y = out[j]
        u = rng.random()
        if u < 0.5:
            delta = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - y) ** (eta + 1.0)) \
                ** (1.0 / (eta + 1.0)) - 1.0
        else:
            delta = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * y ** (eta + 1.0)) \
                ** (1.0 / (eta + 1.0))
        out[j] = min(max(y + delta, 0.0), 1.0)
    return out


# -- main loop ---------------------------------------------------------------


def _evaluate(problem, genes):
    try:
        objs = tuple(problem.evaluate(genes))
    except Exception as exc:  # noqa: BLE001 - annotate and re-raise
        raise EvaluationError(f"objective evaluation failed: {exc}", genes) from exc
    if len(objs) != 2 or not all(np.isfinite(o) for o in objs):
        raise EvaluationError(f"objectives must be two finite values, got {objs}",
                              genes)
    return objs


def evolve_nsga2(problem, config: Nsga2Config) -> ParetoFront:
    """Run the search. `problem` provides n_genes, evaluate(genes) -> (f1, f2)
    and decode(genes) -> allocation; evaluation must be deterministic.
    """
    rng = np.random.default_rng(config.seed)
    n = problem.n_genes
    pop_genes = rng.random((config.population, n))
    pop_objs = np.array([_evaluate(problem, g) for g in pop_genes])
    evaluations = config.population

    archive_genes = [g.copy() for g in pop_genes]
    archive_objs = [tuple(o) for o in pop_objs]

    def compact_archive():
        nonlocal archive_genes, archive_objs
        objs = np.asarray(archive_objs)
        keep = nondominated_subset(objs)
        seen, unique = set(), []
        for i in keep:
            key = (archive_objs[i], archive_genes[i].tobytes())
            if key not in seen:
                seen.add(key)
                unique.append(i)
        archive_genes = [archive_genes[i] for i in unique]
        archive_objs = [archive_objs[i] for i in unique]

    compact_archive()
    hv_history = [hypervolume_2d(np.asarray(archive_objs))]
    best_f1 = [float(pop_objs[:, 0].max())]
    best_f2 = [float(pop_objs[:, 1].max())]

    ranks = np.empty(config.population, dtype=int)
    crowd = np.empty(config.population)

    def refresh_rank_crowding():
        fronts = fast_nondominated_sort(pop_objs)
        for r, front in enumerate(fronts):
            ranks[front] = r
            for i, d in crowding_distance(front, pop_objs).items():
                crowd[i] = d

    refresh_rank_crowding()
    mut_prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / n

    for _ in range(config.generations):
        # Binary tournaments on (rank, crowding) pick the mating pool.
        def pick():
            i, j = rng.integers(0, config.population, size=2)
            if ranks[i] != ranks[j]:
                return i if ranks[i] < ranks[j] else j
            if crowd[i] != crowd[j]:
                return i if crowd[i] > crowd[j] else j
            return i

        children = []
        while len(children) < config.population:
            p1, p2 = pop_genes[pick()], pop_genes[pick()]
            if rng.random() < config.crossover_prob:
                c1, c2 = _sbx_pair(rng, p1, p2, config.crossover_eta)
            else:
                c1, c2 = p1.copy(), p2.copy()
            children.append(_polynomial_mutation(rng, c1, mut_prob, config.mutation_eta))
            if len(children) < config.population:
                children.append(_polynomial_mutation(rng, c2, mut_prob,
                                                     config.mutation_eta))
        child_genes = np.asarray(children)
        child_objs = np.array([_evaluate(problem, g) for g in child_genes])
        evaluations += len(children)

        archive_genes.extend(g.copy() for g in child_genes)
        archive_objs.extend(tuple(o) for o in child_objs)
        compact_archive()

        merged_genes = np.vstack([pop_genes, child_genes])
        merged_objs = np.vstack([pop_objs, child_objs])
        fronts = fast_nondominated_sort(merged_objs)
        chosen = []
        for front in fronts:
            if len(chosen) + len(front) <= config.population:
                chosen.extend(front)
                continue
            dist = crowding_distance(front, merged_objs)
            slots = config.population - len(chosen)
            ordered = sorted(front, key=lambda i: -dist[i])
            chosen.extend(ordered[:slots])
            break
        pop_genes = merged_genes[chosen]
        pop_objs = merged_objs[chosen]
        refresh_rank_crowding()

        hv_history.append(hypervolume_2d(np.asarray(archive_objs)))
        best_f1.append(float(pop_objs[:, 0].max()))
        best_f2.append(float(pop_objs[:, 1].max()))

    members = [FrontMember(genes=g, allocation=problem.decode(g), objectives=o)
               for g, o in sorted(zip(archive_genes, archive_objs),
                                  key=lambda t: t[1][0])]
    return ParetoFront(members=members, generations=config.generations,
                       evaluations=evaluations, seed=config.seed,
                       hypervolume_history=np.asarray(hv_history),
                       best_f1_history=np.asarray(best_f1),
                       best_f2_history=np.asarray(best_f2))
