import numpy as np
import pytest

from nafd_isac.beamforming import BeamSet
from nafd_isac.moo import (EvaluationError, Nsga2Config, crowding_distance,
                           evolve_nsga2, fast_nondominated_sort, hypervolume_2d,
                           nondominated_subset, repair_to_constraint)


def _flat_beams(m_dl, k_dl, data_power, sense_power, n=2, m_ul=2, k_ul=2):
    """BeamSet stub with prescribed per-block powers."""
    w_data = np.zeros((m_dl, k_dl, n), dtype=complex)
    w_data[:, :, 0] = np.sqrt(data_power)
    w_sense = np.zeros((m_dl, n), dtype=complex)
    w_sense[:, 0] = np.sqrt(sense_power)
    v = np.zeros((m_ul, k_ul, n), dtype=complex)
    v[:, :, 0] = 1.0
    return BeamSet(w_data=w_data, w_sense=w_sense, v_comb=v)


class TwoBumpProblem:
    """Analytic bi-objective toy: pull the genome toward 0.2 or toward 0.8."""

    n_genes = 4

    def decode(self, genes):
        return np.asarray(genes)

    def evaluate(self, genes):
        g = np.asarray(genes)
        f1 = 1.0 - float(np.mean((g - 0.2) ** 2))
        f2 = 1.0 - float(np.mean((g - 0.8) ** 2))
        return f1, f2


def test_repair_scales_overloaded_rrus():
    beams = _flat_beams(2, 1, data_power=0.5, sense_power=1.0)
    genes = np.array([[1.0, 1.0], [0.2, 0.1]])  # rows: [data..., pilot]
    alloc = repair_to_constraint(genes, beams, p_max=1.0,
                                 p_ul=np.full(2, 0.2))
    # row 0 load = 1*0.5 + 1*1.0 = 1.5 -> scaled by 1/1.5
    assert alloc.alpha[0, 0] == pytest.approx(1.0 / 1.5)
    assert alloc.beta[0] == pytest.approx(1.0 / 1.5)
    # row 1 load = 0.2*0.5 + 0.1*1.0 = 0.2 <= 1 -> untouched
    assert alloc.alpha[1, 0] == pytest.approx(0.2)
    assert alloc.beta[1] == pytest.approx(0.1)
    # repairing the repaired factors changes nothing
    again = repair_to_constraint(
        np.column_stack([alloc.alpha, alloc.beta]), beams, 1.0, alloc.p_ul)
    np.testing.assert_allclose(again.alpha, alloc.alpha, rtol=1e-12)
    np.testing.assert_allclose(again.beta, alloc.beta, rtol=1e-12)


def test_repair_rejects_out_of_box_genes():
    beams = _flat_beams(1, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        repair_to_constraint(np.array([[1.2, 0.0]]), beams, 1.0, np.ones(2))
    with pytest.raises(ValueError):
        repair_to_constraint(np.array([[-0.1, 0.0]]), beams, 1.0, np.ones(2))


def test_fast_nondominated_sort_example():
    objs = np.array([[2.0, 2.0], [1.0, 2.0], [2.0, 1.0], [1.0, 1.0]])
    fronts = fast_nondominated_sort(objs)
    assert [sorted(f) for f in fronts] == [[0], [1, 2], [3]]


def test_sort_handles_duplicates():
    objs = np.array([[1.0, 1.0], [1.0, 1.0], [0.5, 0.5]])
    fronts = fast_nondominated_sort(objs)
    assert sorted(fronts[0]) == [0, 1]
    assert fronts[1] == [2]


def test_crowding_distance_three_points():
    objs = np.array([[0.0, 4.0], [1.0, 2.0], [2.0, 0.0]])
    d = crowding_distance([0, 1, 2], objs)
    assert np.isinf(d[0]) and np.isinf(d[2])
    assert d[1] == pytest.approx(2.0)  # one full normalized gap per objective


def test_crowding_distance_small_fronts_all_infinite():
    objs = np.array([[0.0, 1.0], [1.0, 0.0]])
    d = crowding_distance([0, 1], objs)
    assert np.isinf(d[0]) and np.isinf(d[1])


def test_hypervolume_staircase():
    objs = np.array([[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]])
    assert hypervolume_2d(objs) == pytest.approx(6.0)
    # dominated points add nothing
    objs2 = np.vstack([objs, [[1.0, 1.0]]])
    assert hypervolume_2d(objs2) == pytest.approx(6.0)
    assert hypervolume_2d(np.empty((0, 2))) == 0.0


def test_nondominated_subset_indexes():
    objs = np.array([[2.0, 2.0], [1.0, 2.0], [3.0, 0.5]])
    np.testing.assert_array_equal(nondominated_subset(objs), [0, 2])


def test_evolution_on_toy_problem():
    cfg = Nsga2Config(population=24, generations=30, seed=5)
    front = evolve_nsga2(TwoBumpProblem(), cfg)
    assert front.evaluations == 24 * 31
    assert front.generations == 30
    # archive keeps the trace monotone
    assert len(front.hypervolume_history) == 31
    assert np.all(np.diff(front.hypervolume_history) >= -1e-12)

    objs = front.objective_array()
    assert len(nondominated_subset(objs)) == len(objs)
    # sorted by f1, the other objective trades off monotonically
    order = np.argsort(objs[:, 0])
    assert np.all(np.diff(objs[order, 1]) <= 1e-12)
    # the two single-objective optima are approached
    assert objs[:, 0].max() > 0.99
    assert objs[:, 1].max() > 0.99
    # genes stay in the box
    for member in front.members:
        assert np.all(member.genes >= 0.0) and np.all(member.genes <= 1.0)


def test_evolution_is_deterministic():
    cfg = Nsga2Config(population=16, generations=12, seed=9)
    a = evolve_nsga2(TwoBumpProblem(), cfg)
    b = evolve_nsga2(TwoBumpProblem(), cfg)
    np.testing.assert_array_equal(a.objective_array(), b.objective_array())
    np.testing.assert_array_equal(a.hypervolume_history, b.hypervolume_history)
    c = evolve_nsga2(TwoBumpProblem(), Nsga2Config(population=16,
                                                   generations=12, seed=10))
    assert not np.array_equal(a.objective_array(), c.objective_array())


def test_failing_objective_is_annotated():
    class Broken(TwoBumpProblem):
        def evaluate(self, genes):
            raise RuntimeError("backend went away")

    with pytest.raises(EvaluationError, match="backend went away") as exc_info:
        evolve_nsga2(Broken(), Nsga2Config(population=4, generations=1, seed=0))
    assert exc_info.value.genes.shape == (4,)


def test_non_finite_objective_is_rejected():
    class Poisoned(TwoBumpProblem):
        def evaluate(self, genes):
            return float("nan"), 1.0

    with pytest.raises(EvaluationError, match="finite"):
        evolve_nsga2(Poisoned(), Nsga2Config(population=4, generations=1, seed=0))
