import math

import numpy as np
import pytest

from ripforge.graphs import (
    DenseSeed,
    Graph,
    edge_density,
    er_generate,
    plant,
    rayleigh_lower_bound,
    required_edges,
    spectral_detect,
    spectral_statistic,
)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(np.ones((3, 3), dtype=bool))
    a = np.zeros((3, 3), dtype=bool)
    a[0, 1] = True
    with pytest.raises(ValueError):
        Graph(a)


def test_er_examples():
    assert er_generate(1, 0).graph.edge_count == 0
    counts = [er_generate(100, s).graph.edge_count for s in range(20)]
    se = math.sqrt(4950 * 0.25)
    assert abs(np.mean(counts) - 2475) <= 4 * se / math.sqrt(20)
    assert np.array_equal(er_generate(50, 4).graph.adjacency, er_generate(50, 4).graph.adjacency)
    assert er_generate(50, 4).planted_set is None


def test_plant_complete():
    inst = plant(30, DenseSeed("clique", 30, 0.5), 1)
    assert inst.graph.edge_count == 30 * 29 // 2


def test_plant_clique_density():
    inst = plant(4000, DenseSeed("clique", 200, 0.5), 7)
    K = inst.planted_set
    assert inst.planted_set.size == 200
    assert edge_density(inst.graph, K) == 1.0
    adj = inst.graph.adjacency
    mask = np.triu(np.ones_like(adj), 1)
    mask[np.ix_(K, K)] = False
    pairs = int(mask.sum())
    off = adj[mask].mean()
    assert abs(off - 0.5) <= 4 * math.sqrt(0.25 / pairs)


def test_explicit_seed_too_sparse():
    with pytest.raises(ValueError):
        DenseSeed("explicit", 4, 0.5, edges=((0, 1), (1, 2)))
    ok = DenseSeed("explicit", 3, 0.5, edges=((0, 1), (1, 2), (0, 2)))
    assert plant(10, ok, 0).graph.edge_count >= 3


def test_seed_validation():
    with pytest.raises(ValueError):
        DenseSeed("clique", 5, 0.0)
    with pytest.raises(ValueError):
        DenseSeed("star", 5, 0.2)
    with pytest.raises(ValueError):
        plant(5, DenseSeed("clique", 6, 0.5), 0)


@pytest.mark.parametrize("eps", [0.1, 0.25, 0.5])
def test_planted_density_invariant(eps):
    for s in range(5):
        inst = plant(300, DenseSeed("random-dense", 40, eps), s)
        assert edge_density(inst.graph, inst.planted_set) >= 0.5 + eps
        assert inst.graph.adjacency[np.ix_(inst.planted_set, inst.planted_set)].sum() // 2 >= required_edges(40, eps)


def test_edge_density_examples():
    assert edge_density(Graph.complete(10), [1, 4, 7]) == 1.0
    assert edge_density(Graph.empty(10), [1, 4, 7]) == 0.0
    with pytest.raises(ValueError):
        edge_density(Graph.empty(10), [3])


def test_spectral_examples():
    assert spectral_statistic(Graph.complete(40)) == pytest.approx(19.0, abs=1e-8)
    assert spectral_statistic(Graph.empty(40)) == pytest.approx(0.0, abs=1e-8)
    assert spectral_detect(Graph.complete(100), 10.0) == 1
    assert spectral_detect(Graph.empty(100), 0.5) == 0


def test_rayleigh_bound_holds():
    for eps, kind in [(0.5, "clique"), (0.25, "random-dense")]:
        inst = plant(400, DenseSeed(kind, 60, eps), 3)
        r = rayleigh_lower_bound(inst.graph, inst.planted_set)
        assert spectral_statistic(inst.graph) >= r - 1e-8
        assert r >= eps * 59 - 1.5


@pytest.mark.slow
def test_null_calibration_m2000():
    m = 2000
    stats_ = np.array([spectral_statistic(er_generate(m, s).graph) for s in range(100)])
    assert np.all(stats_ <= 2 * math.sqrt(m))
    assert np.mean((stats_ / math.sqrt(m) >= 0.7) & (stats_ / math.sqrt(m) <= 1.3)) >= 0.95
