import math

import numpy as np
import pytest
from scipy import stats

from ripforge.graphs import DenseSeed, Graph, er_generate, plant
from ripforge.reduction import (
    ConfigError,
    ReductionConfig,
    derive_dims,
    fold_blocks,
    hard_sequence,
    reduce,
    run_distinguisher,
    score_identity,
    witness_k1,
    witness_quadratic_form,
)


def test_derive_dims_examples():
    assert derive_dims(ReductionConfig(4000, 200, 10, 0.0)) == (400, 1, 400, 20, 400)
    d = derive_dims(ReductionConfig(4000, 200, 10, 0.5))
    assert (d.k, d.ell, d.N, d.n) == (20, 4, 400, 100)
    with pytest.raises(ConfigError):
        derive_dims(ReductionConfig(4000, 5, 10))
    with pytest.raises(ConfigError):
        derive_dims(ReductionConfig(20, 20, 10, 2.0))  # ell=4 > N=2
    with pytest.raises(ConfigError):
        derive_dims(ReductionConfig(4000, 200, p=10))


def test_config_json_round_trip():
    cfg = ReductionConfig(4000, 200, 10, 0.5, p=500, distribution="gaussian", epsilon=0.25)
    assert ReductionConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        ReductionConfig.from_json({"m": 10, "kappa": 4, "colour": "red"})
    with pytest.raises(ValueError):
        ReductionConfig(100, 20, distribution="cauchy")


@pytest.fixture(scope="module")
def null_graph():
    return er_generate(400, 11).graph


def test_reduce_rademacher_entries(null_graph):
    cfg = ReductionConfig(400, 40, 10, 0.0)
    X, trace = reduce(null_graph, cfg, 3)
    assert X.shape == (40, 40)
    assert np.all(np.abs(np.abs(X) - 1 / math.sqrt(40)) < 1e-15)
    signs = np.sign(X).ravel()
    assert stats.chisquare([np.sum(signs > 0), np.sum(signs < 0)]).pvalue > 0.01


def test_reduce_structure(null_graph):
    cfg = ReductionConfig(400, 40, 10, 0.0, distribution="gaussian")
    X, trace = reduce(null_graph, cfg, 5)
    assert np.intersect1d(trace.U, trace.W).size == 0
    assert np.array_equal(trace.A == 1, null_graph.adjacency[np.ix_(trace.U, trace.W)])
    assert np.all(trace.Z[trace.A == 1] >= 0) and np.all(trace.Z[trace.A == -1] <= 0)
    # single block: Xtilde is Z itself
    assert np.array_equal(trace.Xtilde, trace.Z[:40, :40])
    X2, _ = reduce(null_graph, cfg, 5)
    assert np.array_equal(X, X2)


def test_fold_and_trace_consistency(null_graph):
    cfg = ReductionConfig(400, 160, 10, 0.5, p=15, distribution="uniform")
    X, trace = reduce(null_graph, cfg, 8)
    N, ell, n, k, p = trace.dims
    assert (ell, n, p) == (4, 10, 15)
    rebuilt = np.zeros((n, n))
    for a, b, r, c in trace.block_map:
        rebuilt += trace.Z[r:r + n, c:c + n]
    assert np.array_equal(rebuilt / ell, trace.Xtilde)
    assert np.array_equal(fold_blocks(trace.Z, n, ell), trace.Xtilde)
    assert np.array_equal(X[:, :n], trace.Xtilde)
    assert X.shape == (n, p)


def test_graph_size_mismatch(null_graph):
    with pytest.raises(ConfigError):
        reduce(null_graph, ReductionConfig(500, 40), 0)


def test_distinguisher_decline_always(null_graph):
    cfg = ReductionConfig(400, 40, 10)
    assert run_distinguisher(null_graph, cfg, "decline", 0.5, 0) == 1


def test_distinguisher_null_sound_certifier():
    # under the null X is i.i.d. normalised Gaussian, certified at theta near 1
    cfg = ReductionConfig(400, 20, 10, distribution="gaussian")
    G = er_generate(400, 1).graph
    outs = [run_distinguisher(G, cfg, "opnorm-exact", 0.99, s) for s in range(6)]
    assert sum(outs) <= 2


def test_witness_k1():
    assert witness_k1(20, 0.5) == 19
    assert witness_k1(8, 0.5) == 8
    assert witness_k1(10, 0.25) == 10


def test_witness_single_block_is_unfolded():
    inst = plant(400, DenseSeed("clique", 40, 0.5), 2)
    cfg = ReductionConfig(400, 40, 10)
    _, trace = reduce(inst.graph, cfg, 4)
    w = witness_quadratic_form(trace, inst.planted_set, 0.5)
    assert np.isclose(np.linalg.norm(w.vector), 1.0)
    assert np.count_nonzero(w.vector) == w.k1
    assert np.allclose(w.vector[w.columns], 1 / math.sqrt(w.k1))
    assert w.value == pytest.approx(float(np.sum((trace.Xtilde @ w.vector) ** 2)))


def test_witness_folded_is_unit():
    inst = plant(800, DenseSeed("clique", 160, 0.5), 2)
    cfg = ReductionConfig(800, 160, 10, 0.5)
    _, trace = reduce(inst.graph, cfg, 4)
    w = witness_quadratic_form(trace, inst.planted_set, 0.5)
    assert w.vector.shape == (trace.dims.n,)
    assert np.isclose(np.linalg.norm(w.vector), 1.0)


def test_witness_empty_S_warns():
    G = Graph.empty(100)
    cfg = ReductionConfig(100, 20, 10)
    _, trace = reduce(G, cfg, 0)
    unused = np.setdiff1d(np.arange(100), np.concatenate([trace.U, trace.W]))
    with pytest.warns(RuntimeWarning):
        witness_quadratic_form(trace, unused[:2], 0.5)


def test_witness_null_near_one():
    cfg = ReductionConfig(4000, 200, 10, distribution="gaussian")
    vals = []
    for s in range(20):
        G = er_generate(4000, 100 + s).graph
        _, trace = reduce(G, cfg, s)
        K = np.random.default_rng(s).choice(4000, 200, replace=False)
        vals.append(witness_quadratic_form(trace, K, 0.5).value)
    assert np.mean(np.abs(np.array(vals) - 1) <= 0.3) >= 0.95


def test_score_identity():
    for kind, eps in [("clique", 0.5), ("random-dense", 0.25)]:
        inst = plant(600, DenseSeed(kind, 80, eps), 9)
        _, trace = reduce(inst.graph, ReductionConfig(600, 80, 10), 1)
        lhs, rhs = score_identity(inst.graph, trace, inst.planted_set)
        assert lhs == rhs


def test_hard_sequence_example():
    hs = hard_sequence(400, 0, 0, 0.05)
    assert (hs.n, hs.p, hs.k, hs.ell) == (400, 400, 10, 1)
    assert hs.k_low == pytest.approx(400 ** (1 / 3)) and hs.k_high == pytest.approx(400**0.45)
    assert hs.theta_floor == pytest.approx(math.sqrt(10 * math.log(400) / 400))
    assert hs.theta_ceiling == pytest.approx(0.25)
    assert hs.theta == pytest.approx(0.311, abs=1e-3)
    assert min(hs.theta_floor, hs.theta_ceiling) < hs.theta < max(hs.theta_floor, hs.theta_ceiling)


def test_hard_sequence_errors():
    with pytest.raises(ValueError):
        hard_sequence(400, 0.99, 0.0, 0.05)
    with pytest.raises(ValueError, match="minimal feasible n"):
        hard_sequence(4, 0.0, 0.0, 0.05)
    with pytest.raises(ValueError):
        hard_sequence(400, 0.0, 0.5, 0.05)


@pytest.mark.parametrize("n", [1000, 10**4, 10**6])
def test_hard_sequence_window(n):
    hs = hard_sequence(n, 0.0, 0.1, 0.02)
    assert hs.k_low < hs.k < hs.k_high
    assert min(hs.theta_floor, hs.theta_ceiling) < hs.theta < max(hs.theta_floor, hs.theta_ceiling)


def test_gaussian_null_law_single_block():
    cfg = ReductionConfig(2000, 100, 10, distribution="gaussian")
    X, _ = reduce(er_generate(2000, 3).graph, cfg, 3)
    assert stats.kstest(X.ravel() * math.sqrt(200), "norm").pvalue > 0.01
