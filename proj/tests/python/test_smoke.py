"""Smoke tests for the python bindings."""

import math

import pytest

import nssbm


def test_trivial_icl_value():
    tensor = nssbm.build_tensor([], 1, 1, nssbm.Mode.directed)
    value = nssbm.icl(tensor, [0], [0], nssbm.Hyperparameters())
    assert value.total == pytest.approx(math.log(0.5), abs=1e-12)
    assert value.total == value.emission_term + value.label_term


def test_block_stats_conservation():
    records = [(0, 1, 0, 3), (1, 0, 0, 2), (2, 2, 1, 4)]
    tensor = nssbm.build_tensor(records, 3, 2, nssbm.Mode.directed)
    assert tensor.total_count == 9
    stats = nssbm.compute_block_stats(tensor, [0, 0, 1], [0, 1])
    assert stats.total() == tensor.total_count
    assert stats.s(0, 0, 0) == 5
    assert stats.r(0, 0, 0) == 4  # 2*2 nodes, one bin in cluster 0


def test_undirected_rejects_self_loops():
    with pytest.raises(ValueError):
        nssbm.build_tensor([(1, 1, 0, 2)], 2, 1, nssbm.Mode.undirected)


def test_simulate_fit_roundtrip():
    rates = nssbm.additive_rates([0, 2, 4], [0.5, 1, 1.5], [0.5, 1, 1.5])
    assert rates.shape == (3, 3, 3)
    assert rates[0, 0, 0] == pytest.approx(1.0)
    assert rates[2, 2, 2] == pytest.approx(7.0)

    tensor, c_true, y_true = nssbm.simulate(30, 12, rates, seed=7)
    fit = nssbm.greedy_fit(
        tensor,
        nssbm.Hyperparameters(),
        nssbm.SearchConfig(k_max=8, d_max=8, num_restarts=3, seed=1, num_threads=1),
    )
    assert fit.icl.total >= nssbm.icl(tensor, c_true, y_true).total - 1e-6
    assert fit.num_node_clusters == 3
    assert fit.num_time_clusters == 3
    assert nssbm.adjusted_rand_index(fit.node_labels, c_true) == 1.0
    assert nssbm.adjusted_rand_index(fit.time_labels, y_true) == 1.0
    assert fit.revalidation_error <= 1e-6

    # trace deltas are strictly improving
    last = -math.inf
    for _sweep, _kind, delta, icl_after in fit.trace:
        assert delta > 0
        assert icl_after > last
        last = icl_after


def test_seeded_determinism():
    rates = nssbm.additive_rates([0, 2], [0.5, 1], [0.5, 1.5])
    t1, c1, y1 = nssbm.simulate(15, 6, rates, seed=9)
    t2, c2, y2 = nssbm.simulate(15, 6, rates, seed=9)
    assert c1 == c2
    assert y1 == y2
    assert t1.entries() == t2.entries()


def test_contact_log_ingestion():
    text = "# comment\n60 100 101\n980 101 102\n"
    events, raw_ids = nssbm.parse_contact_log(text)
    assert events == [(60, 100, 101), (980, 101, 102)]
    assert raw_ids == [100, 101, 102]

    tensor, dropped, ids = nssbm.aggregate_contact_log(text, origin=0, bin_width=900, num_bins=4)
    assert dropped == 0
    assert tensor.total_count == 2
    assert tensor.num_nodes == 3
    assert tensor.bin_total(0) == 1
    assert tensor.bin_total(1) == 1

    with pytest.raises(RuntimeError):
        nssbm.parse_contact_log("60 7 7\n")


def test_posterior_rates_shrinkage():
    tensor = nssbm.build_tensor([], 1, 1, nssbm.Mode.directed)
    stats = nssbm.compute_block_stats(tensor, [0], [0])
    rates = nssbm.posterior_rates(stats, nssbm.Hyperparameters())
    assert rates[0, 0, 0] == pytest.approx(0.5)
