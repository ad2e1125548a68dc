import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wordadj.errors import ConfigError, SaturationError, VocabularyExhaustedError
from wordadj.metrics import aspl, degree_histogram, fit_degree_exponent, heaps_curve_from_counts, heaps_fit
from wordadj.netbuild import AdjacencyNetwork, GrowthKind
from wordadj.synth import (KIND_NEW_EDGE, KIND_NEW_NODE, KIND_REPEAT, SynthConfig, attachment_weight,
                           generate, new_node_probability, realization_seeds, synth_curve)


def test_new_node_probability_examples():
    assert new_node_probability(1, SynthConfig(p0=0.7)) == 0.7
    cfg = SynthConfig(p0=0.3, delta=1.0)
    assert {new_node_probability(t, cfg) for t in (1, 10, 10**6)} == {0.3}
    p = new_node_probability(10**4, SynthConfig(p0=1.0, delta=0.8))
    assert p == pytest.approx(math.exp(-0.2 * math.log(1e4)), rel=1e-12)
    assert p == pytest.approx(0.158, abs=5e-4)


def test_attachment_weight_examples():
    assert [attachment_weight(k, 1, 0.5) for k in (1, 5, 100)] == [1.0, 1.0, 1.0]
    assert attachment_weight(50, 1e12, 0.5) == pytest.approx(50, rel=1e-4)
    assert attachment_weight(8, 2, 1.0) == pytest.approx(math.sqrt(8))


def test_config_validation():
    for bad in (SynthConfig(p0=0), SynthConfig(p0=1.5), SynthConfig(delta=0),
                SynthConfig(eta=0), SynthConfig(steps=1)):
        assert bad.problems()
        with pytest.raises(ConfigError):
            generate(bad)


@pytest.mark.parametrize("steps", [2, 3, 10, 40])
def test_chain_regime(steps):
    run = generate(SynthConfig(p0=1.0, delta=1.0, steps=steps))
    assert run.n_nodes == steps + 1 and run.n_edges == steps
    assert aspl(run.timeline.csr_at_nodes(run.n_nodes)) == pytest.approx((steps + 2) / 3, abs=1e-12)
    assert sorted(run.network().degrees().tolist()) == sorted([1, 1] + [2] * (steps - 1))


def test_determinism():
    a = generate(SynthConfig(seed=5, steps=3000))
    b = generate(SynthConfig(seed=5, steps=3000))
    c = generate(SynthConfig(seed=6, steps=3000))
    assert a.network().edge_array().tolist() == b.network().edge_array().tolist()
    assert a.kinds.tolist() == b.kinds.tolist()
    assert a.kinds.tolist() != c.kinds.tolist()


def _network_after(run, step):
    nodes = int(np.searchsorted(run.timeline.node_birth, step, side="right"))
    cut = int(np.searchsorted(run.timeline.edge_birth, step, side="right"))
    return AdjacencyNetwork.from_edges(
        nodes, zip(run.timeline.edge_u[:cut].tolist(), run.timeline.edge_v[:cut].tolist()))


@settings(max_examples=25)
@given(st.floats(0.05, 1.0), st.floats(0.2, 1.0), st.floats(0.1, 3.0),
       st.integers(0, 2**31), st.integers(2, 300))
def test_growth_invariants(p0, delta, eta, seed, steps):
    try:
        run = generate(SynthConfig(p0, delta, eta, seed, steps))
    except SaturationError:
        return
    n, e = run.n_after, run.e_after
    assert n[0] == 2 and e[0] == 1
    assert np.all(np.diff(n) >= 0) and set(np.diff(e).tolist()) <= {0, 1}
    kinds = run.kinds
    assert np.array_equal(np.diff(n), (kinds[1:] == KIND_NEW_NODE).astype(int))
    assert np.array_equal(np.diff(e), (kinds[1:] != KIND_REPEAT).astype(int))
    internal = int(np.sum(kinds == KIND_NEW_EDGE))
    assert n[-1] + internal <= steps + 2
    for step in sorted({1, steps // 2, steps}):
        net = _network_after(run, step)
        assert net.n_nodes == n[step - 1] and net.n_edges == e[step - 1]
        assert net.is_connected()
        for u, row in enumerate(net.adjacency):
            assert u not in row and len(row) == len(set(row))


def test_final_network_has_every_edge():
    run = generate(SynthConfig(seed=3, steps=500))
    assert run.network().n_edges == run.n_edges == run.e_after[-1]


def test_walker_moves_to_event_node():
    run = generate(SynthConfig(seed=3, steps=500))
    events = run.events()
    edges = {tuple(e) for e in run.network().edge_array().tolist()}
    for (s0, _, prev), (s1, kind, node) in zip(events, events[1:]):
        if kind is not GrowthKind.REPEAT or prev != node:
            assert (min(prev, node), max(prev, node)) in edges


def test_no_duplicate_resampling_records_repeats():
    run = generate(SynthConfig(seed=1, steps=5000, resample_duplicates=False))
    assert np.any(run.kinds == KIND_REPEAT)
    assert run.network().is_connected()


def test_saturation_error():
    with pytest.raises(SaturationError):
        generate(SynthConfig(p0=1.0, delta=0.3, eta=2.0, seed=0, steps=20_000))


def test_heaps_exponent_from_event_log():
    run = generate(SynthConfig(1.0, 0.8, 0.5, seed=2, steps=100_000))
    hf = heaps_fit(heaps_curve_from_counts(run.n_after))
    assert 0.75 <= hf.delta <= 0.85


def test_degree_tail_with_fast_linear_attachment():
    run = generate(SynthConfig(1.0, 0.8, eta=5.0, seed=4, steps=100_000))
    g = fit_degree_exponent(degree_histogram(run.network()), kmin=4).gamma
    assert 1.5 < g < 3.0


def test_seeds_are_spawned():
    s = realization_seeds(7, 5)
    assert len(set(s)) == 5 and s == realization_seeds(7, 5)
    assert realization_seeds(7, 6)[:5] == s


def test_curve_chain_regime():
    c = synth_curve(SynthConfig(p0=1.0, delta=1.0, steps=60), [2, 5, 20, 61], 3)
    assert c.mean_l.tolist() == pytest.approx([(n + 1) / 3 for n in (2, 5, 20, 61)], abs=1e-12)


def test_curve_unreachable_checkpoint():
    with pytest.raises(VocabularyExhaustedError):
        synth_curve(SynthConfig(steps=50), [2, 60], 1)
    with pytest.raises(VocabularyExhaustedError):
        synth_curve(SynthConfig(p0=0.2, steps=50), [2, 50], 1)


def test_curve_jobs_invariant():
    cfg = SynthConfig(seed=9, steps=2000)
    a = synth_curve(cfg, [2, 10, 50, 100], 4, jobs=1)
    b = synth_curve(cfg, [2, 10, 50, 100], 4, jobs=2)
    assert a.to_csv() == b.to_csv()


def test_disjoint_seed_sets_agree():
    pts = [10, 50, 200, 800]
    cfg = SynthConfig(1.0, 0.8, 0.5, steps=8000)
    a = synth_curve(SynthConfig(**{**cfg.__dict__, "seed": 1}), pts, 20, keep_realizations=True)
    b = synth_curve(SynthConfig(**{**cfg.__dict__, "seed": 2}), pts, 20, keep_realizations=True)

    def se(curve):
        vals = np.array([[r[n] for n in pts] for r in curve.per_offset.values()])
        return vals.std(axis=0, ddof=1) / math.sqrt(len(vals))

    bound = 2 * np.sqrt(se(a) ** 2 + se(b) ** 2)
    assert np.all(np.abs(a.mean_l - b.mean_l) < bound)
