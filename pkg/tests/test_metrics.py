import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import (complete_edges, dense_aspl, exact_discrete_power_law, naive_distinct_prefix,
                     path_edges, random_connected, star_edges)
from wordadj.errors import DisconnectedError, InsufficientTailError, TooSmallVocabularyError
from wordadj.metrics import (ZIPF_POOR_FIT, analyze_stream, aspl, degree_histogram, distance_sum,
                             fit_degree_exponent, heaps_curve, heaps_curve_from_counts, heaps_fit,
                             rank_frequency, sample_discrete_power_law, zipf_fit)
from wordadj.netbuild import AdjacencyNetwork, full_network
from wordadj.tokenizer import Token, TokenKind, TokenStream


def net_of(n, edges):
    return AdjacencyNetwork.from_edges(n, edges)


def words(items):
    return TokenStream([Token(str(x), TokenKind.WORD) for x in items], "t")


@pytest.mark.parametrize("method", ["bfs", "bitset", "auto"])
def test_aspl_examples(method):
    assert aspl(net_of(5, path_edges(5)), method=method) == 2.0
    assert aspl(net_of(6, complete_edges(6)), method=method) == 1.0
    assert aspl(net_of(4, star_edges(3)), method=method) == 1.5


def test_star_matches_dense_oracle():
    assert dense_aspl(4, star_edges(3)) == (1.5, True)


def test_single_node_and_empty():
    assert aspl(net_of(1, [])) == 0.0
    with pytest.raises(ValueError):
        aspl(net_of(0, []))


@pytest.mark.parametrize("method", ["bfs", "bitset"])
def test_disconnected(method):
    with pytest.raises(DisconnectedError):
        aspl(net_of(4, [(0, 1), (2, 3)]), method=method)


@pytest.mark.parametrize("n", range(2, 51))
def test_path_law(n):
    assert aspl(net_of(n, path_edges(n))) == (n + 1) / 3


def test_large_graph_kernels_agree(alice_stream):
    net = full_network(alice_stream)
    a = distance_sum(net, method="bfs")
    b = distance_sum(net, method="bitset")
    c = distance_sum(net, jobs=3, method="bitset")
    assert a == b == c


@given(st.integers(2, 40), st.integers(0, 120), st.integers(0, 2**32 - 1))
def test_aspl_matches_dense_oracle(n, extra, seed):
    edges = random_connected(n, extra, random.Random(seed))
    ref, ok = dense_aspl(n, edges)
    assert ok
    net = net_of(n, edges)
    for method in ("bfs", "bitset"):
        total, reached = distance_sum(net, method=method)
        assert reached == n * n
        assert total / (n * (n - 1)) == ref


@given(st.integers(2, 60), st.integers(0, 100), st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_aspl_relabel_and_jobs_invariant(n, extra, seed, jobs):
    rng = random.Random(seed)
    edges = random_connected(n, extra, rng)
    perm = list(range(n))
    rng.shuffle(perm)
    relabeled = [(perm[u], perm[v]) for u, v in edges]
    base = aspl(net_of(n, edges))
    assert aspl(net_of(n, relabeled), jobs=jobs) == base


def test_degree_histogram_examples():
    h = degree_histogram(net_of(4, path_edges(4)))
    assert h.counts == {1: 2, 2: 2}
    s = degree_histogram(net_of(6, star_edges(5)))
    assert s.counts == {5: 1, 1: 5}
    assert s.max_degree == 5 and s.n_degree_one == 5


@given(st.integers(2, 50), st.integers(0, 80), st.integers(0, 2**32 - 1))
def test_degree_histogram_mass(n, extra, seed):
    edges = random_connected(n, extra, random.Random(seed))
    h = degree_histogram(net_of(n, edges))
    assert h.n_nodes == n
    assert sum(k * c for k, c in h.counts.items()) == 2 * len(edges)


def test_alice_degree_one_nodes_are_flanked(alice_stream):
    net = full_network(alice_stream)
    h = degree_histogram(net)
    assert h.n_degree_one > 0
    surf = alice_stream.surfaces()
    ones = {net.interner.surface(i) for i, d in enumerate(net.degrees()) if d == 1}
    for word in ones:
        neighbours = {surf[j] for i, s in enumerate(surf) if s == word
                      for j in (i - 1, i + 1) if 0 <= j < len(surf)}
        assert len(neighbours) == 1


@pytest.mark.parametrize("gamma", [1.8, 2.0, 2.5, 3.0])
def test_degree_exponent_recovery(gamma):
    # the half-integer approximation is biased by O(1/kmin^2); kmin=10 keeps
    # the bias well inside 3 stderr at n=1e5 for every exponent here
    sample = exact_discrete_power_law(gamma, 100_000, 10, np.random.default_rng(int(gamma * 100)))
    fit = fit_degree_exponent(sample, kmin=10)
    assert abs(fit.gamma - gamma) < 3 * fit.stderr


def test_degree_exponent_25_kmin5():
    sample = exact_discrete_power_law(2.5, 100_000, 5, np.random.default_rng(7))
    assert fit_degree_exponent(sample, kmin=5).gamma == pytest.approx(2.5, abs=0.02)


def test_degree_exponent_small_kmin_bias_is_downward():
    sample = exact_discrete_power_law(3.0, 100_000, 5, np.random.default_rng(11))
    fit = fit_degree_exponent(sample, kmin=5)
    assert -0.06 < fit.gamma - 3.0 < -0.015


def test_package_sampler_tail():
    sample = sample_discrete_power_law(2.0, 50_000, 4, np.random.default_rng(1))
    assert sample.min() == 4
    assert fit_degree_exponent(sample, kmin=4).gamma == pytest.approx(2.0, abs=0.02)


def test_degree_exponent_formula():
    k = np.array(list(range(4, 14)) * 3)
    fit = fit_degree_exponent(k, kmin=4)
    expect = 1 + len(k) / np.sum(np.log(k / 3.5))
    assert fit.gamma == pytest.approx(expect, rel=1e-12)
    assert fit.stderr == pytest.approx((expect - 1) / math.sqrt(len(k)), rel=1e-12)


def test_degree_exponent_short_tail():
    with pytest.raises(InsufficientTailError):
        fit_degree_exponent(np.array([4, 5, 6, 4, 5]), kmin=4)


def test_alice_degree_exponent(alice_stream):
    g = fit_degree_exponent(degree_histogram(full_network(alice_stream)), kmin=4).gamma
    assert 1.7 <= g <= 2.3


def test_rank_frequency_ties_first_appearance():
    assert rank_frequency(words("b a a b c".split())).tolist() == [2, 2, 1]


def test_zipf_mandelbrot_recovery():
    rng = np.random.default_rng(3)
    ranks = np.arange(1, 5001)
    p = 1.0 / (ranks + 2.0)
    p /= p.sum()
    draws = rng.choice(len(ranks), size=2_000_000, p=p)
    freqs = np.bincount(draws, minlength=len(ranks))
    # the sparse tail is dominated by count noise; fit the well-sampled head
    fit = zipf_fit(np.sort(freqs)[::-1][:1000])
    assert fit.zipf_alpha == pytest.approx(1.0, rel=0.1)
    assert fit.beta == pytest.approx(2.0, rel=0.1)


def test_zipf_degenerate_flagged():
    items = ["top"] * 200 + [f"w{i}" for i in range(99)]
    fit = zipf_fit(words(items))
    assert math.isfinite(fit.zipf_alpha) and math.isfinite(fit.beta)
    assert fit.fit_error > ZIPF_POOR_FIT and fit.poor_fit


def test_zipf_too_small():
    with pytest.raises(TooSmallVocabularyError):
        zipf_fit(words(range(50)))


def test_zipf_english_words(alice_stream):
    from wordadj.tokenizer import strip_punctuation
    fit = zipf_fit(strip_punctuation(alice_stream))
    assert 0.7 <= fit.zipf_alpha <= 1.3
    assert fit.beta > -1 and not fit.poor_fit


def test_heaps_all_distinct():
    curve = heaps_curve(words(range(5000)))
    assert all(t == n for t, n in curve)
    assert heaps_fit(curve).delta == pytest.approx(1.0, abs=1e-12)


def test_heaps_saturates():
    fit = heaps_fit(heaps_curve(words([i % 10 for i in range(5000)])))
    assert fit.saturated


def test_heaps_curve_matches_naive():
    rng = random.Random(5)
    ids = [rng.randrange(300) for _ in range(3000)]
    ref = naive_distinct_prefix(ids)
    for tau, n in heaps_curve(np.array(ids)):
        assert ref[tau - 1] == n
    for tau, n in heaps_curve_from_counts(ref):
        assert ref[tau - 1] == n


def test_analyze_stream(alice_stream):
    m = analyze_stream(alice_stream)
    assert (m.n_nodes, m.n_edges) == (2691, 13957)
    assert m.aspl == pytest.approx(2.6864, abs=1e-4)
    assert 0 < m.delta <= 1
