"""Exact network and lexical statistics.

Average shortest path length comes from breadth-first search over a CSR
view of the graph. Two exact kernels are available: a classic one-BFS-per-
source loop, and a bit-parallel multi-source BFS that handles 64 sources
per machine word. ``method="auto"`` picks by a cost estimate derived from
one probe BFS. Distances are summed in 64-bit integers, so the result does
not depend on the kernel or on how sources are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DisconnectedError, InsufficientTailError, TooSmallVocabularyError
from .netbuild import AdjacencyNetwork, intern_stream
from .tokenizer import TokenStream

# memory cap for the bitset kernel's three (nodes x words) uint64 arrays
_BITSET_BYTES = 192 * 2**20


def _as_csr(graph):
    if isinstance(graph, AdjacencyNetwork):
        return graph.to_csr()
    indptr, indices = graph
    return np.ascontiguousarray(indptr, dtype=np.int32), np.ascontiguousarray(indices, dtype=np.int32)


def _source_ranges(lo, hi, parts):
    if parts <= 1:
        return [(lo, hi)] if hi > lo else []
    bounds = np.linspace(lo, hi, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _choose_method(indptr, indices, n):
    ecc, _ = _kernels.eccentricity(indptr, indices, 0)
    levels = 2 * ecc + 1
    words = (n + 63) // 64
    # measured: one bitset word-visit costs about 1/6 of one BFS edge-visit
    return "bitset" if levels * words < 6 * n else "bfs"


def distance_sum(graph, jobs=1, method="auto"):
    """Return ``(sum of d(i, j) over ordered pairs, number of reached pairs)``.

    Reached pairs include the ``N`` self pairs.
    """
    indptr, indices = _as_csr(graph)
    n = len(indptr) - 1
    if n <= 1:
        return 0, n
    if method == "auto":
        method = _choose_method(indptr, indices, n)
    if method == "bfs":
        kernel = _kernels.bfs_distance_sum
        ranges = _source_ranges(0, n, max(1, jobs))
    elif method == "bitset":
        kernel = _kernels.bitset_distance_sum
        max_words = max(1, _BITSET_BYTES // (24 * n))
        block = min(n, 64 * max_words)
        parts = max(jobs, -(-n // block))
        ranges = _source_ranges(0, n, parts)
    else:
        raise ValueError(f"unknown method {method!r}")

    if jobs > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda r: kernel(indptr, indices, r[0], r[1]), ranges))
    else:
        parts = [kernel(indptr, indices, a, b) for a, b in ranges]
    total = sum(int(p[0]) for p in parts)
    reached = sum(int(p[1]) for p in parts)
    return total, reached


def aspl(graph, jobs=1, method="auto") -> float:
    """Average shortest path length over all ordered pairs of distinct nodes.

    ``graph`` is an :class:`AdjacencyNetwork` or an ``(indptr, indices)``
    pair. Returns 0.0 for a single node; raises :class:`DisconnectedError`
    when some pair is unreachable.
    """
    indptr, indices = _as_csr(graph)
    n = len(indptr) - 1
    if n < 1:
        raise ValueError("aspl of an empty graph")
    if n == 1:
        return 0.0
    total, reached = distance_sum((indptr, indices), jobs=jobs, method=method)
    if reached != n * n:
        raise DisconnectedError(f"{n * n - reached} ordered pairs unreachable")
    return total / (n * (n - 1))


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict

    @classmethod
    def from_degrees(cls, degrees):
        values, freq = np.unique(np.asarray(degrees, dtype=np.int64), return_counts=True)
        return cls({int(k): int(c) for k, c in zip(values, freq)})

    @property
    def n_nodes(self):
        return sum(self.counts.values())

    @property
    def n_edges(self):
        return sum(k * c for k, c in self.counts.items()) // 2

    @property
    def max_degree(self):
        return max(self.counts) if self.counts else 0

    @property
    def n_degree_one(self):
        return self.counts.get(1, 0)

    def degrees(self):
        """Expand back to one degree per node (ascending)."""
        ks = np.fromiter(self.counts.keys(), dtype=np.int64)
        cs = np.fromiter(self.counts.values(), dtype=np.int64)
        return np.repeat(ks, cs)


def degree_histogram(net) -> DegreeHistogram:
    if isinstance(net, AdjacencyNetwork):
        return DegreeHistogram.from_degrees(net.degrees())
    indptr, _ = _as_csr(net)
    return DegreeHistogram.from_degrees(np.diff(indptr))


@dataclass(frozen=True)
class DegreeExponentFit:
    gamma: float
    stderr: float
    n_tail: int
    kmin: int


def fit_degree_exponent(hist, kmin=4) -> DegreeExponentFit:
    """Maximum-likelihood tail exponent with the half-integer shift for
    discrete data: ``gamma = 1 + n / sum(ln(k / (kmin - 0.5))))``.

    Accepts a :class:`DegreeHistogram` or a raw array of degrees.
    """
    degrees = hist.degrees() if isinstance(hist, DegreeHistogram) else np.asarray(hist)
    tail = degrees[degrees >= kmin]
    if len(np.unique(tail)) < 10:
        raise InsufficientTailError(
            f"need at least 10 distinct degrees >= {kmin}, got {len(np.unique(tail))}")
    n = len(tail)
    gamma = 1.0 + n / np.sum(np.log(tail / (kmin - 0.5)))
    return DegreeExponentFit(float(gamma), float((gamma - 1.0) / math.sqrt(n)), n, kmin)


def sample_discrete_power_law(gamma, size, kmin, rng):
    """Inverse-CDF draws from the continuous law above ``kmin - 0.5``, rounded."""
    u = rng.random(size)
    x = (kmin - 0.5) * (1.0 - u) ** (-1.0 / (gamma - 1.0))
    return np.floor(x + 0.5).astype(np.int64)


def rank_frequency(stream: TokenStream):
    """Type frequencies in descending order; ties keep first-appearance order."""
    ids, _ = intern_stream(stream)
    counts = np.bincount(ids)
    return counts[np.argsort(-counts, kind="stable")]


#: Root-mean-square log residual above which a Zipf fit is flagged.
ZIPF_POOR_FIT = 0.3


@dataclass(frozen=True)
class ZipfFit:
    zipf_alpha: float
    beta: float
    log_c: float
    fit_error: float
    poor_fit: bool


def _zipf_sse(logr_shift_fn, y, beta):
    x = logr_shift_fn(beta)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = np.dot(dx, y - ym) / np.dot(dx, dx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    return float(np.dot(resid, resid)), -slope, intercept


def _golden_min(f, a, b, tol=1e-6):
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (a + b) / 2


def zipf_fit(stream_or_freqs, beta_grid=None) -> ZipfFit:
    """Least-squares fit of ``log f(r) = C - alpha * log(r + beta)`` over all ranks.

    ``beta`` is scanned on ``0, 0.25, ..., 8`` and then refined by golden
    section around the best grid point.
    """
    if isinstance(stream_or_freqs, TokenStream):
        freqs = rank_frequency(stream_or_freqs)
    else:
        freqs = np.sort(np.asarray(stream_or_freqs))[::-1]
    freqs = freqs[freqs > 0]
    if len(freqs) < 100:
        raise TooSmallVocabularyError(f"need >= 100 types, got {len(freqs)}")
    ranks = np.arange(1, len(freqs) + 1, dtype=float)
    y = np.log(freqs.astype(float))
    shifted = lambda beta: np.log(ranks + beta)
    grid = np.arange(0.0, 8.0 + 1e-9, 0.25) if beta_grid is None else np.asarray(beta_grid)
    sses = [_zipf_sse(shifted, y, b)[0] for b in grid]
    k = int(np.argmin(sses))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    beta = _golden_min(lambda b: _zipf_sse(shifted, y, b)[0], lo, hi) if hi > lo else grid[k]
    sse, alpha, intercept = _zipf_sse(shifted, y, beta)
    if sse > sses[k]:
        beta = grid[k]
        sse, alpha, intercept = _zipf_sse(shifted, y, beta)
    rms = math.sqrt(sse / len(y))
    return ZipfFit(float(alpha), float(beta), float(intercept), rms, rms > ZIPF_POOR_FIT)


@dataclass(frozen=True)
class HeapsFit:
    delta: float
    prefactor: float
    fit_error: float
    saturated: bool


def _log_points(total, per_decade=20):
    pts = np.unique(np.round(np.logspace(0, math.log10(total),
                                         max(2, int(per_decade * math.log10(max(total, 10)))) + 1)))
    pts = pts.astype(np.int64)
    if pts[-1] != total:
        pts = np.append(pts, total)
    return pts


def heaps_curve(stream_or_ids, per_decade=20):
    """``(tau, distinct types among the first tau tokens)`` at log-spaced tau."""
    if isinstance(stream_or_ids, TokenStream):
        ids, _ = intern_stream(stream_or_ids)
    else:
        ids = np.asarray(stream_or_ids)
    if len(ids) == 0:
        raise ValueError("empty stream")
    _, first = np.unique(ids, return_index=True)
    first.sort()
    taus = _log_points(len(ids), per_decade)
    counts = np.searchsorted(first, taus, side="left")
    return list(zip(taus.tolist(), counts.tolist()))


def heaps_curve_from_counts(n_of_tau, per_decade=20):
    """Sample a node-count trajectory (``n_of_tau[t-1]`` after ``t`` steps)."""
    n_of_tau = np.asarray(n_of_tau)
    taus = _log_points(len(n_of_tau), per_decade)
    return list(zip(taus.tolist(), n_of_tau[taus - 1].tolist()))


def heaps_fit(curve, tau_min=100) -> HeapsFit:
    """Fit ``log N = log prefactor + delta * log tau`` over ``tau >= tau_min``.

    ``saturated`` is set when no new type appeared over the second half of
    the curve.
    """
    taus = np.array([t for t, _ in curve], dtype=float)
    ns = np.array([c for _, c in curve], dtype=float)
    mask = taus >= tau_min
    if mask.sum() < 2:
        mask = taus >= 1
    x, y = np.log(taus[mask]), np.log(ns[mask])
    if len(x) < 2:
        return HeapsFit(float("nan"), float("nan"), float("nan"), True)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    half = np.searchsorted(taus, taus[-1] / 2.0, side="left")
    saturated = bool(ns[-1] == ns[min(half, len(ns) - 1)]) and taus[-1] > 1
    return HeapsFit(float(slope), float(math.exp(intercept)),
                    float(math.sqrt(np.mean(resid ** 2))), saturated)


@dataclass
class NetworkMetrics:
    text_id: str
    mode: str
    n_nodes: int
    n_edges: int
    aspl: float
    max_degree: int
    gamma_deg: float
    zipf_alpha: float
    beta: float
    delta: float
    extras: dict = field(default_factory=dict)


def analyze_stream(stream: TokenStream, mode="tokens", kmin=4, jobs=1) -> NetworkMetrics:
    """Full-network statistics for one stream (one CSV row of the metrics table)."""
    from .netbuild import full_network

    net = full_network(stream)
    hist = degree_histogram(net)
    try:
        gamma = fit_degree_exponent(hist, kmin).gamma
    except InsufficientTailError:
        gamma = float("nan")
    try:
        zf = zipf_fit(stream)
        za, zb = zf.zipf_alpha, zf.beta
    except TooSmallVocabularyError:
        za = zb = float("nan")
    hf = heaps_fit(heaps_curve(stream))
    return NetworkMetrics(
        text_id=stream.text_id, mode=mode, n_nodes=net.n_nodes, n_edges=net.n_edges,
        aspl=aspl(net, jobs=jobs) if net.n_nodes > 0 else float("nan"),
        max_degree=hist.max_degree, gamma_deg=gamma, zipf_alpha=za, beta=zb,
        delta=hf.delta,
    )
