"""Synthetic growing networks: accelerated growth with a walker and a
time-dependent sublinear preferential attachment.

A walker sits on ``last_active``. At step ``tau`` a new node joins with
probability ``p(tau) = min(1, p0 tau^(delta-1))`` and is linked to the
walker; otherwise an existing node ``i != last_active`` is drawn with
weight ``k_i^(1 - t^-eta)`` (``t`` the current node count) and linked to
the walker. Either way the walker moves to the new endpoint.

The seed is a two-node chain, which counts as step 1, so a pure chain
has ``N = tau + 1`` after ``tau`` steps.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, SaturationError, VocabularyExhaustedError
from .growthcurve import CheckpointSchedule, GrowthCurve, Mode
from .metrics import aspl
from .netbuild import AdjacencyNetwork, GrowthKind, GrowthTimeline

MAX_RETRIES = 100

KIND_NEW_NODE = 0
KIND_NEW_EDGE = 1
KIND_REPEAT = 2
_KINDS = (GrowthKind.NEW_NODE, GrowthKind.NEW_EDGE, GrowthKind.REPEAT)


@dataclass(frozen=True)
class SynthConfig:
    p0: float = 1.0
    delta: float = 0.8
    eta: float = 0.5
    seed: int = 0
    steps: int = 10_000
    resample_duplicates: bool = True

    def problems(self):
        out = []
        if not 0 < self.p0 <= 1:
            out.append(f"p0 must be in (0, 1], got {self.p0}")
        if not 0 < self.delta <= 1:
            out.append(f"delta must be in (0, 1], got {self.delta}")
        if not self.eta > 0:
            out.append(f"eta must be positive, got {self.eta}")
        if self.steps < 2:
            out.append(f"steps must be >= 2, got {self.steps}")
        return out

    def validate(self):
        probs = self.problems()
        if probs:
            raise ConfigError("; ".join(probs))
        return self


def new_node_probability(tau, cfg: SynthConfig) -> float:
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return min(1.0, cfg.p0 * tau ** (cfg.delta - 1.0))


def attachment_weight(k, t, eta) -> float:
    return k ** (1.0 - t ** (-eta))


@njit(cache=True)
def _fenwick_build(tree, w, n):
    for i in range(n + 1):
        tree[i] = 0.0
    for i in range(1, n + 1):
        tree[i] += w[i - 1]
        j = i + (i & -i)
        if j <= n:
            tree[j] += tree[i]


@njit(cache=True)
def _fenwick_add(tree, n, idx, dw):
    i = idx + 1
    while i <= n:
        tree[i] += dw
        i += i & -i


@njit(cache=True)
def _fenwick_total(tree, n):
    total = 0.0
    i = n
    while i > 0:
        total += tree[i]
        i -= i & -i
    return total


@njit(cache=True)
def _fenwick_find(tree, n, target):
    """Smallest index whose prefix sum exceeds ``target``."""
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step //= 2
    if pos >= n:
        pos = n - 1
    return pos


@njit(cache=True)
def _generate(steps, p0, delta, eta, seed, resample):
    np.random.seed(seed)
    cap = steps + 2
    deg = np.zeros(cap, dtype=np.int64)
    w = np.zeros(cap, dtype=np.float64)
    tree = np.zeros(cap + 1, dtype=np.float64)
    node_birth = np.zeros(cap, dtype=np.int64)
    eu = np.zeros(cap, dtype=np.int32)
    ev = np.zeros(cap, dtype=np.int32)
    eb = np.zeros(cap, dtype=np.int64)
    kinds = np.zeros(steps, dtype=np.int8)
    nodes = np.zeros(steps, dtype=np.int32)
    n_after = np.zeros(steps, dtype=np.int64)
    e_after = np.zeros(steps, dtype=np.int64)
    edges = dict()
    edges[np.int64(0) * cap + 1] = True

    # seed chain 0 - 1 is step 1
    n = 2
    m = 1
    deg[0] = 1
    deg[1] = 1
    node_birth[0] = 0
    node_birth[1] = 1
    eu[0] = 0
    ev[0] = 1
    eb[0] = 1
    kinds[0] = 0
    nodes[0] = 1
    n_after[0] = 2
    e_after[0] = 1
    last = 1
    xi = 1.0 - n ** (-eta)
    for i in range(n):
        w[i] = deg[i] ** xi
    _fenwick_build(tree, w, n)

    for tau in range(2, steps + 1):
        p = p0 * tau ** (delta - 1.0)
        if p > 1.0:
            p = 1.0
        s = tau - 1
        if np.random.random() < p:
            v = n
            n += 1
            node_birth[v] = tau
            deg[v] = 1
            deg[last] += 1
            a = last if last < v else v
            b = v if last < v else last
            edges[np.int64(a) * cap + b] = True
            eu[m] = a
            ev[m] = b
            eb[m] = tau
            m += 1
            xi = 1.0 - n ** (-eta)
            for i in range(n):
                w[i] = deg[i] ** xi
            _fenwick_build(tree, w, n)
            kinds[s] = 0
            nodes[s] = v
            last = v
        else:
            wl = w[last]
            _fenwick_add(tree, n, last, -wl)
            total = _fenwick_total(tree, n)
            full = deg[last] >= n - 1
            target = -1
            dup = False
            tries = 0
            while True:
                r = np.random.random() * total
                cand = _fenwick_find(tree, n, r)
                if cand == last:
                    # rounding at the boundary; step to a neighbour index
                    cand = cand - 1 if cand > 0 else cand + 1
                a = last if last < cand else cand
                b = cand if last < cand else last
                key = np.int64(a) * cap + b
                if key not in edges:
                    target = cand
                    dup = False
                    break
                dup = True
                target = cand
                if full or not resample:
                    break
                tries += 1
                if tries >= 100:
                    return (node_birth[:0], eu[:0], ev[:0], eb[:0], kinds, nodes,
                            n_after, e_after, tau)
            _fenwick_add(tree, n, last, wl)
            if dup:
                kinds[s] = 2
            else:
                edges[key] = True
                eu[m] = a
                ev[m] = b
                eb[m] = tau
                m += 1
                for x in (np.int64(last), np.int64(target)):
                    deg[x] += 1
                    nw = deg[x] ** xi
                    _fenwick_add(tree, n, x, nw - w[x])
                    w[x] = nw
                kinds[s] = 1
            nodes[s] = target
            last = target
        n_after[s] = n
        e_after[s] = m
    return (node_birth[:n], eu[:m], ev[:m], eb[:m], kinds, nodes, n_after, e_after, 0)


@dataclass(frozen=True)
class SynthRun:
    """One realization: growth timeline plus a per-step event log.

    ``kinds[s]``, ``nodes[s]``, ``n_after[s]`` and ``e_after[s]`` describe
    step ``s + 1``.
    """

    config: SynthConfig
    timeline: GrowthTimeline
    kinds: np.ndarray
    nodes: np.ndarray
    n_after: np.ndarray
    e_after: np.ndarray

    @property
    def n_nodes(self):
        return self.timeline.n_nodes

    @property
    def n_edges(self):
        return len(self.timeline.edge_u)

    def network(self) -> AdjacencyNetwork:
        """Final network with every edge, including those after the last new node."""
        t = self.timeline
        return AdjacencyNetwork.from_edges(
            self.n_nodes, zip(t.edge_u.tolist(), t.edge_v.tolist()))

    def events(self):
        """``(step, GrowthKind, node)`` for every step."""
        return [(s + 1, _KINDS[k], int(v))
                for s, (k, v) in enumerate(zip(self.kinds.tolist(), self.nodes.tolist()))]


def generate(cfg: SynthConfig) -> SynthRun:
    cfg.validate()
    nb, eu, ev, eb, kinds, nodes, n_after, e_after, failed = _generate(
        int(cfg.steps), float(cfg.p0), float(cfg.delta), float(cfg.eta),
        int(cfg.seed) & 0xFFFFFFFF, bool(cfg.resample_duplicates))
    if failed:
        raise SaturationError(
            f"no free attachment target after {MAX_RETRIES} draws at step {failed}")
    timeline = GrowthTimeline(node_birth=nb, edge_u=eu, edge_v=ev, edge_birth=eb)
    return SynthRun(cfg, timeline, kinds, nodes, n_after, e_after)


def realization_seeds(seed, n_realizations):
    """Independent 32-bit seeds derived from one master seed."""
    children = np.random.SeedSequence(int(seed)).spawn(n_realizations)
    return [int(c.generate_state(1)[0]) for c in children]


def _realization_curve(args):
    cfg, points = args
    run = generate(cfg)
    if points[-1] > run.n_nodes:
        raise VocabularyExhaustedError(
            f"synthetic network reached {run.n_nodes} nodes, checkpoint {points[-1]}")
    return [aspl(run.timeline.csr_at_nodes(n)) for n in points]


def synth_curve(cfg: SynthConfig, checkpoints, n_realizations=10, jobs=1,
                text_id="synth", keep_realizations=False) -> GrowthCurve:
    """Mean L(N) over ``n_realizations`` independently seeded runs.

    With ``keep_realizations`` the curve's ``per_offset`` maps each
    realization index to its ``{N: L}`` values.
    """
    cfg.validate()
    if n_realizations < 1:
        raise ConfigError("n_realizations must be >= 1")
    if not isinstance(checkpoints, CheckpointSchedule):
        checkpoints = CheckpointSchedule(tuple(checkpoints))
    points = list(checkpoints.points)
    if points[-1] > cfg.steps + 1:
        raise VocabularyExhaustedError(
            f"checkpoint {points[-1]} unreachable in {cfg.steps} steps")
    tasks = [(SynthConfig(cfg.p0, cfg.delta, cfg.eta, s, cfg.steps, cfg.resample_duplicates),
              points) for s in realization_seeds(cfg.seed, n_realizations)]
    if jobs > 1 and n_realizations > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_realization_curve, tasks))
    else:
        rows = [_realization_curve(t) for t in tasks]
    cols = list(zip(*rows))
    return GrowthCurve(
        text_id=text_id, mode=Mode.TOKENS, n=points,
        mean_l=[math.fsum(c) / len(c) for c in cols],
        realizations=[n_realizations] * len(points),
        per_offset={i: dict(zip(points, row)) for i, row in enumerate(rows)}
        if keep_realizations else None,
        meta={"p0": cfg.p0, "delta": cfg.delta, "eta": cfg.eta,
              "steps": cfg.steps, "seed": cfg.seed},
    )
