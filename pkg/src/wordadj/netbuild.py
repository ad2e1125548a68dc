"""Binary, undirected word-adjacency networks grown token by token.

Two representations live here:

* :class:`AdjacencyNetwork`, the incremental reference structure with an
  interner and sorted neighbour lists, driven by :func:`grow`;
* :class:`GrowthTimeline`, a flat array record of when every node and edge
  of one growth realization appeared. Snapshots at any node count are
  slices of it, which is what the curve protocol uses.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import VocabularyExhaustedError
from .tokenizer import TokenStream


class Interner:
    """Bijection between token surfaces and dense ids in first-appearance order."""

    def __init__(self, surfaces=()):
        self._ids = {}
        self._surfaces = []
        for s in surfaces:
            self.intern(s)

    def intern(self, surface):
        """Return ``(id, is_new)``."""
        node = self._ids.get(surface)
        if node is None:
            node = len(self._surfaces)
            self._ids[surface] = node
            self._surfaces.append(surface)
            return node, True
        return node, False

    def id(self, surface):
        return self._ids[surface]

    def surface(self, node):
        return self._surfaces[node]

    @property
    def surfaces(self):
        return tuple(self._surfaces)

    def __len__(self):
        return len(self._surfaces)

    def __contains__(self, surface):
        return surface in self._ids

    def copy(self):
        other = Interner()
        other._ids = dict(self._ids)
        other._surfaces = list(self._surfaces)
        return other


class GrowthKind(str, enum.Enum):
    NEW_NODE = "new_node"
    NEW_EDGE = "new_edge"
    REPEAT = "repeat"


@dataclass(frozen=True)
class GrowthEvent:
    kind: GrowthKind
    node: int
    tau: int


class AdjacencyNetwork:
    """Simple undirected graph over interned tokens.

    ``tokens_consumed`` counts tokens read so far and ``last_active`` is the
    node of the most recent token.
    """

    def __init__(self):
        self.interner = Interner()
        self.adjacency = []
        self.n_edges = 0
        self.last_active = None
        self.tokens_consumed = 0

    @property
    def n_nodes(self):
        return len(self.adjacency)

    def __repr__(self):
        return (f"AdjacencyNetwork(n_nodes={self.n_nodes}, n_edges={self.n_edges}, "
                f"tokens_consumed={self.tokens_consumed})")

    def neighbors(self, node):
        return self.adjacency[node]

    def has_edge(self, u, v):
        row = self.adjacency[u]
        i = bisect.bisect_left(row, v)
        return i < len(row) and row[i] == v

    def add_node(self, surface=None):
        if surface is None:
            surface = str(self.n_nodes)
        node, is_new = self.interner.intern(surface)
        if is_new:
            self.adjacency.append([])
        return node

    def add_edge(self, u, v):
        """Insert an undirected edge; returns False for loops and duplicates."""
        if u == v:
            return False
        row = self.adjacency[u]
        i = bisect.bisect_left(row, v)
        if i < len(row) and row[i] == v:
            return False
        row.insert(i, v)
        bisect.insort(self.adjacency[v], u)
        self.n_edges += 1
        return True

    def consume(self, surface):
        """Read one token. Returns the growth event, or None for the first token."""
        node, is_new = self.interner.intern(surface)
        if is_new:
            self.adjacency.append([])
        prev = self.last_active
        self.last_active = node
        tau = self.tokens_consumed
        self.tokens_consumed += 1
        if prev is None:
            return None
        added = self.add_edge(prev, node)
        if is_new:
            kind = GrowthKind.NEW_NODE
        elif added:
            kind = GrowthKind.NEW_EDGE
        else:
            kind = GrowthKind.REPEAT
        return GrowthEvent(kind, node, tau)

    def copy(self):
        other = AdjacencyNetwork()
        other.interner = self.interner.copy()
        other.adjacency = [list(row) for row in self.adjacency]
        other.n_edges = self.n_edges
        other.last_active = self.last_active
        other.tokens_consumed = self.tokens_consumed
        return other

    def edges(self):
        for u, row in enumerate(self.adjacency):
            for v in row:
                if u < v:
                    yield u, v

    def edge_array(self):
        arr = np.fromiter((x for e in self.edges() for x in e), dtype=np.int64,
                          count=2 * self.n_edges)
        return arr.reshape(-1, 2)

    def degrees(self):
        return np.fromiter((len(row) for row in self.adjacency), dtype=np.int64,
                           count=self.n_nodes)

    def to_csr(self):
        """``(indptr, indices)`` arrays (int32) for the BFS kernels."""
        deg = self.degrees()
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int32)
        np.cumsum(deg, out=indptr[1:])
        indices = np.fromiter((v for row in self.adjacency for v in row), dtype=np.int32,
                              count=int(indptr[-1]))
        return indptr, indices

    def is_connected(self):
        if self.n_nodes <= 1:
            return True
        seen = bytearray(self.n_nodes)
        seen[0] = 1
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for v in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    stack.append(v)
        return count == self.n_nodes

    @classmethod
    def from_edges(cls, n_nodes, edges, labels=None):
        net = cls()
        for k in range(n_nodes):
            net.add_node(labels[k] if labels is not None else str(k))
        for u, v in edges:
            net.add_edge(int(u), int(v))
        return net

    def export_edges(self, path):
        """Write ``id_u id_v`` lines and a ``<path>.ids`` sidecar of ``id<TAB>surface``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for u, v in self.edges():
                fh.write(f"{u} {v}\n")
        sidecar = path.with_name(path.name + ".ids")
        with sidecar.open("w", encoding="utf-8", newline="\n") as fh:
            for node, surface in enumerate(self.interner.surfaces):
                fh.write(f"{node}\t{surface}\n")
        return path, sidecar


def grow(stream: TokenStream, start=0, limit=None):
    """Yield ``(event, network)`` for every consumed token after the first.

    Tokens are read from ``start`` and wrap around the end of the stream.
    ``limit`` is the token budget (default: one full cycle). The network
    object is live and keeps changing; copy it to keep a state.
    """
    total = stream.total_len
    if total == 0:
        return
    if not 0 <= start < total:
        raise ValueError(f"start {start} outside 0..{total - 1}")
    if limit is None:
        limit = total
    net = AdjacencyNetwork()
    tokens = stream.tokens
    for step in range(limit):
        event = net.consume(tokens[(start + step) % total].surface)
        if event is not None:
            yield event, net


def _grow_until(stream, start, target_n):
    net = AdjacencyNetwork()
    total = stream.total_len
    tokens = stream.tokens
    for step in range(total):
        net.consume(tokens[(start + step) % total].surface)
        if net.n_nodes == target_n:
            return net
    return None


def snapshot_at_nodes(stream: TokenStream, start, target_n) -> AdjacencyNetwork:
    """State right after the token that introduced node number ``target_n``."""
    if target_n < 1:
        raise ValueError("target_n must be >= 1")
    if stream.total_len == 0:
        raise VocabularyExhaustedError("empty stream")
    net = _grow_until(stream, start, target_n)
    if net is None:
        raise VocabularyExhaustedError(
            f"{stream.text_id or 'stream'}: only {len(set(stream.surfaces()))} distinct "
            f"tokens, cannot reach {target_n} nodes")
    return net


def full_network(stream: TokenStream) -> AdjacencyNetwork:
    """Network after one pass over the stream, without the wrap-around pair."""
    net = AdjacencyNetwork()
    for token in stream.tokens:
        net.consume(token.surface)
    return net


def intern_stream(stream: TokenStream):
    """Token ids (first-appearance order) as an int32 array, plus the interner."""
    interner = Interner()
    ids = np.fromiter((interner.intern(t.surface)[0] for t in stream.tokens),
                      dtype=np.int32, count=stream.total_len)
    return ids, interner


def csr_from_edges(n_nodes, u, v):
    """Symmetric CSR ``(indptr, indices)`` from unique undirected edge arrays."""
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(n_nodes + 1, dtype=np.int32)
    np.cumsum(np.bincount(src, minlength=n_nodes), out=indptr[1:])
    return indptr, dst[order].astype(np.int32, copy=False)


@dataclass(frozen=True)
class GrowthTimeline:
    """Birth times of nodes and edges over one growth realization.

    Node ``k`` (local id, first-appearance order) appears at position
    ``node_birth[k]``; edge ``(edge_u[j], edge_v[j])`` appears when the token
    at ``edge_birth[j]`` is read. Edges are sorted by birth.
    """

    node_birth: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_birth: np.ndarray
    labels: np.ndarray | None = None

    @property
    def n_nodes(self):
        return len(self.node_birth)

    def edges_at_nodes(self, n):
        if not 1 <= n <= self.n_nodes:
            raise VocabularyExhaustedError(
                f"timeline has {self.n_nodes} nodes, cannot reach {n}")
        cut = np.searchsorted(self.edge_birth, self.node_birth[n - 1], side="right")
        return self.edge_u[:cut], self.edge_v[:cut]

    def csr_at_nodes(self, n):
        u, v = self.edges_at_nodes(n)
        return csr_from_edges(n, u, v)

    def network_at_nodes(self, n):
        u, v = self.edges_at_nodes(n)
        labels = None if self.labels is None else [str(x) for x in self.labels[:n]]
        return AdjacencyNetwork.from_edges(n, zip(u.tolist(), v.tolist()), labels)


@njit(cache=True)
def _distinct_prefix(ids, start, max_nodes, size):
    """Tokens read cyclically from ``start`` until ``max_nodes`` distinct ids were seen."""
    seen = np.zeros(size, dtype=np.bool_)
    total = len(ids)
    found = 0
    for k in range(total):
        x = ids[(start + k) % total]
        if not seen[x]:
            seen[x] = True
            found += 1
            if found == max_nodes:
                return k + 1
    return total


def timeline_from_ids(ids, start=0, max_nodes=None) -> GrowthTimeline:
    """Timeline of a cyclic read of ``ids`` starting at ``start`` (one full cycle).

    ``max_nodes`` truncates the read once that many distinct ids were seen.
    """
    ids = np.asarray(ids)
    total = len(ids)
    if total == 0:
        raise VocabularyExhaustedError("empty stream")
    if max_nodes is not None:
        length = _distinct_prefix(ids, start, max_nodes, int(ids.max()) + 1)
        stop = start + length
        seq = ids[start:stop] if stop <= total else np.concatenate([ids[start:], ids[:stop - total]])
    else:
        seq = ids if start == 0 else np.concatenate([ids[start:], ids[:start]])
    uniq, first = np.unique(seq, return_index=True)
    order = np.argsort(first, kind="stable")
    node_birth = first[order]
    if max_nodes is not None and max_nodes < len(node_birth):
        node_birth = node_birth[:max_nodes]
        seq = seq[:node_birth[-1] + 1]
        keep = order[:max_nodes]
    else:
        keep = order
    labels = uniq[keep]
    n = len(labels)
    local = np.full(int(uniq[-1]) + 1, -1, dtype=np.int64)
    local[labels] = np.arange(n)
    loc = local[seq]
    a, b = loc[:-1], loc[1:]
    pos = np.nonzero(a != b)[0]
    lo = np.minimum(a[pos], b[pos])
    hi = np.maximum(a[pos], b[pos])
    keys, first_edge = np.unique(lo * n + hi, return_index=True)
    birth = pos[first_edge] + 1
    order_e = np.argsort(birth, kind="stable")
    keys = keys[order_e]
    return GrowthTimeline(
        node_birth=node_birth.astype(np.int64),
        edge_u=(keys // n).astype(np.int32),
        edge_v=(keys % n).astype(np.int32),
        edge_birth=birth[order_e].astype(np.int64),
        labels=labels,
    )
