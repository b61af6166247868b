"""Exact max-flow / min-cut over a FlowNetwork.

Dinic's shortest-augmenting-path scheme over a residual arc array, with the
inner loops compiled by numba when available (pure-Python fallback runs the
identical code). Results are deterministic for a fixed arc insertion order:
adjacency is scanned in stable-sorted insertion order and the canonical
minimum cut is the set of nodes reachable from the source in the final
residual graph.

INFINITE capacities are IEEE infinities: residuals of uncuttable arcs stay
infinite under any finite push, so they can never saturate, and a fully
infinite augmenting path is detected exactly as an unbounded instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raygraph import FlowNetwork

MAX_AUGMENTATIONS = 10_000_000

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


class UnboundedFlowError(RuntimeError):
    """An all-infinite path connects source and sink."""

    token = "unbounded-flow"


class SolverLimitError(RuntimeError):
    """Safety cap on augmentation steps reached; input considered malformed."""

    token = "solver-limit"


@dataclass(frozen=True)
class CutResult:
    """Outcome of a min-cut: total flow, source-side labeling, per-arc flow."""

    flow_value: float
    in_source_set: np.ndarray  # bool per node
    arc_flow: np.ndarray  # float per input arc, insertion order


@njit(cache=True)
def _dinic(node_count, source, sink, slot_head, residual, adj_slots, adj_start, max_aug):
    """Run Dinic to completion, mutating ``residual``.

    Returns (status, flow, level) with status 0 = optimal, 1 = unbounded,
    2 = augmentation limit. ``level`` holds the final source-side BFS so
    level >= 0 marks residual reachability at optimality.
    """
    level = np.empty(node_count, np.int64)
    queue = np.empty(node_count, np.int64)
    it = np.empty(node_count, np.int64)
    path = np.empty(node_count + 1, np.int64)
    flow = 0.0
    aug = 0
    while True:
        for v in range(node_count):
            level[v] = -1
        level[source] = 0
        queue[0] = source
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(adj_start[u], adj_start[u + 1]):
                e = adj_slots[k]
                v = slot_head[e]
                if residual[e] > 0.0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[tail] = v
                    tail += 1
        if level[sink] < 0:
            return 0, flow, level

        for v in range(node_count):
            it[v] = adj_start[v]
        path_len = 0
        u = source
        while True:
            if u == sink:
                bottleneck = np.inf
                for idx in range(path_len):
                    r = residual[path[idx]]
                    if r < bottleneck:
                        bottleneck = r
                if bottleneck == np.inf:
                    return 1, flow, level
                for idx in range(path_len):
                    e = path[idx]
                    residual[e] -= bottleneck
                    residual[e ^ 1] += bottleneck
                flow += bottleneck
                aug += 1
                if aug >= max_aug:
                    return 2, flow, level
                cut = 0
                while cut < path_len and residual[path[cut]] > 0.0:
                    cut += 1
                path_len = cut
                u = source if path_len == 0 else slot_head[path[path_len - 1]]
            else:
                advanced = False
                while it[u] < adj_start[u + 1]:
                    e = adj_slots[it[u]]
                    v = slot_head[e]
                    if residual[e] > 0.0 and level[v] == level[u] + 1:
                        path[path_len] = e
                        path_len += 1
                        u = v
                        advanced = True
                        break
                    it[u] += 1
                if not advanced:
                    if u == source:
                        break
                    path_len -= 1
                    e = path[path_len]
                    u = slot_head[e ^ 1]
                    it[u] += 1


def max_flow_min_cut(net: FlowNetwork) -> CutResult:
    """Exact maximum flow and the canonical minimum cut of ``net``."""
    tails, heads, caps = net.arcs()
    m = tails.size
    n = net.node_count

    slot_head = np.empty(2 * m, dtype=np.int64)
    slot_tail = np.empty(2 * m, dtype=np.int64)
    residual = np.empty(2 * m, dtype=np.float64)
    slot_head[0::2] = heads
    slot_head[1::2] = tails
    slot_tail[0::2] = tails
    slot_tail[1::2] = heads
    residual[0::2] = caps
    residual[1::2] = 0.0

    adj_slots = np.argsort(slot_tail, kind="stable").astype(np.int64)
    counts = np.bincount(slot_tail, minlength=n)
    adj_start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=adj_start[1:])

    status, flow, level = _dinic(
        n,
        net.source,
        net.sink,
        slot_head,
        residual,
        adj_slots,
        adj_start,
        MAX_AUGMENTATIONS,
    )
    if status == 1:
        raise UnboundedFlowError("infinite-capacity path from source to sink")
    if status == 2:
        raise SolverLimitError(f"exceeded {MAX_AUGMENTATIONS} augmentations")

    in_source_set = level >= 0
    arc_flow = residual[1::2].copy()
    return CutResult(flow_value=float(flow), in_source_set=in_source_set, arc_flow=arc_flow)
