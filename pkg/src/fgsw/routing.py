"""Greedy routing over a highway overlay.

Three variants:

* ``plain`` — strictly improving moves among local neighbors plus (at
  highway nodes) long-range contacts; ties break to the lowest id.
* ``highway-sticky`` — greedy local steps until the walk reaches a
  highway node, then improving long-range hops while any exist,
  falling back to local steps and re-boarding whenever possible.
* ``highway-aware`` — like sticky, but the initial segment follows
  nearest-highway next-hop pointers (those hops may move away from the
  target) before switching to the sticky rules.

Every hop is labeled with its edge kind (local / long-range) and phase
(to-highway / on-highway / to-target).
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Graph
from .overlay import HighwayOverlay

VARIANTS = ("plain", "highway-sticky", "highway-aware")

KIND_LOCAL = "local"
KIND_LONG = "long-range"
PHASE_TO_HIGHWAY = "to-highway"
PHASE_ON_HIGHWAY = "on-highway"
PHASE_TO_TARGET = "to-target"

TRACE_COLUMNS = ("pair_id", "source", "target", "variant", "hops",
                 "hops_to_highway", "hops_on_highway", "hops_to_target",
                 "dist_st")


class RoutingError(RuntimeError):
    """A routing invariant failed (no improving move, runaway walk)."""


@dataclass
class RoutingTrace:
    source: int
    target: int
    variant: str
    path: list[int]
    edge_kinds: list[str] = field(default_factory=list)
    phases: list[str] = field(default_factory=list)
    dist_st: int = 0

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    def phase_hops(self, phase: str) -> int:
        return sum(1 for p in self.phases if p == phase)

    @property
    def hops_to_highway(self) -> int:
        return self.phase_hops(PHASE_TO_HIGHWAY)

    @property
    def hops_on_highway(self) -> int:
        return self.phase_hops(PHASE_ON_HIGHWAY)

    @property
    def hops_to_target(self) -> int:
        return self.phase_hops(PHASE_TO_TARGET)


def _best_improving_local(graph: Graph, dist_t: np.ndarray, u: int) -> int:
    """Lowest-id neighbor strictly closer to the target."""
    nbrs = graph.neighbors(u)
    i = int(np.argmin(dist_t[nbrs]))  # neighbors ascend, argmin takes first
    v = int(nbrs[i])
    if dist_t[v] >= dist_t[u]:
        raise RoutingError(
            f"no improving local move at node {u} (connected graph "
            f"should always have one)")
    return v


def _best_improving_contact(overlay: HighwayOverlay, dist_t: np.ndarray,
                            u: int) -> int | None:
    contacts = overlay.contacts(u)
    if contacts.size == 0:
        return None
    i = int(np.argmin(dist_t[contacts]))  # contacts ascend, ties -> lowest
    v = int(contacts[i])
    return v if dist_t[v] < dist_t[u] else None


def route(graph: Graph, overlay: HighwayOverlay, source: int, target: int,
          variant: str = "highway-sticky",
          dist_to_target: np.ndarray | None = None) -> RoutingTrace:
    """Run one greedy walk; always succeeds on a connected graph."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    for node in (source, target):
        if not 0 <= node < graph.n:
            raise ValueError(f"node {node} out of range")
    dist_t = dist_to_target if dist_to_target is not None \
        else graph.distance_row(target)
    trace = RoutingTrace(source=source, target=target, variant=variant,
                         path=[source], dist_st=int(dist_t[source]))
    is_hw = overlay.is_highway
    cur = source
    seen_highway = bool(is_hw[cur])
    hop_cap = 4 * graph.n + 16

    if variant == "highway-aware" and not seen_highway:
        _, next_hop = overlay.nearest_highway()
        while cur != target and not is_hw[cur]:
            cur = int(next_hop[cur])
            trace.path.append(cur)
            trace.edge_kinds.append(KIND_LOCAL)
            trace.phases.append(PHASE_TO_HIGHWAY)
        seen_highway = bool(is_hw[cur])

    while cur != target:
        if len(trace.path) > hop_cap:
            raise RoutingError("walk exceeded the hop cap")
        nxt = None
        if is_hw[cur] and variant != "plain":
            nxt = _best_improving_contact(overlay, dist_t, cur)
            kind, phase = KIND_LONG, PHASE_ON_HIGHWAY
        if nxt is None and variant == "plain" and is_hw[cur]:
            # plain pools local and long-range candidates together
            local = _best_improving_local(graph, dist_t, cur)
            lr = _best_improving_contact(overlay, dist_t, cur)
            if lr is not None and (dist_t[lr], lr) < (dist_t[local], local):
                nxt, kind, phase = lr, KIND_LONG, PHASE_ON_HIGHWAY
            else:
                nxt, kind = local, KIND_LOCAL
                phase = PHASE_TO_TARGET if seen_highway else PHASE_TO_HIGHWAY
        if nxt is None:
            nxt = _best_improving_local(graph, dist_t, cur)
            kind = KIND_LOCAL
            phase = PHASE_TO_TARGET if seen_highway else PHASE_TO_HIGHWAY
        cur = nxt
        trace.path.append(cur)
        trace.edge_kinds.append(kind)
        trace.phases.append(phase)
        seen_highway = seen_highway or bool(is_hw[cur])
    return trace


def route_batch(graph: Graph, overlay: HighwayOverlay,
                pairs: Sequence[tuple[int, int]],
                variant: str = "highway-sticky",
                parallelism: int = 1) -> list[RoutingTrace]:
    """Route every pair; results keep input order regardless of
    parallelism, so output bytes never depend on the thread count."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if not pairs:
        return []
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "highway-aware":
        overlay.nearest_highway()  # compute once, not per worker

    def one(pair: tuple[int, int]) -> RoutingTrace:
        s, t = pair
        return route(graph, overlay, int(s), int(t), variant)

    if parallelism == 1:
        return [one(p) for p in pairs]
    # lazy contact materialization is a pure function of (seed, node),
    # so concurrent workers can only duplicate work, never diverge
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, pairs))


def validate_trace(graph: Graph, overlay: HighwayOverlay,
                   trace: RoutingTrace) -> None:
    """Raise if any hop is not a real edge / real contact of its kind."""
    if trace.path[0] != trace.source or trace.path[-1] != trace.target:
        raise RoutingError("trace endpoints do not match")
    if len(trace.edge_kinds) != trace.hops or len(trace.phases) != trace.hops:
        raise RoutingError("trace labels out of sync with path")
    for i in range(trace.hops):
        a, b = trace.path[i], trace.path[i + 1]
        if trace.edge_kinds[i] == KIND_LOCAL:
            if b not in graph.neighbors(a):
                raise RoutingError(f"hop {a}->{b} is not a local edge")
        else:
            if not overlay.is_highway[a] or b not in overlay.contacts(a):
                raise RoutingError(f"hop {a}->{b} is not a contact")


def write_trace_csv(traces: Sequence[RoutingTrace], path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for pair_id, t in enumerate(traces):
            writer.writerow([pair_id, t.source, t.target, t.variant, t.hops,
                             t.hops_to_highway, t.hops_on_highway,
                             t.hops_to_target, t.dist_st])
