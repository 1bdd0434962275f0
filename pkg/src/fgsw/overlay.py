"""Randomized highway overlay over a fixed underlying graph.

Each node independently becomes a highway node with probability 1/k;
each highway node u receives round(q*k) directed long-range contacts,
every draw picking highway node h != u with probability
d(u,h)^(-s) / z(u) where z(u) sums d(u,h)^(-s) over all other highway
nodes. All randomness comes from per-(node, draw-index) substreams of
the master seed, so an overlay materialized lazily, eagerly, or in any
order is identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .graph import Graph, multi_source_bfs

MAX_MEMBERSHIP_EPOCHS = 16


class OverlayError(ValueError):
    """Invalid overlay parameters or malformed overlay data."""


@dataclass(frozen=True)
class OverlayParams:
    """Model parameters: highway constant k, contact multiplier q,
    clustering exponent s, master seed."""

    k: float
    q: float
    s: float
    seed: int

    def __post_init__(self):
        if not self.k >= 1:
            raise OverlayError("k must be >= 1")
        if not self.q > 0:
            raise OverlayError("q must be > 0")
        # s = 0 is degenerate (uniform contacts) but useful in tests
        if not self.s >= 0:
            raise OverlayError("s must be >= 0")
        if self.draws_per_node < 1:
            raise OverlayError("round(q*k) must be >= 1")

    @property
    def draws_per_node(self) -> int:
        """Raw contact draws per highway node: round(q*k), half up."""
        return int(np.floor(self.q * self.k + 0.5))


def sample_highway_membership(graph: Graph, params: OverlayParams
                              ) -> tuple[np.ndarray, int]:
    """Per-node highway flags plus the epoch that produced them.

    Flag i is a pure function of (seed, epoch, i). If fewer than two
    highway nodes come up, the whole membership is resampled under the
    next epoch, up to MAX_MEMBERSHIP_EPOCHS.
    """
    p = 1.0 / params.k
    for epoch in range(MAX_MEMBERSHIP_EPOCHS):
        stream = rng.substream(params.seed, rng.DOMAIN_MEMBERSHIP, epoch)
        flags = stream.random(graph.n) < p
        if int(flags.sum()) >= 2:
            return flags, epoch
    raise OverlayError(
        f"fewer than 2 highway nodes after {MAX_MEMBERSHIP_EPOCHS} "
        f"membership epochs (n={graph.n}, k={params.k})")


class HighwayOverlay:
    """Sampled highway set plus per-node contact lists and z values.

    Contact lists and z(u) are materialized on first access and cached;
    the result never depends on access order.
    """

    def __init__(self, graph: Graph, params: OverlayParams,
                 is_highway: np.ndarray, epoch: int):
        self.graph = graph
        self.params = params
        self.epoch = epoch
        self.is_highway = is_highway
        self.highway_ids = np.flatnonzero(is_highway).astype(np.int32)
        self._cache: dict[int, tuple[float, np.ndarray]] = {}
        self._nearest: tuple[np.ndarray, np.ndarray] | None = None

    # -- contact distribution ------------------------------------------

    def _weight_cumsum(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """(targets, cumulative weights) of u's contact distribution,
        targets in ascending id order."""
        targets = self.highway_ids[self.highway_ids != u]
        d = self.graph.distance_row(u)[targets].astype(np.float64)
        return targets, np.cumsum(d ** -self.params.s)

    def _materialize(self, u: int) -> tuple[float, np.ndarray]:
        entry = self._cache.get(u)
        if entry is None:
            targets, cum = self._weight_cumsum(u)
            z = float(cum[-1])
            stream = rng.substream(self.params.seed, rng.DOMAIN_CONTACTS,
                                   self.epoch, u)
            draws = stream.random(self.params.draws_per_node)
            idx = np.searchsorted(cum, draws * z, side="right")
            np.minimum(idx, cum.size - 1, out=idx)
            entry = (z, np.unique(targets[idx]))
            self._cache[u] = entry
        return entry

    def _require_highway(self, u: int) -> None:
        if not 0 <= u < self.graph.n:
            raise ValueError(f"node {u} out of range")
        if not self.is_highway[u]:
            raise ValueError(f"node {u} is not a highway node")

    def zvalue(self, u: int) -> float:
        """Normalization constant of u's contact distribution."""
        self._require_highway(u)
        return self._materialize(u)[0]

    def contacts(self, u: int) -> np.ndarray:
        """u's long-range contact targets, deduplicated, ascending."""
        self._require_highway(u)
        return self._materialize(u)[1]

    def contact_distribution(self, u: int
                             ) -> tuple[np.ndarray, np.ndarray, float]:
        """(targets, probabilities, z) of u's exact contact law."""
        self._require_highway(u)
        targets, cum = self._weight_cumsum(u)
        z = float(cum[-1])
        probs = np.diff(cum, prepend=0.0) / z
        return targets, probs, z

    def draw_contact_targets(self, u: int, count: int, tag: int = 0
                             ) -> np.ndarray:
        """Fresh draws from u's contact law (for statistics; does not
        touch the overlay's own contact lists)."""
        self._require_highway(u)
        targets, cum = self._weight_cumsum(u)
        stream = rng.substream(self.params.seed, rng.DOMAIN_REDRAW,
                               self.epoch, u, tag)
        idx = np.searchsorted(cum, stream.random(count) * float(cum[-1]),
                              side="right")
        np.minimum(idx, cum.size - 1, out=idx)
        return targets[idx]

    def materialize_all(self) -> None:
        for u in self.highway_ids:
            self._materialize(int(u))

    def zvalues(self) -> np.ndarray:
        """z over all highway nodes, aligned with highway_ids."""
        return np.array([self.zvalue(int(u)) for u in self.highway_ids])

    # -- nearest-highway field ------------------------------------------

    def nearest_highway(self) -> tuple[np.ndarray, np.ndarray]:
        """(distance to nearest highway node, local next-hop) per node.

        Highway nodes have distance 0 and themselves as next hop; for
        the rest the next hop is the lowest-id neighbor strictly closer
        to the highway set.
        """
        if self._nearest is None:
            g = self.graph
            dist = multi_source_bfs(g, self.highway_ids)
            heads = np.repeat(np.arange(g.n, dtype=np.int64),
                              np.diff(g.indptr))
            good = dist[g.indices] == dist[heads] - 1
            cand = np.where(good, g.indices, g.n).astype(np.int64)
            next_hop = np.minimum.reduceat(cand, g.indptr[:-1]).astype(np.int64)
            next_hop[self.is_highway] = np.flatnonzero(self.is_highway)
            if next_hop.max() >= g.n:
                raise OverlayError("nearest-highway field has a dead end")
            self._nearest = (dist, next_hop.astype(np.int32))
        return self._nearest

    # -- serialization ----------------------------------------------------

    def save(self, path) -> None:
        """Text format: `k q s seed epoch n` header, then one
        `h <id> z=<z> : t1 t2 ...` line per highway node, ascending."""
        p = self.params
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"{p.k:.17g} {p.q:.17g} {p.s:.17g} {p.seed} "
                     f"{self.epoch} {self.graph.n}\n")
            for u in self.highway_ids:
                z, contacts = self._materialize(int(u))
                tail = " ".join(str(int(t)) for t in contacts)
                fh.write(f"h {int(u)} z={z:.17g} : {tail}\n")

    @classmethod
    def load(cls, graph: Graph, path) -> "HighwayOverlay":
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise OverlayError(f"{path}: empty overlay file")
        head = lines[0].split()
        if len(head) != 6:
            raise OverlayError(f"{path}: header must be `k q s seed epoch n`")
        try:
            k, q, s = float(head[0]), float(head[1]), float(head[2])
            seed, epoch, n = int(head[3]), int(head[4]), int(head[5])
        except ValueError as exc:
            raise OverlayError(f"{path}: malformed header") from exc
        if n != graph.n:
            raise OverlayError(
                f"{path}: overlay is for n={n}, graph has n={graph.n}")
        params = OverlayParams(k=k, q=q, s=s, seed=seed)
        is_highway = np.zeros(n, dtype=bool)
        parsed: list[tuple[int, float, np.ndarray]] = []
        prev = -1
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) < 4 or parts[0] != "h" or parts[2][:2] != "z=" \
                    or parts[3] != ":":
                raise OverlayError(f"{path}:{lineno}: malformed highway line")
            try:
                u = int(parts[1])
                z = float(parts[2][2:])
                contacts = np.array([int(t) for t in parts[4:]],
                                    dtype=np.int32)
            except ValueError as exc:
                raise OverlayError(f"{path}:{lineno}: malformed values") from exc
            if not 0 <= u < n:
                raise OverlayError(f"{path}:{lineno}: node {u} out of range")
            if contacts.size and not (0 <= contacts.min()
                                      and contacts.max() < n):
                raise OverlayError(
                    f"{path}:{lineno}: contact id out of range")
            if u <= prev:
                raise OverlayError(f"{path}:{lineno}: ids must be ascending")
            if not (np.isfinite(z) and z > 0):
                raise OverlayError(f"{path}:{lineno}: bad z value")
            if contacts.size == 0:
                raise OverlayError(f"{path}:{lineno}: no contacts")
            prev = u
            is_highway[u] = True
            parsed.append((u, z, contacts))
        if len(parsed) < 2:
            raise OverlayError(f"{path}: fewer than 2 highway nodes")
        overlay = cls(graph, params, is_highway, epoch)
        for u, z, contacts in parsed:
            bad = contacts[~is_highway[contacts]] if contacts.size else []
            if len(bad):
                raise OverlayError(
                    f"{path}: node {u} has non-highway contact {int(bad[0])}")
            if np.any(contacts == u) or np.any(np.diff(contacts) <= 0):
                raise OverlayError(
                    f"{path}: node {u} has self or unsorted contacts")
            overlay._cache[u] = (z, contacts)
        return overlay


def build_overlay(graph: Graph, params: OverlayParams,
                  materialize: bool = True) -> HighwayOverlay:
    """Sample membership and (by default) all contact lists and z values.

    With materialize=False contacts are computed on first use instead;
    the resulting overlay is identical either way.
    """
    if graph.n < 2:
        raise OverlayError("overlay needs a graph with at least 2 nodes")
    flags, epoch = sample_highway_membership(graph, params)
    overlay = HighwayOverlay(graph, params, flags, epoch)
    if materialize:
        overlay.materialize_all()
    return overlay
