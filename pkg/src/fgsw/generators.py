"""Graph constructors: wrap/no-wrap lattices, Sierpinski gaskets, DIMACS import."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphFormatError, LatticeHint, _bfs, _build_csr

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 2_000_000


def gen_lattice(dim: int, side: int, wrap: bool = True,
                node_budget: int = DEFAULT_NODE_BUDGET) -> Graph:
    """d-dimensional lattice with side nodes per axis, row-major ids.

    Wrapped lattices are vertex-transitive tori of degree 2*dim; the
    unwrapped variant loses edges at the boundary.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2, or 3")
    min_side = 3 if wrap else 2
    if side < min_side:
        raise ValueError(f"side must be >= {min_side} for wrap={wrap}")
    n = side ** dim
    if n > node_budget:
        raise ValueError(
            f"side^dim = {n} exceeds the node budget of {node_budget}")

    ids = np.arange(n, dtype=np.int64)
    heads, tails = [], []
    for axis in range(dim):
        stride = side ** (dim - 1 - axis)
        coord = (ids // stride) % side
        fwd = coord < side - 1
        heads.append(ids[fwd])
        tails.append(ids[fwd] + stride)
        if wrap:
            last = coord == side - 1
            heads.append(ids[last])
            tails.append(ids[last] - (side - 1) * stride)
    edges = np.stack([np.concatenate(heads), np.concatenate(tails)], axis=1)
    return Graph.from_edges(n, edges, lattice_hint=LatticeHint(dim, side, wrap))


def gen_sierpinski(level: int,
                   node_budget: int = DEFAULT_NODE_BUDGET) -> Graph:
    """Sierpinski gasket graph of the given level.

    Level 1 is a triangle; each next level glues three copies pairwise
    at corner nodes. Copies are ordered and glued corners take the
    lowest id, so numbering is deterministic. n_L = (3^L + 3)/2,
    m_L = 3^L.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    final_n = (3 ** level + 3) // 2
    if final_n > node_budget:
        raise ValueError(
            f"level {level} needs {final_n} nodes, over the budget "
            f"of {node_budget}")
    edges = np.array([[0, 1], [0, 2], [1, 2]], dtype=np.int64)
    corners = np.array([0, 1, 2], dtype=np.int64)
    n = 3
    for _ in range(level - 1):
        c0, c1, c2 = corners
        copies = [edges + off for off in (0, n, 2 * n)]
        merged = np.concatenate(copies)
        # glue: B's corner0 -> A's corner1, C's corner1 -> B's corner2,
        # C's corner0 -> A's corner2
        remap = np.arange(3 * n, dtype=np.int64)
        remap[n + c0] = c1
        remap[2 * n + c1] = n + c2
        remap[2 * n + c0] = c2
        merged = remap[merged]
        kept = np.unique(merged)
        dense = np.full(3 * n, -1, dtype=np.int64)
        dense[kept] = np.arange(kept.size)
        edges = dense[merged]
        corners = dense[np.array([c0, n + c1, 2 * n + c2])]
        n = kept.size
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class DimacsImport:
    """Largest-component hop graph extracted from a DIMACS file."""

    graph: Graph
    original_ids: np.ndarray  # new id -> 1-indexed id in the file
    file_nodes: int
    dropped_nodes: int

    def write_renumber_map(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("new_id,original_id\n")
            for new, orig in enumerate(self.original_ids):
                fh.write(f"{new},{orig}\n")


def import_dimacs(path) -> DimacsImport:
    """Read a DIMACS shortest-path file as an unweighted undirected graph.

    Arc weights and directions are dropped, duplicate arcs collapse to
    one edge, and only the largest connected component is kept (dense
    renumbering in ascending original-id order).
    """
    n_decl = None
    heads, tails = [], []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0] == "c":
                continue
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "sp":
                    raise GraphFormatError(
                        f"{path}:{lineno}: expected `p sp n m`")
                n_decl = int(parts[2])
            elif parts[0] == "a":
                if len(parts) != 4:
                    raise GraphFormatError(
                        f"{path}:{lineno}: expected `a u v w`")
                if n_decl is None:
                    raise GraphFormatError(
                        f"{path}:{lineno}: arc before problem line")
                try:
                    u, v = int(parts[1]), int(parts[2])
                except ValueError as exc:
                    raise GraphFormatError(
                        f"{path}:{lineno}: non-integer arc endpoint") from exc
                if not (1 <= u <= n_decl and 1 <= v <= n_decl):
                    raise GraphFormatError(
                        f"{path}:{lineno}: endpoint outside [1, {n_decl}]")
                if u != v:
                    heads.append(u - 1)
                    tails.append(v - 1)
            else:
                raise GraphFormatError(
                    f"{path}:{lineno}: unknown record `{parts[0]}`")
    if n_decl is None:
        raise GraphFormatError(f"{path}: missing `p sp` line")
    if not heads:
        raise GraphFormatError(f"{path}: no arcs")

    h = np.asarray(heads, dtype=np.int64)
    t = np.asarray(tails, dtype=np.int64)
    lo = np.minimum(h, t)
    hi = np.maximum(h, t)
    key = np.unique(lo * n_decl + hi)
    lo, hi = key // n_decl, key % n_decl

    # locate the largest component over declared nodes with any edge
    indptr, indices = _build_csr(n_decl, np.concatenate([lo, hi]),
                                 np.concatenate([hi, lo]))
    comp = np.full(n_decl, -1, dtype=np.int64)
    comp_sizes = []
    for start in range(n_decl):
        if comp[start] < 0 and indptr[start + 1] > indptr[start]:
            reach = _bfs(indptr, indices, n_decl, (start,)) >= 0
            comp[reach] = len(comp_sizes)
            comp_sizes.append(int(reach.sum()))
    if not comp_sizes:
        raise GraphFormatError(f"{path}: no usable nodes")
    best = int(np.argmax(comp_sizes))  # ties: earliest (lowest start id)
    keep = np.flatnonzero(comp == best)
    dropped = n_decl - keep.size
    if dropped:
        log.warning("%s: kept largest component (%d nodes), dropped %d",
                    path, keep.size, dropped)

    dense = np.full(n_decl, -1, dtype=np.int64)
    dense[keep] = np.arange(keep.size)
    mask = comp[lo] == best
    edges = np.stack([dense[lo[mask]], dense[hi[mask]]], axis=1)
    graph = Graph.from_edges(int(keep.size), edges)
    return DimacsImport(graph=graph, original_ids=keep + 1,
                        file_nodes=n_decl, dropped_nodes=dropped)
