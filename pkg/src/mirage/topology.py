"""Coupling graphs and all-pairs hop distances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np


class DisconnectedGraph(ValueError):
    """Coupling graphs must be connected."""


class BadEdgeList(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class CouplingMap:
    num_qubits: int
    edges: frozenset  # of sorted (u, v) tuples
    distance: np.ndarray = field(compare=False)

    @staticmethod
    def from_edges(num_qubits: int, edge_iter) -> "CouplingMap":
        edges = frozenset(tuple(sorted((int(u), int(v)))) for u, v in edge_iter)
        for u, v in edges:
            if not (0 <= u < num_qubits and 0 <= v < num_qubits) or u == v:
                raise BadEdgeList(0, f"edge ({u}, {v}) out of range")
        dist = _bfs_all_pairs(num_qubits, edges)
        if np.any(dist < 0):
            raise DisconnectedGraph("coupling graph is not connected")
        return CouplingMap(num_qubits, edges, dist)

    def neighbors(self, p: int) -> list:
        self._check(p)
        return sorted(v if u == p else u for u, v in self.edges if p in (u, v))

    def _check(self, *qs) -> None:
        for q in qs:
            if not 0 <= q < self.num_qubits:
                raise IndexOutOfRange(f"physical qubit {q} out of range")


def _bfs_all_pairs(n: int, edges) -> np.ndarray:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + 1
                    dq.append(v)
    return dist


def is_adjacent(cm: CouplingMap, p: int, q: int) -> bool:
    cm._check(p, q)
    return tuple(sorted((p, q))) in cm.edges


def line(n: int) -> CouplingMap:
    if n < 1:
        raise ValueError("line size must be positive")
    return CouplingMap.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def ring(n: int) -> CouplingMap:
    if n < 3:
        raise ValueError("ring needs at least 3 qubits")
    return CouplingMap.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def grid(rows: int, cols: int) -> CouplingMap:
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return CouplingMap.from_edges(rows * cols, edges)


def from_edge_list(path) -> CouplingMap:
    """Edge-list text: one `u v` pair per line, `#` starts a comment."""
    return parse_edge_list(Path(path).read_text())


def parse_edge_list(text: str) -> CouplingMap:
    edges = []
    max_q = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise BadEdgeList(lineno, f"expected `u v`, got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise BadEdgeList(lineno, f"non-integer endpoint in {raw.strip()!r}")
        if u < 0 or v < 0 or u == v:
            raise BadEdgeList(lineno, f"bad edge ({u}, {v})")
        edges.append((u, v))
        max_q = max(max_q, u, v)
    if not edges:
        raise BadEdgeList(0, "no edges found")
    return CouplingMap.from_edges(max_q + 1, edges)


def heavy_hex_57() -> CouplingMap:
    """Bundled 57-qubit heavy-hex patch (4 rows of 12 plus bridge qubits)."""
    data = resources.files("mirage").joinpath("data/heavyhex57.txt").read_text()
    return parse_edge_list(data)


def parse_topology_spec(spec: str) -> CouplingMap:
    """CLI syntax: line:N | ring:N | grid:RxC | heavyhex57 | file:PATH."""
    if spec == "heavyhex57":
        return heavy_hex_57()
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise ValueError(f"bad topology spec {spec!r}")
    if kind == "line":
        return line(int(arg))
    if kind == "ring":
        return ring(int(arg))
    if kind == "grid":
        r, _, c = arg.partition("x")
        return grid(int(r), int(c))
    if kind == "file":
        return from_edge_list(arg)
    raise ValueError(f"unknown topology kind {kind!r}")
