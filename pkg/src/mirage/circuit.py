"""Circuit DAG intermediate representation.

A circuit is a sequence of gate nodes whose per-wire order defines the
dependency structure; any linearization consistent with the wire orders
yields the same unitary.  Nodes carry either a named gate or a consolidated
two-qubit unitary block, plus optional cached chamber coordinates and
decomposition costs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import weyl
from .gates import SWAP, gate_matrix


class UnsupportedGate(ValueError):
    """Gate name outside the supported set."""


@dataclass(frozen=True)
class GateNode:
    id: int
    qubits: tuple
    name: str = "unitary"
    params: tuple = ()
    payload: np.ndarray | None = None  # set for consolidated/unitary nodes
    coord: tuple | None = None         # cached canonical coordinates
    is_routing_swap: bool = False

    def matrix(self) -> np.ndarray:
        if self.payload is not None:
            return self.payload
        return gate_matrix(self.name, self.params)

    def coordinates(self) -> np.ndarray:
        if self.coord is not None:
            return np.asarray(self.coord, dtype=float)
        return np.asarray(weyl.canonical_coordinates(self.matrix()), dtype=float)


@dataclass(frozen=True)
class CircuitDag:
    num_qubits: int
    nodes: tuple = ()

    @staticmethod
    def from_gates(num_qubits: int, gate_list) -> "CircuitDag":
        nodes = []
        for i, item in enumerate(gate_list):
            if isinstance(item, GateNode):
                nodes.append(replace(item, id=i))
                continue
            name, params, qubits = item
            nodes.append(GateNode(i, tuple(qubits), name, tuple(params)))
        return CircuitDag(num_qubits, tuple(nodes))

    def wire_sequences(self) -> list:
        seqs = [[] for _ in range(self.num_qubits)]
        for node in self.nodes:
            for q in node.qubits:
                seqs[q].append(node.id)
        return seqs

    def predecessor_map(self) -> dict:
        preds = {node.id: [] for node in self.nodes}
        last = [None] * self.num_qubits
        for node in self.nodes:
            for q in node.qubits:
                if last[q] is not None:
                    preds[node.id].append(last[q])
                last[q] = node.id
        return preds

    def successor_map(self) -> dict:
        succs = {node.id: [] for node in self.nodes}
        for nid, ps in self.predecessor_map().items():
            for p in ps:
                succs[p].append(nid)
        return succs

    def two_qubit_count(self) -> int:
        return sum(1 for n in self.nodes if len(n.qubits) == 2)


def front_layer(dag: CircuitDag, resolved) -> list:
    """Nodes whose per-wire predecessors are all resolved, and not resolved."""
    resolved = set(resolved)
    preds = dag.predecessor_map()
    return [node for node in dag.nodes
            if node.id not in resolved
            and all(p in resolved for p in preds[node.id])]


@dataclass(frozen=True)
class CostMetrics:
    pulse_depth: float
    total_cost: float
    two_q_gate_count: int
    swap_count: int

    def as_dict(self) -> dict:
        return {"pulse_depth": self.pulse_depth, "total_cost": self.total_cost,
                "two_q_gate_count": self.two_q_gate_count,
                "swap_count": self.swap_count}


class _Block:
    """A run of gates on one qubit pair being consolidated."""

    def __init__(self, qubits):
        self.qubits = tuple(qubits)
        self.full = np.eye(4, dtype=complex)
        self.interior = np.eye(4, dtype=complex)
        self.suffix = np.eye(4, dtype=complex)  # 1Q gates after the last 2Q
        self.seen_2q = False

    def _embed(self, node: GateNode) -> np.ndarray:
        mat = node.matrix()
        if len(node.qubits) == 1:
            local = self.qubits.index(node.qubits[0])
            return np.kron(mat, np.eye(2)) if local == 1 else np.kron(np.eye(2), mat)
        if node.qubits == self.qubits:
            return mat
        return SWAP @ mat @ SWAP  # reversed orientation

    def absorb(self, node: GateNode) -> None:
        emb = self._embed(node)
        self.full = emb @ self.full
        if len(node.qubits) == 2:
            if not self.seen_2q:
                self.interior = np.eye(4, dtype=complex)  # drop the 1Q prefix
                self.seen_2q = True
            self.interior = emb @ (self.suffix @ self.interior)
            self.suffix = np.eye(4, dtype=complex)
        elif self.seen_2q:
            self.suffix = emb @ self.suffix
        else:
            self.interior = emb @ self.interior

    def to_node(self, node_id: int) -> GateNode:
        coord = weyl.canonical_coordinates(self.interior)
        return GateNode(node_id, self.qubits, "unitary", (), self.full,
                        tuple(float(x) for x in coord))


def consolidate_blocks(dag: CircuitDag) -> CircuitDag:
    """Merge maximal same-pair runs (with their 1Q gates) into unitary blocks.

    The block coordinate is computed from the run's interior product only;
    exterior 1Q gates change the payload but not the equivalence class.
    """
    open_block: dict = {}
    pending: dict = {q: [] for q in range(dag.num_qubits)}
    out_nodes: list = []

    def close(block: _Block) -> None:
        out_nodes.append(block.to_node(len(out_nodes)))
        for q in block.qubits:
            if open_block.get(q) is block:
                del open_block[q]

    for node in dag.nodes:
        if len(node.qubits) == 1:
            blk = open_block.get(node.qubits[0])
            if blk is not None:
                blk.absorb(node)
            else:
                pending[node.qubits[0]].append(node)
        elif len(node.qubits) == 2:
            q1, q2 = node.qubits
            blk = open_block.get(q1)
            if blk is not None and blk is open_block.get(q2):
                blk.absorb(node)
                continue
            for q in (q1, q2):
                if q in open_block:
                    close(open_block[q])
            blk = _Block(node.qubits)
            for q in (q1, q2):
                for one_q in pending[q]:
                    blk.absorb(one_q)
                pending[q] = []
            blk.absorb(node)
            open_block[q1] = open_block[q2] = blk
        else:
            raise UnsupportedGate("consolidation requires 1Q/2Q gates only")

    for blk in list(dict.fromkeys(open_block.values())):
        close(blk)
    for q in range(dag.num_qubits):
        for one_q in pending[q]:
            out_nodes.append(replace(one_q, id=len(out_nodes)))
    return CircuitDag(dag.num_qubits, tuple(out_nodes))


def metrics(dag: CircuitDag, basis, cs) -> CostMetrics:
    """Cost metrics under a coverage set: 2Q nodes weigh their lookup cost.

    pulse_depth is the heaviest wire-dependency path; 1Q gates are free.
    """
    from .coverage import min_cost

    finish = np.zeros(dag.num_qubits)
    total = 0.0
    two_q = 0
    swaps = 0
    for node in dag.nodes:
        w = 0.0
        if len(node.qubits) == 2:
            two_q += 1
            _, w = min_cost(cs, node.coordinates())
        if node.is_routing_swap:
            swaps += 1
        start = max(finish[q] for q in node.qubits)
        for q in node.qubits:
            finish[q] = start + w
        total += w
    depth = float(finish.max()) if dag.num_qubits else 0.0
    return CostMetrics(depth, total, two_q, swaps)


_CCX_EXPANSION = [
    ("h", (), (2,)), ("cx", (), (1, 2)), ("tdg", (), (2,)), ("cx", (), (0, 2)),
    ("t", (), (2,)), ("cx", (), (1, 2)), ("tdg", (), (2,)), ("cx", (), (0, 2)),
    ("t", (), (1,)), ("t", (), (2,)), ("h", (), (2,)), ("cx", (), (0, 1)),
    ("t", (), (0,)), ("tdg", (), (1,)), ("cx", (), (0, 1)),
]


def unroll_3q(dag: CircuitDag) -> CircuitDag:
    """Expand ccx and cswap into 1Q/2Q gates; reject other wide gates."""
    out = []
    for node in dag.nodes:
        if len(node.qubits) <= 2:
            out.append(node)
        elif node.name == "ccx":
            a, b, c = node.qubits
            wires = {0: a, 1: b, 2: c}
            out.extend((nm, pr, tuple(wires[q] for q in qs))
                       for nm, pr, qs in _CCX_EXPANSION)
        elif node.name == "cswap":
            a, b, c = node.qubits
            out.append(("cx", (), (c, b)))
            wires = {0: a, 1: b, 2: c}
            out.extend((nm, pr, tuple(wires[q] for q in qs))
                       for nm, pr, qs in _CCX_EXPANSION)
            out.append(("cx", (), (c, b)))
        else:
            raise UnsupportedGate(f"cannot unroll {node.name!r} on {node.qubits}")
    gate_list = [n if isinstance(n, GateNode) else n for n in out]
    return CircuitDag.from_gates(dag.num_qubits, gate_list)


def _is_identity_gate(node: GateNode) -> bool:
    if node.name == "id":
        return True
    if node.name in ("u", "u3", "p", "u1", "rz", "rx", "ry") and node.params:
        return all(abs(p) < 1e-15 for p in node.params)
    return False


def clean_input(dag: CircuitDag) -> CircuitDag:
    """Drop identity gates and SWAPs touching the circuit boundary.

    Boundary SWAPs only relabel inputs or outputs, so they are removed until
    none remain; interior SWAPs stay and consolidate into blocks instead.
    """
    nodes = [n for n in dag.nodes if not _is_identity_gate(n)]
    changed = True
    while changed:
        changed = False
        d = CircuitDag.from_gates(dag.num_qubits, nodes)
        preds, succs = d.predecessor_map(), d.successor_map()
        for node in d.nodes:
            if node.name == "swap" and not node.is_routing_swap and \
                    (not preds[node.id] or not succs[node.id]):
                nodes = [n for n in d.nodes if n.id != node.id]
                changed = True
                break
    return CircuitDag.from_gates(dag.num_qubits, nodes)


def random_circuit(rng: np.random.Generator, num_qubits: int, num_2q: int,
                   with_1q: bool = True) -> CircuitDag:
    """Random test circuit of Haar 2Q blocks and optional Haar 1Q gates."""
    gate_list = []
    for _ in range(num_2q):
        q1, q2 = rng.choice(num_qubits, size=2, replace=False)
        if with_1q and rng.random() < 0.5:
            g = weyl.haar_random_1q_batch(rng, (1,))[0]
            gate_list.append(GateNode(0, (int(rng.integers(num_qubits)),),
                                      "unitary", (), g))
        u = weyl.haar_random_2q_batch(rng, 1)[0]
        gate_list.append(GateNode(0, (int(q1), int(q2)), "unitary", (), u))
    return CircuitDag.from_gates(num_qubits, gate_list)
