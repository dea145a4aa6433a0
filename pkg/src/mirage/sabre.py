"""SABRE heuristic routing and bidirectional layout search.

The router keeps a front layer of dependency-free gates, commits those whose
qubits are adjacent under the tracked layout, and on a stall inserts the SWAP
minimizing the front + lookahead distance heuristic scaled by a decay factor
that promotes parallelism.  A mirror-decision hook is consulted for every
committing two-qubit gate; the baseline router leaves it unset, so a hook
that never fires reproduces baseline routes node for node.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .circuit import CircuitDag, CostMetrics, GateNode
from .topology import CouplingMap
from .weyl import SWAP_POINT


class RoutingStuck(RuntimeError):
    """No SWAP candidate could make progress; signals an internal bug."""


@dataclass(frozen=True)
class SabreParams:
    extended_set_size: int = 20
    extended_set_weight: float = 0.5
    decay_rate: float = 0.001
    decay_reset_interval: int = 5
    layout_trials: int = 20
    layout_passes: int = 4
    routing_trials: int = 20


class Layout:
    """Bijection between virtual and physical qubits."""

    def __init__(self, v2p):
        self.v2p = np.asarray(v2p, dtype=np.int64).copy()
        self.p2v = np.empty_like(self.v2p)
        self.p2v[self.v2p] = np.arange(len(self.v2p))

    @staticmethod
    def identity(n: int) -> "Layout":
        return Layout(np.arange(n))

    def copy(self) -> "Layout":
        return Layout(self.v2p)

    def physical(self, v: int) -> int:
        return int(self.v2p[v])

    def virtual(self, p: int) -> int:
        return int(self.p2v[p])

    def swap_physical(self, p: int, q: int) -> None:
        vp, vq = self.p2v[p], self.p2v[q]
        self.p2v[p], self.p2v[q] = vq, vp
        self.v2p[vp], self.v2p[vq] = q, p

    def __eq__(self, other) -> bool:
        return isinstance(other, Layout) and np.array_equal(self.v2p, other.v2p)


@dataclass
class RoutedResult:
    dag: CircuitDag
    initial_layout: Layout
    final_layout: Layout
    swap_count: int
    metrics: CostMetrics | None = None
    mirror_evaluated: int = 0
    mirror_accepted: int = 0
    seed: int | None = None
    aggression: int | None = None
    trial_summaries: list | None = None

    @property
    def mirror_acceptance_rate(self) -> float:
        if self.mirror_evaluated == 0:
            return 0.0
        return self.mirror_accepted / self.mirror_evaluated


class _RouteState:
    """Live routing state shared with the mirror-decision hook."""

    def __init__(self, dag: CircuitDag, cm: CouplingMap, layout: Layout,
                 params: SabreParams):
        self.dag = dag
        self.cm = cm
        self.dist = cm.distance
        self.layout = layout.copy()
        self.params = params
        self.nodes = {n.id: n for n in dag.nodes}
        self.preds = dag.predecessor_map()
        self.succs = dag.successor_map()
        self.blocked = {nid: len(ps) for nid, ps in self.preds.items()}
        self.front = {nid for nid, k in self.blocked.items() if k == 0}
        self.out_nodes: list = []
        self.decay = np.ones(cm.num_qubits)
        self.committed_2q = 0
        self.swap_count = 0
        self.mirror_evaluated = 0
        self.mirror_accepted = 0

    def resolve(self, nid: int) -> None:
        self.front.discard(nid)
        for s in self.succs[nid]:
            self.blocked[s] -= 1
            if self.blocked[s] == 0:
                self.front.add(s)

    def front_2q(self) -> list:
        return [self.nodes[nid] for nid in sorted(self.front)
                if len(self.nodes[nid].qubits) == 2]

    def extended_set(self, front_ids=None) -> list:
        """Up to extended_set_size upcoming 2Q gates past the given front."""
        front_ids = set(self.front) if front_ids is None else set(front_ids)
        out = []
        seen = set(front_ids)
        layer = sorted(front_ids)
        while layer and len(out) < self.params.extended_set_size:
            nxt = []
            for nid in layer:
                for s in self.succs[nid]:
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
                        if len(self.nodes[s].qubits) == 2:
                            out.append(self.nodes[s])
                            if len(out) >= self.params.extended_set_size:
                                return out
            layer = sorted(nxt)
        return out

    def heuristic(self, layout: Layout, front_nodes, ext_nodes) -> float:
        """Mean front distance plus weighted mean lookahead distance."""
        total = 0.0
        if front_nodes:
            d = sum(self.dist[layout.v2p[n.qubits[0]], layout.v2p[n.qubits[1]]]
                    for n in front_nodes)
            total += d / len(front_nodes)
        if ext_nodes:
            d = sum(self.dist[layout.v2p[n.qubits[0]], layout.v2p[n.qubits[1]]]
                    for n in ext_nodes)
            total += self.params.extended_set_weight * d / len(ext_nodes)
        return total


def route(dag: CircuitDag, cm: CouplingMap, layout: Layout,
          params: SabreParams | None = None,
          rng: np.random.Generator | None = None,
          mirror_hook=None) -> RoutedResult:
    """Route a consolidated circuit onto the coupling map.

    Every committed 2Q gate is adjacent under its commit-time layout.  The
    optional mirror_hook(state, node) may replace the committing node and
    exchange the tracked layout; see the router module.
    """
    params = params or SabreParams()
    if dag.num_qubits > cm.num_qubits:
        raise ValueError("circuit needs more qubits than the coupling map has")
    state = _RouteState(dag, cm, layout, params)
    initial = state.layout.copy()
    guard = 0
    guard_limit = 10 * (len(dag.nodes) + 1) * (cm.num_qubits ** 2 + 10)

    while state.front:
        progress = True
        while progress:
            progress = False
            for nid in sorted(state.front):
                node = state.nodes[nid]
                if len(node.qubits) == 1:
                    p = state.layout.physical(node.qubits[0])
                    state.out_nodes.append(replace(node, id=len(state.out_nodes),
                                                   qubits=(p,)))
                    state.resolve(nid)
                    progress = True
                    continue
                v1, v2 = node.qubits
                p1, p2 = state.layout.physical(v1), state.layout.physical(v2)
                if tuple(sorted((p1, p2))) not in cm.edges:
                    continue
                # The hook may exchange the tracked layout; the committed gate
                # still acts on the pre-exchange wires in (v1, v2) order.
                commit = node
                if mirror_hook is not None and not node.is_routing_swap:
                    commit = mirror_hook(state, node)
                state.out_nodes.append(replace(commit, id=len(state.out_nodes),
                                               qubits=(p1, p2)))
                state.resolve(nid)
                state.committed_2q += 1
                if state.committed_2q % params.decay_reset_interval == 0:
                    state.decay[:] = 1.0
                progress = True
        if not state.front:
            break

        front_nodes = state.front_2q()
        ext_nodes = state.extended_set()
        touched = set()
        for n in front_nodes:
            touched.add(state.layout.physical(n.qubits[0]))
            touched.add(state.layout.physical(n.qubits[1]))
        candidates = sorted(e for e in cm.edges if e[0] in touched or e[1] in touched)
        if not candidates:
            raise RoutingStuck("stalled with no swap candidates")

        best, best_score = None, np.inf
        for p, q in candidates:
            trial = state.layout.copy()
            trial.swap_physical(p, q)
            score = state.heuristic(trial, front_nodes, ext_nodes) \
                * max(state.decay[p], state.decay[q])
            if score < best_score - 1e-12:
                best, best_score = (p, q), score
        p, q = best
        state.out_nodes.append(GateNode(len(state.out_nodes), (p, q), "swap",
                                        coord=tuple(SWAP_POINT),
                                        is_routing_swap=True))
        state.layout.swap_physical(p, q)
        state.decay[p] += params.decay_rate
        state.decay[q] += params.decay_rate
        state.swap_count += 1
        guard += 1
        if guard > guard_limit:
            raise RoutingStuck("router exceeded its progress bound")

    mapped = CircuitDag(cm.num_qubits, tuple(state.out_nodes))
    return RoutedResult(mapped, initial, state.layout, state.swap_count,
                        mirror_evaluated=state.mirror_evaluated,
                        mirror_accepted=state.mirror_accepted)


def reverse_dag(dag: CircuitDag) -> CircuitDag:
    """Reversed node order with inverted payloads (for backward passes)."""
    rev = []
    for node in reversed(dag.nodes):
        mat = node.matrix().conj().T
        rev.append(GateNode(0, node.qubits, "unitary", (), mat))
    return CircuitDag.from_gates(dag.num_qubits, rev)


def layout_search(dag: CircuitDag, cm: CouplingMap, params: SabreParams,
                  rng: np.random.Generator, metric_fn=None) -> Layout:
    """Bidirectional layout search; returns the best initial layout found.

    Per trial: a random bijection refined by alternating forward and backward
    routing passes, then scored by metric_fn on a final forward route (SWAP
    count when metric_fn is None).  Trials use spawned rng sub-streams, so
    the result does not depend on evaluation order.
    """
    rev = reverse_dag(dag)
    child_rngs = rng.spawn(params.layout_trials)
    best_layout, best_key = None, None
    for trial in range(params.layout_trials):
        trng = child_rngs[trial]
        layout = Layout(trng.permutation(cm.num_qubits))
        for _ in range(params.layout_passes):
            fwd = route(dag, cm, layout, params, trng)
            layout = fwd.final_layout
            bwd = route(rev, cm, layout, params, trng)
            layout = bwd.final_layout
        final = route(dag, cm, layout, params, trng)
        score = metric_fn(final) if metric_fn else float(final.swap_count)
        key = (score, trial)
        if best_key is None or key < best_key:
            best_layout, best_key = layout, key
    return best_layout
