"""Mirror-aware routing: decomposition and SWAP insertion decided together.

Every two-qubit gate leaving the execution layer passes through an
intermediate decision point: committing its mirror (the gate followed by a
SWAP on its outputs) costs the same basis-gate depth for much of the iSWAP
family, yet exchanges the two tracked qubit homes for free.  The decision
compares a combined heuristic, topological distance over upcoming gates plus
kappa times the decomposition cost from the coverage set, at one of four
aggression levels.  No SWAP node is inserted on acceptance; the node payload
becomes its mirror and the layout entries are exchanged.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import weyl
from .circuit import CircuitDag, CostMetrics, GateNode, consolidate_blocks, metrics
from .coverage import CoverageSet, min_cost
from .gates import SWAP
from .sabre import (Layout, RoutedResult, SabreParams, _RouteState,
                    layout_search, route)
from .topology import CouplingMap

MIX_DEFAULT = (0.05, 0.45, 0.45, 0.05)


@dataclass(frozen=True)
class AggressionLevel:
    """Mirror acceptance policy: 0 never, 1 on strict gain, 2 on non-loss,
    3 always."""

    level: int

    def __post_init__(self):
        if self.level not in (0, 1, 2, 3):
            raise ValueError(f"aggression level {self.level} not in 0..3")


def accept_mirror(cost_current: float, cost_trial: float, aggression) -> bool:
    level = aggression.level if isinstance(aggression, AggressionLevel) else aggression
    if level == 0:
        return False
    if level == 1:
        return cost_trial < cost_current
    if level == 2:
        return cost_trial <= cost_current
    if level == 3:
        return True
    raise ValueError(f"aggression level {level} not in 0..3")


def _distance_heuristic(layout: Layout, front_nodes, ext_nodes,
                        cm: CouplingMap, ext_weight: float = 0.5) -> float:
    total = 0.0
    if front_nodes:
        d = sum(cm.distance[layout.v2p[n.qubits[0]], layout.v2p[n.qubits[1]]]
                for n in front_nodes)
        total += d / len(front_nodes)
    if ext_nodes:
        d = sum(cm.distance[layout.v2p[n.qubits[0]], layout.v2p[n.qubits[1]]]
                for n in ext_nodes)
        total += ext_weight * d / len(ext_nodes)
    return total


def mirror_cost_pair(node: GateNode, layout: Layout, front_nodes, ext_nodes,
                     cm: CouplingMap, cs: CoverageSet, kappa: float = 1.0,
                     ext_weight: float = 0.5):
    """(cost_current, cost_trial) for committing a gate vs its mirror.

    Both combine the SABRE distance heuristic over upcoming gates (without
    decay) with kappa times the decomposition cost of the gate or its mirror.
    """
    coord = node.coordinates()
    _, dec_cur = min_cost(cs, coord)
    _, dec_mir = min_cost(cs, weyl.mirror_coordinates_batch(coord[None])[0])
    p1 = layout.physical(node.qubits[0])
    p2 = layout.physical(node.qubits[1])
    trial = layout.copy()
    trial.swap_physical(p1, p2)
    cost_current = _distance_heuristic(layout, front_nodes, ext_nodes, cm,
                                       ext_weight) + kappa * dec_cur
    cost_trial = _distance_heuristic(trial, front_nodes, ext_nodes, cm,
                                     ext_weight) + kappa * dec_mir
    return cost_current, cost_trial


def _mirror_hook(cs: CoverageSet, aggression: int, kappa: float):
    def hook(state: _RouteState, node: GateNode) -> GateNode:
        state.mirror_evaluated += 1
        if aggression == 0:
            return node
        ready_next = [s for s in state.succs[node.id] if state.blocked[s] == 1]
        front_after = (state.front - {node.id}) | set(ready_next)
        front_nodes = [state.nodes[nid] for nid in sorted(front_after)
                       if len(state.nodes[nid].qubits) == 2]
        ext_nodes = state.extended_set(front_after)
        cur, trial = mirror_cost_pair(node, state.layout, front_nodes,
                                      ext_nodes, state.cm, cs, kappa,
                                      state.params.extended_set_weight)
        if not accept_mirror(cur, trial, aggression):
            return node
        state.mirror_accepted += 1
        mirrored = SWAP @ node.matrix()
        mcoord = weyl.mirror_coordinates_batch(node.coordinates()[None])[0]
        p1 = state.layout.physical(node.qubits[0])
        p2 = state.layout.physical(node.qubits[1])
        state.layout.swap_physical(p1, p2)
        return replace(node, name="unitary", params=(), payload=mirrored,
                       coord=tuple(float(x) for x in mcoord))
    return hook


def mirage_route(dag: CircuitDag, cm: CouplingMap, layout: Layout,
                 params: SabreParams, basis, cs: CoverageSet,
                 aggression: int = 2, rng: np.random.Generator | None = None,
                 kappa: float = 1.0) -> RoutedResult:
    """Route with mirror substitution at the given aggression level.

    Aggression 0 never mirrors and reproduces the baseline route node for
    node.  kappa = 0 ignores decomposition cost (distance-only mode).
    """
    level = aggression.level if isinstance(aggression, AggressionLevel) else aggression
    if level not in (0, 1, 2, 3):
        raise ValueError(f"aggression level {level} not in 0..3")
    result = route(dag, cm, layout, params, rng,
                   mirror_hook=_mirror_hook(cs, level, kappa))
    result.aggression = level
    result.metrics = result_metrics(result, basis, cs)
    return result


def result_metrics(res: RoutedResult, basis, cs: CoverageSet) -> CostMetrics:
    """Metrics of a routed result: reconsolidate, then weigh with the
    coverage set; the SWAP count is the router's bookkeeping."""
    m = metrics(consolidate_blocks(res.dag), basis, cs)
    return CostMetrics(m.pulse_depth, m.total_cost, m.two_q_gate_count,
                       res.swap_count)


@dataclass(frozen=True)
class TrialPlan:
    """How independent routing trials are spread over aggression levels."""

    total_trials: int = 20
    mix: tuple = MIX_DEFAULT
    metric: str = "depth"  # depth | swaps

    def __post_init__(self):
        if abs(sum(self.mix) - 1.0) > 1e-9:
            raise ValueError("aggression mix must sum to 1")
        if self.metric not in ("depth", "swaps"):
            raise ValueError(f"unknown metric {self.metric!r}")

    def counts(self) -> list:
        """Largest-remainder rounding of mix * total_trials."""
        raw = [f * self.total_trials for f in self.mix]
        base = [int(np.floor(x)) for x in raw]
        rem = self.total_trials - sum(base)
        order = sorted(range(len(raw)), key=lambda i: (base[i] - raw[i], i))
        for i in order[:rem]:
            base[i] += 1
        return base

    @staticmethod
    def fixed(level: int, total_trials: int = 20,
              metric: str = "depth") -> "TrialPlan":
        mix = tuple(1.0 if i == level else 0.0 for i in range(4))
        return TrialPlan(total_trials, mix, metric)


def _metric_value(res: RoutedResult, metric: str) -> float:
    if metric == "swaps":
        return float(res.swap_count)
    return res.metrics.pulse_depth


def run_trials(dag: CircuitDag, cm: CouplingMap, plan: TrialPlan,
               params: SabreParams, basis, cs: CoverageSet, seed: int,
               kappa: float = 1.0, jobs: int = 1) -> RoutedResult:
    """Independent layout+routing trials across aggression levels.

    Each trial owns an rng sub-stream derived from (seed, trial index); the
    best result by the plan's metric wins, ties broken by trial index, so
    the outcome is identical for any jobs count.
    """
    levels = [lvl for lvl, c in enumerate(plan.counts()) for _ in range(c)]
    children = np.random.SeedSequence(seed).spawn(len(levels))

    def metric_fn(res: RoutedResult) -> float:
        if plan.metric == "swaps":
            return float(res.swap_count)
        return result_metrics(res, basis, cs).pulse_depth

    def one_trial(idx: int) -> RoutedResult:
        trng = np.random.default_rng(children[idx])
        layout = layout_search(dag, cm, params, trng, metric_fn=metric_fn)
        res = mirage_route(dag, cm, layout, params, basis, cs, levels[idx],
                           trng, kappa)
        res.seed = idx
        return res

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one_trial, range(len(levels))))
    else:
        results = [one_trial(i) for i in range(len(levels))]

    best = min(range(len(results)),
               key=lambda i: (_metric_value(results[i], plan.metric), i))
    winner = results[best]
    winner.trial_summaries = [
        {"trial": i, "aggression": r.aggression,
         "pulse_depth": r.metrics.pulse_depth,
         "total_cost": r.metrics.total_cost, "swap_count": r.swap_count,
         "mirror_acceptance_rate": r.mirror_acceptance_rate}
        for i, r in enumerate(results)]
    return winner
