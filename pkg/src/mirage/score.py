"""Haar scores and the decoherence-driven fidelity model.

Circuit fidelity decays exponentially with normalized gate time: one iSWAP
unit costs a factor of 0.99.  The Haar score of a coverage set is the
expected decomposition cost of a Haar-random two-qubit gate.  Exact mode
reads costs straight off the coverage set; approximate mode additionally
tries every strictly cheaper depth, accepting a numerical fit whenever the
total fidelity (decomposition fidelity times circuit fidelity) beats the
exact solution's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import weyl
from .ansatz import OptimizerDiverged, fit_layers, polish_layers
from .coverage import CoverageSet, min_cost_batch
from .gates import SWAP

DECAY_RATE = -np.log(0.99)  # per iSWAP-unit of gate time
DIVERGENCE_FLOOR = 0.25

APPROX_RESTARTS = 4
APPROX_ITERS = 160


class NegativeCost(ValueError):
    """Gate-time costs cannot be negative."""


@dataclass(frozen=True)
class FidelityModel:
    """Exponential decay at rate lam per unit cost; lam anchors iSWAP at 99%."""

    lam: float = DECAY_RATE

    def circuit_fidelity(self, cost) -> np.ndarray | float:
        cost = np.asarray(cost, dtype=float)
        if np.any(cost < 0):
            raise NegativeCost("cost must be nonnegative")
        out = np.exp(-self.lam * cost)
        return float(out) if out.ndim == 0 else out


def circuit_fidelity(cost) -> float | np.ndarray:
    """Fidelity of a circuit with the given total cost in iSWAP units."""
    return FidelityModel().circuit_fidelity(cost)


@dataclass(frozen=True)
class HaarScoreReport:
    basis: str
    mode: str  # exact | exact+mirror | approx | approx+mirror
    score: float
    avg_fidelity: float
    samples: int
    std_error: float

    def as_dict(self) -> dict:
        return {"basis": self.basis, "mode": self.mode, "score": self.score,
                "avg_fidelity": self.avg_fidelity, "samples": self.samples,
                "std_error": self.std_error}


def _mode_name(cs: CoverageSet, approx: bool) -> str:
    base = "approx" if approx else "exact"
    return base + ("+mirror" if cs.mirror_extended else "")


def haar_score_exact(cs: CoverageSet, samples: int,
                     rng: np.random.Generator) -> HaarScoreReport:
    """Expected exact decomposition cost of Haar-random gates."""
    pts = weyl.canonical_coordinates_batch(weyl.haar_random_2q_batch(rng, samples))
    _, costs = min_cost_batch(cs, pts)
    fids = np.exp(-DECAY_RATE * costs)
    return HaarScoreReport(
        basis=cs.basis.name, mode=_mode_name(cs, approx=False),
        score=float(np.mean(costs)), avg_fidelity=float(np.mean(fids)),
        samples=samples, std_error=float(np.std(costs) / np.sqrt(samples)))


ACCEPT_EPS = 1e-6  # numerical slack on the total-fidelity threshold


def optimize_in_region(basis, k: int, target: np.ndarray, fid_threshold: float,
                       rng: np.random.Generator, restarts: int = 8,
                       iters: int = 250):
    """Cost of a depth-k fit of the target, or None if it misses the threshold.

    Fits the 1Q parameters of the interleaved ansatz; the fit is accepted
    when decomposition fidelity times circuit fidelity reaches fid_threshold
    (within ACCEPT_EPS, so exactly-decomposable targets pass their own
    exact-solution threshold).  A fit below the 0.25 divergence floor counts
    as absent.
    """
    thetas, fid = fit_layers(np.asarray(target, complex), basis.matrix, k, rng,
                             restarts=restarts, iters=iters)
    _, fid = polish_layers(np.asarray(target, complex), basis.matrix, thetas)
    if fid < DIVERGENCE_FLOOR:
        return None
    cost = k * basis.unit_cost
    if fid * float(circuit_fidelity(cost)) >= fid_threshold - ACCEPT_EPS:
        return cost
    return None


def haar_score_approx(cs: CoverageSet, samples: int, rng: np.random.Generator,
                      restarts: int = APPROX_RESTARTS,
                      iters: int = APPROX_ITERS) -> HaarScoreReport:
    """Monte Carlo Haar score allowing approximate decompositions.

    Per sample: the exact cost fixes the total-fidelity threshold, then every
    strictly cheaper coverage entry is tried in ascending cost order; the
    first accepted fit wins.  For mirror-extended sets each attempt may also
    match the mirror of the target (the free-SWAP variant).
    """
    targets = weyl.haar_random_2q_batch(rng, samples)
    pts = weyl.canonical_coordinates_batch(targets)
    _, exact_costs = min_cost_batch(cs, pts)
    thresholds = np.exp(-DECAY_RATE * exact_costs)

    best_costs = exact_costs.copy()
    realized = thresholds.copy()
    open_mask = np.ones(samples, dtype=bool)

    for entry in cs.entries[:-1]:
        todo = np.flatnonzero(open_mask & (entry.cost < exact_costs - 1e-12))
        if todo.size == 0:
            continue
        batch = targets[todo]
        _, fid = fit_layers(batch, cs.basis.matrix, entry.k, rng,
                            restarts=restarts, iters=iters)
        if cs.mirror_extended:
            _, fid_m = fit_layers(SWAP @ batch, cs.basis.matrix, entry.k, rng,
                                  restarts=restarts, iters=iters)
            fid = np.maximum(fid, fid_m)
        total = fid * np.exp(-DECAY_RATE * entry.cost)
        accept = (total >= thresholds[todo] - ACCEPT_EPS) & (fid >= DIVERGENCE_FLOOR)
        hit = todo[accept]
        best_costs[hit] = entry.cost
        realized[hit] = total[accept]
        open_mask[hit] = False

    return HaarScoreReport(
        basis=cs.basis.name, mode=_mode_name(cs, approx=True),
        score=float(np.mean(best_costs)), avg_fidelity=float(np.mean(realized)),
        samples=samples,
        std_error=float(np.std(best_costs) / np.sqrt(samples)))


def synthesize(target: np.ndarray, basis, k: int,
               rng: np.random.Generator | None = None,
               restarts: int = 8, iters: int = 300):
    """Fit an explicit depth-k circuit for the target.

    Returns (one_q_layers, fidelity): 2(k+1) u3 Euler triples ordered
    [layer0 qubit0, layer0 qubit1, layer1 qubit0, ...].
    """
    if rng is None:
        rng = np.random.default_rng(0)
    target = np.asarray(target, dtype=complex)
    thetas, fid = fit_layers(target, basis.matrix, k, rng,
                             restarts=restarts, iters=iters)
    thetas, fid = polish_layers(target, basis.matrix, thetas)
    if fid < DIVERGENCE_FLOOR:
        raise OptimizerDiverged(f"synthesis stalled at fidelity {fid:.4f}")
    layers = [tuple(float(x) for x in thetas[j, q])
              for j in range(k + 1) for q in range(2)]
    return layers, float(fid)
