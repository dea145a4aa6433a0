"""Coverage regions: which gates are reachable at each basis-gate depth.

For a basis gate B and a depth k, the reachable set of two-qubit classes
forms a polytope in chamber coordinates.  We build it from two point clouds:

* exactly attainable lattice points: conjugating B by local Cliffords turns
  its coordinate (x, x, 0) into any signed permutation, and such dressed
  applications compose additively, so every sum of k signed-permutation
  images is reachable exactly (these include the polytope corners), and
* random interleaved-ansatz samples (Haar and discrete-angle 1Q layers),
  which fill the interior and guard against non-additive reachability.

Hulls are taken per branch of the chamber's a = pi/4 seam and stored as a
union of halfspace regions; each entry is unioned with the previous one so
depth-k regions nest.  Mirror extension maps every region through the
two-branch affine mirror map exactly (halfspace transform, no re-sampling).

The final entry of a set must cover the whole chamber.  Once the sampled
hull attests this on Haar probes, the entry is snapped to the exact chamber
polytope so full coverage holds identically.
"""

from __future__ import annotations

import io
import os
import struct
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from . import weyl
from .ansatz import chain_unitary, fit_layers, layer_unitaries, polish_layers
from .gates import u3_batch

MEMBERSHIP_TOL = 1e-6
COORD_QUANTUM = 1e-8
CACHE_CAPACITY = 1 << 20
SIDECAR_VERSION = 1
SIDECAR_MAGIC = b"MIRCOV01"

DEFAULT_SAMPLES_PER_K = 100_000
DEFAULT_PROBES = 10_000


class CoverageIncomplete(RuntimeError):
    """The deepest entry does not cover the whole chamber."""


@dataclass(frozen=True)
class BasisGateSpec:
    """A hardware basis gate with its normalized time cost.

    For the iSWAP family the gate is iSWAP^(1/n) and costs 1/n iSWAP units.
    """

    name: str
    n: int
    unit_cost: float
    matrix: np.ndarray

    @staticmethod
    def iswap_root(n: int) -> "BasisGateSpec":
        if n < 1:
            raise ValueError("fraction n must be a positive integer")
        name = {1: "iswap", 2: "sqiswap"}.get(n, f"niswap{n}")
        pt = (np.pi / (4 * n), np.pi / (4 * n), 0.0)
        return BasisGateSpec(name, n, 1.0 / n, weyl.canonical_gate(pt))

    @staticmethod
    def cnot() -> "BasisGateSpec":
        """CNOT basis, used for coverage comparisons."""
        from .gates import CX
        return BasisGateSpec("cnot", 1, 1.0, CX.copy())

    def coordinate(self) -> np.ndarray:
        return np.asarray(weyl.canonical_coordinates(self.matrix), dtype=float)

    def default_max_k(self) -> int:
        return max(3, int(np.ceil(1.5 * self.n)))


@dataclass
class ConvexRegion:
    """Intersection of halfspaces normal . x <= offset (normals unit length)."""

    normals: np.ndarray
    offsets: np.ndarray

    def contains(self, points: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ self.normals.T <= self.offsets + tol, axis=1)


@dataclass
class CircuitPolytope:
    """Union of convex regions reachable with k basis applications."""

    k: int
    cost: float
    regions: list

    def contains(self, points: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        hit = np.zeros(pts.shape[0], dtype=bool)
        for region in self.regions:
            todo = ~hit
            if not todo.any():
                break
            hit[todo] = region.contains(pts[todo], tol)
        return hit


def contains(polytope: CircuitPolytope, point, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership of a single chamber point in a circuit polytope."""
    return bool(polytope.contains(np.asarray(point, dtype=float)[None], tol)[0])


@dataclass
class CoverageSet:
    """Entries sorted by ascending cost; the last one covers the chamber."""

    basis: BasisGateSpec
    entries: list
    mirror_extended: bool = False
    build_seed: int = 0
    samples_per_k: int = 0
    _cache: OrderedDict = field(default_factory=OrderedDict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    cache_hits: int = 0
    cache_misses: int = 0

    def reset_cache(self) -> None:
        with self._lock:
            self._cache.clear()
            self.cache_hits = 0
            self.cache_misses = 0


# --- chamber geometry -------------------------------------------------------

_S2 = np.sqrt(2.0)
CHAMBER_REGION = ConvexRegion(
    normals=np.array([
        [-1.0, 1.0, 0.0] / _S2,      # b <= a
        [0.0, -1.0, 1.0] / _S2,      # c <= b
        [0.0, 0.0, -1.0],            # c >= 0
        [1.0, 1.0, 0.0] / _S2,       # a + b <= pi/2
    ]),
    offsets=np.array([0.0, 0.0, 0.0, np.pi / 2 / _S2]),
)

# Mirror map branches: x' = A x + t on a <= pi/4 (resp. a >= pi/4).
_MIRROR_A = [
    np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]]),
    np.array([[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]]),
]
_MIRROR_T = [
    np.array([np.pi / 4, np.pi / 4, np.pi / 4]),
    np.array([np.pi / 4, np.pi / 4, -np.pi / 4]),
]
_BRANCH_HALFSPACE = [
    (np.array([1.0, 0.0, 0.0]), np.pi / 4),    # a <= pi/4
    (np.array([-1.0, 0.0, 0.0]), -np.pi / 4),  # a >= pi/4
]


def _point_region(point: np.ndarray) -> ConvexRegion:
    eye = np.eye(3)
    normals = np.vstack([eye, -eye])
    offsets = np.concatenate([point, -point])
    return ConvexRegion(normals, offsets)


def _dedupe_halfspaces(normals: np.ndarray, offsets: np.ndarray) -> ConvexRegion:
    rows = np.unique(np.round(np.column_stack([normals, offsets]), 10), axis=0)
    return ConvexRegion(rows[:, :3].copy(), rows[:, 3].copy())


def _hull_region(points: np.ndarray) -> ConvexRegion:
    """Halfspace description of the hull of a (possibly degenerate) point set."""
    x0 = points.mean(axis=0)
    centered = points - x0
    evals, evecs = np.linalg.eigh(centered.T @ centered)
    svals = np.sqrt(np.maximum(evals[::-1], 0.0))
    vt = evecs[:, ::-1].T
    scale = max(float(svals[0]), 1.0)
    rank = int(np.sum(svals > 1e-8 * scale))

    normals, offsets = [], []
    for nv in vt[rank:]:
        off = float(nv @ x0)
        normals += [nv, -nv]
        offsets += [off, -off]

    if rank == 3:
        try:
            hull = ConvexHull(points)
        except QhullError:
            hull = ConvexHull(points, qhull_options="QJ")
        normals += list(hull.equations[:, :3])
        offsets += list(-hull.equations[:, 3])
    elif rank == 2:
        proj = centered @ vt[:2].T
        hull2 = ConvexHull(proj)
        for eq in hull2.equations:
            n3 = eq[0] * vt[0] + eq[1] * vt[1]
            normals.append(n3)
            offsets.append(float(-eq[2] + n3 @ x0))
    elif rank == 1:
        t = centered @ vt[0]
        normals += [vt[0], -vt[0]]
        offsets += [float(vt[0] @ x0 + t.max()), float(-(vt[0] @ x0 + t.min()))]

    return _dedupe_halfspaces(np.asarray(normals), np.asarray(offsets))


def _hull_regions(points: np.ndarray) -> list:
    """Per-branch hulls, split at the a = pi/4 seam."""
    a = points[:, 0]
    regions = []
    lo, hi = a <= np.pi / 4 + 1e-12, a >= np.pi / 4 - 1e-12
    if hi.sum() == 0 or lo.sum() == len(points):
        return [_hull_region(points)]
    for mask in (lo, hi):
        if mask.sum() > 0:
            regions.append(_hull_region(points[mask]))
    return regions


# --- reachable point clouds -------------------------------------------------

def _signed_perm_images(point: np.ndarray) -> np.ndarray:
    return np.unique(np.round(weyl.weyl_group_images(point), 12), axis=0)


def _additive_lattice(basis_point: np.ndarray, k: int) -> np.ndarray:
    """Exactly attainable coordinates: sums of k signed-permutation images."""
    imgs = _signed_perm_images(basis_point)
    sums = [np.sum(imgs[list(combo)], axis=0)
            for combo in combinations_with_replacement(range(len(imgs)), k)]
    return weyl.canonicalize_points(np.asarray(sums))


def _sample_ansatz_coords(basis_matrix: np.ndarray, k: int, n_samples: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Coordinates of random interleaved-ansatz instances with k applications."""
    n_haar = int(0.5 * n_samples)
    n_disc = n_samples - n_haar
    layers = np.empty((n_samples, k + 1, 2, 2, 2), dtype=complex)
    layers[:n_haar] = weyl.haar_random_1q_batch(rng, (n_haar, k + 1, 2))
    # Discrete-angle layers: Euler angles on a per-sample angular grid.  Grid
    # dressings tend to land on polytope faces that Haar samples only approach.
    quanta = rng.choice([np.pi / 4, np.pi / 8, np.pi / 12, np.pi / 16],
                        size=(n_disc, 1, 1, 1))
    steps = rng.integers(0, 16, size=(n_disc, k + 1, 2, 3))
    layers[n_haar:] = u3_batch(steps * quanta)
    layers[0] = np.eye(2)  # include the undressed power of the basis gate
    mats = chain_unitary(basis_matrix, layer_unitaries(layers))
    return weyl.canonical_coordinates_batch(mats)


# --- construction -----------------------------------------------------------

def build_coverage_set(basis: BasisGateSpec, max_k: int | None = None,
                       samples_per_k: int = DEFAULT_SAMPLES_PER_K,
                       rng: np.random.Generator | None = None,
                       probes: int = DEFAULT_PROBES,
                       build_seed: int = 0) -> CoverageSet:
    """Build the standard (non-mirrored) coverage set for a basis gate.

    Raises CoverageIncomplete when the depth-max_k region fails the Haar
    probe check, i.e. max_k is too small for full chamber coverage.
    """
    if rng is None:
        rng = np.random.default_rng(build_seed)
    if max_k is None:
        max_k = basis.default_max_k()
    basis_point = basis.coordinate()

    entries = [CircuitPolytope(0, 0.0, [_point_region(np.zeros(3))])]
    prev_regions = entries[0].regions
    for k in range(1, max_k + 1):
        lattice = _additive_lattice(basis_point, k)
        sampled = _sample_ansatz_coords(basis.matrix, k, samples_per_k, rng)
        regions = _hull_regions(np.vstack([lattice, sampled]))
        regions = regions + prev_regions
        entries.append(CircuitPolytope(k, k * basis.unit_cost, regions))
        prev_regions = regions

    probe_us = weyl.haar_random_2q_batch(rng, probes)
    probe_pts = weyl.canonical_coordinates_batch(probe_us)
    member = entries[-1].contains(probe_pts)
    frac = float(np.mean(member))
    if frac < 0.99:
        raise CoverageIncomplete(
            f"depth-{max_k} region covers only {frac:.4f} of Haar probes")
    if not member.all():
        # Residual probes sit in corners the sampled hull missed.  Full
        # coverage still holds if every one of them synthesizes exactly at
        # max_k; otherwise max_k is genuinely too small.
        stragglers = probe_us[~member]
        _, fid = fit_layers(stragglers, basis.matrix, max_k, rng,
                            restarts=8, iters=300)
        for i in np.flatnonzero(fid < 1.0 - 1e-8):
            th, f = fit_layers(stragglers[i], basis.matrix, max_k, rng,
                               restarts=16, iters=400)
            _, f = polish_layers(stragglers[i], basis.matrix, th)
            if f < 1.0 - 1e-8:
                raise CoverageIncomplete(
                    f"depth-{max_k} probe synthesis reached only {f:.6f}")
    entries[-1] = CircuitPolytope(max_k, max_k * basis.unit_cost, [CHAMBER_REGION])
    if not np.all(entries[-1].contains(probe_pts)):
        raise CoverageIncomplete("chamber snap failed the probe check")

    return CoverageSet(basis=basis, entries=entries, mirror_extended=False,
                       build_seed=build_seed, samples_per_k=samples_per_k)


def _feasible(region: ConvexRegion) -> bool:
    res = linprog(c=np.zeros(3), A_ub=region.normals, b_ub=region.offsets + 1e-9,
                  bounds=[(-np.pi, np.pi)] * 3, method="highs")
    return res.status == 0


def _mirror_image_regions(region: ConvexRegion) -> list:
    """Exact images of a region under both affine branches of the mirror map."""
    out = []
    for (bn, bo), amat, tvec in zip(_BRANCH_HALFSPACE, _MIRROR_A, _MIRROR_T):
        normals = np.vstack([region.normals, bn])
        offsets = np.concatenate([region.offsets, [bo]])
        new_normals = normals @ amat.T
        new_offsets = offsets + new_normals @ tvec
        img = _dedupe_halfspaces(new_normals, new_offsets)
        if _feasible(img):
            out.append(img)
    return out


def mirror_extend(cs: CoverageSet) -> CoverageSet:
    """Extend every entry's region with the mirror images of its gates."""
    new_entries = []
    for entry in cs.entries:
        extra = []
        for region in entry.regions:
            extra.extend(_mirror_image_regions(region))
        new_entries.append(CircuitPolytope(entry.k, entry.cost, entry.regions + extra))
    return CoverageSet(basis=cs.basis, entries=new_entries, mirror_extended=True,
                       build_seed=cs.build_seed, samples_per_k=cs.samples_per_k)


# --- queries ----------------------------------------------------------------

def _quantize(point: np.ndarray):
    return (int(round(point[0] / COORD_QUANTUM)),
            int(round(point[1] / COORD_QUANTUM)),
            int(round(point[2] / COORD_QUANTUM)))


def _scan(cs: CoverageSet, point: np.ndarray):
    for entry in cs.entries:
        if entry.contains(point[None])[0]:
            return entry.k, entry.cost
    return cs.entries[-1].k, cs.entries[-1].cost


def min_cost(cs: CoverageSet, point, use_cache: bool = True):
    """Cheapest entry containing the point, as (k, cost).

    The point is quantized to the cache grid before membership is evaluated,
    so cached and uncached lookups agree identically.
    """
    key = _quantize(np.asarray(point, dtype=float))
    qpt = np.array(key, dtype=float) * COORD_QUANTUM
    if not use_cache:
        return _scan(cs, qpt)
    with cs._lock:
        hit = cs._cache.get(key)
        if hit is not None:
            cs._cache.move_to_end(key)
            cs.cache_hits += 1
            return hit
        cs.cache_misses += 1
    result = _scan(cs, qpt)
    with cs._lock:
        cs._cache[key] = result
        cs._cache.move_to_end(key)
        while len(cs._cache) > CACHE_CAPACITY:
            cs._cache.popitem(last=False)
    return result


def min_cost_batch(cs: CoverageSet, points: np.ndarray):
    """Vectorized min_cost over (n, 3) points; returns (ks (n,), costs (n,))."""
    pts = np.round(np.asarray(points, dtype=float) / COORD_QUANTUM) * COORD_QUANTUM
    ks = np.full(pts.shape[0], cs.entries[-1].k, dtype=int)
    costs = np.full(pts.shape[0], cs.entries[-1].cost, dtype=float)
    undecided = np.ones(pts.shape[0], dtype=bool)
    for entry in cs.entries:
        if not undecided.any():
            break
        idx = np.flatnonzero(undecided)
        member = entry.contains(pts[idx])
        chosen = idx[member]
        ks[chosen] = entry.k
        costs[chosen] = entry.cost
        undecided[chosen] = False
    return ks, costs


def haar_volume(polytope: CircuitPolytope, samples: int,
                rng: np.random.Generator):
    """Haar-weighted volume of a polytope via Monte Carlo membership.

    Returns (fraction, standard_error).
    """
    pts = weyl.canonical_coordinates_batch(weyl.haar_random_2q_batch(rng, samples))
    frac = float(np.mean(polytope.contains(pts)))
    return frac, float(np.sqrt(frac * (1.0 - frac) / samples))


# --- sidecar persistence ----------------------------------------------------

def save_sidecar(cs: CoverageSet, path) -> None:
    """Versioned binary sidecar: header, then per-k halfspace lists (LE f64)."""
    buf = io.BytesIO()
    buf.write(SIDECAR_MAGIC)
    name_b = cs.basis.name.encode()
    buf.write(struct.pack("<IH", SIDECAR_VERSION, len(name_b)))
    buf.write(name_b)
    buf.write(struct.pack("<IBQQI", cs.basis.n, int(cs.mirror_extended),
                          cs.build_seed, cs.samples_per_k, len(cs.entries)))
    for entry in cs.entries:
        buf.write(struct.pack("<IdI", entry.k, entry.cost, len(entry.regions)))
        for region in entry.regions:
            buf.write(struct.pack("<I", len(region.offsets)))
            block = np.column_stack([region.normals, region.offsets])
            buf.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(buf.getvalue())
    os.replace(tmp, path)


def load_sidecar(path, basis: BasisGateSpec) -> CoverageSet:
    raw = Path(path).read_bytes()
    view = io.BytesIO(raw)
    if view.read(len(SIDECAR_MAGIC)) != SIDECAR_MAGIC:
        raise ValueError("not a coverage sidecar file")
    version, name_len = struct.unpack("<IH", view.read(6))
    if version != SIDECAR_VERSION:
        raise ValueError(f"sidecar version {version} != {SIDECAR_VERSION}")
    name = view.read(name_len).decode()
    n, mirror, seed, samples, n_entries = struct.unpack("<IBQQI", view.read(25))
    if name != basis.name or n != basis.n:
        raise ValueError("sidecar does not match the requested basis")
    entries = []
    for _ in range(n_entries):
        k, cost, n_regions = struct.unpack("<IdI", view.read(16))
        regions = []
        for _ in range(n_regions):
            (m,) = struct.unpack("<I", view.read(4))
            block = np.frombuffer(view.read(32 * m), dtype="<f8").reshape(m, 4)
            regions.append(ConvexRegion(block[:, :3].copy(), block[:, 3].copy()))
        entries.append(CircuitPolytope(k, cost, regions))
    return CoverageSet(basis=basis, entries=entries, mirror_extended=bool(mirror),
                       build_seed=seed, samples_per_k=samples)


def default_cache_dir() -> Path:
    env = os.environ.get("MIRAGE_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "mirage-coverage"


def get_coverage(basis: BasisGateSpec, mirror: bool = False,
                 build_seed: int = 0,
                 samples_per_k: int = DEFAULT_SAMPLES_PER_K,
                 max_k: int | None = None,
                 cache_dir=None) -> CoverageSet:
    """Load a coverage set from the on-disk cache, building it on first use.

    Sidecars are rebuilt on version, seed or sample-count mismatch.
    """
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    tag = "mirror" if mirror else "std"
    path = cache_dir / f"{basis.name}_{tag}_s{build_seed}_m{samples_per_k}.cov"
    if path.exists():
        try:
            cs = load_sidecar(path, basis)
            if cs.build_seed == build_seed and cs.samples_per_k == samples_per_k \
                    and cs.mirror_extended == mirror:
                return cs
        except ValueError:
            pass
    if mirror:
        cs = mirror_extend(get_coverage(basis, mirror=False,
                                        build_seed=build_seed,
                                        samples_per_k=samples_per_k,
                                        max_k=max_k, cache_dir=cache_dir))
    else:
        cs = build_coverage_set(basis, max_k=max_k, samples_per_k=samples_per_k,
                                rng=np.random.default_rng(build_seed),
                                build_seed=build_seed)
    save_sidecar(cs, path)
    return cs
