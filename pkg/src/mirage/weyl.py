"""Two-qubit gate geometry.

Every two-qubit unitary, up to single-qubit gates on either side, is labelled
by a canonical coordinate triple (a, b, c).  We use the positive canonical
convention in which CNOT sits at (pi/4, 0, 0), iSWAP at (pi/4, pi/4, 0) and
SWAP at (pi/4, pi/4, pi/4).  The canonical chamber is the tetrahedron

    b >= c >= 0,  a >= b,  a + b <= pi/2,

with the base facet (c = 0) folded so that a <= pi/4 there; this makes the
representative unique per local-equivalence class.

Coordinates are extracted by conjugating into the magic (Bell) basis, where
local gates become real orthogonal matrices: the eigenphases of M^T M for
M = B* U B depend only on the equivalence class.  The mirror of a gate is the
gate followed by a SWAP on its outputs; in coordinates it is the two-branch
affine map split at a = pi/4.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import gates

UNITARITY_TOL = 1e-10
COORD_TOL = 1e-9

PI2 = np.pi / 2
PI4 = np.pi / 4

# Magic basis: columns are Bell states with phases chosen so that local
# unitaries conjugate to SO(4) and XX, YY, ZZ become diagonal.
MAGIC = np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]], dtype=complex) / np.sqrt(2.0)


class NonUnitaryInput(ValueError):
    """Input matrix failed the unitarity check."""


class OutOfChamber(ValueError):
    """Coordinate triple is not inside the canonical chamber."""


class WeylPoint(NamedTuple):
    a: float
    b: float
    c: float


# Canonical anchor points.
IDENTITY_POINT = WeylPoint(0.0, 0.0, 0.0)
CNOT_POINT = WeylPoint(PI4, 0.0, 0.0)
ISWAP_POINT = WeylPoint(PI4, PI4, 0.0)
SWAP_POINT = WeylPoint(PI4, PI4, PI4)
SQISWAP_POINT = WeylPoint(np.pi / 8, np.pi / 8, 0.0)


def _check_unitary(u: np.ndarray, dim: int = 4) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape[-2:] != (dim, dim):
        raise NonUnitaryInput(f"expected {dim}x{dim} matrix, got {u.shape}")
    gram = np.swapaxes(u.conj(), -1, -2) @ u
    err = np.linalg.norm(gram - np.eye(dim), axis=(-2, -1))
    if np.max(err) > UNITARITY_TOL * dim:
        raise NonUnitaryInput(f"unitarity defect {np.max(err):.3e}")
    return u


def haar_random_2q(rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed element of U(4)."""
    return haar_random_2q_batch(rng, 1)[0]


def haar_random_2q_batch(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar sample of U(4), shape (n, 4, 4).  Ginibre + QR with phase-fixed R."""
    return _haar_batch(rng, n, 4)


def haar_random_1q_batch(rng: np.random.Generator, shape) -> np.ndarray:
    """Haar sample of U(2) with arbitrary leading shape."""
    out = _haar_batch(rng, int(np.prod(shape)), 2)
    return out.reshape(tuple(shape) + (2, 2))


def _haar_batch(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    z = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("nii->ni", r)
    q *= (diag / np.abs(diag))[:, None, :]
    return q


# ---------------------------------------------------------------------------
# Canonicalization into the chamber.
#
# The residual symmetry group on coordinates modulo pi/2 is generated by
# permutations of (a, b, c) and sign flips of two coordinates at a time:
# 6 x 4 = 24 elements.  The chamber representative is the lexicographically
# smallest orbit point satisfying the chamber inequalities; values within
# _SNAP of pi/2 are wrapped to 0, which also realizes the c = 0 fold.
# ---------------------------------------------------------------------------

_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
_SIGNS = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
_ORBIT = np.array([[s[k] * (j == p[k]) for j in range(3) for k in range(3)]
                   for p in _PERMS for s in _SIGNS], dtype=float).reshape(24, 3, 3)
_SNAP = 1e-10


def weyl_group_images(point) -> np.ndarray:
    """All 24 signed-permutation images of a coordinate triple (no reduction)."""
    return np.einsum("gij,j->gi", _ORBIT, np.asarray(point, dtype=float))


def canonicalize_points(points: np.ndarray) -> np.ndarray:
    """Map raw coordinate triples (n, 3) to chamber representatives."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    cands = np.einsum("gij,nj->ngi", _ORBIT, pts)
    cands = np.mod(cands, PI2)
    cands[cands > PI2 - _SNAP] = 0.0

    a, b, c = cands[..., 0], cands[..., 1], cands[..., 2]
    ok = (a >= b - COORD_TOL) & (b >= c - COORD_TOL) & (c >= -COORD_TOL) \
        & (a + b <= PI2 + COORD_TOL)

    # Lexicographically smallest valid candidate per input row.
    n = pts.shape[0]
    rows = np.repeat(np.arange(n), 24)
    penalty = np.where(ok, 0.0, 10.0).ravel()
    order = np.lexsort((c.ravel(), b.ravel(), a.ravel() + penalty, rows))
    _, first = np.unique(rows[order], return_index=True)
    out = cands.reshape(-1, 3)[order[first]]
    np.clip(out, 0.0, None, out=out)
    return out


def _in_chamber(points: np.ndarray, tol: float = COORD_TOL) -> np.ndarray:
    a, b, c = points[..., 0], points[..., 1], points[..., 2]
    return (a >= b - tol) & (b >= c - tol) & (c >= -tol) & (a + b <= PI2 + tol)


def canonical_coordinates_batch(us: np.ndarray) -> np.ndarray:
    """Canonical coordinates for a batch of unitaries, shape (n, 4, 4) -> (n, 3)."""
    us = _check_unitary(us)
    if us.ndim == 2:
        us = us[None]
    det = np.linalg.det(us)
    su = us / (det ** 0.25)[:, None, None]
    m = MAGIC.conj().T @ su @ MAGIC
    m2 = np.swapaxes(m, -1, -2) @ m
    phi = np.angle(np.linalg.eigvals(m2)) / 2.0
    phi = -np.sort(-phi, axis=1)
    # Eigenphases are defined mod pi and must sum to 0; fix the sum on phi[0].
    shift = np.round(phi.sum(axis=1) / np.pi)
    phi[:, 0] -= shift * np.pi
    raw = np.stack([(phi[:, 0] + phi[:, 1]) / 2,
                    (phi[:, 0] + phi[:, 2]) / 2,
                    (phi[:, 1] + phi[:, 2]) / 2], axis=1)
    return canonicalize_points(raw)


def canonical_coordinates(u: np.ndarray) -> WeylPoint:
    """Canonical chamber coordinate of a two-qubit unitary."""
    pt = canonical_coordinates_batch(np.asarray(u, dtype=complex)[None])[0]
    return WeylPoint(*pt)


def canonical_gate(p) -> np.ndarray:
    """Canonical representative exp(i(a XX + b YY + c ZZ)) of a chamber point."""
    a, b, c = float(p[0]), float(p[1]), float(p[2])
    if not _in_chamber(np.array([a, b, c])):
        raise OutOfChamber(f"({a}, {b}, {c}) violates chamber inequalities")
    phi = np.array([a - b + c, a + b - c, -a - b - c, -a + b + c])
    return (MAGIC * np.exp(1j * phi)) @ MAGIC.conj().T


def mirror_coordinates_batch(points: np.ndarray) -> np.ndarray:
    """Mirror map on chamber points, branch split at a = pi/4, re-canonicalized."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if not np.all(_in_chamber(pts)):
        raise OutOfChamber("input points must lie in the canonical chamber")
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    low = a <= PI4
    out = np.empty_like(pts)
    out[:, 0] = np.where(low, PI4 + c, PI4 - c)
    out[:, 1] = PI4 - b
    out[:, 2] = np.where(low, PI4 - a, a - PI4)
    return canonicalize_points(out)


def mirror_coordinates(p) -> WeylPoint:
    """Coordinate of SWAP * U given the coordinate of U."""
    return WeylPoint(*mirror_coordinates_batch(np.asarray(p, dtype=float)[None])[0])


def mirror_unitary(u: np.ndarray) -> np.ndarray:
    """SWAP applied to the outputs of u."""
    u = _check_unitary(np.asarray(u, dtype=complex))
    return gates.SWAP @ u


def local_equivalent(u: np.ndarray, v: np.ndarray, tol: float = COORD_TOL) -> bool:
    """True when u and v differ only by single-qubit gates on either side."""
    cu = canonical_coordinates_batch(np.asarray(u, dtype=complex)[None])[0]
    cv = canonical_coordinates_batch(np.asarray(v, dtype=complex)[None])[0]
    return bool(np.all(np.abs(cu - cv) < tol))


def gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Average gate fidelity (|Tr(U^dag V)|^2 + 4) / 20; 1.0 iff equal up to phase."""
    u = _check_unitary(np.asarray(u, dtype=complex))
    v = _check_unitary(np.asarray(v, dtype=complex))
    tr = np.trace(u.conj().T @ v)
    return float((abs(tr) ** 2 + 4.0) / 20.0)


def random_chamber_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform samples from the chamber tetrahedron (rejection from the cube)."""
    out = np.empty((0, 3))
    while out.shape[0] < n:
        cand = rng.uniform(0.0, PI2, size=(max(64, 30 * n), 3))
        keep = (cand[:, 0] >= cand[:, 1]) & (cand[:, 1] >= cand[:, 2]) \
            & (cand[:, 0] + cand[:, 1] <= PI2)
        out = np.vstack([out, cand[keep]])
    return out[:n]
