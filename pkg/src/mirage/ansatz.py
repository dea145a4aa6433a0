"""Interleaved basis-gate ansatz: evaluation, sampling and parameter fitting.

The decomposition template for k applications of a fixed basis gate B is

    A(theta) = L_k B L_{k-1} B ... B L_0,

where each layer L_j is a pair of arbitrary single-qubit gates, parameterized
as u3 Euler triples.  One evaluator backs both the coverage-region sampling
and the numerical synthesis, so reachable regions and achievable syntheses
are consistent by construction.

Fitting maximizes the average gate fidelity (|Tr(U^dag A)|^2 + 4) / 20 with
analytic gradients (prefix/suffix chain rule), batched Adam restarts, and an
optional high-precision scipy polish for single targets.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize as _sciopt

from .gates import u3_batch


class OptimizerDiverged(RuntimeError):
    """No optimizer restart produced a usable fidelity."""


def layer_unitaries(one_q: np.ndarray) -> np.ndarray:
    """kron(g1, g0) for paired 1Q gates, shape (..., 2, 2, 2) -> (..., 4, 4)."""
    g0, g1 = one_q[..., 0, :, :], one_q[..., 1, :, :]
    out = np.einsum("...ij,...kl->...ikjl", g1, g0)
    return out.reshape(out.shape[:-4] + (4, 4))


def chain_unitary(basis: np.ndarray, layers: np.ndarray) -> np.ndarray:
    """Product L_k B ... B L_0 for batched 4x4 layers, shape (n, k+1, 4, 4)."""
    out = layers[:, 0]
    for j in range(1, layers.shape[1]):
        out = layers[:, j] @ (basis @ out)
    return out


def ansatz_unitary(basis: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Ansatz matrix for Euler angles with shape (..., k+1, 2, 3)."""
    thetas = np.asarray(thetas, dtype=float)
    squeeze = thetas.ndim == 3
    if squeeze:
        thetas = thetas[None]
    layers = layer_unitaries(u3_batch(thetas))
    out = chain_unitary(basis, layers)
    return out[0] if squeeze else out


def fidelity_batch(targets_dag: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """(|Tr(U^dag A)|^2 + 4) / 20 batched; targets_dag is U^dag."""
    tr = np.einsum("...ij,...ji->...", targets_dag, mats)
    return (np.abs(tr) ** 2 + 4.0) / 20.0


def _u3_and_derivs(angles: np.ndarray):
    """u3 matrices plus derivatives w.r.t. each Euler angle.

    angles (..., 3) -> (u (..., 2, 2), du (..., 3, 2, 2))
    """
    theta, phi, lam = angles[..., 0], angles[..., 1], angles[..., 2]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    el, ep = np.exp(1j * lam), np.exp(1j * phi)
    epl = ep * el
    sh = angles.shape[:-1]
    u = np.empty(sh + (2, 2), dtype=complex)
    u[..., 0, 0] = c
    u[..., 0, 1] = -el * s
    u[..., 1, 0] = ep * s
    u[..., 1, 1] = epl * c
    du = np.zeros(sh + (3, 2, 2), dtype=complex)
    du[..., 0, 0, 0] = -s / 2
    du[..., 0, 0, 1] = -el * c / 2
    du[..., 0, 1, 0] = ep * c / 2
    du[..., 0, 1, 1] = -epl * s / 2
    du[..., 1, 1, 0] = 1j * ep * s
    du[..., 1, 1, 1] = 1j * epl * c
    du[..., 2, 0, 1] = -1j * el * s
    du[..., 2, 1, 1] = 1j * epl * c
    return u, du


def fidelity_and_grad(targets_dag: np.ndarray, basis: np.ndarray, thetas: np.ndarray):
    """Fidelity and its gradient w.r.t. all Euler angles.

    targets_dag (n, 4, 4), thetas (n, k+1, 2, 3) -> (fid (n,), grad like thetas)
    """
    n, layers_n = thetas.shape[0], thetas.shape[1]
    u1q, du1q = _u3_and_derivs(thetas)
    layers = layer_unitaries(u1q)

    rights = np.empty((n, layers_n, 4, 4), dtype=complex)
    rights[:, 0] = np.eye(4)
    for j in range(1, layers_n):
        rights[:, j] = basis @ (layers[:, j - 1] @ rights[:, j - 1])
    lefts = np.empty_like(rights)
    lefts[:, layers_n - 1] = np.eye(4)
    for j in range(layers_n - 2, -1, -1):
        lefts[:, j] = lefts[:, j + 1] @ (layers[:, j + 1] @ basis)

    amat = lefts[:, 0] @ layers[:, 0] @ rights[:, 0]
    tr = np.einsum("nij,nji->n", targets_dag, amat)

    # dT/dL_j = (Right_j U^dag Left_j)^T, viewed as a (2,2,2,2) kron tensor.
    d_layer = np.einsum("nlij,njk,nlkm->nlmi", rights, targets_dag, lefts)
    d_t = d_layer.reshape(n, layers_n, 2, 2, 2, 2)  # [i, a, j, b] row=2i+a col=2j+b
    g0, g1 = u1q[..., 0, :, :], u1q[..., 1, :, :]
    dt_dg0 = np.einsum("nlij,nliajb->nlab", g1, d_t)
    dt_dg1 = np.einsum("nlab,nliajb->nlij", g0, d_t)
    dt_dangle = np.stack([
        np.einsum("nlab,nlgab->nlg", dt_dg0, du1q[:, :, 0]),
        np.einsum("nlab,nlgab->nlg", dt_dg1, du1q[:, :, 1]),
    ], axis=2)  # (n, layers, 2, 3)

    fid = (np.abs(tr) ** 2 + 4.0) / 20.0
    grad = 0.1 * np.real(np.conj(tr)[:, None, None, None] * dt_dangle)
    return fid, grad


def fit_layers(targets: np.ndarray, basis: np.ndarray, k: int,
               rng: np.random.Generator, restarts: int = 8, iters: int = 250,
               lr: float = 0.15):
    """Fit ansatz parameters for a batch of targets.

    Returns (thetas (n, k+1, 2, 3), fid (n,)) with the best restart per target.
    Adam on the analytic gradient; all restarts for all targets run as one
    batch, so cost does not scale with the parameter count.
    """
    targets = np.asarray(targets, dtype=complex)
    squeeze = targets.ndim == 2
    if squeeze:
        targets = targets[None]
    n = targets.shape[0]
    tdag = np.swapaxes(targets.conj(), -1, -2)
    tdag_all = np.repeat(tdag, restarts, axis=0)

    theta = rng.uniform(0.0, 2 * np.pi, size=(n * restarts, k + 1, 2, 3))
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    b1, b2, eps = 0.9, 0.999, 1e-9
    best_f = np.full(n * restarts, -np.inf)
    best_t = theta.copy()
    for it in range(1, iters + 1):
        fid, grad = fidelity_and_grad(tdag_all, basis, theta)
        better = fid > best_f
        best_f[better] = fid[better]
        best_t[better] = theta[better]
        g = -grad
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** it)
        vhat = v / (1 - b2 ** it)
        step = lr * (0.5 ** (3.0 * it / iters))
        theta -= step * mhat / (np.sqrt(vhat) + eps)
    fid, _ = fidelity_and_grad(tdag_all, basis, theta)
    better = fid > best_f
    best_f[better] = fid[better]
    best_t[better] = theta[better]

    best_f = best_f.reshape(n, restarts)
    best_t = best_t.reshape(n, restarts, k + 1, 2, 3)
    pick = np.argmax(best_f, axis=1)
    idx = np.arange(n)
    out_t, out_f = best_t[idx, pick], best_f[idx, pick]
    if squeeze:
        return out_t[0], float(out_f[0])
    return out_t, out_f


def polish_layers(target: np.ndarray, basis: np.ndarray, thetas: np.ndarray,
                  ftol: float = 1e-14):
    """High-precision refinement of a single fit via L-BFGS on 1 - fidelity."""
    target = np.asarray(target, dtype=complex)
    tdag = target.conj().T[None]
    shape = thetas.shape

    def func(x):
        fid, grad = fidelity_and_grad(tdag, basis, x.reshape((1,) + shape))
        return 1.0 - fid[0], -grad.ravel()

    res = _sciopt.minimize(func, np.asarray(thetas, dtype=float).ravel(),
                           jac=True, method="L-BFGS-B",
                           options={"maxiter": 500, "ftol": ftol, "gtol": 1e-13})
    fid, _ = fidelity_and_grad(tdag, basis, res.x.reshape((1,) + shape))
    return res.x.reshape(shape), float(fid[0])
