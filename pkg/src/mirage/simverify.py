"""Dense unitary simulation of small circuits and equivalence checking.

This is the correctness oracle for routing and consolidation: it builds the
full 2^n x 2^n matrix of a circuit (n <= 10) and compares circuits up to a
qubit permutation and a global phase.  Qubit 0 is the least significant bit.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 10


class TooManyQubits(ValueError):
    """Dense simulation is capped at MAX_QUBITS qubits."""


class DimensionMismatch(ValueError):
    """Operands act on different numbers of qubits."""


def apply_gate(mat: np.ndarray, gate: np.ndarray, qubits, n: int) -> np.ndarray:
    """Left-multiply the embedded gate onto a 2^n x 2^n matrix.

    Row axis for qubit q is n-1-q (row bits are big-endian in the reshape);
    the reshaped gate's input axes run over its operands high bit first.
    """
    m = len(qubits)
    dim = 1 << n
    tensor = mat.reshape((2,) * n + (dim,))
    row_axes = [n - 1 - q for q in reversed(qubits)]
    gt = gate.reshape((2,) * (2 * m))
    tensor = np.tensordot(gt, tensor, axes=(list(range(m, 2 * m)), row_axes))
    src = {pos: i for i, pos in enumerate(row_axes)}
    src.update({pos: m + j for j, pos in
                enumerate(p for p in range(n) if p not in src)})
    order = [src[p] for p in range(n)] + [n]
    return np.transpose(tensor, order).reshape(dim, dim)


def simulate(dag) -> np.ndarray:
    """Full unitary of a circuit DAG in wire order."""
    n = dag.num_qubits
    if n > MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
    mat = np.eye(1 << n, dtype=complex)
    for node in dag.nodes:
        mat = apply_gate(mat, node.matrix(), node.qubits, n)
    return mat


def permutation_matrix(perm, n: int | None = None) -> np.ndarray:
    """Wire relabeling: qubit i of the input becomes qubit perm[i]."""
    perm = list(perm)
    if n is None:
        n = len(perm)
    dim = 1 << n
    src = np.arange(dim)
    dst = np.zeros(dim, dtype=int)
    for i, p in enumerate(perm):
        dst |= ((src >> i) & 1) << p
    mat = np.zeros((dim, dim), dtype=complex)
    mat[dst, src] = 1.0
    return mat


def equivalent(u: np.ndarray, v: np.ndarray, perm=None, tol: float = 1e-9) -> bool:
    """True when P(perm) @ u matches v up to a global phase.

    The phase is fixed at v's largest-magnitude entry.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"shapes {u.shape} vs {v.shape}")
    n = int(np.log2(u.shape[0]))
    if perm is not None:
        u = permutation_matrix(perm, n) @ u
    if np.array_equal(u, v):
        return True
    idx = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[idx]) < 1e-12:
        return False
    phase = v[idx] / u[idx]
    phase /= abs(phase)
    return bool(np.max(np.abs(u * phase - v)) <= tol)


def routed_equivalent(original_dag, routed_dag, initial_layout, final_layout,
                      tol: float = 1e-9) -> bool:
    """Routing contract: routed = P(final) original P(initial)^-1 up to phase.

    Layouts map virtual qubit v to its physical wire; the routed circuit acts
    on physical wires.
    """
    u = simulate(original_dag)
    v = simulate(routed_dag)
    n = routed_dag.num_qubits
    p0 = permutation_matrix(list(initial_layout), n)
    pf = permutation_matrix(list(final_layout), n)
    if u.shape != v.shape:
        # Original may use fewer virtual qubits than the device has wires.
        pad = np.eye(v.shape[0] // u.shape[0], dtype=complex)
        u = np.kron(pad, u)
    return equivalent(pf @ u @ p0.conj().T, v, tol=tol)
