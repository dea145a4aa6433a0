"""Matrix definitions for the named gates understood by the rest of the library.

Convention: qubit 0 is the least significant bit, so a basis state index is
``q1*2 + q0`` for two qubits.  A gate ``g1`` on qubit 1 combined with ``g0``
on qubit 0 is ``np.kron(g1, g0)``.
"""

from __future__ import annotations

import numpy as np

_SQ2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj()
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
TDG = T.conj()

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)

# Two-qubit gates, little-endian: first operand listed is qubit a (low bit).
# CX has control = first operand, target = second operand.
CX = np.array(
    [[1, 0, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0],
     [0, 1, 0, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)
ISWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1j, 0],
     [0, 1j, 0, 0],
     [0, 0, 0, 1]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]).astype(complex)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    """OpenQASM u3 gate."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]], dtype=complex)


def u3_batch(angles: np.ndarray) -> np.ndarray:
    """u3 for an array of Euler triples; angles[..., 3] -> matrices[..., 2, 2]."""
    theta, phi, lam = angles[..., 0], angles[..., 1], angles[..., 2]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -np.exp(1j * lam) * s
    out[..., 1, 0] = np.exp(1j * phi) * s
    out[..., 1, 1] = np.exp(1j * (phi + lam)) * c
    return out


def phase(lam: float) -> np.ndarray:
    return np.diag([1, np.exp(1j * lam)]).astype(complex)


def cphase(lam: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * lam)]).astype(complex)


def u2(phi: float, lam: float) -> np.ndarray:
    return u3(np.pi / 2, phi, lam)


# name -> (qubit count, parameter count, matrix factory)
GATE_TABLE = {
    "id": (1, 0, lambda: I2),
    "h": (1, 0, lambda: H),
    "x": (1, 0, lambda: X),
    "y": (1, 0, lambda: Y),
    "z": (1, 0, lambda: Z),
    "s": (1, 0, lambda: S),
    "sdg": (1, 0, lambda: SDG),
    "t": (1, 0, lambda: T),
    "tdg": (1, 0, lambda: TDG),
    "rx": (1, 1, rx),
    "ry": (1, 1, ry),
    "rz": (1, 1, rz),
    "p": (1, 1, phase),
    "u1": (1, 1, phase),
    "u2": (1, 2, u2),
    "u3": (1, 3, u3),
    "u": (1, 3, u3),
    "cx": (2, 0, lambda: CX),
    "cz": (2, 0, lambda: CZ),
    "cp": (2, 1, cphase),
    "swap": (2, 0, lambda: SWAP),
    "iswap": (2, 0, lambda: ISWAP),
    "ccx": (3, 0, None),
    "cswap": (3, 0, None),
}


def gate_matrix(name: str, params: tuple = ()) -> np.ndarray:
    """Matrix for a named 1Q/2Q gate.  3Q gates have no direct matrix here."""
    nq, nparams, factory = GATE_TABLE[name]
    if factory is None:
        raise KeyError(f"gate {name!r} must be unrolled before taking a matrix")
    if len(params) != nparams:
        raise ValueError(f"gate {name!r} expects {nparams} parameters, got {len(params)}")
    return factory(*params)
