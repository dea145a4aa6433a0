import numpy as np
import pytest

from mirage import circuit, gates, simverify, weyl


class TestSimulate:
    def test_empty_dag(self):
        dag = circuit.CircuitDag(2)
        np.testing.assert_array_equal(simverify.simulate(dag), np.eye(4))

    def test_cx_truth_table(self):
        # Endianness check: qubit 0 is the least significant bit, so CX(0,1)
        # flips qubit 1 exactly on odd basis states.
        dag = circuit.CircuitDag.from_gates(2, [("cx", (), (0, 1))])
        np.testing.assert_array_equal(simverify.simulate(dag), gates.CX)
        dag = circuit.CircuitDag.from_gates(2, [("cx", (), (1, 0))])
        np.testing.assert_array_equal(simverify.simulate(dag),
                                      np.eye(4)[:, [0, 1, 3, 2]])

    def test_fig_style_cnot_from_two_sqiswap(self):
        # Explicit pulse sequence: two half-iSWAP applications with fixed 1Q
        # rotations compose to a CNOT exactly.
        b = weyl.canonical_gate(weyl.SQISWAP_POINT)
        seq = [
            ("ry", (np.pi / 2,), (0,)), ("rz", (-np.pi / 2,), (0,)),
            ("rz", (np.pi / 2,), (1,)), ("ry", (-np.pi / 2,), (1,)),
            circuit.GateNode(0, (0, 1), "unitary", (), b),
            ("rx", (np.pi,), (0,)), ("rz", (-np.pi,), (1,)),
            circuit.GateNode(0, (0, 1), "unitary", (), b),
            ("rx", (np.pi / 2,), (0,)), ("rz", (np.pi / 2,), (1,)),
        ]
        dag = circuit.CircuitDag.from_gates(2, seq)
        assert simverify.equivalent(simverify.simulate(dag), gates.CX, tol=1e-9)

    def test_too_many_qubits(self):
        with pytest.raises(simverify.TooManyQubits):
            simverify.simulate(circuit.CircuitDag(11))

    def test_gate_order(self):
        dag = circuit.CircuitDag.from_gates(1, [("x", (), (0,)), ("s", (), (0,))])
        np.testing.assert_allclose(simverify.simulate(dag), gates.S @ gates.X)


class TestEquivalent:
    def test_reflexive(self):
        u = weyl.haar_random_2q(np.random.default_rng(0))
        assert simverify.equivalent(u, u, tol=0)

    def test_symmetric_and_transitive_at_zero(self):
        u = weyl.haar_random_2q(np.random.default_rng(1))
        v = u.copy()
        w = u.copy()
        assert simverify.equivalent(u, v, tol=0) and simverify.equivalent(v, u, tol=0)
        assert simverify.equivalent(v, w, tol=0) and simverify.equivalent(u, w, tol=0)

    def test_global_phase_ignored(self):
        u = weyl.haar_random_2q(np.random.default_rng(2))
        assert simverify.equivalent(u, np.exp(1.3j) * u, tol=1e-12)

    def test_swap_is_wire_relabeling(self):
        assert simverify.equivalent(gates.SWAP, np.eye(4), perm=[1, 0], tol=0)

    def test_dimension_mismatch(self):
        with pytest.raises(simverify.DimensionMismatch):
            simverify.equivalent(np.eye(4), np.eye(8))

    def test_detects_difference(self):
        assert not simverify.equivalent(gates.CX, gates.ISWAP, tol=1e-6)


class TestPermutationMatrix:
    def test_identity(self):
        np.testing.assert_array_equal(simverify.permutation_matrix([0, 1, 2]),
                                      np.eye(8))

    def test_composition(self):
        rng = np.random.default_rng(3)
        p1 = list(rng.permutation(3))
        composed = [p1[i] for i in range(3)]
        m = simverify.permutation_matrix(p1)
        assert np.array_equal(m @ m.conj().T, np.eye(8))
        dag = circuit.CircuitDag.from_gates(3, [("x", (), (0,))])
        u = simverify.simulate(dag)
        moved = circuit.CircuitDag.from_gates(3, [("x", (), (composed[0],))])
        np.testing.assert_allclose(m @ u @ m.conj().T,
                                   simverify.simulate(moved), atol=1e-12)
