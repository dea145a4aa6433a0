import numpy as np
import pytest

from mirage import gates, weyl

PI4 = np.pi / 4


def dress(rng, us):
    """Random 1Q gates applied on both sides of a batch of 2Q unitaries."""
    g = weyl.haar_random_1q_batch(rng, (len(us), 4))
    left = np.einsum("nij,nkl->nikjl", g[:, 0], g[:, 1]).reshape(-1, 4, 4)
    right = np.einsum("nij,nkl->nikjl", g[:, 2], g[:, 3]).reshape(-1, 4, 4)
    return left @ us @ right


class TestAnchors:
    def test_cnot(self):
        np.testing.assert_allclose(weyl.canonical_coordinates(gates.CX),
                                   (PI4, 0, 0), atol=1e-12)

    def test_identity(self):
        np.testing.assert_allclose(weyl.canonical_coordinates(np.eye(4)),
                                   (0, 0, 0), atol=1e-12)

    def test_iswap_swap(self):
        np.testing.assert_allclose(weyl.canonical_coordinates(gates.ISWAP),
                                   (PI4, PI4, 0), atol=1e-12)
        np.testing.assert_allclose(weyl.canonical_coordinates(gates.SWAP),
                                   (PI4, PI4, PI4), atol=1e-12)

    def test_mirror_cnot_is_iswap(self):
        np.testing.assert_allclose(weyl.mirror_coordinates(weyl.CNOT_POINT),
                                   weyl.ISWAP_POINT, atol=1e-12)

    def test_mirror_identity_is_swap(self):
        np.testing.assert_allclose(weyl.mirror_coordinates(weyl.IDENTITY_POINT),
                                   weyl.SWAP_POINT, atol=1e-12)

    def test_mirror_swap_is_identity(self):
        np.testing.assert_allclose(weyl.mirror_coordinates(weyl.SWAP_POINT),
                                   weyl.IDENTITY_POINT, atol=1e-12)


class TestHaar:
    def test_unitarity(self):
        rng = np.random.default_rng(1)
        u = weyl.haar_random_2q(rng)
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-10

    def test_moment(self):
        rng = np.random.default_rng(2)
        us = weyl.haar_random_2q_batch(rng, 100_000)
        assert abs(np.mean(np.abs(us[:, 0, 0]) ** 2) - 0.25) < 0.01

    def test_determinism(self):
        a = weyl.haar_random_2q_batch(np.random.default_rng(7), 5)
        b = weyl.haar_random_2q_batch(np.random.default_rng(7), 5)
        np.testing.assert_array_equal(a, b)


class TestProperties:
    N = 10_000

    def test_one_q_invariance(self):
        rng = np.random.default_rng(10)
        us = weyl.haar_random_2q_batch(rng, self.N)
        c1 = weyl.canonical_coordinates_batch(us)
        c2 = weyl.canonical_coordinates_batch(dress(rng, us))
        assert np.max(np.abs(c1 - c2)) <= 1e-9

    def test_chamber_membership_slack(self):
        rng = np.random.default_rng(11)
        c = weyl.canonical_coordinates_batch(weyl.haar_random_2q_batch(rng, self.N))
        a, b, cc = c[:, 0], c[:, 1], c[:, 2]
        slack = np.minimum.reduce([a - b, b - cc, cc, np.pi / 2 - a - b])
        assert slack.min() >= -1e-12

    def test_mirror_consistency(self):
        rng = np.random.default_rng(12)
        us = weyl.haar_random_2q_batch(rng, self.N)
        via_matrix = weyl.canonical_coordinates_batch(gates.SWAP @ us)
        via_map = weyl.mirror_coordinates_batch(weyl.canonical_coordinates_batch(us))
        assert np.max(np.abs(via_matrix - via_map)) <= 1e-9

    def test_mirror_involution(self):
        rng = np.random.default_rng(13)
        pts = weyl.random_chamber_points(rng, self.N)
        back = weyl.mirror_coordinates_batch(weyl.mirror_coordinates_batch(pts))
        assert np.max(np.abs(back - pts)) <= 1e-9

    def test_round_trip(self):
        rng = np.random.default_rng(14)
        pts = weyl.random_chamber_points(rng, self.N)
        gates_ = np.stack([weyl.canonical_gate(p) for p in pts])
        back = weyl.canonical_coordinates_batch(gates_)
        assert np.max(np.abs(back - pts)) <= 1e-9


class TestCanonicalGate:
    def test_identity(self):
        np.testing.assert_allclose(weyl.canonical_gate((0, 0, 0)), np.eye(4),
                                   atol=1e-15)

    def test_swap_class(self):
        u = weyl.canonical_gate(weyl.SWAP_POINT)
        assert weyl.local_equivalent(u, gates.SWAP)

    def test_cnot_class(self):
        u = weyl.canonical_gate(weyl.CNOT_POINT)
        assert weyl.local_equivalent(u, gates.CX)

    def test_out_of_chamber(self):
        with pytest.raises(weyl.OutOfChamber):
            weyl.canonical_gate((0.1, 0.3, 0.0))
        with pytest.raises(weyl.OutOfChamber):
            weyl.mirror_coordinates((1.5, 0.2, 0.1))


class TestMirrorUnitary:
    def test_is_swap_composition(self):
        rng = np.random.default_rng(20)
        u = weyl.haar_random_2q(rng)
        np.testing.assert_allclose(weyl.mirror_unitary(u), gates.SWAP @ u)

    def test_cnot_mirror_is_iswap_class(self):
        assert weyl.local_equivalent(weyl.mirror_unitary(gates.CX), gates.ISWAP)

    def test_swap_mirrors_to_identity(self):
        np.testing.assert_allclose(weyl.mirror_unitary(gates.SWAP), np.eye(4),
                                   atol=1e-15)

    def test_involution_exact(self):
        rng = np.random.default_rng(21)
        u = weyl.haar_random_2q(rng)
        np.testing.assert_array_equal(weyl.mirror_unitary(weyl.mirror_unitary(u)), u)

    def test_non_unitary_rejected(self):
        with pytest.raises(weyl.NonUnitaryInput):
            weyl.mirror_unitary(np.ones((4, 4)))
        with pytest.raises(weyl.NonUnitaryInput):
            weyl.canonical_coordinates(np.diag([1.0, 1.0, 1.0, 1.0 + 1e-6]))


class TestGateFidelity:
    def test_global_phase(self):
        rng = np.random.default_rng(30)
        u = weyl.haar_random_2q(rng)
        assert weyl.gate_fidelity(u, u * np.exp(0.7j)) == pytest.approx(1.0)

    def test_identity_vs_swap(self):
        # Tr(SWAP) = 2, so (|2|^2 + 4) / 20 = 0.4.
        assert weyl.gate_fidelity(np.eye(4), gates.SWAP) == pytest.approx(0.4)

    def test_symmetry(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            u, v = weyl.haar_random_2q_batch(rng, 2)
            assert weyl.gate_fidelity(u, v) == pytest.approx(weyl.gate_fidelity(v, u))


class TestLocalEquivalent:
    def test_dressed_cnot(self):
        rng = np.random.default_rng(40)
        dressed = dress(rng, gates.CX[None])[0]
        assert weyl.local_equivalent(gates.CX, dressed)

    def test_cnot_vs_iswap(self):
        assert not weyl.local_equivalent(gates.CX, gates.ISWAP)

    def test_double_mirror(self):
        rng = np.random.default_rng(41)
        u = weyl.haar_random_2q(rng)
        assert weyl.local_equivalent(u, weyl.mirror_unitary(weyl.mirror_unitary(u)))
