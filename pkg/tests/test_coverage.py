import numpy as np
import pytest

from mirage import coverage, weyl


class TestBasisGateSpec:
    def test_unit_costs(self):
        assert coverage.BasisGateSpec.iswap_root(1).unit_cost == 1.0
        assert coverage.BasisGateSpec.iswap_root(2).unit_cost == 0.5

    def test_names(self):
        assert coverage.BasisGateSpec.iswap_root(2).name == "sqiswap"
        assert coverage.BasisGateSpec.iswap_root(4).name == "niswap4"

    def test_matrix_class(self):
        basis = coverage.BasisGateSpec.iswap_root(2)
        np.testing.assert_allclose(basis.coordinate(),
                                   weyl.SQISWAP_POINT, atol=1e-12)

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            coverage.BasisGateSpec.iswap_root(0)


class TestAnchorMembership:
    def test_cnot_in_k2_not_k1(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.contains(cs.entries[2], weyl.CNOT_POINT)
        assert not coverage.contains(cs.entries[1], weyl.CNOT_POINT)

    def test_swap_in_k3_not_k2(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.contains(cs.entries[3], weyl.SWAP_POINT)
        assert not coverage.contains(cs.entries[2], weyl.SWAP_POINT)

    def test_iswap_in_k2(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.contains(cs.entries[2], weyl.ISWAP_POINT)

    def test_basis_point_in_k1(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.contains(cs.entries[1], weyl.SQISWAP_POINT)

    def test_k0_is_identity_only(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.contains(cs.entries[0], weyl.IDENTITY_POINT)
        assert not coverage.contains(cs.entries[0], weyl.CNOT_POINT)
        assert not coverage.contains(cs.entries[0], (0.01, 0.0, 0.0))

    def test_exterior_point_never_member(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        outside = (0.1, 0.3, 0.05)  # violates a >= b
        for entry in cs.entries:
            assert not coverage.contains(entry, outside)


class TestMirrorExtension:
    def test_swap_absorbed_at_zero_cost(self, sqiswap_sets):
        basis, cs, ext = sqiswap_sets
        assert coverage.contains(ext.entries[0], weyl.SWAP_POINT)
        assert coverage.min_cost(ext, weyl.SWAP_POINT) == (0, 0.0)
        assert coverage.min_cost(cs, weyl.SWAP_POINT) == (3, 1.5)

    def test_consistency_with_pointwise_mirror(self, sqiswap_sets):
        _, cs, ext = sqiswap_sets
        pts = weyl.random_chamber_points(np.random.default_rng(5), 10_000)
        mirrored = weyl.mirror_coordinates_batch(pts)
        for k in (1, 2):
            got = ext.entries[k].contains(pts)
            want = cs.entries[k].contains(pts) | cs.entries[k].contains(mirrored)
            np.testing.assert_array_equal(got, want)

    def test_flag(self, sqiswap_sets):
        _, cs, ext = sqiswap_sets
        assert ext.mirror_extended and not cs.mirror_extended

    def test_cnot_basis_planar_even_extended(self, cov_cache):
        basis = coverage.BasisGateSpec.cnot()
        cs = coverage.build_coverage_set(basis, samples_per_k=20_000,
                                         rng=np.random.default_rng(3))
        ext = coverage.mirror_extend(cs)
        rng = np.random.default_rng(4)
        vol, _ = coverage.haar_volume(cs.entries[2], 20_000, rng)
        vol_m, _ = coverage.haar_volume(ext.entries[2], 20_000,
                                        np.random.default_rng(5))
        assert vol == 0.0
        assert vol_m == 0.0
        # ... although the k=2 slice holds the whole zero-volume base plane.
        assert coverage.contains(cs.entries[2], (0.3, 0.2, 0.0))
        assert coverage.contains(cs.entries[2], weyl.ISWAP_POINT)


class TestVolumes:
    def test_sqiswap_k2(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        vol, se = coverage.haar_volume(cs.entries[2], 50_000,
                                       np.random.default_rng(6))
        assert vol == pytest.approx(0.790, abs=0.015)
        assert se == pytest.approx(np.sqrt(vol * (1 - vol) / 50_000))

    def test_sqiswap_k2_mirror(self, sqiswap_sets):
        _, _, ext = sqiswap_sets
        vol, _ = coverage.haar_volume(ext.entries[2], 50_000,
                                      np.random.default_rng(7))
        assert vol == pytest.approx(0.944, abs=0.015)

    def test_full_chamber_entry(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        vol, se = coverage.haar_volume(cs.entries[3], 10_000,
                                       np.random.default_rng(8))
        assert vol == 1.0 and se == 0.0

    def test_nesting_monotone(self, niswap4_sets):
        _, cs, ext = niswap4_sets
        pts = weyl.canonical_coordinates_batch(
            weyl.haar_random_2q_batch(np.random.default_rng(9), 5_000))
        for covset in (cs, ext):
            prev = np.zeros(len(pts), dtype=bool)
            for entry in covset.entries:
                cur = entry.contains(pts)
                assert np.all(prev <= cur)
                prev = cur


class TestMinCost:
    def test_examples(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        assert coverage.min_cost(cs, weyl.CNOT_POINT) == (2, 1.0)
        assert coverage.min_cost(cs, weyl.IDENTITY_POINT) == (0, 0.0)

    def test_batch_matches_scalar(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        pts = weyl.random_chamber_points(np.random.default_rng(10), 500)
        ks, costs = coverage.min_cost_batch(cs, pts)
        for i, p in enumerate(pts):
            assert coverage.min_cost(cs, p) == (ks[i], costs[i])

    def test_cache_transparent(self, sqiswap_sets):
        _, cs, _ = sqiswap_sets
        cs.reset_cache()
        pts = weyl.random_chamber_points(np.random.default_rng(11), 2_000)
        pts = np.tile(pts, (3, 1))
        cached = [coverage.min_cost(cs, p) for p in pts]
        plain = [coverage.min_cost(cs, p, use_cache=False) for p in pts]
        assert cached == plain
        assert cs.cache_hits >= 2 * 2_000

    def test_incomplete_raises(self):
        basis = coverage.BasisGateSpec.iswap_root(2)
        with pytest.raises(coverage.CoverageIncomplete):
            coverage.build_coverage_set(basis, max_k=2, samples_per_k=5_000,
                                        rng=np.random.default_rng(1),
                                        probes=2_000)


class TestSidecar:
    def test_round_trip(self, sqiswap_sets, tmp_path):
        basis, cs, _ = sqiswap_sets
        path = tmp_path / "cov.bin"
        coverage.save_sidecar(cs, path)
        back = coverage.load_sidecar(path, basis)
        assert back.mirror_extended == cs.mirror_extended
        assert back.build_seed == cs.build_seed
        assert len(back.entries) == len(cs.entries)
        for a, b in zip(cs.entries, back.entries):
            assert (a.k, a.cost, len(a.regions)) == (b.k, b.cost, len(b.regions))
            for ra, rb in zip(a.regions, b.regions):
                np.testing.assert_array_equal(ra.normals, rb.normals)
                np.testing.assert_array_equal(ra.offsets, rb.offsets)

    def test_wrong_basis_rejected(self, sqiswap_sets, tmp_path):
        basis, cs, _ = sqiswap_sets
        path = tmp_path / "cov.bin"
        coverage.save_sidecar(cs, path)
        with pytest.raises(ValueError):
            coverage.load_sidecar(path, coverage.BasisGateSpec.iswap_root(3))

    def test_get_coverage_uses_cache(self, tmp_path):
        basis = coverage.BasisGateSpec.iswap_root(2)
        a = coverage.get_coverage(basis, samples_per_k=20_000,
                                  cache_dir=tmp_path)
        files = list(tmp_path.glob("*.cov"))
        assert files
        stamp = files[0].stat().st_mtime_ns
        b = coverage.get_coverage(basis, samples_per_k=20_000,
                                  cache_dir=tmp_path)
        assert files[0].stat().st_mtime_ns == stamp
        assert len(a.entries) == len(b.entries)
