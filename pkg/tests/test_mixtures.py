import math

import numpy as np
import pytest

from zetagap import NormSpec, ValidationError, spectral_gap, zeta_gap_upper
from zetagap.mixtures import (
    MixtureComponent,
    MixtureSpec,
    bfs_diameter,
    build_mixture_kernel,
    build_overlap_graph,
    component_gap,
    madras_randall_bound,
    mixture_zeta_gap_bound,
    overlap,
    random_mixture,
)
from zetagap.rng import derive_rng


def three_state_spec():
    """Two overlapping two-point laws with independence-sampler kernels."""
    pi1 = np.array([0.5, 0.5, 0.0])
    pi2 = np.array([0.0, 0.5, 0.5])
    k1 = 0.5 * np.eye(3) + 0.5 * np.tile(pi1, (3, 1))
    k2 = 0.5 * np.eye(3) + 0.5 * np.tile(pi2, (3, 1))
    return MixtureSpec(
        (MixtureComponent(0.5, pi1, k1), MixtureComponent(0.5, pi2, k2))
    )


class TestBuildKernel:
    def test_single_component_passthrough(self):
        rng = derive_rng(20)
        from zetagap import random_lazy_chain

        base = random_lazy_chain(4, rng)
        spec = MixtureSpec((MixtureComponent(1.0, base.pi, base.P),))
        chain = build_mixture_kernel(spec)
        assert np.allclose(chain.P, base.P, atol=1e-12)
        assert np.allclose(chain.pi, base.pi, atol=1e-12)

    def test_three_state_hand_example(self):
        chain = build_mixture_kernel(three_state_spec())
        expected = np.array(
            [[0.75, 0.25, 0.0], [0.125, 0.75, 0.125], [0.0, 0.25, 0.75]]
        )
        assert np.allclose(chain.P, expected, atol=1e-12)
        assert np.allclose(chain.pi, [0.25, 0.5, 0.25], atol=1e-12)

    def test_random_mixtures_reversible_and_lazy(self):
        rng = derive_rng(21)
        for _ in range(10):
            spec = random_mixture(rng, int(rng.integers(2, 5)), int(rng.integers(3, 8)))
            chain = build_mixture_kernel(spec)  # construction re-validates both
            assert np.all(np.diag(chain.P) >= 0.5 - 1e-12)

    def test_zero_mass_state_rejected(self):
        pi1 = np.array([0.5, 0.5, 0.0])
        k1 = 0.5 * np.eye(3) + 0.5 * np.tile(pi1, (3, 1))
        spec = MixtureSpec((MixtureComponent(1.0, pi1, k1),))
        with pytest.raises(ValidationError, match="prune"):
            build_mixture_kernel(spec)


class TestOverlap:
    def test_self_overlap_full_mask(self):
        spec = three_state_spec()
        assert overlap(spec, 0, 0) == pytest.approx(1.0)

    def test_three_state_hand_sum(self):
        assert overlap(three_state_spec(), 0, 1) == pytest.approx(0.5)

    def test_disjoint_supports(self):
        pi1 = np.array([0.5, 0.5, 0.0, 0.0])
        pi2 = np.array([0.0, 0.0, 0.5, 0.5])
        k1 = 0.5 * np.eye(4) + 0.5 * np.tile(pi1, (4, 1))
        k2 = 0.5 * np.eye(4) + 0.5 * np.tile(pi2, (4, 1))
        spec = MixtureSpec((MixtureComponent(0.5, pi1, k1), MixtureComponent(0.5, pi2, k2)))
        assert overlap(spec, 0, 1) == 0.0

    def test_symmetry_and_range(self):
        rng = derive_rng(22)
        spec = random_mixture(rng, 4, 6, with_masks=True)
        for i in range(4):
            for j in range(4):
                v = overlap(spec, i, j)
                assert v == pytest.approx(overlap(spec, j, i))
                assert 0.0 <= v <= 1.0 + 1e-12

    def test_unit_overlap_iff_coinciding_restrictions(self):
        # equal laws on full masks overlap exactly 1; any discrepancy or
        # missing shared mass pushes it strictly below
        dist = np.array([0.4, 0.35, 0.25])
        kernel = 0.5 * np.eye(3) + 0.5 * np.tile(dist, (3, 1))
        twin = MixtureSpec(
            (MixtureComponent(0.5, dist, kernel), MixtureComponent(0.5, dist, kernel))
        )
        assert overlap(twin, 0, 1) == pytest.approx(1.0)
        rng = derive_rng(220)
        spec = random_mixture(rng, 2, 5, with_masks=True)
        same = np.allclose(spec.components[0].dist, spec.components[1].dist) and (
            spec.components[0].mask is None and spec.components[1].mask is None
        )
        if not same:
            assert overlap(spec, 0, 1) < 1.0 - 1e-9


class TestDiameter:
    def test_complete_graph(self):
        adj = ~np.eye(4, dtype=bool)
        assert bfs_diameter(adj) == 1.0

    def test_path_graph(self):
        adj = np.zeros((4, 4), dtype=bool)
        for i in range(3):
            adj[i, i + 1] = adj[i + 1, i] = True
        assert bfs_diameter(adj) == 3.0

    def test_disconnected(self):
        assert math.isinf(bfs_diameter(np.zeros((3, 3), dtype=bool)))

    def test_single_node(self):
        assert bfs_diameter(np.zeros((1, 1), dtype=bool)) == 0.0

    def test_matches_floyd_warshall_oracle(self):
        rng = derive_rng(23)
        for _ in range(20):
            k = int(rng.integers(2, 8))
            adj = rng.random((k, k)) < 0.4
            adj = (adj | adj.T) & ~np.eye(k, dtype=bool)
            dist = np.where(adj, 1.0, math.inf)
            np.fill_diagonal(dist, 0.0)
            for m in range(k):
                dist = np.minimum(dist, dist[:, m : m + 1] + dist[m : m + 1, :])
            want = float(dist.max())
            assert bfs_diameter(adj) == want


class TestMadrasRandall:
    def test_three_state_hand_values(self):
        spec = three_state_spec()
        bound = madras_randall_bound(spec)
        assert bound.value == pytest.approx(0.0625, abs=1e-12)
        assert bound.kappa == pytest.approx(0.5)
        assert bound.diameter == 1.0
        gap = spectral_gap(build_mixture_kernel(spec))
        assert gap == pytest.approx(0.25, abs=1e-12)
        assert bound.value <= gap

    def test_single_component_degenerate(self):
        rng = derive_rng(24)
        from zetagap import random_lazy_chain

        base = random_lazy_chain(5, rng)
        spec = MixtureSpec((MixtureComponent(1.0, base.pi, base.P),))
        bound = madras_randall_bound(spec)
        assert bound.diameter == 0.0
        assert bound.value == pytest.approx(spectral_gap(base), abs=1e-10)

    def test_holds_on_random_mixtures(self):
        rng = derive_rng(25)
        for _ in range(20):
            spec = random_mixture(rng, 2, int(rng.integers(3, 7)))
            bound = madras_randall_bound(spec)
            gap = spectral_gap(build_mixture_kernel(spec))
            assert bound.value <= gap + 1e-10

    def test_rejects_masks(self):
        rng = derive_rng(26)
        spec = random_mixture(rng, 3, 5, with_masks=True)
        if all(c.mask is None for c in spec.components):
            pytest.skip("draw produced no masks")
        with pytest.raises(ValidationError):
            madras_randall_bound(spec)


class TestZetaGapBound:
    def test_full_masks_auto_satisfy_mass(self):
        spec = three_state_spec()
        bound = mixture_zeta_gap_bound(spec, zeta=0.3)
        assert bound.mass == pytest.approx(1.0)
        assert bound.mass_ok
        assert bound.value == pytest.approx(0.0625, abs=1e-12)

    def test_mass_condition_failure_gives_zero(self):
        rng = derive_rng(27)
        spec = random_mixture(rng, 3, 6, with_masks=True)
        if all(c.mask is None for c in spec.components):
            pytest.skip("draw produced no masks")
        # tiny zeta makes the threshold unattainable once any mass is dropped
        bound = mixture_zeta_gap_bound(spec, zeta=1e-9)
        assert not bound.mass_ok
        assert bound.value == 0.0

    def test_bounded_by_zeta_gap_upper(self):
        rng = derive_rng(28)
        norm = NormSpec()
        for _ in range(15):
            spec = random_mixture(
                rng, int(rng.integers(2, 5)), int(rng.integers(3, 8)), with_masks=True
            )
            zeta = float(rng.uniform(0.05, 0.45))
            bound = mixture_zeta_gap_bound(spec, zeta, norm)
            chain = build_mixture_kernel(spec)
            upper, _ = zeta_gap_upper(chain, zeta, norm)
            assert bound.value <= upper + 1e-10

    def test_kappa_sweep_beats_fixed_kappa(self):
        rng = derive_rng(29)
        spec = random_mixture(rng, 3, 6)
        swept = mixture_zeta_gap_bound(spec, 0.2)
        fixed = mixture_zeta_gap_bound(spec, 0.2, kappa=swept.kappa)
        assert swept.value >= fixed.value - 1e-15

    def test_domain_errors(self):
        spec = three_state_spec()
        with pytest.raises(ValidationError):
            mixture_zeta_gap_bound(spec, zeta=0.0)
        with pytest.raises(ValidationError):
            MixtureSpec(spec.components, subset_indices=())


class TestComponentGap:
    def test_independence_sampler_gap_is_half(self):
        spec = three_state_spec()
        assert component_gap(spec.components[0]) == pytest.approx(0.5, abs=1e-12)

    def test_overlap_graph_wrapper(self):
        graph = build_overlap_graph(three_state_spec(), kappa=0.5)
        assert graph.diameter == 1.0
        assert graph.adjacency[0, 1]
