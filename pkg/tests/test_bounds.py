"""Multi-index sum bound tests: index sets, formula anchors, dominance."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ubound import bounds, kernels
from ubound.errors import DomainError, TooLargeError
from ubound.onedim import iid_table


def small_kernel(rng, n1=2, n2=2):
    w0 = rng.uniform(0.2, 1.0, size=n1)
    w1 = rng.uniform(0.2, 1.0, size=n2)
    return kernels.GridKernel(
        axes=(np.arange(float(n1)), np.arange(float(n2))),
        weights=(w0 / w0.sum(), w1 / w1.sum()),
        values=rng.uniform(0.0, 2.0, size=(n1, n2)),
    )


def exact_root(kernel, points, p):
    m = oracles.enumerate_grid_sum_moment(
        kernel.values, kernel.weights, points, p
    )
    return m ** (1.0 / p)


class TestIndexSet:
    def test_validation(self):
        with pytest.raises(DomainError):
            bounds.IndexSet(points=())
        with pytest.raises(DomainError):
            bounds.IndexSet(points=((0, 1),))
        with pytest.raises(DomainError):
            bounds.IndexSet(points=((1, 1), (1, 2, 3)))

    def test_dedupe_and_order(self):
        L = bounds.IndexSet(points=((2, 1), (1, 1), (2, 1)))
        assert L.points == ((1, 1), (2, 1))
        assert L.size == 2

    def test_box_constructor(self):
        L = bounds.IndexSet.box((2, 3))
        assert L.size == 6
        assert L.box_sides == (2, 3)
        assert L.is_box
        with pytest.raises(DomainError):
            bounds.IndexSet.box((0, 3))
        with pytest.raises(TooLargeError):
            bounds.IndexSet.box((2000, 2000))

    def test_diagonal_geometry(self):
        L = bounds.IndexSet(points=((1, 1), (2, 2), (3, 3)))
        assert L.box_sides == (3, 3)
        assert L.box_size == 9
        assert not L.is_box

    def test_box_anchored_at_minima(self):
        # shifting the set must not inflate the circumscribed box
        L = bounds.IndexSet(points=((5, 7), (6, 8)))
        assert L.box_sides == (2, 2)
        assert L.box_size == 4


class TestTrivialBound:
    def test_constant(self):
        ker = kernels.preset_kernel("constant", n=6, weighting="linear")
        assert bounds.trivial_bound(ker, 2.0) == pytest.approx(1.0, rel=1e-13)

    def test_identity(self):
        ker = kernels.GridKernel(
            axes=(np.array([0.0, 1.0]),) * 2,
            weights=(np.array([0.5, 0.5]),) * 2,
            values=np.eye(2),
        )
        assert bounds.trivial_bound(ker, 2.0) == pytest.approx(
            math.sqrt(0.5), rel=1e-13
        )

    def test_rejects_small_p(self):
        ker = kernels.preset_kernel("constant", n=3)
        with pytest.raises(DomainError):
            bounds.trivial_bound(ker, 0.5)

    @given(seed=st.integers(0, 10_000), p=st.sampled_from([2.0, 3.0, 4.0]))
    @settings(max_examples=30, deadline=None)
    def test_dominates_exact_root(self, seed, p):
        rng = np.random.default_rng(seed)
        ker = small_kernel(rng)
        n1, n2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        pts = bounds.IndexSet.box((n1, n2)).points
        assert exact_root(ker, pts, p) <= bounds.trivial_bound(ker, p) * (1 + 1e-10)


class TestFactorizableBound:
    def test_constant_factors(self):
        t = iid_table(1.0, 1.0, 2.0, 10)
        assert bounds.factorizable_bound([t, t]) == pytest.approx(1.0, rel=1e-12)

    def test_exponential_anchor(self):
        # exp(1): mean 1, third moment 3! = 6; the averaged-sum bound per
        # coordinate settles at 5^(1/3) for n large, so the product is 5^(2/3)
        t = iid_table(1.0, 6.0, 3.0, 100)
        assert bounds.factorizable_bound([t, t]) == pytest.approx(
            5.0 ** (2.0 / 3.0), rel=1e-10
        )

    def test_single_sample_is_lp_norm(self):
        rng = np.random.default_rng(5)
        g = rng.uniform(0.1, 2.0, size=4)
        h = rng.uniform(0.1, 2.0, size=3)
        w0 = np.full(4, 0.25)
        w1 = np.full(3, 1.0 / 3.0)
        p = 3.0
        tg = iid_table(float(g @ w0), float((g ** p) @ w0), p, 1)
        th = iid_table(float(h @ w1), float((h ** p) @ w1), p, 1)
        rep = kernels.rank1_representation([g, h])
        ker = kernels.materialize(rep, axes=(np.arange(4.0), np.arange(3.0)), weights=(w0, w1))
        assert bounds.factorizable_bound([tg, th]) == pytest.approx(
            kernels.lp_norm(ker, p), rel=1e-12
        )

    def test_input_validation(self):
        with pytest.raises(DomainError):
            bounds.factorizable_bound([])
        with pytest.raises(DomainError):
            bounds.factorizable_bound(
                [iid_table(1.0, 2.0, 2.0, 3), iid_table(1.0, 2.0, 3.0, 3)]
            )


class TestWeightedThetaNorm:
    def test_single_term_reduces_to_factorizable(self):
        rng = np.random.default_rng(9)
        g = rng.uniform(0.1, 2.0, size=5)
        h = rng.uniform(0.1, 2.0, size=5)
        w = np.full(5, 0.2)
        p, n = 3.0, 7
        rep = kernels.rank1_representation([g, h])
        tg = iid_table(float(g @ w), float((g ** p) @ w), p, n)
        th = iid_table(float(h @ w), float((h ** p) @ w), p, n)
        assert bounds.weighted_theta_norm(rep, (w, w), p, (n, n)) == pytest.approx(
            bounds.factorizable_bound([tg, th]), rel=1e-12
        )

    def test_constant_representation(self):
        rep = kernels.rank1_representation([np.ones(3), np.ones(3)])
        w = np.full(3, 1.0 / 3.0)
        assert bounds.weighted_theta_norm(rep, (w, w), 2.0, (4, 9)) == pytest.approx(
            1.0, rel=1e-12
        )

    def test_two_term_hand_sum(self):
        from ubound.onedim import theta_bound_iid

        rng = np.random.default_rng(21)
        f0 = rng.uniform(0.0, 2.0, size=(2, 4))
        f1 = rng.uniform(0.0, 2.0, size=(2, 4))
        lam = np.diag([0.7, 0.4])
        rep = kernels.DegenerateRepresentation(lam=lam, factors=(f0, f1))
        w = np.full(4, 0.25)
        p, ns = 2.0, (3, 5)
        expect = 0.0
        for k in range(2):
            term = abs(lam[k, k])
            for f, n in zip((f0, f1), ns):
                m1 = float(f[k] @ w)
                mp = float((f[k] ** p) @ w)
                term *= theta_bound_iid(m1, mp, p, n).theta
            expect += term
        got = bounds.weighted_theta_norm(rep, (w, w), p, ns)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_rejects_signed_and_bad_shapes(self):
        signed = kernels.DegenerateRepresentation(
            lam=np.ones((1, 1)),
            factors=(np.array([[1.0, -1.0]]), np.ones((1, 2))),
        )
        w = np.array([0.5, 0.5])
        with pytest.raises(DomainError):
            bounds.weighted_theta_norm(signed, (w, w), 2.0, (2, 2))
        rep = kernels.rank1_representation([np.ones(2), np.ones(2)])
        with pytest.raises(DomainError):
            bounds.weighted_theta_norm(rep, (w, w), 2.0, (2,))
        with pytest.raises(DomainError):
            bounds.weighted_theta_norm(rep, (w, w), 2.0, (0, 2))
        with pytest.raises(DomainError):
            bounds.weighted_theta_norm(rep, (w, w), 1.5, (2, 2))


class TestWBound:
    def test_constant_kernel_is_exact(self):
        ker = kernels.preset_kernel("constant", n=6)
        bd = bounds.w_bound(ker, 2.0, (5, 5), m_max=2, seed=0)
        assert bd.chosen == pytest.approx(1.0, rel=1e-12)
        # the normalized sum of a constant kernel IS the constant
        pts = bounds.IndexSet.box((2, 2)).points
        assert exact_root(ker, pts, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_rank1_takes_factorizable_route(self):
        ker = kernels.preset_kernel("rank1", n=8, weighting="geometric")
        bd = bounds.w_bound(ker, 3.0, (10, 10), m_max=3, seed=0)
        assert bd.factorizable is not None
        assert bd.chosen <= bd.factorizable + 1e-8

    def test_chosen_never_exceeds_trivial(self):
        for name in kernels.PRESET_NAMES:
            ker = kernels.preset_kernel(name, n=8)
            bd = bounds.w_bound(ker, 2.0, (6, 6), m_max=2, seed=0)
            assert bd.chosen <= bd.trivial * (1 + 1e-12)

    def test_composite_terms_consistent(self):
        ker = kernels.preset_kernel("minxy", n=8, weighting="linear")
        bd = bounds.w_bound(ker, 2.0, (5, 5), m_max=3, seed=0)
        assert bd.w_composite is not None
        assert len(bd.per_degree) == 3
        assert bd.w_composite == pytest.approx(
            min(t.total for t in bd.per_degree), rel=1e-15
        )
        assert bd.chosen == pytest.approx(
            min(v for v in (bd.trivial, bd.factorizable, bd.weighted_theta, bd.w_composite) if v is not None),
            rel=1e-15,
        )

    def test_monotone_in_p(self):
        for name in ("rank2", "minxy", "expxy"):
            ker = kernels.preset_kernel(name, n=8)
            got = [
                bounds.w_bound(ker, p, (8, 8), m_max=2, seed=0).chosen
                for p in (2.0, 3.0, 4.0)
            ]
            assert got[0] <= got[1] * (1 + 1e-9)
            assert got[1] <= got[2] * (1 + 1e-9)

    def test_dominates_exact_root(self):
        for seed in range(6):
            rng = np.random.default_rng(seed)
            ker = small_kernel(rng)
            for p in (2.0, 3.0):
                for ns in ((2, 2), (3, 2)):
                    bd = bounds.w_bound(ker, p, ns, m_max=2, seed=seed)
                    pts = bounds.IndexSet.box(ns).points
                    assert exact_root(ker, pts, p) <= bd.chosen * (1 + 1e-10)

    def test_input_validation(self):
        ker = kernels.preset_kernel("constant", n=4)
        with pytest.raises(DomainError):
            bounds.w_bound(ker, 1.5, (2, 2))
        with pytest.raises(DomainError):
            bounds.w_bound(ker, 2.0, (2,))
        with pytest.raises(DomainError):
            bounds.w_bound(ker, 2.0, (2, 0))


class TestNonrectBound:
    def test_full_box_matches_w_bound(self):
        ker = kernels.preset_kernel("rank2", n=6)
        L = bounds.IndexSet.box((4, 4))
        direct = bounds.w_bound(ker, 2.0, (4, 4), m_max=2, seed=0).chosen
        assert bounds.nonrect_bound(L, ker, 2.0, m_max=2, seed=0) == pytest.approx(
            direct, rel=1e-14
        )

    def test_diagonal_pays_ratio_three(self):
        ker = kernels.preset_kernel("expxy", n=6)
        L = bounds.IndexSet(points=((1, 1), (2, 2), (3, 3)))
        direct = bounds.w_bound(ker, 2.0, (3, 3), m_max=2, seed=0).chosen
        assert bounds.nonrect_bound(L, ker, 2.0, m_max=2, seed=0) == pytest.approx(
            3.0 * direct, rel=1e-14
        )

    def test_l_shape_ratio(self):
        ker = kernels.preset_kernel("rank1", n=6)
        pts = ((1, 1), (2, 1), (1, 2), (1, 3), (2, 3))
        L = bounds.IndexSet(points=pts)
        direct = bounds.w_bound(ker, 2.0, (2, 3), m_max=2, seed=0).chosen
        assert bounds.nonrect_bound(L, ker, 2.0, m_max=2, seed=0) == pytest.approx(
            6.0 / 5.0 * direct, rel=1e-14
        )

    def test_expand_never_hurts(self):
        ker = kernels.preset_kernel("minxy", n=8)
        L = bounds.IndexSet(points=((1, 1), (2, 2), (3, 3), (3, 1)))
        base = bounds.nonrect_bound(L, ker, 2.0, m_max=2, seed=0, expand=0)
        grown = bounds.nonrect_bound(L, ker, 2.0, m_max=2, seed=0, expand=1)
        assert grown <= base * (1 + 1e-12)

    def test_dominates_exact_root(self):
        rng = np.random.default_rng(17)
        ker = small_kernel(rng)
        L = bounds.IndexSet(points=((1, 1), (2, 2), (2, 1)))
        for p in (2.0, 3.0):
            exact = exact_root(ker, L.points, p)
            assert exact <= bounds.nonrect_bound(L, ker, p, m_max=2, seed=0) * (
                1 + 1e-10
            )

    def test_dimension_mismatch(self):
        ker = kernels.preset_kernel("constant", n=4)
        with pytest.raises(DomainError):
            bounds.nonrect_bound(bounds.IndexSet(points=((1, 1, 1),)), ker, 2.0)


class TestProjectiveGrowthBound:
    def test_unit_norm_anchor(self):
        # p = e^2 makes the growth factor (e/2)^2 per coordinate
        rep = kernels.rank1_representation([np.ones(4), np.ones(4)])
        w = (np.full(4, 0.25), np.full(4, 0.25))
        got = bounds.projective_growth_bound(rep, w, math.e ** 2)
        assert got == pytest.approx(math.e ** 2 / 9.0, rel=1e-13)

    def test_homogeneous_in_lambda(self):
        rng = np.random.default_rng(2)
        f0 = rng.uniform(0.0, 2.0, size=(2, 3))
        f1 = rng.uniform(0.0, 2.0, size=(2, 3))
        w = (np.full(3, 1.0 / 3.0),) * 2
        lam = np.diag([1.0, 0.5])
        rep = kernels.DegenerateRepresentation(lam=lam, factors=(f0, f1))
        scaled = kernels.DegenerateRepresentation(lam=3.0 * lam, factors=(f0, f1))
        a = bounds.projective_growth_bound(rep, w, 4.0)
        b = bounds.projective_growth_bound(scaled, w, 4.0)
        assert b == pytest.approx(3.0 * a, rel=1e-12)

    def test_three_coordinate_exponent(self):
        rep = kernels.rank1_representation([np.ones(2)] * 3)
        w = (np.array([0.5, 0.5]),) * 3
        p = 20.0
        expect = ((2.0 / 3.0) * p / (math.e * math.log(p))) ** 3
        assert bounds.projective_growth_bound(rep, w, p) == pytest.approx(
            expect, rel=1e-13
        )

    def test_domain_errors(self):
        rep = kernels.rank1_representation([np.ones(2), np.ones(2)])
        w = (np.array([0.5, 0.5]),) * 2
        with pytest.raises(DomainError):
            bounds.projective_growth_bound(rep, w, 2.0)
        signed = kernels.DegenerateRepresentation(
            lam=np.ones((1, 1)),
            factors=(np.array([[1.0, -1.0]]), np.ones((1, 2))),
        )
        with pytest.raises(DomainError):
            bounds.projective_growth_bound(signed, w, 5.0)
