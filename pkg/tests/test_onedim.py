"""Tests for the one-dimensional moment bound routes."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ubound import onedim
from ubound.errors import DomainError, InfeasibleClassWarning


def random_config(rng, n_max=6, support_max=3):
    """One random independent family of finite nonnegative variables."""
    n = int(rng.integers(1, n_max + 1))
    atoms, probs = [], []
    for _ in range(n):
        k = int(rng.integers(1, support_max + 1))
        a = rng.uniform(0.0, 3.0, size=k)
        w = rng.dirichlet([1.0] * k) if k > 1 else [1.0]
        atoms.append([float(x) for x in a])
        probs.append([float(x) for x in w])
    return atoms, probs


def moments_of(atoms, probs, p):
    m1 = [sum(a * w for a, w in zip(av, pv)) for av, pv in zip(atoms, probs)]
    mp = [sum(a**p * w for a, w in zip(av, pv)) for av, pv in zip(atoms, probs)]
    return m1, mp


class TestMomentTable:
    def test_validation(self):
        with pytest.raises(DomainError):
            onedim.MomentTable(p=1.5, m1=(1.0,), mp=(1.0,))
        with pytest.raises(DomainError):
            onedim.MomentTable(p=2.0, m1=(1.0, 1.0), mp=(1.0,))
        with pytest.raises(DomainError):
            onedim.MomentTable(p=2.0, m1=(), mp=())
        with pytest.raises(DomainError):
            onedim.MomentTable(p=2.0, m1=(-0.1,), mp=(1.0,))
        # Lyapunov: m1 = 2 > 1 = mp^(1/2)
        with pytest.raises(DomainError):
            onedim.MomentTable(p=2.0, m1=(2.0,), mp=(1.0,))

    def test_iid_table(self):
        t = onedim.iid_table(1.0, 6.0, 3.0, 4)
        assert t.n == 4
        assert t.m1 == (1.0,) * 4


class TestClosedFormRoutes:
    def test_triangle_exponential_pair(self):
        # two exponential(1) variables at p = 3: 2 * Gamma(4)^(1/3)
        t = onedim.iid_table(1.0, 6.0, 3.0, 2)
        assert onedim.triangle_bound(t) == pytest.approx(
            2.0 * 6.0 ** (1.0 / 3.0), rel=1e-12
        )

    def test_rosenthal_bernoulli_tenth(self):
        # ten Bernoulli(1/10): sum mp = 1 = (sum m1)^p, constant B(2,1) = 2
        t = onedim.iid_table(0.1, 0.1, 2.0, 10)
        bound = onedim.rosenthal_bound(t)
        assert bound == pytest.approx(2.0, rel=1e-12)
        exact = oracles.enumerate_sum_moment(
            [[0.0, 1.0]] * 10, [[0.9, 0.1]] * 10, 2
        )
        assert exact == pytest.approx(1.9, rel=1e-12)
        assert bound >= exact
        assert bound / exact <= 1.12

    def test_rosenthal_ratio_improves_with_n(self):
        ratios = []
        for n in (10, 100, 1000):
            t = onedim.iid_table(1.0 / n, 1.0 / n, 2.0, n)
            exact = 1.0 + (n - 1.0) / n  # E (sum Bern(1/n))^2 closed form
            ratios.append(onedim.rosenthal_bound(t) / exact)
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] < 1.002

    def test_rosenthal_scale_covariance(self):
        t = onedim.MomentTable(p=3.0, m1=(0.5, 1.0), mp=(2.0, 9.0))
        c = 1.7
        scaled = onedim.MomentTable(
            p=3.0,
            m1=tuple(c * v for v in t.m1),
            mp=tuple(c**3 * v for v in t.mp),
        )
        assert onedim.rosenthal_bound(scaled) == pytest.approx(
            c**3 * onedim.rosenthal_bound(t), rel=1e-12
        )

    def test_theta_exponential_hundred(self):
        # 100 exponential(1) copies at p = 3: z = 6^(1/3), v = 5^(1/3)
        bd = onedim.theta_bound_iid(1.0, 6.0, 3.0, 100)
        assert bd.z == pytest.approx(6.0 ** (1.0 / 3.0), rel=1e-12)
        assert bd.v == pytest.approx(5.0 ** (1.0 / 3.0), rel=1e-12)
        assert bd.theta == bd.v
        table = onedim.iid_table(1.0, 6.0, 3.0, 100)
        bd2 = onedim.theta_bound(table)
        assert bd2.z == pytest.approx(bd.z, rel=1e-12)
        assert bd2.v == pytest.approx(bd.v, rel=1e-12)

    def test_theta_single_variable_prefers_triangle(self):
        # n = 1: v carries the B(p,1)^(1/p) >= 1 factor, z does not
        bd = onedim.theta_bound_iid(1.0, 6.0, 3.0, 1)
        assert bd.theta == bd.z

    def test_best_mean_bound(self):
        t1 = onedim.iid_table(1.0, 6.0, 3.0, 10)
        t2 = onedim.iid_table(1.0, 6.0, 3.0, 1)
        best = onedim.best_mean_bound([t1, t2])
        assert best == pytest.approx(
            max(onedim.theta_bound(t1).theta, onedim.theta_bound(t2).theta),
            rel=1e-12,
        )
        with pytest.raises(DomainError):
            onedim.best_mean_bound([])

    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_theta_dominates_exact_root(self, seed):
        import numpy as np

        rng = np.random.default_rng(seed)
        atoms, probs = random_config(rng)
        p = float(rng.choice([2.0, 3.0, 4.0]))
        n = len(atoms)
        m1, mp = moments_of(atoms, probs, p)
        table = onedim.MomentTable(p=p, m1=tuple(m1), mp=tuple(mp))
        exact_sum = oracles.enumerate_sum_moment(atoms, probs, p)
        exact_root = (exact_sum ** (1.0 / p)) / n
        assert exact_root <= onedim.theta_bound(table).theta * (1.0 + 1e-9)
        assert exact_sum <= onedim.rosenthal_bound(table) * (1.0 + 1e-9)


class TestExtremalClass:
    def test_unit_budgets(self):
        # a = b = 1 at p = 2: mu = 1 and the sup is B(2,1) = 2
        assert onedim.extremal_class_supremum(1.0, 1.0, 2.0) == pytest.approx(
            2.0, rel=1e-12
        )

    def test_single_deterministic_variable(self):
        # eta = c surely: a = c, b = c^p, sup = c^p B(p, 1)
        for c, p in [(0.5, 2.0), (2.0, 3.0)]:
            got = onedim.extremal_class_supremum(c, c**p, p)
            assert got == pytest.approx(
                c**p * onedim.bell.bell_value(p, 1.0), rel=1e-12
            )

    def test_infeasible_single_variable_warns(self):
        with pytest.warns(InfeasibleClassWarning):
            onedim.extremal_class_supremum(1.0, 0.5, 2.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            onedim.extremal_class_supremum(0.0, 1.0, 2.0)
        with pytest.raises(DomainError):
            onedim.extremal_class_supremum(1.0, 1.0, 1.0)

    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_dominates_every_class_member(self, seed):
        import numpy as np

        rng = np.random.default_rng(seed + 777)
        atoms, probs = random_config(rng)
        p = float(rng.choice([2.0, 3.0, 4.0]))
        m1, mp = moments_of(atoms, probs, p)
        a, b = sum(m1), sum(mp)
        if a <= 1e-9 or b <= 1e-9:
            return
        exact = oracles.enumerate_sum_moment(atoms, probs, p)
        import warnings as _w

        with _w.catch_warnings():
            _w.simplefilter("ignore", InfeasibleClassWarning)
            sup = onedim.extremal_class_supremum(a, b, p)
        assert exact <= sup * (1.0 + 1e-9)
