"""Chaos-expansion kernel closed forms, their majorant, and the quadrature oracle.

Oracles: the library's adaptive quadrature oracle (for the defining
integral relations), independent hand-derived antiderivatives for the
clipped strip domains (``kernel_refs``), and exact arithmetic identities
evaluated in-test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from silt import (
    KernelPoint,
    ModelParams,
    MultiIndex,
    PreconditionError,
    QuadratureError,
    TimeRectangle,
    cut_kernel,
    gap_kernel,
    kernel_quadrature_oracle,
    phi_eps_kernel,
    phi_kernel,
    psi_coefficient,
    rho_bound,
    rho_kernel,
)

from conftest import TWO_PI, assert_close
from kernel_refs import corner_high_profile, corner_low_profile

FOUR_PI = 4.0 * math.pi


def canon(n: int, d: int) -> MultiIndex:
    return MultiIndex.canonical(n, d)


def phi_domain(params: ModelParams, p: KernelPoint) -> TimeRectangle:
    return TimeRectangle(0.0, p.u, p.v, params.T)


def dark_domain(params: ModelParams, lam: float, p: KernelPoint) -> TimeRectangle:
    return TimeRectangle(
        max(0.0, p.v - lam),
        p.u,
        p.v,
        min(params.T, p.u + lam),
        gap=lam,
        gap_side="below",
    )


def light_domain(params: ModelParams, lam: float, p: KernelPoint) -> TimeRectangle:
    return TimeRectangle(0.0, p.u, p.v, params.T, gap=lam, gap_side="above")


class TestPsiCoefficient:
    def test_order_zero(self):
        v = psi_coefficient(MultiIndex((0, 0)), 2, 0.0, 1.0)
        assert_close(v, 1.0 / TWO_PI, 1e-15)
        assert_close(v, 0.1591549, 1e-6)

    def test_order_one(self):
        v = psi_coefficient(MultiIndex((1, 0)), 2, 0.25, 0.75)
        assert_close(v, -0.5 / TWO_PI * 0.5**-2.0, 1e-15)
        assert_close(v, -0.3183099, 1e-6)

    def test_factorial_normalization_exact_ratio(self):
        # Same total order, different multi-index: values differ by the
        # exact ratio of the index factorials, here 3!/(2! 1!) = 3.
        a = psi_coefficient(MultiIndex((3, 0)), 2, 0.0, 0.7)
        b = psi_coefficient(MultiIndex((2, 1)), 2, 0.0, 0.7)
        assert_close(b, 3.0 * a, 1e-15)

    @given(
        st.integers(1, 3),
        st.integers(0, 4),
        st.floats(0.05, 2.0),
    )
    def test_sign_alternates_with_order(self, d, n, tau):
        v = psi_coefficient(canon(n, d), d, 0.0, tau)
        assert math.copysign(1.0, v) == (-1.0) ** n

    def test_coincident_times_rejected(self):
        with pytest.raises(PreconditionError):
            psi_coefficient(MultiIndex((1, 0)), 2, 0.5, 0.5)
        with pytest.raises(PreconditionError):
            psi_coefficient(MultiIndex((1, 0)), 2, 0.7, 0.5)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(PreconditionError):
            psi_coefficient(MultiIndex((1,)), 2, 0.0, 1.0)


class TestPhiKernel:
    P2 = ModelParams(d=2, T=1.0)

    def test_log_branch_closed_form(self):
        v = phi_kernel(canon(1, 2), self.P2, KernelPoint(0.25, 0.5))
        expected = -(math.log(0.5) + math.log(0.75) - math.log(0.25)) / FOUR_PI
        assert_close(v, expected, 1e-14)
        assert_close(v, -0.0322659, 1e-5)

    def test_vanishes_toward_full_window(self):
        # All four log terms cancel as (u, v) -> (0, T).
        vals = [
            abs(phi_kernel(canon(1, 2), self.P2, KernelPoint(e, 1.0 - e)))
            for e in (1e-2, 1e-4, 1e-6, 1e-8)
        ]
        assert vals == sorted(vals, reverse=True)
        assert vals[-1] < 1e-7

    def test_d1_oracle_agreement(self):
        p1 = ModelParams(d=1, T=1.0)
        point = KernelPoint(0.3, 0.6)
        v = phi_kernel(MultiIndex((1,)), p1, point)
        ref = kernel_quadrature_oracle(
            MultiIndex((1,)), p1, phi_domain(p1, point), 1e-10
        )
        assert_close(v, ref, 1e-8)

    @pytest.mark.parametrize("d,n", [(1, 2), (2, 2), (2, 3), (3, 1), (3, 3)])
    def test_dominant_sign_at_small_spread(self, d, n):
        # For d + 2n > 4 the (v-u)^{2-beta} term dominates at small
        # spread with positive coefficient over (beta-1)(beta-2) > 0,
        # so the kernel carries the sign (-1)^n of the prefactor.
        pm = ModelParams(d=d, T=1.0)
        v = phi_kernel(canon(n, d), pm, KernelPoint(0.5, 0.5 + 1e-6))
        assert math.copysign(1.0, v) == (-1.0) ** n

    def test_pole_at_coincident_arguments_rejected(self):
        with pytest.raises(PreconditionError):
            phi_kernel(canon(1, 2), self.P2, KernelPoint(0.5, 0.5))
        with pytest.raises(PreconditionError):
            phi_kernel(canon(2, 3), ModelParams(d=3, T=1.0), KernelPoint(0.5, 0.5))

    def test_boundary_arguments_rejected(self):
        with pytest.raises(PreconditionError):
            phi_kernel(canon(1, 2), self.P2, KernelPoint(0.0, 0.5))
        with pytest.raises(PreconditionError):
            phi_kernel(canon(1, 2), self.P2, KernelPoint(0.5, 1.0))

    def test_order_zero_rejected(self):
        with pytest.raises(PreconditionError):
            phi_kernel(MultiIndex((0, 0)), self.P2, KernelPoint(0.25, 0.5))

    def test_shallow_truncation_rejected(self):
        # d = 5 needs 2n > 3, so n = 1 is out.
        with pytest.raises(PreconditionError):
            phi_kernel(canon(1, 5), ModelParams(d=5, T=1.0, N=2), KernelPoint(0.2, 0.4))

    def test_multi_index_collapse_exact(self):
        # Kernels depend on the multi-index only through n and n!.
        pm = ModelParams(d=3, T=1.0)
        point = KernelPoint(0.3, 0.4)
        a = phi_kernel(MultiIndex((2, 0, 0)), pm, point)
        b = phi_kernel(MultiIndex((1, 1, 0)), pm, point)
        assert_close(b, 2.0 * a, 1e-15)


class TestPhiEpsKernel:
    P2 = ModelParams(d=2, T=1.0)

    def test_coincident_arguments_finite(self):
        v = phi_eps_kernel(canon(1, 2), self.P2, 0.01, KernelPoint(0.5, 0.5))
        expected = -(
            math.log(0.51) + math.log(0.51) - math.log(0.01) - math.log(1.01)
        ) / FOUR_PI
        assert_close(v, expected, 1e-14)
        assert math.isfinite(v)

    def test_small_mollifier_limit_recovers_phi(self):
        point = KernelPoint(0.3, 0.7)
        target = phi_kernel(canon(1, 2), self.P2, point)
        errs = [
            abs(phi_eps_kernel(canon(1, 2), self.P2, eps, point) - target)
            for eps in (1e-2, 1e-4, 1e-6, 1e-8)
        ]
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 1e-7 * abs(target)

    def test_integrand_domination_on_grid(self):
        # |phi_eps| <= |phi| pointwise for d + 2n > 4: the eps-shifted
        # integrand is dominated by the unshifted one.  1050 grid points.
        cases = [(1, 2), (2, 2), (2, 3), (3, 1), (3, 2)]
        grid = np.linspace(0.0, 1.0, 22)[1:-1]
        checked = 0
        for d, n in cases:
            pm = ModelParams(d=d, T=1.0)
            for eps in (0.01, 0.1):
                for i, u in enumerate(grid):
                    for v in grid[i + 1 :: 2]:
                        point = KernelPoint(float(u), float(v))
                        lhs = abs(phi_eps_kernel(canon(n, d), pm, eps, point))
                        rhs = abs(phi_kernel(canon(n, d), pm, point))
                        assert lhs <= rhs * (1.0 + 1e-12)
                        checked += 1
        assert checked >= 1000

    def test_nonpositive_mollifier_rejected(self):
        with pytest.raises(PreconditionError):
            phi_eps_kernel(canon(1, 2), self.P2, 0.0, KernelPoint(0.3, 0.7))
        with pytest.raises(PreconditionError):
            phi_eps_kernel(canon(1, 2), self.P2, -0.1, KernelPoint(0.3, 0.7))


class TestRhoKernel:
    P2 = ModelParams(d=2, T=1.0)

    def test_zero_outside_support(self):
        for w in (0.1, 0.1000000001, 0.3):
            v = rho_kernel(canon(1, 2), self.P2, 0.1, KernelPoint(0.5, 0.5 + w))
            assert v == 0.0

    @given(st.integers(1, 3), st.integers(1, 3), st.floats(0.3, 0.6))
    def test_vanishes_at_strip_boundary(self, d, n, u):
        # Build the gap from the realized float spread so v - u == lam
        # holds exactly in floating point.
        point = KernelPoint(u, u + 0.1)
        lam = point.width
        v = rho_kernel(canon(n, d), ModelParams(d=d, T=1.0), lam, point)
        assert v == 0.0

    def test_interior_log_closed_form(self):
        # (1/4 pi)(ln 0.05 - ln 0.1 + 0.5) = (1/4 pi)(0.5 - ln 2)
        #                                  = -0.0153701642651890...,
        # certified against the quadrature oracle below.  (7-digit
        # roundings seen elsewhere, e.g. -0.0153475, misreport the
        # 4th-6th digits of this same expression.)
        v = rho_kernel(canon(1, 2), self.P2, 0.1, KernelPoint(0.40, 0.45))
        assert_close(v, (0.5 - math.log(2.0)) / FOUR_PI, 1e-14)
        assert_close(v, -1.5370164265189e-2, 1e-12)
        ref = kernel_quadrature_oracle(
            canon(1, 2), self.P2, dark_domain(self.P2, 0.1, KernelPoint(0.40, 0.45)), 1e-11
        )
        assert_close(v, ref, 1e-9)

    def test_interior_power_case_oracle(self):
        point = KernelPoint(0.5, 0.55)
        v = rho_kernel(MultiIndex((2, 0)), self.P2, 0.1, point)
        ref = kernel_quadrature_oracle(
            MultiIndex((2, 0)), self.P2, dark_domain(self.P2, 0.1, point), 1e-10
        )
        assert_close(v, ref, 1e-7)

    @pytest.mark.parametrize(
        "d,n,u,v",
        [
            (2, 1, 0.02, 0.06),  # clipped by t = 0
            (2, 1, 0.96, 0.99),  # clipped by t = T
            (1, 1, 0.01, 0.05),
            (3, 2, 0.97, 0.98),
        ],
    )
    def test_clipped_domains_match_reference_antiderivatives(self, d, n, u, v):
        lam = 0.1
        pm = ModelParams(d=d, T=1.0)
        nidx = canon(n, d)
        value = rho_kernel(nidx, pm, lam, KernelPoint(u, v))
        if v < lam:
            ref = corner_low_profile(n, d, lam, u, v)
        else:
            ref = corner_high_profile(n, d, pm.T, lam, u, v)
        assert_close(value, float(ref) / nidx.factorial_product(), 1e-8)

    def test_clipped_domains_reflection_symmetry(self):
        # The t = T corner is the time reflection of the t = 0 corner.
        lam = 0.1
        a = rho_kernel(canon(1, 2), self.P2, lam, KernelPoint(0.03, 0.07))
        b = rho_kernel(canon(1, 2), self.P2, lam, KernelPoint(0.93, 0.97))
        assert_close(a, b, 1e-9)

    def test_gap_width_validated(self):
        point = KernelPoint(0.4, 0.45)
        for lam in (0.0, -0.1, 0.5, 0.6, 1.0):
            with pytest.raises(PreconditionError):
                rho_kernel(canon(1, 2), self.P2, lam, point)


class TestGapKernel:
    P2 = ModelParams(d=2, T=1.0)

    def test_equals_phi_outside_strip(self):
        lam = 0.1
        for w in (0.12, 0.2, 0.3):
            point = KernelPoint(0.4, 0.4 + w)
            assert gap_kernel(canon(1, 2), self.P2, lam, point) == phi_kernel(
                canon(1, 2), self.P2, point
            )

    def test_equals_phi_at_exact_strip_boundary(self):
        # The boundary spread belongs to the phi region (Heaviside(0) = 0).
        point = KernelPoint(0.4, 0.5)
        assert gap_kernel(
            canon(1, 2), self.P2, point.width, point
        ) == phi_kernel(canon(1, 2), self.P2, point)

    def test_equals_phi_minus_rho_inside_strip(self):
        lam = 0.1
        for d, n, w in [(2, 1, 0.05), (1, 1, 0.03), (3, 2, 0.08), (2, 2, 0.01)]:
            pm = ModelParams(d=d, T=1.0)
            point = KernelPoint(0.45, 0.45 + w)
            fused = gap_kernel(canon(n, d), pm, lam, point)
            parts = phi_kernel(canon(n, d), pm, point) - rho_kernel(
                canon(n, d), pm, lam, point
            )
            assert_close(fused, parts, 1e-10)

    def test_continuous_at_strip_boundary(self):
        lam = 0.1
        h = 1e-12
        for u in np.linspace(0.05, 0.85, 50):
            inside = gap_kernel(
                canon(1, 2), self.P2, lam, KernelPoint(float(u), float(u) + lam - h)
            )
            outside = gap_kernel(
                canon(1, 2), self.P2, lam, KernelPoint(float(u), float(u) + lam + h)
            )
            assert abs(inside - outside) < 1e-10

    def test_singularity_cancels_at_vanishing_spread(self):
        # phi and rho both blow up as v -> u; their difference tends to
        # the finite limit -(1/4 pi)(ln u + ln(T-u) - ln T - ln Lambda + 1).
        lam, u = 0.1, 0.5
        limit = -(
            math.log(0.5) + math.log(0.5) - math.log(lam) + 1.0
        ) / FOUR_PI
        assert_close(limit, -0.15249357, 1e-7)
        errs = []
        for w in (1e-3, 1e-5, 1e-7, 1e-9):
            v = gap_kernel(canon(1, 2), self.P2, lam, KernelPoint(u, u + w))
            assert math.isfinite(v)
            errs.append(abs(v - limit))
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 1e-8

    def test_d1_light_domain_oracle(self):
        pm = ModelParams(d=1, T=1.0)
        lam = 0.05
        for point in (KernelPoint(0.4, 0.42), KernelPoint(0.3, 0.7)):
            v = gap_kernel(MultiIndex((1,)), pm, lam, point)
            ref = kernel_quadrature_oracle(
                MultiIndex((1,)), pm, light_domain(pm, lam, point), 1e-10
            )
            assert_close(v, ref, 1e-7)

    def test_gap_width_validated(self):
        with pytest.raises(PreconditionError):
            gap_kernel(canon(1, 2), self.P2, 0.5, KernelPoint(0.4, 0.45))


class TestCutKernel:
    P2 = ModelParams(d=2, T=1.0)

    def test_zero_inside_cut(self):
        assert cut_kernel(canon(1, 2), self.P2, 0.1, KernelPoint(0.4, 0.45)) == 0.0
        # The boundary spread itself is cut (Heaviside(0) = 0).
        assert cut_kernel(canon(1, 2), self.P2, 0.1, KernelPoint(0.4, 0.5)) == 0.0

    def test_equals_phi_beyond_cut(self):
        for w in (0.11, 0.3, 0.6):
            point = KernelPoint(0.2, 0.2 + w)
            assert cut_kernel(canon(1, 2), self.P2, 0.1, point) == phi_kernel(
                canon(1, 2), self.P2, point
            )

    def test_small_cut_recovers_phi(self):
        point = KernelPoint(0.3, 0.7)
        assert cut_kernel(canon(1, 2), self.P2, 1e-9, point) == phi_kernel(
            canon(1, 2), self.P2, point
        )


class TestQuadratureOracle:
    P2 = ModelParams(d=2, T=1.0)

    def test_defining_relation_for_phi(self):
        point = KernelPoint(0.25, 0.5)
        ref = kernel_quadrature_oracle(
            MultiIndex((1, 0)), self.P2, phi_domain(self.P2, point), 1e-10
        )
        assert_close(phi_kernel(MultiIndex((1, 0)), self.P2, point), ref, 1e-9)

    def test_empty_domain_is_zero(self):
        # Zero-width time range.
        empty = TimeRectangle(0.3, 0.3, 0.5, 0.9)
        assert kernel_quadrature_oracle(canon(1, 2), self.P2, empty, 1e-9) == 0.0
        # Nonempty rectangle emptied by the dark-side constraint.
        dark = TimeRectangle(0.0, 0.2, 0.9, 1.0, gap=0.1, gap_side="below")
        assert dark.is_empty
        assert kernel_quadrature_oracle(canon(1, 2), self.P2, dark, 1e-9) == 0.0

    def test_epsilon_shifted_integrand(self):
        point = KernelPoint(0.5, 0.5)
        ref = kernel_quadrature_oracle(
            canon(1, 2), self.P2, phi_domain(self.P2, point), 1e-10, eps=0.01
        )
        assert_close(
            phi_eps_kernel(canon(1, 2), self.P2, 0.01, point), ref, 1e-9
        )

    def test_parameters_validated(self):
        dom = TimeRectangle(0.0, 0.3, 0.5, 1.0)
        with pytest.raises(PreconditionError):
            kernel_quadrature_oracle(canon(1, 2), self.P2, dom, 0.0)
        with pytest.raises(PreconditionError):
            kernel_quadrature_oracle(canon(1, 2), self.P2, dom, 1e-9, eps=-0.01)

    def test_unattainable_tolerance_reported(self):
        dom = TimeRectangle(0.0, 0.3, 0.5, 1.0)
        with pytest.raises(QuadratureError):
            kernel_quadrature_oracle(canon(1, 2), self.P2, dom, 1e-16)


class TestRhoBound:
    def test_log_branch_value(self):
        b = rho_bound(canon(1, 2), 2, KernelPoint(0.4, 0.45))
        assert_close(b, abs(math.log(0.05)) / FOUR_PI, 1e-14)
        assert_close(b, 0.2384, 2e-4)

    @given(
        st.sampled_from([(1, 2), (2, 1), (2, 2), (3, 1), (3, 3)]),
        st.floats(1e-6, 0.9),
    )
    def test_nonnegative(self, dn, w):
        d, n = dn
        assert rho_bound(canon(n, d), d, KernelPoint(0.0, w)) >= 0.0

    def test_log_branch_domain_restricted(self):
        with pytest.raises(PreconditionError):
            rho_bound(canon(1, 2), 2, KernelPoint(0.0, 1.0))
        with pytest.raises(PreconditionError):
            rho_bound(canon(1, 2), 2, KernelPoint(0.0, 1.5))

    def test_inapplicable_index_combination_rejected(self):
        # d = 1, n = 1 has beta = 3/2 < 2: the power-form right-hand
        # side is negative there and bounds nothing.
        with pytest.raises(PreconditionError):
            rho_bound(MultiIndex((1,)), 1, KernelPoint(0.4, 0.45))

    def test_degenerate_point_rejected(self):
        with pytest.raises(PreconditionError):
            rho_bound(canon(1, 2), 2, KernelPoint(0.4, 0.4))

    def test_majorizes_rho_randomized(self):
        rng = np.random.default_rng(20260822)
        cases = [(2, 1), (2, 2), (3, 1), (1, 2), (3, 2)]
        pm = {d: ModelParams(d=d, T=1.0) for d in (1, 2, 3)}
        for _ in range(400):
            d, n = cases[rng.integers(len(cases))]
            lam = float(rng.uniform(0.02, 0.45))
            u = float(rng.uniform(0.0, 1.0 - 1e-6))
            w = float(rng.uniform(1e-6, lam * 0.999))
            if u + w >= 1.0:
                continue
            point = KernelPoint(u, u + w)
            value = rho_kernel(canon(n, d), pm[d], lam, point)
            bound = rho_bound(canon(n, d), d, point)
            assert abs(value) <= bound * (1.0 + 1e-12)

    def test_majorizes_rho_in_clipped_domains(self):
        # Clipped-domain values are smaller in magnitude than interior
        # ones at the same spread, so the interior bound still covers them.
        rng = np.random.default_rng(7)
        pm = ModelParams(d=2, T=1.0)
        lam = 0.1
        for _ in range(25):
            w = float(rng.uniform(1e-4, 0.9 * lam))
            if rng.random() < 0.5:
                v = float(rng.uniform(w * 1.001, lam * 0.999))
                point = KernelPoint(v - w, v)  # clipped by t = 0
            else:
                u = float(rng.uniform(1.0 - lam * 0.999, 1.0 - w * 1.001))
                point = KernelPoint(u, u + w)  # clipped by t = T
            value = rho_kernel(canon(1, 2), pm, lam, point)
            assert abs(value) <= rho_bound(canon(1, 2), 2, point) * (1.0 + 1e-9)


class TestStructuralProperties:
    @given(
        st.integers(1, 3),
        st.integers(1, 3),
        st.floats(0.05, 0.4),
        st.floats(0.01, 0.99),
        st.floats(0.0, 0.5),
    )
    @settings(max_examples=40)
    def test_support_and_identity_outside_strip(self, d, n, lam, u, w):
        pm = ModelParams(d=d, T=1.0)
        assume(u + w < 1.0 - 1e-9)
        assume(0.0 < u)
        assume(w > 1e-12)
        point = KernelPoint(u, u + w)
        if point.width >= lam:
            assert rho_kernel(canon(n, d), pm, lam, point) == 0.0
            assert gap_kernel(canon(n, d), pm, lam, point) == phi_kernel(
                canon(n, d), pm, point
            )
        else:
            assert cut_kernel(canon(n, d), pm, lam, point) == 0.0
