import io
import math

import mpmath
import numpy as np
import pytest

from ballcomp import boundary, kernel, lfm
from ballcomp.errors import IndexOutOfRange, InvalidParams, NonConvergent, OutsideBall
from ballcomp.space import SpaceSpec

from conftest import ball_points

E1 = np.array([1, 0], dtype=complex)


def quotient_oracle(r, dps=50):
    """id vs z/2 at (r, 0) on H^2(B_2), evaluated in high precision."""
    mpmath.mp.dps = dps
    r = mpmath.mpf(r)
    one = 1 - r ** 2
    return 1 + (one / (1 - r ** 2 / 4)) ** 2 - 2 * (one / (1 - r ** 2 / 2)) ** 2


class TestKernelEval:
    def test_origin(self, rng, hardy2):
        for w in ball_points(rng, 2, 5):
            assert kernel.kernel_eval(np.zeros(2), w, hardy2) == pytest.approx(1.0)

    def test_hardy_value(self, hardy2):
        z = np.array([0.5, 0])
        assert kernel.kernel_eval(z, z, hardy2) == pytest.approx(16 / 9, abs=1e-15)

    def test_bergman_orthogonal(self):
        assert kernel.kernel_eval(np.array([0.5, 0]), np.zeros(2), SpaceSpec.bergman(2, 0)) == 1

    def test_principal_branch(self, rng):
        sp = SpaceSpec.bergman(2, 0.37)
        z, w = ball_points(rng, 2, 2)
        direct = complex(mpmath.power(1 - np.vdot(z, w), -sp.beta_exp))
        assert kernel.kernel_eval(z, w, sp) == pytest.approx(direct, rel=1e-13)


class TestKernelQuotient:
    def test_equal_maps(self, psi13, rng, hardy2):
        assert np.allclose(kernel.kernel_quotient(psi13, psi13, ball_points(rng, 2, 10), hardy2), 0, atol=1e-12)

    def test_at_origin(self, half, hardy2):
        assert kernel.kernel_quotient(lfm.identity(2), half, np.zeros(2), hardy2) == pytest.approx(0, abs=1e-15)

    def test_value_against_high_precision(self, half, hardy2):
        got = kernel.kernel_quotient(lfm.identity(2), half, np.array([0.9, 0]), hardy2)
        assert got == pytest.approx(float(quotient_oracle(0.9)), abs=1e-13)
        assert got == pytest.approx(0.8529, abs=1e-4)

    def test_equals_kernel_difference_norm(self, rng):
        # ||K_a - K_b||^2 / ||K_z||^2 expanded through the kernel itself
        sp = SpaceSpec.bergman(2, 1.5)
        for _ in range(10):
            phi = lfm.random_self_map(rng, 2)
            psi = lfm.random_self_map(rng, 2)
            z = ball_points(rng, 2, 1)[0]
            a, b = phi(z), psi(z)
            num = (kernel.kernel_eval(a, a, sp) + kernel.kernel_eval(b, b, sp)
                   - 2 * kernel.kernel_eval(a, b, sp).real)
            expect = num / kernel.kernel_eval(z, z, sp).real
            assert kernel.kernel_quotient(phi, psi, z, sp) == pytest.approx(expect.real, rel=1e-9, abs=1e-12)


class TestPseudoDistance:
    def test_zero_on_diagonal(self, rng):
        a = ball_points(rng, 3, 5)
        assert np.allclose(kernel.pseudo_distance(a, a), 0)

    def test_from_origin(self, rng):
        b = ball_points(rng, 3, 5)
        assert np.allclose(kernel.pseudo_distance(np.zeros(3), b), np.linalg.norm(b, axis=1))

    def test_orthogonal_points(self):
        rho = kernel.pseudo_distance(np.array([0.5, 0]), np.array([0, 0.5]))
        assert rho == pytest.approx(math.sqrt(7) / 4, abs=1e-15)

    def test_symmetric_and_automorphism_invariant(self, rng):
        a, b = ball_points(rng, 2, 2, radius=0.95)
        assert kernel.pseudo_distance(a, b) == pytest.approx(kernel.pseudo_distance(b, a))
        g = lfm.random_self_map(rng, 2, "automorphism")
        assert kernel.pseudo_distance(g(a), g(b)) == pytest.approx(kernel.pseudo_distance(a, b), abs=1e-10)


class TestCurves:
    @pytest.mark.parametrize("M,rho", [(1, 0.1), (5, 0.01), (0.6, 1e-4)])
    def test_gamma_M_ratio(self, M, rho):
        z1 = kernel.curve_gamma_M(M, rho).z[0]
        assert abs(1 - z1) / (1 - abs(z1) ** 2) == pytest.approx(M, rel=1e-12)

    def test_gamma_M_values(self):
        cp = kernel.curve_gamma_M(1, 0.1)
        assert cp.z[0] == pytest.approx(1 - 0.1 * np.exp(1j * math.acos(0.55)), abs=1e-15)
        assert cp.param == 0.1 and cp.curve_id == ("gammaM", 1.0)

    def test_gamma_M_invalid(self):
        with pytest.raises(InvalidParams):
            kernel.curve_gamma_M(1, 1.5)

    @pytest.mark.parametrize("theta", [math.pi / 2, math.pi / 3, 1e-3])
    def test_gamma_identity(self, theta):
        z1 = kernel.curve_gamma(theta).z[0]
        assert z1.real == pytest.approx(abs(z1) ** 2, abs=1e-15)

    def test_gamma_values(self):
        assert kernel.curve_gamma(math.pi / 2).z[0] == pytest.approx((1 + 1j) / 2)
        assert kernel.curve_gamma(math.pi / 3).z[0] == pytest.approx(0.75 + 1j * math.sqrt(3) / 4)
        assert abs(kernel.curve_gamma(1e-9).z[0] - 1) < 1e-8

    def test_gamma_k(self):
        z = kernel.curve_gamma_k(2, 0.75, 2).z
        assert np.allclose(z, [0.75, 0.5])
        assert np.vdot(z, z).real == pytest.approx(0.8125)
        z = kernel.curve_gamma_k(2, 0.99).z
        assert np.vdot(z, z).real == pytest.approx(1 - 0.0099, abs=1e-15)
        with pytest.raises(IndexOutOfRange):
            kernel.curve_gamma_k(3, 0.5, 2)

    @pytest.mark.parametrize("r,theta", [(0.25, 0.1), (0.4, 0.05), (0.1, -0.3)])
    def test_gamma_kr_identities(self, r, theta):
        z = kernel.curve_gamma_kr(2, r, theta, 3).z
        z1 = z[0]
        q = abs(1 - z1) ** 2
        assert (1 - abs(z1) ** 2) / q == pytest.approx((1 - r) / r, rel=1e-12)
        assert (1 - np.vdot(z, z).real) / q == pytest.approx((1 - 2 * r) / r, rel=1e-12)
        assert (1 - z1.real) / q == pytest.approx(1 / (2 * r), rel=1e-12)

    def test_gamma_kr_guards(self):
        with pytest.raises(InvalidParams):
            kernel.curve_gamma_kr(2, 0.5, 0.1)
        # the whole circle lies inside the ball except its endpoint e1
        assert np.vdot(*(2 * [kernel.curve_gamma_kr(2, 0.25, math.pi).z])).real < 1
        with pytest.raises(OutsideBall):
            kernel.curve_gamma_kr(2, 0.25, 0.0)


class TestLimitAlongCurve:
    @pytest.mark.parametrize("M", [1, 5, 64])
    def test_dilation_quotient(self, psi13, M):
        f = lambda cp: (1 - np.vdot(cp.z, cp.z).real) / (1 - np.vdot(psi13(cp.z), psi13(cp.z)).real)
        est = kernel.limit_along_curve(f, kernel.gamma_M_family(M))
        assert est.value == pytest.approx(2.0, abs=1e-8)

    def test_constant(self):
        est = kernel.limit_along_curve(lambda cp: 3.5, kernel.gamma_family())
        assert est.value == 3.5 and est.error == 0

    def test_direction_along_gamma(self):
        f = lambda cp: (cp.z[0] - 1) ** 2 / abs(cp.z[0] - 1) ** 2
        assert kernel.limit_along_curve(f, kernel.gamma_family()).value == pytest.approx(-1, abs=1e-9)

    def test_divergent(self):
        with pytest.raises(NonConvergent):
            kernel.limit_along_curve(lambda cp: 1 / cp.param, kernel.gamma_family())

    def test_richardson_polynomial(self):
        h = 0.5 * 2.0 ** -np.arange(8)
        est = kernel.richardson_limit(1 + 3 * h - 2 * h ** 2 + h ** 3)
        assert est.value == pytest.approx(1, abs=1e-13)


class TestMixedLimit:
    def test_same_data(self, psi13):
        m = kernel.mixed_kernel_curve_limit(psi13, psi13)
        assert m.case == "same_data"
        assert m.value == pytest.approx(2.0, abs=1e-8)

    def test_otherwise_dilations(self, psi13, psi12):
        m = kernel.mixed_kernel_curve_limit(psi13, psi12)
        assert m.case == "otherwise"
        assert abs(m.value) < 1e-4

    def test_otherwise_interior(self, psi13, half):
        m = kernel.mixed_kernel_curve_limit(psi13, half)
        assert m.case == "otherwise" and abs(m.value) < 1e-12

    def test_inner_limits_follow_closed_form(self, psi13, psi12):
        # along Gamma_{e1,M}: 1/(d_phi + M e^{i theta}(d_psi - d_phi)), cos theta = 1/(2M)
        m = kernel.mixed_kernel_curve_limit(psi13, psi12)
        for M, val in zip(m.M_values, m.inner):
            th = math.acos(1 / (2 * M))
            expect = 1 / (0.5 + M * np.exp(1j * th) * (1 / 3 - 0.5))
            assert abs(val - expect) < 1e-7

    def test_requires_finite_derivative(self, psi13, half):
        with pytest.raises(InvalidParams):
            kernel.mixed_kernel_curve_limit(half, psi13)


class TestMwBound:
    def test_equal_maps(self, psi13, rng, hardy2):
        assert np.allclose(kernel.mw_quotient_lower_bound(psi13, psi13, ball_points(rng, 2, 5), hardy2), 0, atol=1e-12)

    def test_below_quotient(self, half, hardy2):
        z = np.array([0.9, 0])
        mw = kernel.mw_quotient_lower_bound(lfm.identity(2), half, z, hardy2)
        assert 0 < mw <= kernel.kernel_quotient(lfm.identity(2), half, z, hardy2)

    def test_radial_limit_is_bound(self, psi13, half, hardy2):
        f = lambda cp: kernel.mw_quotient_lower_bound(psi13, half, cp.z, hardy2)
        est = kernel.limit_along_curve(f, kernel.radial_family(E1))
        assert est.value == pytest.approx(4.0, abs=1e-6)


class TestEssnormDiff:
    def test_compact_partner(self, psi13, half, hardy2):
        r = kernel.essnorm_lower_bound_diff(psi13, half, hardy2)
        assert r.bound == pytest.approx(4.0, abs=1e-6)
        assert np.linalg.norm(np.abs(r.witness) - np.abs(E1)) < 1e-6
        assert r.branch == "image"

    def test_equal(self, psi13, hardy2):
        r = kernel.essnorm_lower_bound_diff(psi13, psi13, hardy2)
        assert r.bound == 0 and r.witness is None

    def test_distinct_automorphisms(self, psi13, psi12, hardy2):
        r = kernel.essnorm_lower_bound_diff(psi13, psi12, hardy2)
        assert r.bound == pytest.approx(4.0, abs=1e-6)
        assert np.linalg.norm(r.witness - E1) < 1e-6
        assert r.symmetric_bound == pytest.approx(9.0, abs=1e-6)
        assert r.branch == "dilation"

    def test_bergman_exponent(self, psi13, psi12):
        sp = SpaceSpec.bergman(2, 0)
        assert sp.beta_exp == 3
        r = kernel.essnorm_lower_bound_diff(psi13, psi12, sp)
        assert r.bound == pytest.approx(8.0, abs=1e-5)
        assert r.symmetric_bound == pytest.approx(27.0, abs=1e-5)

    def test_both_compact(self, half, third, hardy2):
        assert kernel.essnorm_lower_bound_diff(half, third, hardy2).bound == 0

    def test_dimension_one(self):
        sp = SpaceSpec.hardy(1)
        assert sp.beta_exp == 1
        r = kernel.essnorm_lower_bound_diff(lfm.shift_automorphism(1, 1 / 3), lfm.dilation(1, 0.5), sp)
        assert r.bound == pytest.approx(2.0, abs=1e-6)

    def test_quotient_reaches_bound(self, rng, hardy2):
        # along Gamma_{zeta,M} with large M the quotient tends to d_phi^-b + d_psi^-b
        pairs = [(lfm.random_self_map(rng, 2, "contact"), lfm.random_self_map(rng, 2, "contact")) for _ in range(3)]
        for phi, psi in pairs:
            r = kernel.essnorm_lower_bound_diff(phi, psi, hardy2)
            if r.bound == 0:
                continue
            fam = kernel.gamma_M_family(256.0).transported(r.witness)
            est = kernel.limit_along_curve(lambda cp: kernel.kernel_quotient(phi, psi, cp.z, hardy2), fam)
            assert est.value.real >= r.bound - 1e-3


class TestCombo:
    def test_cancelling_pair(self, psi13, hardy2):
        assert kernel.essnorm_lower_bound_combo([psi13, psi13], [1, -1], E1, hardy2) == pytest.approx(0, abs=1e-12)

    def test_distinct_classes(self, psi13, psi12, hardy2):
        v = kernel.essnorm_lower_bound_combo([psi13, psi12], [1, 1], E1, hardy2)
        assert v == pytest.approx(13.0, abs=1e-6)

    def test_interior_member_excluded(self, psi13, half, hardy2):
        v = kernel.essnorm_lower_bound_combo([psi13, half], [5, 7], E1, hardy2)
        assert v == pytest.approx(100.0, abs=1e-5)

    def test_class_form_matches_double_sum(self, psi13, psi12, hardy2):
        maps = [psi13, psi13, psi12]
        c = np.array([1.0, 2.0j, -0.5])
        beta = hardy2.beta_exp
        double = 0
        for j in range(3):
            for l in range(3):
                lim = kernel.mixed_kernel_curve_limit(maps[j], maps[l]).value
                double += np.conj(c[j]) * c[l] * lim ** beta
        got = kernel.essnorm_lower_bound_combo(maps, c, E1, hardy2)
        assert got == pytest.approx(double.real, abs=1e-3)
        member = kernel.essnorm_lower_bound_combo(maps, c, E1, hardy2, form="member")
        assert member > got + 1

    def test_necessary_condition(self, psi13, psi12, half, third, hardy2):
        rep = kernel.combo_necessary_condition([psi13, psi13], [1, -1], hardy2)
        assert rep and all(r.satisfied for r in rep)
        rep = kernel.combo_necessary_condition([psi13, psi12], [1, -1], hardy2)
        at_e1 = [r for r in rep if np.linalg.norm(r.zeta - E1) < 1e-6]
        assert sorted(r.class_sum.real for r in at_e1) == [-1, 1]
        assert not any(r.satisfied for r in at_e1)
        assert kernel.combo_necessary_condition([half, third], [1, 2], hardy2) == []


class TestInequalities:
    def test_pointwise(self, rng):
        for sp in (SpaceSpec.hardy(2), SpaceSpec.bergman(2, 0.5)):
            phi, psi = lfm.random_self_map(rng, 2), lfm.random_self_map(rng, 2)
            z = ball_points(rng, 2, 500)
            q = kernel.kernel_quotient(phi, psi, z, sp)
            mw = kernel.mw_quotient_lower_bound(phi, psi, z, sp)
            lhs, rhs = kernel.cauchy_schwarz_sides(phi, psi, z, sp)
            assert np.all(q >= 0)
            assert np.all(mw <= q + 1e-12 * (1 + q))
            assert np.all(lhs <= rhs * (1 + 1e-12))


class TestTrace:
    def test_columns_and_zero_quotient(self, psi13, hardy2):
        rows = kernel.curve_trace(psi13, psi13, kernel.gamma_M_family(4), hardy2)
        assert all(r["quotient"] == 0 for r in rows)
        text = kernel.write_trace_csv(rows)
        header = text.splitlines()[0].split(",")
        assert header == ["param", "re_z1", "im_z1", "re_z2", "im_z2", "quotient", "rho", "mixed_re", "mixed_im"]

    def test_rho_stays_away_from_zero(self, psi13, psi12, hardy2):
        rows = kernel.curve_trace(psi13, psi12, kernel.gamma_M_family(4), hardy2)
        assert rows[-1]["rho"] > 0.5
        buf = io.StringIO()
        kernel.write_trace_csv(rows, buf)
        assert len(buf.getvalue().splitlines()) == len(rows) + 1
