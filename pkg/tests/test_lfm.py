import numpy as np
import pytest

from ballcomp import boundary, lfm
from ballcomp.errors import DegenerateDenominator, NotFixingE1, NotUnitVector, RelationViolation, ZeroScale
from ballcomp.lfm import TForm

from conftest import SQRT8_3, ball_points

E1 = np.array([1, 0], dtype=complex)
E2 = np.array([0, 1], dtype=complex)


def psi_a_formula(z, a):
    z = np.atleast_2d(z)
    den = 1 + a * z[:, 0]
    return np.stack([(z[:, 0] + a) / den, np.sqrt(1 - a * a) * z[:, 1] / den], axis=1)


class TestMakeLfm:
    def test_identity(self):
        phi = lfm.make_lfm(np.eye(2), [0, 0], [0, 0], 1)
        z = np.array([0.3, 0.4j])
        assert np.allclose(phi(z), z, atol=0, rtol=0)

    def test_scalar_dilation(self):
        phi = lfm.make_lfm(np.eye(2) / 2, [0, 0], [0, 0], 1)
        assert np.allclose(phi(np.array([0.6, 0.2j])), [0.3, 0.1j])

    def test_psi13_matches_formula(self, psi13, rng):
        z = ball_points(rng, 2, 20)
        assert np.max(np.abs(lfm.evaluate(psi13, z) - psi_a_formula(z, 1 / 3))) < 1e-12

    def test_d_normalized_real_positive(self):
        u = np.exp(0.7j)
        phi = lfm.make_lfm(0.5 * u * np.eye(2), [0.1 * u, 0], [0.2 * np.conj(u), 0], 2 * u)
        assert phi.d == pytest.approx(2.0)
        ref = lfm.make_lfm(0.5 * np.eye(2), [0.1, 0], [0.2, 0], 2)
        z = np.array([0.3 - 0.1j, 0.2j])
        assert np.allclose(phi(z), ref(z), atol=1e-15)

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateDenominator):
            lfm.make_lfm(np.eye(2), [0, 0], [1, 0], 1)

    def test_zero_scale(self):
        with pytest.raises(ZeroScale):
            lfm.make_lfm(np.zeros((2, 2)), [0, 0], [0, 0], 0)

    def test_zero_d_nonzero_entries(self):
        with pytest.raises(DegenerateDenominator):
            lfm.make_lfm(np.eye(2), [0, 0], [0, 0], 0)


class TestEvaluate:
    def test_psi13_at_origin(self, psi13):
        assert np.allclose(psi13(np.zeros(2)), [1 / 3, 0], atol=1e-16)

    def test_psi13_fixes_e1(self, psi13):
        assert np.allclose(psi13(E1), E1, atol=1e-16)

    def test_vectorized(self, psi13, rng):
        z = ball_points(rng, 2, 7)
        stacked = lfm.evaluate(psi13, z)
        assert np.allclose(stacked, [psi13(w) for w in z])


class TestCompose:
    def test_identity_law(self, psi13):
        assert lfm.projectively_equal(lfm.compose(lfm.identity(2), psi13), psi13)

    def test_dilations(self, half):
        assert lfm.projectively_equal(lfm.compose(half, half), lfm.dilation(2, 0.25))

    def test_nested_evaluation(self, psi13, rng):
        sigma = lfm.adjoint_map(psi13)
        comp = lfm.compose(psi13, sigma)
        z = ball_points(rng, 2, 20)
        assert np.max(np.abs(lfm.evaluate(comp, z) - lfm.evaluate(psi13, lfm.evaluate(sigma, z)))) < 1e-12


class TestAdjoint:
    def test_identity(self):
        assert lfm.projectively_equal(lfm.adjoint_map(lfm.identity(2)), lfm.identity(2))

    def test_self_adjoint_dilation(self, half):
        assert lfm.projectively_equal(lfm.adjoint_map(half), half)

    def test_psi13_adjoint_is_psi_minus13(self, psi13):
        sigma = lfm.adjoint_map(psi13)
        m = sigma.matrix
        assert np.allclose(m[:2, :2], np.diag([1, SQRT8_3]))
        assert np.allclose(m[:2, 2], [-1 / 3, 0])
        assert lfm.projectively_equal(sigma, lfm.shift_automorphism(2, -1 / 3))
        assert lfm.projectively_equal(lfm.adjoint_map(sigma), psi13, 1e-12)

    def test_non_self_map_flagged(self):
        with pytest.raises(DegenerateDenominator):
            lfm.adjoint_map(lfm.make_lfm(np.eye(2), [1.5, 0], [0, 0], 1))


class TestUnitaryConjugate:
    def test_identity_with_same_unitary(self):
        out = lfm.unitary_conjugate(lfm.identity(2), E2, E2)
        assert lfm.projectively_equal(out, lfm.identity(2))

    def test_trivial_conjugation(self, psi13):
        assert lfm.projectively_equal(lfm.unitary_conjugate(psi13, E1, E1), psi13)

    def test_swap_conjugate_recovers_d(self, psi13):
        swap = lfm.linear_map([[0, 1], [1, 0]])
        phi = lfm.compose(swap, lfm.compose(psi13, swap))
        assert np.allclose(phi(E2), E2)
        back = lfm.unitary_conjugate(phi, E2, E2)
        assert np.allclose(back(E1), E1, atol=1e-15)
        assert boundary.angular_derivative(back, E1).d_val == pytest.approx(0.5, abs=1e-8)

    def test_rejects_non_unit(self, psi13):
        with pytest.raises(NotUnitVector):
            lfm.unitary_conjugate(psi13, np.array([0.5, 0]), E1)

    def test_unitary_first_column(self, rng):
        for _ in range(20):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            v /= np.linalg.norm(v)
            U = lfm.unitary_with_first_column(v)
            assert np.allclose(U[:, 0], v)
            assert np.allclose(U.conj().T @ U, np.eye(3), atol=1e-14)


class TestProjectiveEquality:
    def test_reflexive(self, psi13):
        assert lfm.projectively_equal(psi13, psi13)

    def test_scale(self, psi13):
        assert lfm.projectively_equal(psi13, lfm.from_matrix(2 * psi13.matrix))

    def test_distinct(self, psi13, psi12):
        assert not lfm.projectively_equal(psi13, psi12)
        assert not np.allclose(psi13(np.zeros(2)), psi12(np.zeros(2)))


class TestTForm:
    def test_identity(self):
        tf = lfm.normalize_t_form(lfm.identity(3))
        assert tf.t == 1 and tf.K == 0
        assert np.allclose(tf.beta, 0) and np.allclose(tf.gamma, 0)
        assert np.allclose(tf.alpha, np.eye(2))

    def test_psi13(self, psi13):
        tf = lfm.normalize_t_form(psi13)
        assert tf.t == pytest.approx(0.5, abs=1e-14)
        assert tf.K == pytest.approx(0.25, abs=1e-14)
        assert tf.beta[0] == pytest.approx(0, abs=1e-14)
        assert tf.gamma[0] == pytest.approx(0, abs=1e-14)
        assert tf.alpha[0, 0] == pytest.approx(np.sqrt(0.5), abs=1e-14)

    def test_psi12(self, psi12):
        tf = lfm.normalize_t_form(psi12)
        assert tf.t == pytest.approx(1 / 3, abs=1e-14)
        assert tf.K == pytest.approx(1 / 3, abs=1e-14)
        assert tf.alpha[0, 0] == pytest.approx(np.sqrt(1 / 3), abs=1e-14)

    @pytest.mark.parametrize("a", [1 / 3, 0.5, -0.4])
    def test_against_partial_derivatives(self, a):
        phi = lfm.shift_automorphism(2, a)
        tf = lfm.normalize_t_form(phi)
        h = 1e-6
        d1 = (phi(np.array([1 - h, 0]))[0] - phi(np.array([1 - 2 * h, 0]))[0]) / h
        d2 = (phi(np.array([1 - h, h]))[1] - phi(np.array([1 - h, 0]))[1]) / h
        assert tf.t == pytest.approx(d1.real, abs=1e-5)
        assert tf.alpha[0, 0] == pytest.approx(d2.real, abs=1e-5)

    def test_row_relations(self, rng):
        phi = lfm.random_map_fixing_e1(rng, 3)
        T = lfm.normalize_t_form(phi).matrix()
        tf = lfm.normalize_t_form(phi)
        assert T[0, 0] == pytest.approx(tf.t + tf.K)
        assert T[0, -1] == pytest.approx(1 - tf.t - tf.K)
        assert np.allclose(T[-1], np.concatenate([[tf.K], tf.gamma, [1 - tf.K]]))

    def test_not_fixing_e1(self, half):
        with pytest.raises(NotFixingE1):
            lfm.normalize_t_form(half)

    def test_relation_violation(self):
        # fixes e1 but has a_12 != conj(c_2): not a self-map of the ball
        phi = lfm.make_lfm([[1, 0.3], [0, 0.5]], [0, 0], [0, 0.1], 1)
        assert np.allclose(phi(E1), E1)
        with pytest.raises(RelationViolation):
            lfm.normalize_t_form(phi)

    def test_derivatives_match_closed_form(self, rng):
        for _ in range(25):
            phi = lfm.random_map_fixing_e1(rng, 3)
            pred = lfm.taylor_expand_at_e1(lfm.normalize_t_form(phi))
            e1 = np.array([1, 0, 0], dtype=complex)
            assert np.allclose(pred["first"], lfm.jacobian(phi, e1), atol=1e-10)
            assert np.allclose(pred["second"], lfm.second_derivatives(phi, e1), atol=1e-10)

    def test_second_derivatives_by_finite_differences(self, psi13):
        z0 = np.array([0.3, 0.2j])
        H = lfm.second_derivatives(psi13, z0)
        h = 1e-4
        for k in range(2):
            for l in range(2):
                ek, el = np.eye(2)[k] * h, np.eye(2)[l] * h
                fd = (psi13(z0 + ek + el) - psi13(z0 + ek - el) - psi13(z0 - ek + el) + psi13(z0 - ek - el)) / (4 * h * h)
                assert np.allclose(H[:, k, l], fd, atol=1e-6)

    def test_build_validates_lengths(self):
        with pytest.raises(ValueError):
            TForm.build(1, 0, [0, 0], [0], np.eye(2))
