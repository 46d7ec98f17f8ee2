"""Linear fractional self-maps of the unit ball of C^N.

A map ``phi(z) = (A z + B) / (<z, C> + d)`` is identified with its
``(N+1) x (N+1)`` matrix ``m = [[A, B], [C^*, d]]``; composition of maps is
matrix multiplication and maps are equal when their matrices agree up to a
nonzero scalar.  Every map is stored with ``d`` real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDenominator,
    NotFixingE1,
    NotUnitVector,
    RelationViolation,
    ZeroScale,
)

__all__ = [
    "LinearFractionalMap",
    "TForm",
    "make_lfm",
    "from_matrix",
    "evaluate",
    "jacobian",
    "second_derivatives",
    "compose",
    "adjoint_map",
    "unitary_with_first_column",
    "unitary_conjugate",
    "projectively_equal",
    "normalize_t_form",
    "taylor_expand_at_e1",
    "identity",
    "dilation",
    "linear_map",
    "shift_automorphism",
    "involution_automorphism",
    "random_unitary",
    "random_self_map",
    "random_map_fixing_e1",
]

MAP_EQ_TOL = 1e-9
T_FORM_TOL = 1e-10
UNIT_TOL = 1e-10


def _as_vector(x, n, name):
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {np.shape(x)}")
    return v


@dataclass(frozen=True, eq=False)
class LinearFractionalMap:
    """Immutable linear fractional map; build with :func:`make_lfm`."""

    n: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    d: float

    @property
    def matrix(self) -> np.ndarray:
        m = np.empty((self.n + 1, self.n + 1), dtype=complex)
        m[: self.n, : self.n] = self.A
        m[: self.n, self.n] = self.B
        m[self.n, : self.n] = self.C.conj()
        m[self.n, self.n] = self.d
        return m

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self):
        return f"LinearFractionalMap(n={self.n}, matrix={self.matrix.tolist()!r})"


def make_lfm(A, B, C, d) -> LinearFractionalMap:
    """Build ``phi(z) = (A z + B) / (<z, C> + d)``.

    All entries are rescaled by ``conj(d)/|d|`` so the stored ``d`` is real
    and positive.  Raises :class:`ZeroScale` for the zero matrix and
    :class:`DegenerateDenominator` unless ``|d| > ||C||``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"A must be square, got shape {A.shape}")
    B = _as_vector(B, n, "B")
    C = _as_vector(C, n, "C")
    d = complex(d)
    if not (np.any(A) or np.any(B) or np.any(C) or d):
        raise ZeroScale("all matrix entries are zero")
    if not abs(d) > np.linalg.norm(C):
        raise DegenerateDenominator(
            f"|d| = {abs(d):.17g} must exceed ||C|| = {np.linalg.norm(C):.17g}"
        )
    if d.imag != 0.0 or d.real <= 0.0:
        # multiplying m by u rescales C^* by u, hence C by conj(u)
        u = d.conjugate() / abs(d)
        A, B, C = A * u, B * u, C * u.conjugate()
    else:
        A, B, C = A.copy(), B.copy(), C.copy()
    for arr in (A, B, C):
        arr.setflags(write=False)
    return LinearFractionalMap(n, A, B, C, float(abs(d)))


def from_matrix(m) -> LinearFractionalMap:
    """Map associated with an ``(N+1) x (N+1)`` matrix ``[[A, B], [C^*, d]]``."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0] - 1
    if m.shape != (n + 1, n + 1) or n < 1:
        raise ValueError(f"expected a square matrix of size >= 2, got {m.shape}")
    return make_lfm(m[:n, :n], m[:n, n], m[n, :n].conj(), m[n, n])


def evaluate(phi: LinearFractionalMap, z) -> np.ndarray:
    """Evaluate ``phi`` at one point (shape ``(n,)``) or a stack (shape ``(..., n)``)."""
    z = np.asarray(z, dtype=complex)
    num = z @ phi.A.T + phi.B
    den = z @ phi.C.conj() + phi.d
    return num / den[..., None]


def jacobian(phi: LinearFractionalMap, z) -> np.ndarray:
    """Complex Jacobian ``J[..., j, k] = d phi_j / d z_k`` in closed form."""
    z = np.asarray(z, dtype=complex)
    den = z @ phi.C.conj() + phi.d
    w = (z @ phi.A.T + phi.B) / den[..., None]
    return (phi.A - w[..., :, None] * phi.C.conj()) / den[..., None, None]


def second_derivatives(phi: LinearFractionalMap, z) -> np.ndarray:
    """``H[j, k, l] = d^2 phi_j / dz_k dz_l`` at a single point ``z``."""
    z = np.asarray(z, dtype=complex)
    den = z @ phi.C.conj() + phi.d
    J = jacobian(phi, z)
    cbar = phi.C.conj()
    return -(J[:, :, None] * cbar[None, None, :] + J[:, None, :] * cbar[None, :, None]) / den


def compose(phi: LinearFractionalMap, psi: LinearFractionalMap) -> LinearFractionalMap:
    """The map ``phi o psi`` (matrix product ``m_phi @ m_psi``)."""
    if phi.n != psi.n:
        raise ValueError(f"dimension mismatch: {phi.n} vs {psi.n}")
    return from_matrix(phi.matrix @ psi.matrix)


def adjoint_map(phi: LinearFractionalMap) -> LinearFractionalMap:
    """Adjoint symbol ``sigma(z) = (A^* z - C) / (<z, -B> + conj(d))``."""
    try:
        return make_lfm(phi.A.conj().T, -phi.C, -phi.B, np.conj(phi.d))
    except DegenerateDenominator as exc:
        raise DegenerateDenominator(f"adjoint symbol is degenerate, input is not a self-map ({exc})") from None


def _check_unit(v, name):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise NotUnitVector(f"{name} has norm {np.linalg.norm(v):.17g}")
    return v


def unitary_with_first_column(v) -> np.ndarray:
    """A unitary matrix whose first column is the unit vector ``v``.

    Uses a Householder reflection followed by a phase fix, so ``v = e1``
    returns the identity exactly.
    """
    v = _check_unit(v, "v")
    n = v.size
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    if np.allclose(v, e1, rtol=0, atol=0):
        return np.eye(n, dtype=complex)
    phase = v[0] / abs(v[0]) if v[0] != 0 else 1.0
    # H = I - 2 u u^*/|u|^2 with u = e1 - conj(phase) v sends conj(phase) v to e1
    w = np.conj(phase) * v
    u = e1 - w
    nu = np.vdot(u, u).real
    if nu == 0.0:
        H = np.eye(n, dtype=complex)
    else:
        H = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj()) / nu
    # H is Hermitian and unitary with H e1 = w; restore the phase on every column
    return H * phase


def unitary_conjugate(phi: LinearFractionalMap, zeta, eta) -> LinearFractionalMap:
    """``V^* o phi o U`` where ``U e1 = zeta`` and ``V e1 = eta``.

    When ``phi(zeta) = eta`` the result fixes e1 with the same dilation
    coefficient.
    """
    zeta = _check_unit(zeta, "zeta")
    eta = _check_unit(eta, "eta")
    U = unitary_with_first_column(zeta)
    V = unitary_with_first_column(eta)
    return make_lfm(V.conj().T @ phi.A @ U, V.conj().T @ phi.B, U.conj().T @ phi.C, phi.d)


def projectively_equal(phi: LinearFractionalMap, psi: LinearFractionalMap, tol: float = MAP_EQ_TOL) -> bool:
    """Frobenius-normalized matrix equality (after the ``d > 0`` normalization)."""
    if phi.n != psi.n:
        raise ValueError(f"dimension mismatch: {phi.n} vs {psi.n}")
    a, b = phi.matrix, psi.matrix
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return bool(np.linalg.norm(a - b) <= tol)


@dataclass(frozen=True, eq=False)
class TForm:
    """Normalized parameters of a self-map fixing e1.

    The equivalent matrix is::

        [[t + K,  gamma,  1 - t - K],
         [-beta,  alpha,  beta     ],
         [K,      gamma,  1 - K    ]]
    """

    t: float
    K: complex
    beta: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray

    @property
    def n(self) -> int:
        return self.beta.size + 1

    def matrix(self) -> np.ndarray:
        n = self.n
        T = np.zeros((n + 1, n + 1), dtype=complex)
        T[0, 0] = self.t + self.K
        T[0, 1:n] = self.gamma
        T[0, n] = 1 - self.t - self.K
        T[1:n, 0] = -self.beta
        T[1:n, 1:n] = self.alpha
        T[1:n, n] = self.beta
        T[n, 0] = self.K
        T[n, 1:n] = self.gamma
        T[n, n] = 1 - self.K
        return T

    def to_map(self) -> LinearFractionalMap:
        return from_matrix(self.matrix())

    @classmethod
    def build(cls, t, K, beta=(), gamma=(), alpha=()) -> "TForm":
        beta = np.asarray(beta, dtype=complex).reshape(-1)
        gamma = np.asarray(gamma, dtype=complex).reshape(-1)
        k = beta.size
        alpha = np.asarray(alpha, dtype=complex).reshape(k, k)
        if gamma.size != k:
            raise ValueError("beta and gamma must have the same length")
        return cls(float(t), complex(K), beta, gamma, alpha)


def normalize_t_form(phi: LinearFractionalMap, tol: float = T_FORM_TOL) -> TForm:
    """Normalized parameters ``(t, K, beta, gamma, alpha)`` of a self-map fixing e1.

    The matrix is divided by ``conj(c_1) + d``.  Raises :class:`NotFixingE1`
    if ``phi(e1) != e1`` and :class:`RelationViolation` if the first row does
    not repeat the last row off the corners or if ``t`` is not real positive.
    """
    n = phi.n
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    err = np.linalg.norm(evaluate(phi, e1) - e1)
    if not err <= tol:
        raise NotFixingE1(f"|phi(e1) - e1| = {err:.3e}")
    m = phi.matrix
    scale = m[n, 0] + m[n, n]
    T = m / scale
    checks = {
        "a_11 + b_1 = conj(c_1) + d": abs(T[0, 0] + T[0, n] - T[n, 0] - T[n, n]),
        "a_j1 + b_j = 0": np.max(np.abs(T[1:n, 0] + T[1:n, n]), initial=0.0),
        "a_1j = conj(c_j)": np.max(np.abs(T[0, 1:n] - T[n, 1:n]), initial=0.0),
    }
    for name, value in checks.items():
        if value > tol:
            raise RelationViolation(f"relation {name} fails by {value:.3e}")
    t = T[0, 0] - T[n, 0]
    if abs(t.imag) > tol or t.real <= 0:
        raise RelationViolation(f"dilation t = {t} is not real positive")
    return TForm(
        float(t.real),
        complex(T[n, 0]),
        T[1:n, n].copy(),
        T[n, 1:n].copy(),
        T[1:n, 1:n].copy(),
    )


def taylor_expand_at_e1(tf: TForm) -> dict:
    """Derivatives of a map at e1 predicted from its normalized parameters.

    Returns ``first[j, k] = D_k phi_j(e1)``, ``second[j, k, l] = D_k D_l phi_j(e1)``
    and the coefficients of ``phi(z_1, 0') = e1 + c1 (z_1 - 1) + c2 (z_1 - 1)^2 + ...``.
    """
    n = tf.n
    t, K = tf.t, tf.K
    first = np.zeros((n, n), dtype=complex)
    first[0, 0] = t
    first[1:, 0] = -tf.beta
    first[1:, 1:] = tf.alpha
    second = np.zeros((n, n, n), dtype=complex)
    second[0, 0, 0] = -2 * t * K
    second[0, 0, 1:] = -t * tf.gamma
    second[0, 1:, 0] = -t * tf.gamma
    second[1:, 0, 0] = 2 * K * tf.beta
    mixed = -K * tf.alpha + np.outer(tf.beta, tf.gamma)
    second[1:, 0, 1:] = mixed
    second[1:, 1:, 0] = mixed
    second[1:, 1:, 1:] = -(tf.alpha[:, :, None] * tf.gamma[None, None, :]
                           + tf.alpha[:, None, :] * tf.gamma[None, :, None])
    c1 = first[:, 0].copy()
    c2 = second[:, 0, 0] / 2
    return {"first": first, "second": second, "linear": c1, "quadratic": c2}


# ---------------------------------------------------------------------------
# standard maps

def identity(n: int) -> LinearFractionalMap:
    return make_lfm(np.eye(n), np.zeros(n), np.zeros(n), 1.0)


def dilation(n: int, c) -> LinearFractionalMap:
    """``z -> c z``."""
    return make_lfm(c * np.eye(n), np.zeros(n), np.zeros(n), 1.0)


def linear_map(A) -> LinearFractionalMap:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[0]
    return make_lfm(A, np.zeros(n), np.zeros(n), 1.0)


def shift_automorphism(n: int, a: float) -> LinearFractionalMap:
    """Automorphism ``((z_1 + a), sqrt(1 - a^2) z') / (1 + a z_1)`` for real ``|a| < 1``.

    It fixes ``+-e1``, sends 0 to ``a e1`` and has dilation ``(1-a)/(1+a)`` at e1.
    """
    a = float(a)
    if not abs(a) < 1:
        raise ValueError("need |a| < 1")
    s = np.sqrt(1.0 - a * a)
    A = s * np.eye(n)
    A[0, 0] = 1.0
    e1 = np.zeros(n)
    e1[0] = a
    return make_lfm(A, e1, e1, 1.0)


def involution_automorphism(a) -> LinearFractionalMap:
    """The involutive automorphism exchanging 0 and ``a``."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    n = a.size
    r2 = np.vdot(a, a).real
    if not r2 < 1:
        raise ValueError("need |a| < 1")
    if r2 == 0:
        return make_lfm(-np.eye(n), np.zeros(n), np.zeros(n), 1.0)
    P = np.outer(a, a.conj()) / r2
    Q = np.eye(n) - P
    A = -(P + np.sqrt(1 - r2) * Q)
    return make_lfm(A, a, -a, 1.0)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_ball_point(rng, n, radius):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v) * radius


def random_self_map(rng: np.random.Generator, n: int, kind: str = "mixed") -> LinearFractionalMap:
    """A random linear fractional self-map built as a composition of self-maps.

    ``kind`` is ``"automorphism"``, ``"compact"`` (sup-norm < 1), ``"contact"``
    (boundary contact, generally not an automorphism) or ``"mixed"``.
    """
    if kind == "mixed":
        kind = rng.choice(["automorphism", "compact", "contact"])
    V = random_unitary(rng, n)
    U = random_unitary(rng, n)
    a = involution_automorphism(_random_ball_point(rng, n, rng.uniform(0, 0.8)))
    b = involution_automorphism(_random_ball_point(rng, n, rng.uniform(0, 0.8)))
    if kind == "automorphism":
        D = np.eye(n)
    elif kind == "compact":
        D = np.diag(rng.uniform(0.2, 0.9, size=n))
    elif kind == "contact":
        D = np.diag(np.concatenate([[1.0], rng.uniform(0.0, 0.95, size=n - 1)]))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    m = np.eye(n + 1, dtype=complex)
    for factor in (linear_map(V).matrix, a.matrix, linear_map(D).matrix, b.matrix, linear_map(U).matrix):
        m = m @ factor
    return from_matrix(m)


def random_map_fixing_e1(rng: np.random.Generator, n: int) -> LinearFractionalMap:
    """A random self-map with ``phi(e1) = e1``, composed from maps fixing e1."""
    m = np.eye(n + 1, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        choice = rng.integers(0, 3)
        if choice == 0:
            f = shift_automorphism(n, rng.uniform(-0.7, 0.7))
        elif choice == 1:
            # parabolic: t = 1, Re K <= 0, ||alpha|| <= 1, beta = gamma = 0
            K = complex(-rng.uniform(0, 1), rng.uniform(-1, 1))
            alpha = random_unitary(rng, n - 1) * rng.uniform(0.3, 1.0) if n > 1 else np.zeros((0, 0))
            f = TForm.build(1.0, K, np.zeros(n - 1), np.zeros(n - 1), alpha).to_map()
        else:
            W = np.eye(n, dtype=complex)
            if n > 1:
                W[1:, 1:] = random_unitary(rng, n - 1) * rng.uniform(0.3, 1.0)
            f = linear_map(W)
        m = m @ f.matrix
    return from_matrix(m)
