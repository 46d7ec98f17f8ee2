"""Galerkin truncations of composition operators in the monomial basis.

Monomials ``z^alpha`` are orthogonal in both H^2(B_N) and A^2_s(B_N), so
``e_alpha = z^alpha / ||z^alpha||`` is an orthonormal basis and the
truncation entries are Taylor coefficients of ``e_alpha o phi`` rescaled by
monomial norms.  Coefficients come from an FFT on the torus
``|z_j| = 1/sqrt(N)``, refined by doubling until two resolutions agree.
"""

from __future__ import annotations

import io
import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy.special import gammaln, roots_jacobi

from .errors import BallCompError, QuadratureUnderResolved
from .lfm import LinearFractionalMap, evaluate, from_matrix
from .space import SpaceSpec

__all__ = [
    "TruncationBasis",
    "TruncationMatrix",
    "multi_indices",
    "monomial_norms",
    "ball_quadrature",
    "integrate",
    "truncation_matrix",
    "singular_values",
    "tail_norm_probe",
    "kernel_coefficients",
    "write_grid",
    "read_grid",
]

REFINE_TOL = 1e-8
NORM_CHECK_TOL = 1e-10
MAX_GRID_POINTS = 1 << 22
CHUNK_ELEMENTS = 1 << 22


def worker_count() -> int:
    env = os.environ.get("BALLCOMP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise BallCompError(f"BALLCOMP_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def multi_indices(n: int, degree_cap: int) -> list[tuple[int, ...]]:
    """All ``alpha`` with ``|alpha| <= degree_cap``, ordered by degree then descending lex."""
    out = []
    for m in range(degree_cap + 1):
        block = [a for a in itertools.product(range(m, -1, -1), repeat=n) if sum(a) == m]
        out.extend(sorted(block, reverse=True))
    return out


# ---------------------------------------------------------------------------
# quadrature


def ball_quadrature(space: SpaceSpec, degree: int, angular: bool = True):
    """Nodes and weights integrating ``z^alpha conj(z)^gamma`` exactly for ``|alpha|+|gamma| <= degree``.

    Hardy uses normalized surface measure on the sphere, Bergman the
    probability measure ``w_s d nu`` on the ball.  Writing
    ``z_j = sqrt(x_j) e^{i theta_j}``, ``x`` is Dirichlet distributed
    (``(1,..,1)`` on the sphere, ``(1,..,1,s+1)`` on the ball); it is sampled
    by stick breaking with one Gauss-Jacobi rule per stick, tensored with
    trapezoid rules in each angle.  With ``angular=False`` all angles are
    zero, which is enough for rotation-invariant integrands.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    n = space.n
    m = degree // 2 + 1
    sticks = n - 1 if space.is_hardy else n
    tail = 0.0 if space.is_hardy else space.s + 1.0

    xs = np.ones((1, 0))
    ws = np.ones(1)
    remaining = np.ones(1)
    for j in range(sticks):
        # u ~ Beta(1, b) has density proportional to (1-u)^(b-1)
        b = (n - 1 - j) + tail
        if b > 0:
            t, w = roots_jacobi(m, b - 1.0, 0.0)
            u = (1.0 + t) / 2.0
            w = w / w.sum()
        else:
            u, w = np.ones(1), np.ones(1)
        part = remaining[:, None] * u[None, :]
        xs = np.concatenate([np.repeat(xs, len(u), axis=0), part.reshape(-1, 1)], axis=1)
        ws = (ws[:, None] * w[None, :]).ravel()
        remaining = (remaining[:, None] * (1.0 - u)[None, :]).ravel()
    if space.is_hardy:
        xs = np.concatenate([xs, remaining[:, None]], axis=1)
    radii = np.sqrt(np.clip(xs, 0.0, None))

    if not angular:
        return radii.astype(complex), ws
    q = degree + 1
    ang = np.exp(2j * np.pi * np.arange(q) / q)
    grids = np.stack(np.meshgrid(*([ang] * n), indexing="ij"), axis=-1).reshape(-1, n)
    nodes = (radii[:, None, :] * grids[None, :, :]).reshape(-1, n)
    weights = np.repeat(ws, len(grids)) / len(grids)
    return nodes, weights


def integrate(f, space: SpaceSpec, degree: int) -> complex:
    """Integrate ``f`` (vectorized over a stack of points) with :func:`ball_quadrature`."""
    nodes, weights = ball_quadrature(space, degree)
    return complex(np.dot(weights, f(nodes)))


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class TruncationBasis:
    """Multi-indices of degree at most ``degree_cap`` with the norms ``||z^alpha||``."""

    space: SpaceSpec
    degree_cap: int
    indices: tuple
    norms: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([sum(a) for a in self.indices])

    @property
    def index_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self.indices), self.space.n)


def _closed_form_sq_norms(space: SpaceSpec, idx: np.ndarray) -> np.ndarray:
    deg = idx.sum(axis=1)
    fact = gammaln(idx + 1.0).sum(axis=1)
    if space.is_hardy:
        n = space.n
        return np.exp(fact + gammaln(n) - gammaln(n + deg))
    c = space.n + space.s + 1.0
    return np.exp(fact + gammaln(c) - gammaln(c + deg))


@lru_cache(maxsize=64)
def monomial_norms(space: SpaceSpec, D: int) -> TruncationBasis:
    """Basis of degree ``<= D`` with monomial norms.

    Norms use the closed forms ``alpha! (N-1)! / (N-1+|alpha|)!`` (Hardy) and
    ``alpha! Gamma(N+s+1) / Gamma(N+s+1+|alpha|)`` (Bergman), each checked
    against :func:`ball_quadrature` to ``1e-10`` relative.
    """
    if D < 0:
        raise ValueError("degree cap must be non-negative")
    indices = tuple(multi_indices(space.n, D))
    idx = np.array(indices, dtype=int).reshape(len(indices), space.n)
    sq = _closed_form_sq_norms(space, idx)

    nodes, weights = ball_quadrature(space, 2 * D, angular=False)
    x = np.abs(nodes) ** 2
    quad = np.array([np.dot(weights, np.prod(x ** a, axis=1)) for a in idx])
    rel = np.abs(quad - sq) / sq
    if rel.max(initial=0.0) > NORM_CHECK_TOL:
        raise BallCompError(f"monomial norm closed form disagrees with quadrature ({rel.max():.2e})")
    norms = np.sqrt(sq)
    norms.setflags(write=False)
    return TruncationBasis(space, D, indices, norms)


# ---------------------------------------------------------------------------
# truncation matrices


@dataclass(frozen=True)
class TruncationMatrix:
    """Entries ``<C_phi e_alpha, e_beta>``: columns ``alpha`` from ``basis``, rows ``beta`` from ``row_basis``."""

    basis: TruncationBasis
    row_basis: TruncationBasis
    entries: np.ndarray
    grid: int

    @property
    def square(self) -> np.ndarray:
        """Restriction to rows of degree at most the column cap."""
        return self.entries[: self.basis.size, :]


def _monomials(w: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``w^alpha`` for every row of ``idx``; ``w`` has shape ``(..., n)``."""
    top = int(idx.max(initial=0))
    powers = np.ones(w.shape + (top + 1,), dtype=complex)
    for p in range(1, top + 1):
        powers[..., p] = powers[..., p - 1] * w
    out = np.ones(w.shape[:-1] + (len(idx),), dtype=complex)
    for j in range(w.shape[-1]):
        out *= powers[..., j, :][..., idx[:, j]]
    return out


def _coefficients(phi: LinearFractionalMap, basis: TruncationBasis, row_basis: TruncationBasis, n_grid: int):
    n = basis.space.n
    r = 1.0 / math.sqrt(n)
    roots = r * np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
    z = np.stack(np.meshgrid(*([roots] * n), indexing="ij"), axis=-1)
    w = evaluate(phi, z.reshape(-1, n)).reshape(z.shape)

    cols = basis.index_array
    rows = row_basis.index_array
    row_pos = tuple(rows[:, j] for j in range(n))
    row_scale = row_basis.norms / (n_grid ** n * r ** rows.sum(axis=1))
    out = np.empty((row_basis.size, basis.size), dtype=complex)
    chunk = max(1, CHUNK_ELEMENTS // n_grid ** n)
    workers = worker_count()
    for start in range(0, basis.size, chunk):
        sl = slice(start, min(start + chunk, basis.size))
        vals = _monomials(w, cols[sl]) / basis.norms[sl]
        spec = scipy.fft.fftn(vals, axes=tuple(range(n)), workers=workers)
        out[:, sl] = spec[row_pos] * row_scale[:, None]
    return out


@lru_cache(maxsize=32)
def _truncation_cached(key: bytes, n: int, space: SpaceSpec, D: int, P: int, tol: float) -> TruncationMatrix:
    phi = from_matrix(np.frombuffer(key, dtype=complex).reshape(n + 1, n + 1))
    basis = monomial_norms(space, D)
    row_basis = monomial_norms(space, P)
    n_grid = 32
    while n_grid <= P:
        n_grid *= 2
    prev = _coefficients(phi, basis, row_basis, n_grid)
    while True:
        n_grid *= 2
        if n_grid ** n > MAX_GRID_POINTS:
            raise QuadratureUnderResolved(f"no agreement to {tol:g} before the grid cap")
        cur = _coefficients(phi, basis, row_basis, n_grid)
        if np.linalg.norm(cur - prev) <= tol:
            cur.setflags(write=False)
            return TruncationMatrix(basis, row_basis, cur, n_grid)
        prev = cur


def truncation_matrix(phi: LinearFractionalMap, basis: TruncationBasis, P: int | None = None,
                      tol: float = REFINE_TOL) -> TruncationMatrix:
    """Matrix of ``P_{<=P} C_phi`` on polynomials of degree ``<= basis.degree_cap``.

    Raises :class:`QuadratureUnderResolved` if successive grid doublings do
    not agree to ``tol`` in Frobenius norm.
    """
    if phi.n != basis.space.n:
        raise ValueError("map and basis dimensions differ")
    P = basis.degree_cap if P is None else P
    if P < basis.degree_cap:
        raise ValueError("projection degree must be at least the basis degree")
    m = np.ascontiguousarray(phi.matrix, dtype=complex)
    return _truncation_cached(m.tobytes(), phi.n, basis.space, basis.degree_cap, P, tol)


def singular_values(T) -> np.ndarray:
    """Singular values in descending order."""
    a = T.square if isinstance(T, TruncationMatrix) else np.asarray(T)
    return np.linalg.svd(a, compute_uv=False)


def tail_norm_probe(phi: LinearFractionalMap, psi: LinearFractionalMap, space: SpaceSpec, D: int, k: int) -> float:
    """Largest singular value of ``T_phi - T_psi`` on the degree-``<= D`` window with inputs of degree ``< k`` removed."""
    if not 0 <= k <= D:
        raise ValueError(f"cut must satisfy 0 <= k <= D, got k={k}, D={D}")
    basis = monomial_norms(space, D)
    diff = truncation_matrix(phi, basis).square - truncation_matrix(psi, basis).square
    keep = basis.degrees >= k
    return float(singular_values(diff[:, keep])[0])


def kernel_coefficients(z, basis: TruncationBasis) -> np.ndarray:
    """Coordinates ``<K_z, e_alpha> = conj(e_alpha(z))`` of the kernel at ``z``."""
    z = np.asarray(z, dtype=complex)
    return np.conj(_monomials(z, basis.index_array)) / basis.norms


def write_grid(entries: np.ndarray, stream=None) -> str:
    """Row-major text grid; each entry is ``re im`` with 17 significant digits."""
    out = io.StringIO() if stream is None else stream
    a = np.atleast_2d(np.asarray(entries, dtype=complex))
    out.write(f"{a.shape[0]} {a.shape[1]}\n")
    for row in a:
        out.write(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
        out.write("\n")
    return out.getvalue() if stream is None else ""


def read_grid(text: str) -> np.ndarray:
    lines = text.strip().splitlines()
    rows, cols = (int(v) for v in lines[0].split())
    vals = np.array([float(v) for line in lines[1:] for v in line.split()])
    return (vals[0::2] + 1j * vals[1::2]).reshape(rows, cols)
