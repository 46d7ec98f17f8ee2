"""Boundary behaviour of linear fractional self-maps.

Sup-norms and contact points come from a deterministic multistart
Riemannian gradient ascent of ``|phi|^2`` on the unit sphere; dilation
coefficients ``d_phi(zeta)`` come from Richardson extrapolation of the radial
quotient, cross-checked against the closed-form directional derivative.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import Indeterminate, NoAngularDerivative, NoContact, NotSelfMap
from .lfm import LinearFractionalMap, evaluate, from_matrix, jacobian

log = logging.getLogger(__name__)

__all__ = [
    "JCData",
    "ContactSet",
    "sphere_lattice",
    "sup_norm",
    "contact_points",
    "angular_derivative",
    "directional_derivative",
    "same_data",
    "is_compact_single",
    "extreme_dilation_points",
]

SELF_MAP_TOL = 1e-9
CONTACT_TOL = 1e-9
# a point counts as an exact contact when |phi(zeta)| is 1 to rounding
CERTIFY_TOL = 1e-11
DEDUP_DIST = 1e-6
DATA_TOL = 1e-7
STARTS_PER_DIM = 64
LATTICE_SEED = 20240531
RADIAL_LADDER = tuple(range(8, 21))


def sphere_lattice(n: int, count: int, seed: int = LATTICE_SEED) -> np.ndarray:
    """``count`` low-discrepancy points on the unit sphere of C^n (deterministic)."""
    sampler = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    u = sampler.random(count)
    x = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    z = x[:, :n] + 1j * x[:, n:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _value_grad(phi, Z):
    """``|phi|^2`` and its real gradient packed as a complex vector ``2 J^* phi``."""
    den = Z @ phi.C.conj() + phi.d
    W = (Z @ phi.A.T + phi.B) / den[:, None]
    J = (phi.A[None] - W[:, :, None] * phi.C.conj()[None, None, :]) / den[:, None, None]
    G = 2.0 * np.einsum("mjk,mj->mk", J.conj(), W)
    return np.einsum("mj,mj->m", W.conj(), W).real, G


def _tangent(G, Z):
    return G - np.einsum("mk,mk->m", G, Z.conj()).real[:, None] * Z


def _ascend(phi, Z, gtol=1e-13, maxiter=3000, step0=0.5):
    """Vectorized gradient ascent of ``|phi|^2`` on the sphere with backtracking."""
    Z = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    g, G = _value_grad(phi, Z)
    Gt = _tangent(G, Z)
    gn = np.linalg.norm(Gt, axis=1)
    step = np.full(len(Z), float(step0))
    done = gn <= gtol
    for _ in range(maxiter):
        act = ~done
        if not act.any():
            break
        Zc = Z[act] + step[act, None] * Gt[act]
        Zc /= np.linalg.norm(Zc, axis=1, keepdims=True)
        gc, Gc = _value_grad(phi, Zc)
        Gtc = _tangent(Gc, Zc)
        gnc = np.linalg.norm(Gtc, axis=1)
        gain = gc - g[act]
        # actual gain over first-order prediction; 1/2 is optimal on a quadratic
        ratio = gain / (step[act] * gn[act] ** 2)
        ok = (ratio >= 1e-4) | ((gain >= -4e-16) & (gnc < gn[act]))
        idx = np.flatnonzero(act)
        acc = idx[ok]
        Z[acc], g[acc], G[acc], Gt[acc], gn[acc] = Zc[ok], gc[ok], Gc[ok], Gtc[ok], gnc[ok]
        step[idx[ratio > 0.75]] *= 2.0
        step[idx[(ratio < 0.25) | ~ok]] *= 0.5
        np.minimum(step, 1e3, out=step)
        done = (gn <= gtol) | (step < 1e-15)
    return Z, g


@dataclass(frozen=True)
class _Search:
    points: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.sqrt(self.values.max()))


def _map_key(phi):
    return phi.matrix.tobytes(), phi.n


@functools.lru_cache(maxsize=256)
def _search_cached(key, starts_per_dim):
    raw, n = key
    phi = from_matrix(np.frombuffer(raw, dtype=complex).reshape(n + 1, n + 1))
    n_starts = starts_per_dim * (2 * n - 1)
    starts = sphere_lattice(n, n_starts)
    dense = sphere_lattice(n, 32 * n_starts, seed=LATTICE_SEED + 1)
    vals, _ = _value_grad(phi, dense)
    best = dense[np.argsort(vals)[-16:]]
    Z, g = _ascend(phi, np.vstack([starts, best]))
    order = np.argsort(-g, kind="stable")
    return _Search(Z[order], g[order])


def _search(phi, starts_per_dim=STARTS_PER_DIM) -> _Search:
    return _search_cached(_map_key(phi), starts_per_dim)


def sup_norm(phi: LinearFractionalMap, tol: float = SELF_MAP_TOL) -> float:
    """``max |phi(z)|`` over the closed ball (attained on the sphere).

    Raises :class:`NotSelfMap` when the maximum exceeds ``1 + tol``.
    """
    value = _search(phi).sup
    if value > 1.0 + tol:
        raise NotSelfMap(f"sup |phi| = {value:.17g} exceeds 1")
    return value


@dataclass(frozen=True)
class ContactSet:
    """Boundary points ``zeta`` with ``|phi(zeta)| = 1``.

    ``continuum`` is true when the contact set has positive dimension; then
    ``points`` is a finite sample that includes the points of smallest and
    largest dilation coefficient.
    """

    points: np.ndarray
    continuum: bool

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _dedup(points, dist=DEDUP_DIST):
    kept = []
    for p in points:
        if not kept or np.min(np.linalg.norm(np.asarray(kept) - p, axis=1)) > dist:
            kept.append(p)
    return kept


def _tangent_basis(z):
    """Orthonormal basis (as complex vectors) of the real tangent space at ``z``."""
    n = z.size
    x = np.concatenate([z.real, z.imag])
    Q, _ = np.linalg.qr(np.column_stack([x, np.eye(2 * n)]))
    T = Q[:, 1 : 2 * n]
    return (T[:n] + 1j * T[n:]).T


def _tangent_hessian(phi, z, h=1e-5):
    """Riemannian Hessian of ``|phi|^2`` at a critical point ``z`` on the sphere."""
    basis = _tangent_basis(z)
    zz = z[None, :]
    _, G0 = _value_grad(phi, zz)
    shape = np.vdot(z, G0[0]).real
    plus = zz + h * basis
    minus = zz - h * basis
    _, Gp = _value_grad(phi, plus)
    _, Gm = _value_grad(phi, minus)
    dG = (Gp - Gm) / (2 * h)
    H = np.einsum("ik,jk->ij", basis.conj(), dG).real
    H = 0.5 * (H + H.T) - shape * np.eye(len(basis))
    return H, basis


def _flat_directions(phi, z, eig_tol=1e-6):
    H, basis = _tangent_hessian(phi, z)
    w, V = np.linalg.eigh(H)
    null = V[:, np.abs(w) < eig_tol]
    return (null.T @ basis) if null.size else np.zeros((0, z.size), dtype=complex)


def _is_continuum_at(phi, z, tol):
    flats = _flat_directions(phi, z)
    if not len(flats):
        return False
    delta = 1e-2
    trial = np.vstack([z + delta * flats[0], z - delta * flats[0]])
    Z, g = _ascend(phi, trial)
    moved = np.linalg.norm(Z - z[None, :], axis=1) > 1e-4
    return bool(np.any(moved & (np.sqrt(g) >= 1.0 - tol)))


def directional_derivative(phi: LinearFractionalMap, zeta) -> complex:
    """``<phi'(zeta) zeta, phi(zeta)>``; real and equal to ``d_phi(zeta)`` at contact points."""
    zeta = np.asarray(zeta, dtype=complex)
    J = jacobian(phi, zeta)
    return complex(np.vdot(evaluate(phi, zeta), J @ zeta))


def _sphere_grad(f, z, h=1e-6):
    basis = _tangent_basis(z)
    g = np.zeros(z.size, dtype=complex)
    for v in basis:
        g += (f(z + h * v) - f(z - h * v)) / (2 * h) * v
    return g


def _extremize_dilation(phi, z0, sign, tol, maxiter=200):
    """Move along the contact manifold to a local min (sign=+1) or max (sign=-1) of ``d``."""

    def dval(z):
        z = z / np.linalg.norm(z)
        return sign * directional_derivative(phi, z).real

    z = z0.copy()
    step = 0.1
    for _ in range(maxiter):
        flats = _flat_directions(phi, z)
        if not len(flats):
            break
        g = _sphere_grad(dval, z)
        # project onto the real span of the flat directions
        coeffs = np.array([np.vdot(v, g).real for v in flats])
        direction = -(coeffs @ flats)
        gnorm = np.linalg.norm(coeffs)
        if gnorm < 1e-8:
            break
        cur = dval(z)
        while step > 1e-12:
            cand = z + step * direction / gnorm
            cand, gcand = _ascend(phi, (cand / np.linalg.norm(cand))[None, :], gtol=1e-11, step0=2.0)
            cand = cand[0]
            if np.sqrt(gcand[0]) >= 1.0 - tol and dval(cand) < cur:
                z = cand
                step = min(step * 2, 0.5)
                break
            step *= 0.5
        else:
            break
    return z


def extreme_dilation_points(phi: LinearFractionalMap, start, tol: float = CONTACT_TOL):
    """Contact points of least and greatest dilation reachable from ``start``."""
    start = np.asarray(start, dtype=complex)
    return _extremize_dilation(phi, start, +1, tol), _extremize_dilation(phi, start, -1, tol)


@functools.lru_cache(maxsize=256)
def _contacts_cached(key, tol, dedup, sample_cap):
    raw, n = key
    phi = from_matrix(np.frombuffer(raw, dtype=complex).reshape(n + 1, n + 1))
    search = _search(phi)
    if search.sup < 1.0 - tol:
        return None
    mask = np.sqrt(search.values) >= 1.0 - tol
    pts = _dedup(search.points[mask], dedup)
    continuum = any(_is_continuum_at(phi, p, tol) for p in pts[:4])
    if continuum:
        pts = pts[:sample_cap]
        ds = [directional_derivative(phi, p).real for p in pts]
        lo = _extremize_dilation(phi, pts[int(np.argmin(ds))], +1, tol)
        hi = _extremize_dilation(phi, pts[int(np.argmax(ds))], -1, tol)
        pts = _dedup([lo, hi] + pts, dedup)
    return np.array(pts), continuum


def contact_points(phi: LinearFractionalMap, tol: float = CONTACT_TOL, dedup: float = DEDUP_DIST,
                   sample_cap: int = 32) -> ContactSet:
    """Boundary points where ``|phi| = 1`` found by the multistart ascent.

    Raises :class:`NoContact` when ``sup |phi| < 1 - tol``.
    """
    res = _contacts_cached(_map_key(phi), tol, dedup, sample_cap)
    if res is None:
        raise NoContact(f"sup |phi| = {_search(phi).sup:.17g} < 1")
    pts, continuum = res
    return ContactSet(pts.copy(), continuum)


@dataclass(frozen=True)
class JCData:
    """Julia-Caratheodory data of ``phi`` at a boundary point.

    ``d_val`` is ``inf`` when ``|phi(zeta)| < 1``.  ``d_derivative`` holds the
    closed-form directional derivative used as cross-check and
    ``extrapolation_error`` the Richardson error estimate.
    """

    zeta: np.ndarray
    eta: np.ndarray
    d_val: float
    d_derivative: float = math.inf
    extrapolation_error: float = 0.0
    converged: bool = True

    @property
    def finite(self) -> bool:
        return math.isfinite(self.d_val)


def _radial_quotients(phi, zeta, ladder=RADIAL_LADDER):
    h = np.array([2.0 ** -k for k in ladder])
    pts = (1.0 - h)[:, None] * zeta[None, :]
    w = evaluate(phi, pts)
    q = (1.0 - np.linalg.norm(w, axis=1)) / h
    return h, q


def angular_derivative(phi: LinearFractionalMap, zeta, tol: float = CONTACT_TOL) -> JCData:
    """``d_phi(zeta) = lim_{r->1} (1 - |phi(r zeta)|)/(1 - r)`` and ``eta = phi(zeta)``.

    The radial quotient is sampled at ``r_k = 1 - 2^-k`` (k = 8..20) and
    improved by one Richardson stage; the result is compared with the
    closed-form derivative ``<phi'(zeta) zeta, eta>``.
    """
    zeta = np.asarray(zeta, dtype=complex)
    eta = evaluate(phi, zeta)
    if np.linalg.norm(eta) < 1.0 - tol:
        return JCData(zeta, eta, math.inf)
    _, q = _radial_quotients(phi, zeta)
    rich = 2.0 * q[1:] - q[:-1]
    err = abs(rich[-1] - rich[-2])
    diffs = np.abs(np.diff(q))
    scale = max(1.0, abs(q[-1]))
    converged = bool(diffs[-1] <= 1e-4 * scale and err <= 1e-6 * scale)
    exact = directional_derivative(phi, zeta)
    d_val = float(rich[-1])
    if not converged:
        log.warning("radial quotient at %s failed the Cauchy check; using the derivative", zeta)
        d_val = float(exact.real)
    return JCData(zeta, eta / np.linalg.norm(eta), d_val, float(exact.real), float(err), converged)


def same_data(phi: LinearFractionalMap, psi: LinearFractionalMap, zeta, tol: float = DATA_TOL) -> bool:
    """Whether ``phi(zeta) = psi(zeta)`` and ``d_phi(zeta) = d_psi(zeta)`` within ``tol``.

    Raises :class:`NoAngularDerivative` when ``d_phi(zeta)`` is infinite.
    """
    a = angular_derivative(phi, zeta)
    if not a.finite:
        raise NoAngularDerivative(f"phi has no finite angular derivative at {zeta}")
    return _same(a, angular_derivative(psi, zeta), tol)


def _same(a: JCData, b: JCData, tol: float = DATA_TOL) -> bool:
    if not (a.finite and b.finite):
        return False
    if np.linalg.norm(a.eta - b.eta) > tol:
        return False
    return abs(a.d_val - b.d_val) <= tol * max(1.0, a.d_val)


def is_compact_single(phi: LinearFractionalMap, tol: float = SELF_MAP_TOL) -> bool:
    """``C_phi`` is compact iff ``sup |phi| < 1`` (decided at tolerance ``tol``)."""
    s = sup_norm(phi, tol)
    if s < 1.0 - tol:
        return True
    best = _search(phi).points[0]
    if abs(1.0 - np.linalg.norm(evaluate(phi, best))) <= CERTIFY_TOL:
        return False
    raise Indeterminate(f"sup |phi| = {s:.17g} is within {tol} of 1 but no contact is certified")
