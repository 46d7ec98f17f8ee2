"""Reproducing kernels, approach curves and essential-norm lower bounds.

The lower bounds come from testing ``(C_phi - C_psi)^*`` on normalized
kernels ``K_z / ||K_z||`` with ``z`` running to the boundary along explicit
curves; since ``C_phi^* K_z = K_{phi(z)}`` every such quotient has a closed
form in ``z``, ``phi(z)`` and ``psi(z)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import boundary
from .boundary import JCData, angular_derivative
from .errors import IndexOutOfRange, InvalidParams, NoContact, NonConvergent, OutsideBall
from .lfm import LinearFractionalMap, evaluate, unitary_with_first_column
from .space import SpaceSpec

__all__ = [
    "CurvePoint",
    "CurveFamily",
    "BoundReport",
    "MixedLimit",
    "ClassReport",
    "kernel_eval",
    "kernel_quotient",
    "pseudo_distance",
    "mw_quotient_lower_bound",
    "cauchy_schwarz_sides",
    "curve_gamma_M",
    "curve_gamma",
    "curve_gamma_k",
    "curve_gamma_kr",
    "gamma_M_family",
    "gamma_family",
    "gamma_k_family",
    "gamma_kr_family",
    "radial_family",
    "richardson_limit",
    "limit_along_curve",
    "mixed_kernel_curve_limit",
    "essnorm_lower_bound_diff",
    "data_classes",
    "essnorm_lower_bound_combo",
    "combo_necessary_condition",
    "curve_trace",
    "write_trace_csv",
]

M_LADDER = tuple(2.0 ** k for k in range(9))
LIMIT_LEVELS = 12


def _e1(n):
    e = np.zeros(n, dtype=complex)
    e[0] = 1.0
    return e


def _inner(a, b):
    """``<a, b> = sum a_j conj(b_j)`` over the last axis."""
    return np.einsum("...j,...j->...", a, np.conj(b))


def kernel_eval(z, w, space: SpaceSpec):
    """``K_z(w) = (1 - <w, z>)^(-beta)`` on the principal branch."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.power(1.0 - _inner(w, z), -space.beta_exp)


def _quotient_terms(phi, psi, z):
    z = np.asarray(z, dtype=complex)
    p = evaluate(phi, z)
    q = evaluate(psi, z)
    one_z = 1.0 - _inner(z, z).real
    a = one_z / (1.0 - _inner(p, p).real)
    b = one_z / (1.0 - _inner(q, q).real)
    c = one_z / (1.0 - _inner(q, p))
    return a, b, c, p, q


def kernel_quotient(phi: LinearFractionalMap, psi: LinearFractionalMap, z, space: SpaceSpec):
    """``||(C_phi - C_psi)^* K_z||^2 / ||K_z||^2`` for ``|z| < 1`` (vectorized over ``z``).

    Equal to ``a^beta + b^beta - 2 Re c^beta`` with ``a = (1-|z|^2)/(1-|phi(z)|^2)``,
    ``b`` the same for ``psi`` and ``c = (1-|z|^2)/(1-<psi(z), phi(z)>)``.
    """
    beta = space.beta_exp
    a, b, c, _, _ = _quotient_terms(phi, psi, z)
    diag = a ** beta + b ** beta
    val = diag - 2.0 * np.power(c, beta).real
    # rounding can leave tiny negatives when phi(z) and psi(z) nearly coincide
    return np.where((val < 0) & (val > -1e-12 * diag), 0.0, val)


def pseudo_distance(a, b):
    """Pseudohyperbolic distance with ``1 - rho^2 = (1-|a|^2)(1-|b|^2)/|1-<a,b>|^2``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    one_minus = (1 - _inner(a, a).real) * (1 - _inner(b, b).real) / np.abs(1 - _inner(a, b)) ** 2
    return np.sqrt(np.clip(1.0 - one_minus, 0.0, None))


def mw_quotient_lower_bound(phi, psi, z, space: SpaceSpec):
    """Lower bound ``(n_phi - n_psi)^2 + 2 (1 - u) n_phi n_psi`` for the kernel quotient.

    ``n_phi = ||K_{phi(z)}|| / ||K_z||``, ``n_psi`` likewise, and
    ``u = (1 - rho^2)^(beta/2)`` with ``rho`` the pseudohyperbolic distance
    between ``phi(z)`` and ``psi(z)``.
    """
    beta = space.beta_exp
    a, b, _, p, q = _quotient_terms(phi, psi, z)
    n_phi = a ** (beta / 2)
    n_psi = b ** (beta / 2)
    rho = pseudo_distance(p, q)
    u = (1.0 - rho ** 2) ** (beta / 2)
    return (n_phi - n_psi) ** 2 + 2.0 * (1.0 - u) * n_phi * n_psi


def cauchy_schwarz_sides(phi, psi, z, space: SpaceSpec):
    """Both sides of ``|c|^beta <= a^(beta/2) b^(beta/2)`` (the Schwarz inequality for kernels)."""
    beta = space.beta_exp
    a, b, c, _, _ = _quotient_terms(phi, psi, z)
    return np.abs(c) ** beta, a ** (beta / 2) * b ** (beta / 2)


# ---------------------------------------------------------------------------
# approach curves


@dataclass(frozen=True)
class CurvePoint:
    """A point on an approach curve; ``param -> 0`` runs to the curve's boundary target."""

    z: np.ndarray
    param: float
    curve_id: tuple


def _axis_point(n, z1):
    z = np.zeros(n, dtype=complex)
    z[0] = z1
    return z


def curve_gamma_M(M: float, rho: float, n: int = 2) -> CurvePoint:
    """Point ``(1 - rho e^{i theta}, 0')`` with ``|1 - z_1| / (1 - |z_1|^2) = M``."""
    cos_t = (1.0 / M + rho) / 2.0
    if not M > 0.5 or not rho > 0 or cos_t > 1.0:
        raise InvalidParams(f"need M > 1/2 and 0 < rho <= 2 - 1/M (got M={M}, rho={rho})")
    theta = math.acos(cos_t)
    return CurvePoint(_axis_point(n, 1.0 - rho * np.exp(1j * theta)), float(rho), ("gammaM", float(M)))


def curve_gamma(theta: float, n: int = 2) -> CurvePoint:
    """Point on the circle ``1 - |z_1|^2 = |1 - z_1|^2``: ``z_1 = (1 + e^{i theta}) / 2``."""
    if not 0 < abs(theta) < math.pi:
        raise InvalidParams(f"theta must lie in (0, pi), got {theta}")
    return CurvePoint(_axis_point(n, (1.0 + np.exp(1j * theta)) / 2.0), float(theta), ("gamma",))


def _check_k(k, n):
    if not 2 <= k <= n:
        raise IndexOutOfRange(f"curve index k={k} must satisfy 2 <= k <= N={n}")


def curve_gamma_k(k: int, r: float, n: int | None = None) -> CurvePoint:
    """Point ``r e_1 + sqrt(1 - r) e_k``; ``param`` is ``sqrt(1 - r)``."""
    n = max(k, 2) if n is None else n
    _check_k(k, n)
    if not 0 < r < 1:
        raise InvalidParams(f"r must lie in (0, 1), got {r}")
    z = np.zeros(n, dtype=complex)
    z[0] = r
    z[k - 1] = math.sqrt(1.0 - r)
    return CurvePoint(z, math.sqrt(1.0 - r), ("gammak", k))


def curve_gamma_kr(k: int, r: float, theta: float, n: int | None = None) -> CurvePoint:
    """Point ``z_1 e_1 + (z_1 - 1) e_k`` with ``z_1 = 1 - r + r e^{i theta}``, ``0 < r < 1/2``."""
    n = max(k, 2) if n is None else n
    _check_k(k, n)
    if not 0 < r < 0.5:
        raise InvalidParams(f"r must lie in (0, 1/2), got {r}")
    z1 = 1.0 - r + r * np.exp(1j * theta)
    z = np.zeros(n, dtype=complex)
    z[0] = z1
    z[k - 1] = z1 - 1.0
    if not np.vdot(z, z).real < 1.0:
        raise OutsideBall(f"theta={theta} gives a point outside the open ball")
    return CurvePoint(z, float(theta), ("gammakr", k, float(r)))


@dataclass(frozen=True)
class CurveFamily:
    """A one-parameter curve ``h -> z(h)`` with ``z(h)`` analytic in ``h`` and ``z(0)`` on the sphere.

    ``rotation`` (a unitary with first column ``zeta``) transports a curve
    ending at e1 to one ending at ``zeta``.
    """

    name: str
    point: Callable[[float], CurvePoint]
    h0: float
    rotation: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, h: float) -> CurvePoint:
        cp = self.point(h)
        if self.rotation is None:
            return cp
        return CurvePoint(self.rotation @ cp.z, cp.param, cp.curve_id)

    def transported(self, zeta) -> "CurveFamily":
        return CurveFamily(self.name, self.point, self.h0, unitary_with_first_column(zeta))


def gamma_M_family(M: float, n: int = 2) -> CurveFamily:
    curve_gamma_M(M, 1e-3, n)
    return CurveFamily(f"gammaM(M={M:g})", lambda h: curve_gamma_M(M, h, n), min(0.25, 1.0 - 0.5 / M))


def gamma_family(n: int = 2) -> CurveFamily:
    return CurveFamily("gamma", lambda h: curve_gamma(h, n), 0.5)


def gamma_k_family(k: int, n: int) -> CurveFamily:
    _check_k(k, n)
    return CurveFamily(f"gammak(k={k})", lambda h: curve_gamma_k(k, 1.0 - h * h, n), 0.5)


def gamma_kr_family(k: int, r: float, n: int) -> CurveFamily:
    curve_gamma_kr(k, r, 0.1, n)
    return CurveFamily(f"gammakr(k={k},r={r:g})", lambda h: curve_gamma_kr(k, r, h, n), 0.5)


def radial_family(zeta) -> CurveFamily:
    zeta = np.asarray(zeta, dtype=complex)

    def point(h):
        return CurvePoint((1.0 - h) * zeta, float(h), ("radial",))

    return CurveFamily("radial", point, 0.25)


@dataclass(frozen=True)
class LimitEstimate:
    value: complex
    error: float
    samples: np.ndarray


def richardson_limit(values: Sequence[complex], ratio: float = 2.0, tol: float = 1e-6) -> LimitEstimate:
    """Limit of ``values[k] = f(h0 ratio^-k)`` for ``f`` analytic at ``h = 0``.

    Builds the full Richardson table for an error expansion in integer powers
    of ``h`` and returns the entry with the smallest error estimate.  Raises
    :class:`NonConvergent` when that estimate exceeds ``tol`` (relative to
    ``max(1, |value|)``).
    """
    f = np.asarray(values, dtype=complex)
    if f.size < 3:
        raise ValueError("need at least three samples")
    if not np.all(np.isfinite(f)):
        raise NonConvergent("non-finite samples along the ladder")
    prev = f.copy()
    best, best_err = f[-1], abs(f[-1] - f[-2])
    for j in range(1, f.size):
        cur = prev[1:] + (prev[1:] - prev[:-1]) / (ratio ** j - 1.0)
        for k in range(1, cur.size):
            err = max(abs(cur[k] - cur[k - 1]), abs(cur[k] - prev[k]))
            if err < best_err:
                best, best_err = cur[k], err
        prev = cur
    if best_err > tol * max(1.0, abs(best)):
        raise NonConvergent(f"extrapolation error {best_err:.3e} exceeds tolerance")
    return LimitEstimate(complex(best), float(best_err), f)


def limit_along_curve(f: Callable[[CurvePoint], complex], family: CurveFamily, levels: int = LIMIT_LEVELS,
                      tol: float = 1e-6, h0: float | None = None) -> LimitEstimate:
    """Limit of ``f`` as the curve parameter goes to 0 (geometric ladder + Richardson)."""
    h0 = family.h0 if h0 is None else h0
    vals = [complex(f(family(h0 * 2.0 ** -k))) for k in range(levels)]
    return richardson_limit(vals, tol=tol)


# ---------------------------------------------------------------------------
# mixed kernel limit


@dataclass(frozen=True)
class MixedLimit:
    """Iterated limit of ``(1-|z|^2)/(1-<psi(z), phi(z)>)`` along ``Gamma_{zeta,M}``.

    ``inner[i]`` is the curve limit at ``M_values[i]``; ``value`` the
    extrapolation to ``M = infinity``; ``case`` is ``"same_data"`` (value
    ``1/d_phi``) or ``"otherwise"`` (value 0).
    """

    M_values: np.ndarray
    inner: np.ndarray
    value: complex
    error: float
    case: str
    d_phi: float

    def power_real(self, beta: float) -> np.ndarray:
        """``Re(inner^beta)`` for every ``M`` on the ladder."""
        return np.power(self.inner, beta).real

    def limit_power(self, beta: float) -> float:
        return float(np.power(self.value, beta).real)


def mixed_kernel_curve_limit(phi: LinearFractionalMap, psi: LinearFractionalMap, M_values=M_LADDER,
                             zeta=None, tol: float = 1e-6) -> MixedLimit:
    """Two-stage limit: ``z -> zeta`` along ``Gamma_{zeta,M}`` for each ``M``, then ``M -> infinity``.

    Requires a finite angular derivative of ``phi`` at ``zeta`` (default e1).
    The outer limit is Richardson-extrapolated in ``1/M`` over a doubling ladder.
    """
    n = phi.n
    zeta = _e1(n) if zeta is None else np.asarray(zeta, dtype=complex)
    jc = angular_derivative(phi, zeta)
    if not jc.finite:
        raise InvalidParams("phi has no finite angular derivative at zeta")

    def ratio(cp):
        p = evaluate(phi, cp.z)
        q = evaluate(psi, cp.z)
        return (1.0 - np.vdot(cp.z, cp.z).real) / (1.0 - np.vdot(p, q))

    M_values = np.asarray(M_values, dtype=float)
    inner = np.array([limit_along_curve(ratio, gamma_M_family(M, n).transported(zeta), tol=tol).value
                      for M in M_values])
    if len(M_values) >= 3 and np.allclose(M_values[1:] / M_values[:-1], 2.0):
        est = richardson_limit(inner, tol=max(tol, 1e-4))
        value, err = est.value, est.error
    else:
        value, err = inner[-1], abs(inner[-1] - inner[-2])
    target = 1.0 / jc.d_val
    if abs(value - target) <= 1e-3 * max(1.0, target):
        case = "same_data"
    elif abs(value) <= 1e-3:
        case = "otherwise"
    else:
        raise NonConvergent(f"outer limit {value} matches neither 1/d = {target} nor 0")
    return MixedLimit(M_values, inner, complex(value), float(err), case, jc.d_val)


# ---------------------------------------------------------------------------
# essential-norm lower bounds


@dataclass(frozen=True)
class BoundReport:
    """A lower bound for ``||C_phi - C_psi||_e^2``.

    ``bound`` is ``d^-beta`` at ``witness`` using ``d_phi`` whenever it is
    finite (else ``d_psi``); ``symmetric_bound`` uses the larger of the two
    sides at each point.  ``branch`` records why the data differ:
    ``"image"`` (different boundary images or an infinite dilation on one
    side) or ``"dilation"``.
    """

    bound: float
    witness: np.ndarray | None
    d_at_witness: float
    space: SpaceSpec
    symmetric_bound: float = 0.0
    branch: str | None = None
    source: str | None = None

    @property
    def obstructed(self) -> bool:
        return self.bound > 0


def _contacts_or_empty(phi):
    try:
        return list(boundary.contact_points(phi).points)
    except NoContact:
        return []


def essnorm_lower_bound_diff(phi: LinearFractionalMap, psi: LinearFractionalMap, space: SpaceSpec,
                             data_tol: float = boundary.DATA_TOL) -> BoundReport:
    """Lower bound for ``||C_phi - C_psi||_e^2`` from boundary data.

    At every detected contact point of either map where the two maps do
    not share image and dilation coefficient, ``d^-beta`` is a lower bound;
    the largest one is returned with its witness.  ``bound = 0`` means no
    obstruction was found.
    """
    beta = space.beta_exp
    candidates = [(z, "phi") for z in _contacts_or_empty(phi)] + [(z, "psi") for z in _contacts_or_empty(psi)]
    best = BoundReport(0.0, None, math.inf, space)
    sym = 0.0
    for zeta, source in candidates:
        a = angular_derivative(phi, zeta)
        b = angular_derivative(psi, zeta)
        if boundary._same(a, b, data_tol):
            continue
        d_use = a.d_val if a.finite else b.d_val
        if not math.isfinite(d_use):
            continue
        value = d_use ** -beta
        sym = max(sym, max(x.d_val ** -beta for x in (a, b) if x.finite))
        if value > best.bound:
            branch = "dilation" if (a.finite and b.finite and np.linalg.norm(a.eta - b.eta) <= data_tol) else "image"
            best = BoundReport(value, np.array(zeta), d_use, space, branch=branch, source=source)
    return BoundReport(best.bound, best.witness, best.d_at_witness, space, sym, best.branch, best.source)


def data_classes(jcs: Sequence[JCData], tol: float = boundary.DATA_TOL) -> list[list[int]]:
    """Partition indices by equality of boundary image and dilation (finite ones only)."""
    parent = list(range(len(jcs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(jcs)):
        for j in range(i + 1, len(jcs)):
            if boundary._same(jcs[i], jcs[j], tol):
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i, jc in enumerate(jcs):
        if jc.finite:
            groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def essnorm_lower_bound_combo(maps: Sequence[LinearFractionalMap], coeffs: Sequence[complex], zeta,
                              space: SpaceSpec, form: str = "class", tol: float = boundary.DATA_TOL) -> float:
    """Lower bound for ``||sum c_j C_{phi_j}||_e^2`` from the data at ``zeta``.

    ``form="class"`` sums ``|sum_{l in class} c_l|^2 d^-beta`` once per data
    class; this equals the double sum ``sum_{j,l} conj(c_j) c_l L_{jl}`` of
    curve limits.  ``form="member"`` repeats the class term for every member
    with finite dilation.
    """
    if len(maps) != len(coeffs) or not maps:
        raise ValueError("maps and coeffs must be non-empty and of equal length")
    coeffs = np.asarray(coeffs, dtype=complex)
    jcs = [angular_derivative(m, zeta) for m in maps]
    total = 0.0
    for cls in data_classes(jcs, tol):
        s = abs(coeffs[cls].sum()) ** 2 * jcs[cls[0]].d_val ** -space.beta_exp
        if form == "class":
            total += s
        elif form == "member":
            total += len(cls) * s
        else:
            raise ValueError(f"unknown form {form!r}")
    return float(total)


@dataclass(frozen=True)
class ClassReport:
    zeta: np.ndarray
    members: tuple
    class_sum: complex
    satisfied: bool
    d_val: float


def combo_necessary_condition(maps: Sequence[LinearFractionalMap], coeffs: Sequence[complex], space: SpaceSpec,
                              tol: float = 1e-9, data_tol: float = boundary.DATA_TOL) -> list[ClassReport]:
    """Per-class coefficient sums at every contact point of every map.

    Compactness of ``sum c_j C_{phi_j}`` requires every class sum to vanish;
    maps without contact points give an empty (vacuously satisfied) report.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    seen: list[np.ndarray] = []
    reports = []
    for m in maps:
        for zeta in _contacts_or_empty(m):
            if any(np.linalg.norm(zeta - s) <= boundary.DEDUP_DIST for s in seen):
                continue
            seen.append(zeta)
            jcs = [angular_derivative(x, zeta) for x in maps]
            for cls in data_classes(jcs, data_tol):
                total = complex(coeffs[cls].sum())
                reports.append(ClassReport(np.array(zeta), tuple(cls), total, abs(total) <= tol, jcs[cls[0]].d_val))
    return reports


# ---------------------------------------------------------------------------
# traces

TRACE_COLUMNS = ("param", "quotient", "rho", "mixed_re", "mixed_im")


def curve_trace(phi, psi, family: CurveFamily, space: SpaceSpec, levels: int = LIMIT_LEVELS) -> list[dict]:
    """Ladder of kernel quotient, pseudo-distance and mixed ratio along ``family``."""
    rows = []
    for k in range(levels):
        cp = family(family.h0 * 2.0 ** -k)
        p = evaluate(phi, cp.z)
        q = evaluate(psi, cp.z)
        mixed = (1.0 - np.vdot(cp.z, cp.z).real) / (1.0 - np.vdot(p, q))
        row = {"param": cp.param}
        for j, zj in enumerate(cp.z, start=1):
            row[f"re_z{j}"] = zj.real
            row[f"im_z{j}"] = zj.imag
        row["quotient"] = float(kernel_quotient(phi, psi, cp.z, space))
        row["rho"] = float(pseudo_distance(p, q))
        row["mixed_re"] = mixed.real
        row["mixed_im"] = mixed.imag
        rows.append(row)
    return rows


def write_trace_csv(rows: list[dict], stream=None) -> str:
    """Write trace rows as CSV (header row first, 17 significant digits)."""
    out = io.StringIO() if stream is None else stream
    if rows:
        fields = list(rows[0])
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format(row[f], ".17g") for f in fields])
    return out.getvalue() if stream is None else ""
