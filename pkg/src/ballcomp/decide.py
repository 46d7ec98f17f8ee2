"""Compactness decisions for differences of linear fractional composition operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import boundary
from .boundary import angular_derivative, contact_points, is_compact_single, sup_norm
from .errors import NoContact, PreconditionFailed
from .kernel import BoundReport, essnorm_lower_bound_diff
from .lfm import (
    MAP_EQ_TOL,
    LinearFractionalMap,
    TForm,
    adjoint_map,
    compose,
    normalize_t_form,
    projectively_equal,
    unitary_conjugate,
)
from .space import SpaceSpec

__all__ = [
    "Verdict",
    "Decision",
    "TFormAudit",
    "ContactAudit",
    "AuditReport",
    "decide_difference",
    "decide_adjoint_commutation",
    "audit_necessary_conditions",
    "tform_audit",
    "gamma_limit",
    "gamma_k_limit",
    "gamma_kr_limit",
    "rho_limit_gamma",
    "rho_limit_gamma_k",
    "h_theta",
]

AUDIT_TFORM_TOL = 1e-6
DELTA_TOL = 1e-6


class Verdict(str, Enum):
    COMPACT_BOTH_COMPACT = "CompactBothCompact"
    COMPACT_EQUAL_SYMBOLS = "CompactEqualSymbols"
    NOT_COMPACT = "NotCompact"

    @property
    def compact(self) -> bool:
        return self is not Verdict.NOT_COMPACT


@dataclass(frozen=True)
class TFormAudit:
    """Differences of normalized parameters after transporting ``zeta -> e1`` and ``eta -> e1``."""

    zeta: np.ndarray
    eta: np.ndarray
    phi_form: TForm
    psi_form: TForm
    deltas: dict

    @property
    def differing(self) -> list[str]:
        return [k for k, v in self.deltas.items() if v > DELTA_TOL]


@dataclass(frozen=True)
class Decision:
    """Verdict of the compact-difference test plus the evidence behind it.

    ``certificate`` is a :class:`BoundReport` (quantitative obstruction), a
    :class:`TFormAudit` (same data everywhere, different parameters) or a
    dict of sup-norms for compact verdicts.
    """

    verdict: Verdict
    witness: np.ndarray | None
    certificate: object
    details: dict = field(default_factory=dict)

    @property
    def compact(self) -> bool:
        return self.verdict.compact


def tform_audit(phi: LinearFractionalMap, psi: LinearFractionalMap, zeta, eta=None,
                tol: float = AUDIT_TFORM_TOL) -> TFormAudit:
    """Compare normalized parameters of two maps sending ``zeta`` to the same ``eta``."""
    zeta = np.asarray(zeta, dtype=complex)
    zeta = zeta / np.linalg.norm(zeta)
    if eta is None:
        eta = phi(zeta)
    eta = np.asarray(eta, dtype=complex)
    eta = eta / np.linalg.norm(eta)
    a = normalize_t_form(unitary_conjugate(phi, zeta, eta), tol)
    b = normalize_t_form(unitary_conjugate(psi, zeta, eta), tol)
    deltas = {
        "t": abs(a.t - b.t),
        "K": abs(a.K - b.K),
        "beta": float(np.linalg.norm(a.beta - b.beta)),
        "gamma": float(np.linalg.norm(a.gamma - b.gamma)),
        "alpha": float(np.linalg.norm(a.alpha - b.alpha)),
    }
    return TFormAudit(zeta, eta, a, b, deltas)


def _contacts(phi):
    try:
        return list(contact_points(phi).points)
    except NoContact:
        return []


def _shared_images(phi, psi, tol=boundary.DATA_TOL):
    """Contact points of either map at which both maps reach the sphere at the same point."""
    out = []
    for zeta in _contacts(phi) + _contacts(psi):
        a, b = phi(zeta), psi(zeta)
        if abs(np.linalg.norm(a) - 1) <= 1e-7 and np.linalg.norm(a - b) <= tol:
            if not any(np.linalg.norm(zeta - z) <= boundary.DEDUP_DIST for z, _ in out):
                out.append((zeta, a))
    return out


def decide_difference(phi: LinearFractionalMap, psi: LinearFractionalMap, space: SpaceSpec,
                      sup_tol: float = boundary.SELF_MAP_TOL, eq_tol: float = MAP_EQ_TOL,
                      data_tol: float = boundary.DATA_TOL) -> Decision:
    """Decide compactness of ``C_phi - C_psi``.

    Compact exactly when both operators are compact or the symbols agree.
    A NotCompact verdict carries a positive essential-norm lower bound when
    some contact point separates the boundary data, and otherwise a
    parameter audit at a common contact point showing where the maps differ.
    """
    if phi.n != psi.n or phi.n != space.n:
        raise ValueError("dimension mismatch between maps and space")
    compact_phi = is_compact_single(phi, sup_tol)
    compact_psi = is_compact_single(psi, sup_tol)
    sups = {"phi": sup_norm(phi, sup_tol), "psi": sup_norm(psi, sup_tol)}
    details = {"compact_phi": compact_phi, "compact_psi": compact_psi, "sup_norms": sups}
    if compact_phi and compact_psi:
        return Decision(Verdict.COMPACT_BOTH_COMPACT, None, sups, details)
    if projectively_equal(phi, psi, eq_tol):
        return Decision(Verdict.COMPACT_EQUAL_SYMBOLS, None, sups, details)

    report = essnorm_lower_bound_diff(phi, psi, space, data_tol)
    if report.bound > 0:
        return Decision(Verdict.NOT_COMPACT, report.witness, report, details)
    best = None
    for zeta, eta in _shared_images(phi, psi):
        audit = tform_audit(phi, psi, zeta, eta)
        score = max(audit.deltas.values())
        if best is None or score > max(best.deltas.values()):
            best = audit
        if score > DELTA_TOL:
            break
    details["bound_report"] = report
    return Decision(Verdict.NOT_COMPACT, None if best is None else best.zeta, best, details)


def decide_adjoint_commutation(phi: LinearFractionalMap, space: SpaceSpec, strict: bool = True,
                               sup_tol: float = boundary.SELF_MAP_TOL) -> Decision:
    """Compactness of ``C_{phi o sigma} - C_{sigma o phi}`` with ``sigma`` the adjoint map.

    For ``sup |phi| = 1`` this holds exactly when ``phi o sigma = sigma o phi``;
    ``details["commute"]`` records that test and ``details["consistent"]``
    whether it agrees with the general verdict.  When ``sup |phi| < 1`` a
    strict call raises :class:`PreconditionFailed`; otherwise the general
    test is run with ``details["hypothesis_met"] = False``.
    """
    s = sup_norm(phi, sup_tol)
    met = s >= 1.0 - sup_tol
    if not met and strict:
        raise PreconditionFailed(f"sup |phi| = {s:.17g} < 1")
    sigma = adjoint_map(phi)
    left = compose(phi, sigma)
    right = compose(sigma, phi)
    dec = decide_difference(left, right, space, sup_tol)
    commute = projectively_equal(left, right)
    details = dict(dec.details)
    details.update(
        sigma=sigma,
        phi_sigma=left,
        sigma_phi=right,
        commute=commute,
        hypothesis_met=met,
        consistent=(dec.compact == commute) if met else None,
    )
    return Decision(dec.verdict, dec.witness, dec.certificate, details)


@dataclass(frozen=True)
class ContactAudit:
    zeta: np.ndarray
    source: str
    eta_phi: np.ndarray
    eta_psi: np.ndarray
    d_phi: float
    d_psi: float
    same_data: bool


@dataclass(frozen=True)
class AuditReport:
    contacts: list
    tform: list

    @property
    def passed(self) -> bool:
        return all(c.same_data for c in self.contacts) and all(not a.differing for a in self.tform)


def audit_necessary_conditions(phi: LinearFractionalMap, psi: LinearFractionalMap,
                               space: SpaceSpec | None = None) -> AuditReport:
    """Same-data checks at every contact point of either map, plus parameter audits
    at contact points where both maps reach the same boundary point."""
    contacts = []
    for source, m in (("phi", phi), ("psi", psi)):
        for zeta in _contacts(m):
            a = angular_derivative(phi, zeta)
            b = angular_derivative(psi, zeta)
            contacts.append(ContactAudit(zeta, source, a.eta, b.eta, a.d_val, b.d_val, boundary._same(a, b)))
    tform = [tform_audit(phi, psi, zeta, eta) for zeta, eta in _shared_images(phi, psi)]
    return AuditReport(contacts, tform)


# ---------------------------------------------------------------------------
# boundary limits predicted from normalized parameters


def gamma_limit(tf: TForm) -> float:
    """Limit of ``(1-|z|^2)/(1-|phi(z)|^2)`` as ``z -> e1`` along the circle ``Re z_1 = |z_1|^2``."""
    return 1.0 / (2 * tf.t - tf.t ** 2 - 2 * tf.t * tf.K.real - float(np.sum(np.abs(tf.beta) ** 2)))


def gamma_k_limit(tf: TForm, k: int) -> float:
    """Limit of ``(1-|z|^2)/(1-|phi(z)|^2)`` along ``r e1 + sqrt(1-r) e_k``."""
    col = tf.alpha[:, k - 2]
    return 1.0 / (2 * tf.t - float(np.sum(np.abs(col) ** 2)))


def gamma_kr_limit(tf: TForm, k: int, r: float) -> float:
    """Limit of ``(1-|z|^2)/(1-|phi(z)|^2)`` along ``z_1 e1 + (z_1 - 1) e_k``, ``z_1 = 1 - r + r e^{i theta}``."""
    t = tf.t
    col = tf.alpha[:, k - 2]
    s = float(np.sum(np.abs(tf.beta - col) ** 2))
    return (1 - 2 * r) / (t - r * (t ** 2 + 2 * t * (tf.K + tf.gamma[k - 2]).real + s))


def rho_limit_gamma(a: TForm, b: TForm) -> float:
    """Limit of ``1 - rho^2(phi(z), psi(z))`` along the circle, for maps sharing ``t`` and ``K``."""
    t = a.t
    base = t + (t - t ** 2 - 2 * t * a.K.real)
    l1 = float(np.sum(np.abs(a.beta) ** 2))
    l2 = float(np.sum(np.abs(b.beta) ** 2))
    inner = complex(np.sum(a.beta * np.conj(b.beta)))
    return (base - l1) * (base - l2) / abs(base - inner) ** 2


def rho_limit_gamma_k(a: TForm, b: TForm, k: int) -> float:
    """Limit of ``1 - rho^2`` along ``r e1 + sqrt(1-r) e_k`` for maps sharing ``t`` and ``beta``."""
    t = a.t
    x = a.alpha[:, k - 2]
    y = b.alpha[:, k - 2]
    l1 = float(np.sum(np.abs(x) ** 2))
    l2 = float(np.sum(np.abs(y) ** 2))
    inner = complex(np.sum(x * np.conj(y)))
    return (2 * t - l1) * (2 * t - l2) / abs(2 * t - inner) ** 2


def h_theta(theta, base: float, l1: float, l2: float):
    """``base (l1^2 + l2^2 - 2 theta l1 l2) + (theta^2 - 1) l1^2 l2^2``.

    Its derivative is ``2 l1 l2 (theta l1 l2 - base)``, so it decreases on
    ``[0, 1]`` once ``base >= l1 l2``, down to ``h(1) = base (l1 - l2)^2``.
    """
    theta = np.asarray(theta, dtype=float)
    return base * (l1 ** 2 + l2 ** 2 - 2 * theta * l1 * l2) + (theta ** 2 - 1) * l1 ** 2 * l2 ** 2
