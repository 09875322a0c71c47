"""Data processing for sandwiched divergences, its quantitative gap, and recovery.

For states ``rho, sigma`` and a trace-preserving map ``Phi`` let ``beta = alpha/(alpha-1)``,
``h = T(rho)`` in L_beta(sigma) and ``h0 = T(Phi rho)`` in L_beta(Phi sigma). The gap
``D(rho||sigma) - D(Phi rho||Phi sigma)`` is bracketed by functions of
``delta = ||h - P(h0)||_{beta, sigma}``, where ``P`` is the Petz recovery map.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .algebra import as_functional, schatten_norm
from .channels import Channel, apply, petz_apply, petz_dual, positivity_rank
from .divergences import _check_alpha, relative_entropy, sandwiched_renyi
from .errors import HypothesisNotMet, PositivityClassTooWeak, StructureMismatch
from .lp_kosaki import KosakiElement, duality_map_T, interpolation_path, kosaki_norm

DEFAULT_DEFECT_TOL = 1e-6
DEFAULT_GAP_TOL = 1e-8


@dataclass(frozen=True)
class DpiReport:
    """Divergences before and after a channel together with the gap bracket.

    ``gap``, ``delta``, the bounds and ``t_defect`` are ``None`` when ``d_in`` is
    infinite, since the inequality is then vacuous.
    """

    alpha: float
    d_in: float
    d_out: float
    gap: float | None
    delta: float | None
    lower_bound: float | None
    upper_bound: float | None
    t_defect: float | None
    recovery_defect: float
    tolerance: float = DEFAULT_DEFECT_TOL

    @property
    def sufficient(self) -> bool:
        return self.recovery_defect <= self.tolerance

    def violations(self, dpi_tol: float = 1e-8, bound_tol: float = 1e-7) -> list[str]:
        if self.gap is None:
            return []
        out = []
        if self.gap < -dpi_tol:
            out.append("data processing inequality")
        if self.gap < self.lower_bound - bound_tol:
            out.append("gap lower bound")
        if self.upper_bound is not None and self.gap > self.upper_bound + bound_tol:
            out.append("gap upper bound")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sufficient"] = self.sufficient
        return d


CSV_COLUMNS = ("alpha", "d_in", "d_out", "gap", "lower", "upper", "t_defect",
               "recovery_defect", "sufficient")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return format(float(x), ".17g")


def reports_to_csv(reports: Sequence[DpiReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([_cell(v) for v in (r.alpha, r.d_in, r.d_out, r.gap, r.lower_bound,
                                       r.upper_bound, r.t_defect, r.recovery_defect,
                                       r.sufficient)])
    return buf.getvalue()


def _states(phi: Channel, psi, sigma):
    psi, sigma = as_functional(psi), as_functional(sigma)
    if psi.structure != phi.in_structure or sigma.structure != phi.in_structure:
        raise StructureMismatch("states do not live on the channel input")
    return psi.normalized(), sigma.normalized()


def _image(phi: Channel, f):
    return as_functional(apply(phi, f.element).hermitian_part())


def gap_bounds(delta: float, alpha: float) -> tuple[float, float | None]:
    """Lower and upper brackets for the divergence gap as functions of ``delta``."""
    beta = alpha / (alpha - 1.0)
    if alpha <= 2:
        lower = 2.0 * (delta / 2.0) ** beta
    else:
        lower = beta * (beta - 1.0) * (delta / 2.0) ** 2
    upper = -beta * math.log1p(-delta) if delta < 1 else None
    return lower, upper


def _recovery_defect(phi, psi, sigma, out_psi) -> float:
    return schatten_norm(petz_apply(phi, sigma, out_psi.element) - psi.element, 1)


def _t_defect(phi, psi, sigma, out_psi, out_sigma, alpha) -> float:
    h = duality_map_T(KosakiElement(psi.element, sigma, alpha))
    h0 = duality_map_T(KosakiElement(out_psi.element, out_sigma, alpha))
    return kosaki_norm(h.h - petz_apply(phi, sigma, h0.h), sigma, h.p)


def dpi_report(phi: Channel, psi, sigma, alpha: float,
               tolerance: float = DEFAULT_DEFECT_TOL) -> DpiReport:
    """Evaluate the data processing gap and its bracket for normalized inputs.

    Raises:
        InvalidAlpha: unless ``1 < alpha < inf``.
    """
    alpha = _check_alpha(alpha)
    psi, sigma = _states(phi, psi, sigma)
    out_psi, out_sigma = _image(phi, psi), _image(phi, sigma)
    d_in = float(sandwiched_renyi(psi, sigma, alpha))
    d_out = float(sandwiched_renyi(out_psi, out_sigma, alpha))
    rec = _recovery_defect(phi, psi, sigma, out_psi)
    if not math.isfinite(d_in):
        return DpiReport(alpha, d_in, d_out, None, None, None, None, None, rec, tolerance)
    delta = _t_defect(phi, psi, sigma, out_psi, out_sigma, alpha)
    lower, upper = gap_bounds(delta, alpha)
    return DpiReport(alpha, d_in, d_out, d_in - d_out, delta, lower, upper, delta, rec,
                     tolerance)


def equality_defect(phi: Channel, psi, sigma, alpha: float = 2.0) -> tuple[float, float]:
    """Residuals of the equality conditions: ``(t_defect, recovery_defect)``.

    ``t_defect`` measures ``P(T(Phi rho)) - T(rho)`` in L_beta(sigma);
    ``recovery_defect`` is ``||P(Phi rho) - rho||_1``. At ``alpha = 2`` the
    duality map is a multiple of the identity on positives, so both vanish together.
    """
    alpha = _check_alpha(alpha)
    psi, sigma = _states(phi, psi, sigma)
    out_psi, out_sigma = _image(phi, psi), _image(phi, sigma)
    return (_t_defect(phi, psi, sigma, out_psi, out_sigma, alpha),
            _recovery_defect(phi, psi, sigma, out_psi))


@dataclass(frozen=True)
class SufficiencyVerdict:
    """Outcome of a sufficiency test.

    ``sufficient`` is decided by the recovery defect; ``consistent`` records
    whether the gap test (``gap <= gap_tolerance``) reached the same verdict.
    """

    sufficient: bool
    recovery: Channel
    evidence: DpiReport
    tolerance: float
    gap_tolerance: float
    sigma_recovery_defect: float
    consistent: bool

    def to_dict(self) -> dict:
        return {"sufficient": self.sufficient, "consistent": self.consistent,
                "tolerance": self.tolerance, "gap_tolerance": self.gap_tolerance,
                "sigma_recovery_defect": self.sigma_recovery_defect,
                "evidence": self.evidence.to_dict()}


def sufficiency_test(phi: Channel, psi, sigma, alpha: float = 2.0,
                     tol: float = DEFAULT_DEFECT_TOL,
                     gap_tol: float = DEFAULT_GAP_TOL) -> SufficiencyVerdict:
    """Decide whether the Petz map of ``phi`` at ``sigma`` recovers ``psi``.

    Raises:
        PositivityClassTooWeak: ``phi`` is not declared at least 2-positive.
    """
    if positivity_rank(phi.positivity_class) < positivity_rank("two_positive"):
        raise PositivityClassTooWeak(f"channel class {phi.positivity_class!r} is below two_positive")
    report = dpi_report(phi, psi, sigma, alpha, tol)
    _, sigma_n = _states(phi, psi, sigma)
    recovery = petz_dual(phi, sigma_n)
    sig_def = schatten_norm(apply(recovery, apply(phi, sigma_n.element)) - sigma_n.element, 1)
    sufficient = report.recovery_defect <= tol
    gap_small = report.gap is not None and report.gap <= gap_tol
    return SufficiencyVerdict(sufficient, recovery, report, tol, gap_tol, sig_def,
                              sufficient == gap_small)


def d1_monotonicity_check(phi: Channel, psi, sigma) -> tuple[float, float]:
    """Relative entropy before and after ``phi``."""
    psi, sigma = as_functional(psi), as_functional(sigma)
    return (float(relative_entropy(psi, sigma)),
            float(relative_entropy(_image(phi, psi), _image(phi, sigma))))


@dataclass(frozen=True)
class PathNormRow:
    theta: float
    norm_in: float
    norm_out: float


def path_norm_preservation_check(phi: Channel, h: KosakiElement, p: float | None = None,
                                 thetas=(0.125, 0.25, 0.5, 0.75),
                                 gate_tol: float = 1e-8) -> list[PathNormRow]:
    """Norms of the interpolation path through ``h`` before and after ``phi``.

    At ``theta`` the path value lies in L_{1/theta}; its norm is 1 up to the
    norm of ``h``.

    Raises:
        HypothesisNotMet: ``phi`` does not preserve the norm of ``h``.
    """
    if p is not None:
        h = h.with_exponent(p)
    sigma = h.phi
    out_sigma = _image(phi, sigma)
    n_in = h.norm()
    n_out = kosaki_norm(apply(phi, h.h), out_sigma, h.p)
    if not abs(n_in - n_out) <= gate_tol * max(1.0, n_in):
        raise HypothesisNotMet(f"channel changes the norm: {n_in!r} -> {n_out!r}")
    path = interpolation_path(h)
    rows = []
    for t in thetas:
        val = path(t)
        r = 1.0 / t
        rows.append(PathNormRow(float(t), kosaki_norm(val, sigma, r),
                                kosaki_norm(apply(phi, val), out_sigma, r)))
    return rows

