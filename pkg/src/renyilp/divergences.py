"""Quantum Renyi divergences for positive functionals on block algebras.

All values are in nats. ``+inf`` is returned (as ``math.inf``) exactly when a
support condition fails; no finite sentinel is ever used.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgebraElement, PositiveFunctional, as_element, as_functional, herm_eig,
                      mlog, mpower, order_leq, schatten_norm, trace, RANK_TOL)
from .errors import InvalidAlpha, InvalidExponent, StructureMismatch, ZeroFunctional, ZeroOperator
from .lp_kosaki import MEMBERSHIP_TOL, compression_defect, kosaki_norm

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class DivergenceValue:
    """A nonnegative extended real divergence value."""

    value: float
    units: str = "nats"

    def __float__(self) -> float:
        return float(self.value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def in_base(self, base) -> "DivergenceValue":
        """Convert to ``"bits"`` (base 2) or back to nats (base e)."""
        to_bits = base in (2, "2")
        if to_bits == (self.units == "bits"):
            return self
        if to_bits:
            return DivergenceValue(self.value / LOG2, "bits")
        return DivergenceValue(self.value * LOG2, "nats")


INF = DivergenceValue(math.inf)


def _pair(psi, phi) -> tuple[PositiveFunctional, PositiveFunctional]:
    psi, phi = as_functional(psi), as_functional(phi)
    if psi.structure != phi.structure:
        raise StructureMismatch(f"{psi.structure.dims} vs {phi.structure.dims}")
    if psi.is_zero() or phi.is_zero():
        raise ZeroFunctional("divergences are undefined for the zero functional")
    return psi, phi


def _check_alpha(alpha: float, allow_below_one: bool = False) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0 or alpha == 1:
        raise InvalidAlpha(f"invalid order alpha={alpha}")
    if not allow_below_one and alpha < 1:
        raise InvalidAlpha(f"order must exceed 1, got {alpha}")
    return alpha


def support_contained(psi, phi) -> bool:
    """Whether ``supp(psi)`` lies inside ``supp(phi)``."""
    return compression_defect(as_functional(psi).element, phi) <= MEMBERSHIP_TOL


def sandwiched_renyi(psi, phi, alpha: float) -> DivergenceValue:
    """Sandwiched Renyi divergence ``alpha/(alpha-1) * log ||h_psi||_{alpha, phi}``.

    For states with ``supp(rho) <= supp(sigma)`` this is
    ``log Tr[(sigma^{(1-a)/2a} rho sigma^{(1-a)/2a})^a] / (a-1)``.

    Raises:
        InvalidAlpha: unless ``1 < alpha < inf``.
        ZeroFunctional: either argument is zero.
    """
    alpha = _check_alpha(alpha)
    psi, phi = _pair(psi, phi)
    norm = kosaki_norm(psi.element, phi, alpha)
    if not math.isfinite(norm):
        return INF
    return DivergenceValue(alpha / (alpha - 1.0) * math.log(norm))


def _log_trace_power_product(psi: PositiveFunctional, phi: PositiveFunctional,
                             a: float, b: float) -> float:
    """``log Tr(rho^a sigma^b)`` summed over joint eigen-overlaps, on supports.

    Evaluated as a log-sum-exp so that large orders neither overflow nor underflow.
    """
    dr, ds = herm_eig(psi.element), herm_eig(phi.element)
    thr_r = RANK_TOL * dr.all_values().max()
    thr_s = RANK_TOL * ds.all_values().max()
    logs = []
    for wr, ur, ws, us in zip(dr.eigenvalues, dr.eigenvectors.blocks,
                              ds.eigenvalues, ds.eigenvectors.blocks):
        kr, ks = wr > thr_r, ws > thr_s
        if not kr.any() or not ks.any():
            continue
        overlap = np.abs(ur[:, kr].conj().T @ us[:, ks]) ** 2
        with np.errstate(divide="ignore"):
            terms = (a * np.log(wr[kr])[:, None] + b * np.log(ws[ks])[None, :]
                     + np.log(overlap))
        logs.append(terms.ravel())
    if not logs:
        return -math.inf
    terms = np.concatenate(logs)
    top = terms.max()
    if not math.isfinite(top):
        return -math.inf
    return float(top + math.log(np.sum(np.exp(terms - top))))


def standard_renyi(psi, phi, alpha: float) -> DivergenceValue:
    """Standard (Petz) Renyi divergence ``log Tr(rho^a sigma^{1-a}) / (a-1)``.

    For ``alpha > 1`` the value is infinite unless ``supp(rho) <= supp(sigma)``.
    For ``alpha < 1`` it is infinite only when the supports are orthogonal.
    """
    alpha = _check_alpha(alpha, allow_below_one=True)
    psi, phi = _pair(psi, phi)
    if alpha > 1 and not support_contained(psi, phi):
        return INF
    log_tr = _log_trace_power_product(psi, phi, alpha, 1.0 - alpha)
    if log_tr == -math.inf:
        return INF
    return DivergenceValue(log_tr / (alpha - 1.0))


def relative_entropy(psi, phi) -> DivergenceValue:
    """Umegaki relative entropy ``Tr rho (log rho - log sigma)``."""
    psi, phi = _pair(psi, phi)
    if not support_contained(psi, phi):
        return INF
    rho = psi.element
    value = trace(rho @ (mlog(rho) - mlog(phi.element)))
    return DivergenceValue(float(np.real(value)))


def max_relative(psi, phi) -> DivergenceValue:
    """Max-relative entropy ``log inf{lam : rho <= lam sigma}``."""
    psi, phi = _pair(psi, phi)
    _, lam = order_leq(psi.element, phi.element)
    if lam is None:
        return INF
    return DivergenceValue(math.log(lam))


@dataclass(frozen=True)
class RelativeModularOperator:
    """The superoperator ``k -> rho^z k sigma^{-z}`` (powers on supports)."""

    rho: PositiveFunctional
    sigma: PositiveFunctional

    def __post_init__(self):
        object.__setattr__(self, "rho", as_functional(self.rho))
        object.__setattr__(self, "sigma", as_functional(self.sigma))

    def apply(self, z: complex, k) -> AlgebraElement:
        return relative_modular_apply(self, z, k)


def relative_modular_apply(delta: RelativeModularOperator, z: complex, k) -> AlgebraElement:
    """``Delta^z(k) = rho^z k sigma^{-z}``.

    Raises:
        ZeroOperator: when sigma is zero.
    """
    if delta.sigma.is_zero():
        raise ZeroOperator("relative modular operator with zero reference functional")
    k = as_element(k)
    if delta.rho.is_zero():
        return AlgebraElement.zeros(k.structure)
    return mpower(delta.rho.element, z) @ k @ mpower(delta.sigma.element, -z)


def alt_bounds(psi, phi, p: float) -> tuple[float, float]:
    """Lower and upper bounds on ``||h_psi||_{p, phi}^p`` from the relative modular operator.

    ``psi(1)^{1-p} ||Delta^{1-1/2p} sigma^{1/2}||_2^{2p} <= ||h_psi||_p^p
    <= ||Delta^{p/2} sigma^{1/2}||_2^2``; the upper bound is ``inf`` unless
    ``supp(rho) <= supp(sigma)``.
    """
    p = float(p)
    if not (1 < p < math.inf):
        raise InvalidExponent(f"need 1 < p < inf, got {p}")
    psi, phi = _pair(psi, phi)
    delta = RelativeModularOperator(psi, phi)
    root = mpower(phi.element, 0.5)
    low = psi.mass ** (1.0 - p) * schatten_norm(
        relative_modular_apply(delta, 1.0 - 0.5 / p, root), 2) ** (2 * p)
    if not support_contained(psi, phi):
        return low, math.inf
    high = schatten_norm(relative_modular_apply(delta, 0.5 * p, root), 2) ** 2
    return low, high


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    sandwiched: float
    standard: float
    lower_standard: float


@dataclass
class SweepTable:
    """Rows of ``(alpha, sandwiched, standard, lower_standard)`` plus any invariant breaches."""

    rows: list[SweepRow]
    violations: list[str] = field(default_factory=list)

    HEADER = ("alpha", "sandwiched", "standard", "lower_standard")

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_csv(self, fmt: str = ".17g") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.HEADER)
        for r in self.rows:
            writer.writerow([format(getattr(r, c), fmt) for c in self.HEADER])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"rows": [{c: getattr(r, c) for c in self.HEADER} for r in self.rows],
                "violations": list(self.violations)}


def alpha_sweep(psi, phi, grid, sandwich_tol: float = 1e-8,
                monotone_tol: float = 1e-9) -> SweepTable:
    """Tabulate sandwiched and standard divergences over ``grid`` and check their ordering.

    Each row must satisfy ``D_{2-1/a} <= D~_a <= D_a`` and the sandwiched
    column must be nondecreasing.
    """
    grid = [float(a) for a in grid]
    if not grid or any(a <= 1 or not math.isfinite(a) for a in grid):
        raise InvalidAlpha("sweep orders must be finite and exceed 1")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidAlpha("sweep grid must be sorted ascending")
    psi, phi = _pair(psi, phi)
    rows, violations = [], []
    for a in grid:
        row = SweepRow(a, float(sandwiched_renyi(psi, phi, a)),
                       float(standard_renyi(psi, phi, a)),
                       float(standard_renyi(psi, phi, 2.0 - 1.0 / a)))
        if not row.lower_standard <= row.sandwiched + sandwich_tol:
            violations.append(f"alpha={a!r}: lower standard exceeds sandwiched")
        if not row.sandwiched <= row.standard + sandwich_tol:
            violations.append(f"alpha={a!r}: sandwiched exceeds standard")
        if rows and not rows[-1].sandwiched <= row.sandwiched + monotone_tol:
            violations.append(f"alpha={a!r}: sandwiched decreased")
        rows.append(row)
    return SweepTable(rows, violations)
