"""Kosaki's interpolation spaces L_p(M, sigma) in finite dimensions.

An element ``h`` of L_1(M) belongs to L_p(M, sigma) when it is compressed to the
support ``e`` of sigma; its norm is the Schatten p-norm of the witness
``k = sigma^{-1/2q} h sigma^{-1/2q}`` (``1/p + 1/q = 1``). Every norm in this
module is computed through that witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .algebra import (HERM_TOL, RANK_TOL, AlgebraElement, PositiveFunctional, _p_norm,
                      as_element, as_functional, block_matrix, check_hermitian, herm_eig,
                      mpower, order_leq, schatten_norm, support, trace)
from .errors import (ConsistencyError, ExponentMismatch, InvalidEta, InvalidExponent,
                     NotInSpace, OutOfStrip, StructureMismatch, ZeroElement)

#: Relative trace-norm defect above which ``h`` is declared outside L_p(M, sigma).
MEMBERSHIP_TOL = 1e-9


def inv_exponent(p: float) -> float:
    """``1/p`` with ``1/inf = 0``."""
    return 0.0 if np.isinf(p) else 1.0 / p


def conjugate_exponent(p: float) -> float:
    """Hoelder conjugate ``q`` with ``1/p + 1/q = 1``."""
    _check_exponent(p)
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_exponent(p: float) -> None:
    if not (p >= 1):
        raise InvalidExponent(f"exponent must lie in [1, inf], got {p}")


def _half_q(p: float) -> float:
    """The exponent ``1/2q`` used by the embedding ``i_p``."""
    return 0.5 * (1.0 - inv_exponent(p))


def compression_defect(h, sigma) -> float:
    """Relative trace-norm size of the part of ``h`` outside ``e h e``."""
    h = as_element(h)
    sigma = as_functional(sigma)
    n1 = schatten_norm(h, 1)
    if n1 == 0.0:
        return 0.0
    if sigma.is_zero():
        return 1.0
    e = support(sigma.element).projector
    return schatten_norm(h - e @ h @ e, 1) / n1


def is_member(h, sigma, tol: float = MEMBERSHIP_TOL) -> bool:
    return compression_defect(h, sigma) <= tol


@dataclass(frozen=True)
class KosakiElement:
    """An element ``h`` of L_p(M, phi), stored through its L_1 representative."""

    h: AlgebraElement
    phi: PositiveFunctional
    p: float

    def __post_init__(self):
        _check_exponent(self.p)
        h = as_element(self.h)
        phi = as_functional(self.phi)
        if h.structure != phi.structure:
            raise StructureMismatch(f"{h.structure.dims} vs {phi.structure.dims}")
        if not is_member(h, phi):
            raise NotInSpace("element is not compressed to the support of phi")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "p", float(self.p))

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)

    def witness(self) -> AlgebraElement:
        return extract(self.h, self.phi, self.p)

    def norm(self) -> float:
        return kosaki_norm(self.h, self.phi, self.p)

    def with_exponent(self, p: float) -> "KosakiElement":
        return KosakiElement(self.h, self.phi, p)

    def __add__(self, other: "KosakiElement") -> "KosakiElement":
        return KosakiElement(self.h + other.h, self.phi, self.p)

    def __sub__(self, other: "KosakiElement") -> "KosakiElement":
        return KosakiElement(self.h - other.h, self.phi, self.p)

    def __mul__(self, c) -> "KosakiElement":
        return KosakiElement(c * self.h, self.phi, self.p)

    __rmul__ = __mul__


def embed_ip(k, sigma, p: float) -> KosakiElement:
    """The isometry ``k -> sigma^{1/2q} k sigma^{1/2q}`` from Schatten L_p into L_p(M, sigma).

    The image is automatically compressed to the support of sigma.
    """
    _check_exponent(p)
    k = as_element(k)
    sigma = as_functional(sigma)
    if sigma.is_zero():
        return KosakiElement(AlgebraElement.zeros(k.structure), sigma, p)
    s = mpower(sigma.element, _half_q(p))
    return KosakiElement(s @ k @ s, sigma, p)


def extract(h, sigma, p: float, tol: float = MEMBERSHIP_TOL) -> AlgebraElement:
    """Witness ``k = sigma^{-1/2q} h sigma^{-1/2q}`` of ``h`` in L_p(M, sigma).

    Raises:
        NotInSpace: ``h`` is not compressed to the support of sigma.
    """
    _check_exponent(p)
    h = as_element(h)
    sigma = as_functional(sigma)
    if compression_defect(h, sigma) > tol:
        raise NotInSpace("element is not compressed to the support of sigma")
    if sigma.is_zero() or h.max_abs() == 0.0:
        return AlgebraElement.zeros(h.structure)
    s = mpower(sigma.element, -_half_q(p))
    return s @ h @ s


def kosaki_norm(h, sigma, p: float, tol: float = MEMBERSHIP_TOL) -> float:
    """Norm of ``h`` in L_p(M, sigma); ``inf`` when ``h`` is not in the space."""
    _check_exponent(p)
    if compression_defect(h, sigma) > tol:
        return np.inf
    return schatten_norm(extract(h, sigma, p, tol=np.inf), p)


def _is_psd(k: AlgebraElement, tol: float) -> bool:
    if not k.is_hermitian(tol):
        return False
    w = herm_eig(k, tol).all_values()
    return bool(w.min() >= -tol * max(np.abs(w).max(), np.finfo(float).tiny))


def linf_norm_pair(k, sigma, tol: float = HERM_TOL) -> tuple[float | None, float | None]:
    """Both computations of the L_inf(M, sigma) norm of a general ``k``.

    Returns:
        ``(pencil, direct)``: the least ``lam`` with
        ``[[0, k], [k*, 0]] <= lam * diag(sigma, sigma)``, and the operator norm
        of ``sigma^{-1/2} k sigma^{-1/2}``. Each is ``None`` when unbounded.
    """
    k = as_element(k)
    sigma = as_functional(sigma)
    zero = AlgebraElement.zeros(k.structure)
    k2 = block_matrix([[zero, k], [k.adjoint(), zero]])
    h2 = block_matrix([[sigma.element, zero], [zero, sigma.element]])
    _, pencil = order_leq(k2, h2, tol)

    if k.max_abs() == 0.0:
        direct = 0.0
    elif sigma.is_zero():
        direct = None
    else:
        e = support(sigma.element).projector
        leak = max((k - e @ k @ e).max_abs(), 0.0)
        if leak > np.sqrt(tol) * k.max_abs():
            direct = None
        else:
            s = mpower(sigma.element, -0.5)
            direct = schatten_norm(s @ k @ s, np.inf)
    return pencil, direct


def linf_norm(k, sigma, tol: float = HERM_TOL) -> float | None:
    """Norm of ``k`` in L_inf(M, sigma), or ``None`` if ``k`` is not bounded by sigma.

    For positive ``k`` this is the least ``lam`` with ``k <= lam sigma``. For a
    general ``k`` the 2x2 block pencil and the direct formula are both evaluated
    and must agree.

    Raises:
        ConsistencyError: the two computations disagree beyond 1e-8 (relative).
    """
    k = as_element(k)
    sigma = as_functional(sigma)
    if _is_psd(k, tol):
        return order_leq(k, sigma.element, tol)[1]
    pencil, direct = linf_norm_pair(k, sigma, tol)
    if (pencil is None) != (direct is None):
        raise ConsistencyError(f"pencil gives {pencil}, direct formula gives {direct}")
    if pencil is not None and abs(pencil - direct) > 1e-8 * max(1.0, abs(direct)):
        raise ConsistencyError(f"pencil {pencil!r} vs direct {direct!r}")
    return direct


def pairing(k: KosakiElement, h: KosakiElement):
    """Duality bracket between L_q(M, sigma) and L_p(M, sigma): ``Tr(k_q h_p)`` of witnesses."""
    if abs(inv_exponent(k.p) + inv_exponent(h.p) - 1.0) > 1e-12:
        raise ExponentMismatch(f"exponents {k.p} and {h.p} are not conjugate")
    if k.phi.structure != h.phi.structure or not k.phi.element.allclose(h.phi.element, 1e-12):
        raise StructureMismatch("elements refer to different reference functionals")
    return trace(k.witness() @ h.witness())


class _Polar(NamedTuple):
    left: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]
    right: tuple[np.ndarray, ...]


def _polar_svd(k: AlgebraElement, rank_tol: float = RANK_TOL) -> _Polar:
    """Thin SVD ``k = W S V*`` keeping only singular values above the support threshold.

    The polar decomposition is ``u = W V*`` (a partial isometry with
    ``u* u = support(|k|)``) and ``|k| = V S V*``.
    """
    svds = [np.linalg.svd(b) for b in k.blocks]
    smax = max((s.max() if s.size else 0.0) for _, s, _ in svds)
    thr = rank_tol * smax
    left, values, right = [], [], []
    for w, s, vh in svds:
        keep = s > thr
        left.append(w[:, keep])
        values.append(s[keep])
        right.append(vh[keep, :].conj().T)
    return _Polar(tuple(left), tuple(values), tuple(right))


def _from_svd(structure, polar: _Polar, fn) -> AlgebraElement:
    """Assemble ``sum_i fn(s_i) w_i v_i^*`` from a stored SVD."""
    blocks = []
    for w, s, v in zip(*polar):
        blocks.append((w * fn(s)) @ v.conj().T)
    return AlgebraElement(structure, tuple(blocks))


def _from_svd_adjoint(structure, polar: _Polar, fn) -> AlgebraElement:
    """Assemble ``sum_i fn(s_i) v_i w_i^*``."""
    blocks = []
    for w, s, v in zip(*polar):
        blocks.append((v * fn(s)) @ w.conj().T)
    return AlgebraElement(structure, tuple(blocks))


def duality_map_T(h: KosakiElement) -> KosakiElement:
    """The norming functional of ``h``: unit vector of L_q(M, sigma) with ``<T(h), h> = ||h||_p``.

    With the witness ``k = u l^{1/p}`` this is
    ``||h||^{1-p} sigma^{1/2p} l^{1/q} u* sigma^{1/2p}``.
    """
    p = h.p
    if not (1 < p < np.inf):
        raise InvalidExponent(f"duality map needs 1 < p < inf, got {p}")
    k = h.witness()
    polar = _polar_svd(k)
    norm = _p_norm(np.concatenate(polar.values), p)
    if norm == 0.0:
        raise ZeroElement("duality map of the zero element")
    witness = _from_svd_adjoint(k.structure, polar, lambda s: s ** (p - 1.0))
    witness = norm ** (1.0 - p) * witness
    return embed_ip(witness, h.phi, conjugate_exponent(p))


def jordan_decompose(h: KosakiElement) -> tuple[KosakiElement, KosakiElement]:
    """Split a self-adjoint ``h`` into positive parts with orthogonal witnesses.

    ``h = h_plus - h_minus`` with ``h_pm = sigma^{1/2q} l_pm sigma^{1/2q}`` where
    ``l_plus - l_minus`` is the spectral split of the witness.
    """
    check_hermitian(h.h)
    dec = herm_eig(h.witness())
    plus = dec.reconstruct(lambda w: np.where(w > 0, w, 0.0))
    minus = dec.reconstruct(lambda w: np.where(w < 0, -w, 0.0))
    return embed_ip(plus, h.phi, h.p), embed_ip(minus, h.phi, h.p)


@dataclass(frozen=True)
class InterpolationPath:
    """A function on the strip ``0 <= Re z <= 1`` with values in L_1(M).

    At ``Re z = x`` the value is measured in L_{p_x}(M, sigma) with
    ``1/p_x = x/p_one + (1-x)/p_zero``.
    """

    sigma: PositiveFunctional
    func: Callable[[complex], AlgebraElement]
    p_zero: float = np.inf
    p_one: float = 1.0

    def evaluate(self, z: complex) -> AlgebraElement:
        z = complex(z)
        if not (-1e-14 <= z.real <= 1 + 1e-14):
            raise OutOfStrip(f"Re z = {z.real} outside [0, 1]")
        return self.func(z)

    __call__ = evaluate

    def exponent_at(self, x: float) -> float:
        inv = x * inv_exponent(self.p_one) + (1.0 - x) * inv_exponent(self.p_zero)
        return np.inf if inv == 0 else 1.0 / inv

    def norm_at(self, z: complex) -> float:
        return kosaki_norm(self.evaluate(z), self.sigma, self.exponent_at(complex(z).real))

    def times_exponential(self, m: float, eta: float) -> "InterpolationPath":
        """The path ``z -> f(z) * m**(z - eta)``."""
        f = self.func
        return InterpolationPath(self.sigma, lambda z: f(z) * m ** (z - eta),
                                 self.p_zero, self.p_one)


def interpolation_path(h: KosakiElement) -> InterpolationPath:
    """The norm-attaining path ``f_{h,p}`` through ``h`` at ``z = 1/p``.

    ``f(z) = ||l||_1^{1/p - z} sigma^{(1-z)/2} u l^z sigma^{(1-z)/2}`` where the
    witness of ``h`` is ``u l^{1/p}``.
    """
    p = h.p
    if np.isinf(p):
        raise InvalidExponent("the interpolation path needs a finite exponent")
    k = h.witness()
    polar = _polar_svd(k)
    svals = np.concatenate(polar.values)
    if svals.size == 0:
        raise ZeroElement("interpolation path through the zero element")
    l_mass = float(np.sum(svals ** p))
    sigma = h.phi
    structure = k.structure

    def f(z: complex) -> AlgebraElement:
        middle = _from_svd(structure, polar, lambda s: np.exp(p * z * np.log(s)))
        s = mpower(sigma.element, (1.0 - z) / 2.0)
        return l_mass ** (1.0 / p - z) * (s @ middle @ s)

    return InterpolationPath(sigma, f)


def reiterated_path(h: KosakiElement, p: float, p_prime: float) -> InterpolationPath:
    """``g(z) = f_{h,p_eta}(z/p + (1-z)/p')`` in F(L_{p'}(sigma), L_p(sigma))."""
    base = interpolation_path(h)
    a, b = inv_exponent(p), inv_exponent(p_prime)
    return InterpolationPath(h.phi, lambda z: base.func(z * a + (1 - z) * b), p_prime, p)


def constant_path(h, sigma, p: float = 1.0, p_prime: float = np.inf) -> InterpolationPath:
    h = as_element(h)
    return InterpolationPath(as_functional(sigma), lambda z: h, p_prime, p)


def three_lines_check(f: InterpolationPath, eta: float,
                      t_grid=(-2.0, -1.0, 0.0, 1.0, 2.0)) -> tuple[float, float]:
    """Both sides of the three lines inequality for ``f`` at ``Re z = eta``.

    The suprema over the boundary lines are sampled on ``t_grid``, which can
    only under-estimate them.

    Returns:
        ``(M0**(1-eta) * M1**eta, ||f(eta)||_{p_eta, sigma})``.
    """
    if not (0.0 < eta < 1.0):
        raise InvalidEta(f"eta must lie in (0, 1), got {eta}")
    m0 = max(f.norm_at(complex(0.0, t)) for t in t_grid)
    m1 = max(f.norm_at(complex(1.0, t)) for t in t_grid)
    value = f.norm_at(eta)
    return m0 ** (1.0 - eta) * m1 ** eta, value


class InequalitySides(NamedTuple):
    """Left and right sides of an inequality as stated; ``reversed`` flips its direction."""

    lhs: float
    rhs: float
    reversed: bool

    def holds(self, tol: float = 1e-8) -> bool:
        if self.reversed:
            return self.rhs <= self.lhs + tol
        return self.lhs <= self.rhs + tol


def _mean_power(a: float, b: float, p: float) -> float:
    """``[(a^p + b^p)/2]^{1/p}``, the max when ``p = inf``."""
    if np.isinf(p):
        return max(a, b)
    return 2.0 ** (-1.0 / p) * _p_norm(np.array([a, b]), p)


def clarkson_sides(h, k, sigma, p: float) -> InequalitySides:
    """Clarkson's inequality ``[(|h+k|^p + |h-k|^p)/2]^{1/p} <= (|h|^q + |k|^q)^{1/q}``.

    Valid for ``p >= 2``; reversed for ``p < 2``.
    """
    _check_exponent(p)
    h, k = as_element(h), as_element(k)
    q = conjugate_exponent(p)
    lhs = _mean_power(kosaki_norm(h + k, sigma, p), kosaki_norm(h - k, sigma, p), p)
    rhs = _p_norm(np.array([kosaki_norm(h, sigma, p), kosaki_norm(k, sigma, p)]), q)
    return InequalitySides(lhs, rhs, p < 2)


def pixu_sides(h, k, sigma, p: float) -> InequalitySides:
    """Optimal 2-uniform convexity ``(|h|^2 + (p-1)|k|^2)^{1/2} <= [(|h+k|^p + |h-k|^p)/2]^{1/p}``.

    Valid for ``1 < p <= 2``; reversed for ``p > 2``.
    """
    if not (1 < p < np.inf):
        raise InvalidExponent(f"need 1 < p < inf, got {p}")
    h, k = as_element(h), as_element(k)
    lhs = np.sqrt(kosaki_norm(h, sigma, p) ** 2 + (p - 1.0) * kosaki_norm(k, sigma, p) ** 2)
    rhs = _mean_power(kosaki_norm(h + k, sigma, p), kosaki_norm(h - k, sigma, p), p)
    return InequalitySides(float(lhs), rhs, p > 2)
