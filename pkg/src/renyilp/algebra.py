"""Finite-dimensional von Neumann algebras as direct sums of full matrix blocks.

Elements are stored block by block. Every spectral operation (powers, logarithms,
supports) acts blockwise and uses one global threshold per element, so that the
support of an element and the pseudo-inverse powers computed from it are always
consistent with each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (InvalidExponent, NotHermitian, NotPSD, ShapeMismatch,
                     StructureMismatch, ZeroOperator)

#: Relative tolerance for Hermiticity / positivity checks.
HERM_TOL = 1e-9
#: Relative eigenvalue threshold defining supports and pseudo-inverse powers.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class BlockStructure:
    """Ordered list of block dimensions of a direct sum of matrix algebras."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ShapeMismatch("a block structure needs at least one block")
        if any(d < 1 for d in dims):
            raise ShapeMismatch(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    @property
    def vec_dim(self) -> int:
        """Length of the vectorization of an element (sum of squared dims)."""
        return sum(d * d for d in self.dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(np.cumsum((0,) + self.dims[:-1]).tolist())

    def __len__(self):
        return len(self.dims)

    def __add__(self, other: "BlockStructure") -> "BlockStructure":
        return BlockStructure(self.dims + other.dims)

    def doubled(self) -> "BlockStructure":
        """Structure of the 2x2 matrices over this algebra."""
        return BlockStructure(tuple(2 * d for d in self.dims))


def _as_structure(s) -> BlockStructure:
    if isinstance(s, BlockStructure):
        return s
    if isinstance(s, (int, np.integer)):
        return BlockStructure((int(s),))
    return BlockStructure(tuple(s))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A block-diagonal complex matrix living in the algebra ``structure``."""

    structure: BlockStructure
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        structure = _as_structure(self.structure)
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        if len(blocks) != len(structure.dims):
            raise ShapeMismatch(
                f"expected {len(structure.dims)} blocks, got {len(blocks)}")
        for b, d in zip(blocks, structure.dims):
            if b.shape != (d, d):
                raise ShapeMismatch(f"block of shape {b.shape}, expected {(d, d)}")
            b.setflags(write=False)
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "blocks", blocks)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_array(cls, a) -> "AlgebraElement":
        """Single-block element from a square matrix."""
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeMismatch(f"expected a square matrix, got shape {a.shape}")
        return cls(BlockStructure((a.shape[0],)), (a,))

    @classmethod
    def from_dense(cls, structure, a, tol: float = 1e-12) -> "AlgebraElement":
        """Cut a dense block-diagonal matrix into blocks of ``structure``.

        Raises:
            ShapeMismatch: if ``a`` has weight outside the diagonal blocks.
        """
        structure = _as_structure(structure)
        a = np.asarray(a, dtype=complex)
        n = structure.total
        if a.shape != (n, n):
            raise ShapeMismatch(f"dense matrix of shape {a.shape}, expected {(n, n)}")
        blocks = []
        mask = np.zeros((n, n), dtype=bool)
        for off, d in zip(structure.offsets, structure.dims):
            blocks.append(a[off:off + d, off:off + d])
            mask[off:off + d, off:off + d] = True
        leak = np.abs(a[~mask]).max() if (~mask).any() else 0.0
        scale = max(np.abs(a).max(), 1.0)
        if leak > tol * scale:
            raise ShapeMismatch(f"matrix has off-block weight {leak:.3e}")
        return cls(structure, tuple(blocks))

    @classmethod
    def zeros(cls, structure) -> "AlgebraElement":
        structure = _as_structure(structure)
        return cls(structure, tuple(np.zeros((d, d)) for d in structure.dims))

    @classmethod
    def identity(cls, structure) -> "AlgebraElement":
        structure = _as_structure(structure)
        return cls(structure, tuple(np.eye(d) for d in structure.dims))

    @classmethod
    def diag(cls, values, structure=None) -> "AlgebraElement":
        values = np.asarray(values, dtype=complex)
        structure = _as_structure(structure if structure is not None else len(values))
        if len(values) != structure.total:
            raise ShapeMismatch("diagonal length does not match the structure")
        return cls(structure, tuple(np.diag(values[o:o + d])
                                    for o, d in zip(structure.offsets, structure.dims)))

    # -- views --------------------------------------------------------------

    def dense(self) -> np.ndarray:
        n = self.structure.total
        out = np.zeros((n, n), dtype=complex)
        for off, b in zip(self.structure.offsets, self.blocks):
            d = b.shape[0]
            out[off:off + d, off:off + d] = b
        return out

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.structure, tuple(b.conj().T for b in self.blocks))

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def map_blocks(self, fn: Callable[[np.ndarray], np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self.structure, tuple(fn(b) for b in self.blocks))

    def fro_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks)))

    def max_abs(self) -> float:
        return float(max(np.abs(b).max() for b in self.blocks))

    def is_hermitian(self, tol: float = HERM_TOL) -> bool:
        diff = (self - self.adjoint()).fro_norm()
        return diff <= tol * max(self.fro_norm(), np.finfo(float).tiny)

    def hermitian_part(self) -> "AlgebraElement":
        return 0.5 * (self + self.adjoint())

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        _check_same_structure(self, other)
        return (self - other).max_abs() <= atol

    # -- arithmetic ---------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, AlgebraElement):
            _check_same_structure(self, other)
            return AlgebraElement(self.structure,
                                  tuple(op(a, b) for a, b in zip(self.blocks, other.blocks)))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __matmul__(self, other):
        return self._binary(other, np.matmul)

    def __neg__(self):
        return self.map_blocks(np.negative)

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return NotImplemented
        return self.map_blocks(lambda b: c * b)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.map_blocks(lambda b: b / c)

    def __repr__(self):
        return f"AlgebraElement(dims={self.structure.dims})"


def _check_same_structure(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.structure != b.structure:
        raise StructureMismatch(f"{a.structure.dims} vs {b.structure.dims}")


def as_element(x) -> AlgebraElement:
    """Coerce a functional, an element or a square array into an AlgebraElement."""
    if isinstance(x, AlgebraElement):
        return x
    if isinstance(x, PositiveFunctional):
        return x.element
    return AlgebraElement.from_array(x)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Blockwise eigendecomposition; eigenvalues descending inside each block."""

    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: AlgebraElement

    def flat(self) -> list[tuple[int, float]]:
        """All eigenvalues tagged with the index of their block."""
        return [(i, float(v)) for i, w in enumerate(self.eigenvalues) for v in w]

    def all_values(self) -> np.ndarray:
        return np.concatenate(self.eigenvalues)

    def reconstruct(self, fn: Callable[[np.ndarray], np.ndarray] | None = None) -> AlgebraElement:
        blocks = []
        for w, u in zip(self.eigenvalues, self.eigenvectors.blocks):
            f = w if fn is None else fn(w)
            blocks.append((u * f) @ u.conj().T)
        return AlgebraElement(self.eigenvectors.structure, tuple(blocks))


@dataclass(frozen=True)
class SupportProjection:
    projector: AlgebraElement
    rank: int


def check_hermitian(a: AlgebraElement, tol: float = HERM_TOL) -> None:
    if not a.is_hermitian(tol):
        raise NotHermitian("element is not Hermitian within tolerance")


def herm_eig(a, tol: float = HERM_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian element.

    The Hermitian part is diagonalised, so eigenvalues are exactly real.

    Raises:
        NotHermitian: if ``a`` is not Hermitian within ``tol`` (relative).
    """
    a = as_element(a)
    check_hermitian(a, tol)
    values, vectors = [], []
    for b in a.blocks:
        w, u = np.linalg.eigh(0.5 * (b + b.conj().T))
        values.append(w[::-1].copy())
        vectors.append(u[:, ::-1])
    return SpectralDecomposition(tuple(values), AlgebraElement(a.structure, tuple(vectors)))


def _psd_eig(a, tol: float) -> SpectralDecomposition:
    dec = herm_eig(a, tol)
    w = dec.all_values()
    scale = np.abs(w).max() if w.size else 0.0
    if w.size and w.min() < -tol * scale:
        raise NotPSD(f"minimal eigenvalue {w.min():.3e} below -{tol:g}*{scale:.3e}")
    return dec


def _threshold(dec: SpectralDecomposition, rank_tol: float) -> float:
    w = dec.all_values()
    return rank_tol * (w.max() if w.size else 0.0)


def support(a, rank_tol: float = RANK_TOL, tol: float = HERM_TOL) -> SupportProjection:
    """Projector onto the span of eigenvectors above ``rank_tol * lambda_max``."""
    dec = _psd_eig(a, tol)
    thr = _threshold(dec, rank_tol)
    proj = dec.reconstruct(lambda w: (w > thr).astype(float) if thr > 0 else np.zeros_like(w))
    rank = int(sum(int(np.sum(w > thr)) for w in dec.eigenvalues)) if thr > 0 else 0
    return SupportProjection(proj, rank)


def _support_map(a, fn, t_real: float, rank_tol: float, tol: float) -> AlgebraElement:
    dec = _psd_eig(a, tol)
    thr = _threshold(dec, rank_tol)
    if thr <= 0:
        if t_real <= 0:
            raise ZeroOperator("negative or zero power of the zero operator")
        return AlgebraElement.zeros(as_element(a).structure)

    def on_support(w):
        out = np.zeros(w.shape, dtype=complex)
        mask = w > thr
        out[mask] = fn(w[mask])
        return out

    return dec.reconstruct(on_support)


def mpower(a, t, rank_tol: float = RANK_TOL, tol: float = HERM_TOL) -> AlgebraElement:
    """Power ``a**t`` of a positive element, computed on its support.

    ``t`` may be complex (principal branch). Eigenvalues at or below
    ``rank_tol * lambda_max`` are mapped to zero for every ``t``, so negative
    powers are pseudo-inverse powers and ``mpower(a, 0)`` is the support
    projector. ``mpower(a, 1)`` returns ``a`` itself.

    Raises:
        NotPSD: ``a`` is not positive semidefinite within ``tol``.
        ZeroOperator: ``a == 0`` and ``Re t <= 0``.
    """
    a = as_element(a)
    if not np.iscomplexobj(t) and t == 1:
        _psd_eig(a, tol)
        return a
    t_real = float(np.real(t))
    if np.iscomplexobj(t) and np.imag(t) != 0:
        return _support_map(a, lambda w: np.exp(t * np.log(w)), t_real, rank_tol, tol)
    t = float(np.real(t))
    return _support_map(a, lambda w: np.power(w, t), t_real, rank_tol, tol)


def mlog(a, rank_tol: float = RANK_TOL, tol: float = HERM_TOL) -> AlgebraElement:
    """Logarithm on the support of a positive element, zero off the support."""
    return _support_map(a, np.log, 0.0, rank_tol, tol)


def trace(a) -> float | complex:
    """Sum of block traces; a real float when the imaginary part is negligible."""
    a = as_element(a)
    t = complex(sum(np.trace(b) for b in a.blocks))
    if abs(t.imag) <= 1e-12 * max(1.0, abs(t)):
        return t.real
    return t


def singular_values(a) -> np.ndarray:
    a = as_element(a)
    return np.concatenate([np.linalg.svd(b, compute_uv=False) for b in a.blocks])


def _p_norm(s: np.ndarray, p: float) -> float:
    s = np.abs(np.asarray(s, dtype=float))
    if s.size == 0:
        return 0.0
    m = s.max()
    if m == 0.0:
        return 0.0
    if np.isinf(p):
        return float(m)
    # rescaled to avoid overflow at large p
    return float(m * np.sum((s / m) ** p) ** (1.0 / p))


def schatten_norm(a, p: float) -> float:
    """Schatten p-norm ``(sum s_i^p)^(1/p)``; ``p = inf`` gives the operator norm.

    Raises:
        InvalidExponent: if ``p < 1``.
    """
    if not p >= 1:
        raise InvalidExponent(f"Schatten exponent must be >= 1, got {p}")
    return _p_norm(singular_values(a), p)


def order_leq(a, b, tol: float = HERM_TOL, rank_tol: float = RANK_TOL
              ) -> tuple[bool, float | None]:
    """Compare Hermitian elements in the operator order.

    Returns:
        ``(a <= b, lam)`` where ``lam`` is the least ``lam >= 0`` with
        ``a <= lam * b``, or ``None`` when no finite ``lam`` exists. On the
        support of ``b`` this is the top eigenvalue of ``b^{-1/2} C b^{-1/2}``
        with ``C`` the Schur complement of ``a`` against the kernel of ``b``.
    """
    a, b = as_element(a), as_element(b)
    _check_same_structure(a, b)
    check_hermitian(a, tol)
    check_hermitian(b, tol)

    wa = herm_eig(a, tol).all_values()
    db = herm_eig(b, tol)
    wb = db.all_values()
    scale = max(np.abs(wa).max(), np.abs(wb).max(), np.finfo(float).tiny)
    wd = herm_eig(b - a, tol).all_values()
    leq = bool(wd.min() >= -tol * scale)

    if wb.min() < -tol * scale:
        raise NotPSD("the upper element of a pencil must be positive")
    thr = rank_tol * wb.max() if wb.max() > 0 else np.inf
    lam = 0.0
    for ab, w, u in zip(a.blocks, db.eigenvalues, db.eigenvectors.blocks):
        ab = 0.5 * (ab + ab.conj().T)
        on = w > thr
        vs, vn = u[:, on], u[:, ~on]
        a11 = vs.conj().T @ ab @ vs
        if vn.shape[1]:
            a12 = vs.conj().T @ ab @ vn
            a22 = vn.conj().T @ ab @ vn
            mu, z = np.linalg.eigh(0.5 * (a22 + a22.conj().T))
            if mu.size and mu.max() > tol * scale:
                return leq, None
            flat = np.abs(mu) <= tol * scale
            if a12.size and flat.any():
                if np.linalg.norm(a12 @ z[:, flat]) > np.sqrt(tol) * scale:
                    return leq, None
            neg = ~flat
            if neg.any() and a12.size:
                c = a12 @ z[:, neg]
                a11 = a11 + (c / (-mu[neg])) @ c.conj().T
        if vs.shape[1]:
            s = 1.0 / np.sqrt(w[on])
            m = (s[:, None] * a11) * s[None, :]
            lam = max(lam, float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).max()))
    return leq, max(lam, 0.0)


def direct_sum(a, b) -> AlgebraElement:
    a, b = as_element(a), as_element(b)
    return AlgebraElement(a.structure + b.structure, a.blocks + b.blocks)


@dataclass(frozen=True)
class PositiveFunctional:
    """A positive normal functional, stored as its density ``h_psi``.

    Positive semidefiniteness is checked at construction with a relative
    tolerance. A trace-one functional is a state; normalisation is never
    implicit.
    """

    element: AlgebraElement
    tolerance: float = HERM_TOL

    def __post_init__(self):
        el = as_element(self.element)
        _psd_eig(el, self.tolerance)
        object.__setattr__(self, "element", el.hermitian_part())

    @classmethod
    def from_array(cls, a, tolerance: float = HERM_TOL) -> "PositiveFunctional":
        return cls(AlgebraElement.from_array(a), tolerance)

    @property
    def structure(self) -> BlockStructure:
        return self.element.structure

    @property
    def mass(self) -> float:
        """Total mass ``psi(1) = Tr h_psi``."""
        return float(np.real(trace(self.element)))

    def is_state(self, tol: float = 1e-9) -> bool:
        return abs(self.mass - 1.0) <= tol

    def is_zero(self) -> bool:
        return self.element.max_abs() == 0.0

    def normalized(self) -> "PositiveFunctional":
        if self.mass <= 0:
            raise ZeroOperator("cannot normalise the zero functional")
        return PositiveFunctional(self.element / self.mass, self.tolerance)

    def scaled(self, c: float) -> "PositiveFunctional":
        if c < 0:
            raise NotPSD("negative multiple of a positive functional")
        return PositiveFunctional(c * self.element, self.tolerance)

    def support(self, rank_tol: float = RANK_TOL) -> SupportProjection:
        return support(self.element, rank_tol, self.tolerance)

    def __add__(self, other: "PositiveFunctional") -> "PositiveFunctional":
        return PositiveFunctional(self.element + other.element, self.tolerance)

    def __call__(self, x) -> complex:
        """Evaluate ``psi(x) = Tr h_psi x``."""
        return trace(self.element @ as_element(x))


def as_functional(x) -> PositiveFunctional:
    if isinstance(x, PositiveFunctional):
        return x
    return PositiveFunctional(as_element(x))


def functional_direct_sum(a, b) -> PositiveFunctional:
    a, b = as_functional(a), as_functional(b)
    return PositiveFunctional(direct_sum(a.element, b.element), a.tolerance)


def block_matrix(rows: Sequence[Sequence[AlgebraElement]]) -> AlgebraElement:
    """Assemble a matrix over the algebra into an element of the amplified algebra.

    ``rows`` is an n x n grid of elements of one structure; the result lives in
    the structure with every block dimension multiplied by n.
    """
    n = len(rows)
    first = rows[0][0]
    structure = BlockStructure(tuple(n * d for d in first.structure.dims))
    blocks = []
    for i in range(len(first.structure.dims)):
        blocks.append(np.block([[rows[r][c].blocks[i] for c in range(n)] for r in range(n)]))
    return AlgebraElement(structure, tuple(blocks))

