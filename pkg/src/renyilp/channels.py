"""Trace-preserving linear maps between block algebras.

A channel is stored as a superoperator acting on vectorized elements. The
vectorization stacks the columns of each block (Fortran order) and concatenates
the blocks in structure order, so ``vec(a x b) = (b.T kron a) vec(x)`` blockwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .algebra import (AlgebraElement, BlockStructure, PositiveFunctional, _as_structure,
                      as_element, as_functional, block_matrix, mpower)
from .errors import (InvalidWeight, ShapeMismatch, StructureMismatch, ZeroFunctional)
from .lp_kosaki import kosaki_norm

POSITIVITY_CLASSES = ("linear", "positive", "two_positive", "completely_positive")
_RANK = {name: i for i, name in enumerate(POSITIVITY_CLASSES)}


def positivity_rank(cls: str) -> int:
    return _RANK[cls]


def _weaker(a: str, b: str) -> str:
    return a if _RANK[a] <= _RANK[b] else b


def vec(x: AlgebraElement) -> np.ndarray:
    """Column-stacked vectorization, blocks concatenated."""
    return np.concatenate([b.ravel(order="F") for b in x.blocks])


def unvec(structure, v: np.ndarray) -> AlgebraElement:
    structure = _as_structure(structure)
    blocks, pos = [], 0
    for d in structure.dims:
        blocks.append(np.asarray(v[pos:pos + d * d]).reshape((d, d), order="F"))
        pos += d * d
    return AlgebraElement(structure, tuple(blocks))


def matrix_units(structure):
    """Yield ``(block, i, j, E)`` for the matrix units in vectorization order."""
    structure = _as_structure(structure)
    for b, d in enumerate(structure.dims):
        for j in range(d):
            for i in range(d):
                blocks = [np.zeros((k, k), dtype=complex) for k in structure.dims]
                blocks[b][i, j] = 1.0
                yield b, i, j, AlgebraElement(structure, tuple(blocks))


def _transpose_permutation(structure: BlockStructure) -> np.ndarray:
    """Permutation matrix ``P`` with ``P vec(x) = vec(x.T)``."""
    n = structure.vec_dim
    perm = np.zeros((n, n))
    pos = 0
    for d in structure.dims:
        for j in range(d):
            for i in range(d):
                perm[pos + i * d + j, pos + j * d + i] = 1.0
        pos += d * d
    return perm


def superop_from_map(in_structure, out_structure, fn: Callable[[AlgebraElement], AlgebraElement]
                     ) -> np.ndarray:
    """Tabulate a linear map on the matrix units."""
    in_s, out_s = _as_structure(in_structure), _as_structure(out_structure)
    cols = [vec(fn(e)) for *_, e in matrix_units(in_s)]
    return np.stack(cols, axis=1).reshape(out_s.vec_dim, in_s.vec_dim)


def sandwich_superop(a: AlgebraElement, b: AlgebraElement) -> np.ndarray:
    """Superoperator of ``x -> a x b`` for elements of one structure."""
    mats = [np.kron(bb.T, ab) for ab, bb in zip(a.blocks, b.blocks)]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return out


def _kraus_superop(kraus, in_s: BlockStructure, out_s: BlockStructure) -> np.ndarray:
    def fn(e):
        x = e.dense()
        return AlgebraElement.from_dense(out_s, sum(k @ x @ k.conj().T for k in kraus))
    return superop_from_map(in_s, out_s, fn)


@dataclass(frozen=True, eq=False)
class Channel:
    """A linear map between block algebras with a declared positivity class.

    Attributes:
        in_structure: Structure of the input algebra.
        out_structure: Structure of the output algebra.
        superop: Matrix of shape ``(out.vec_dim, in.vec_dim)``.
        kraus: Optional Kraus operators as dense ``(out.total, in.total)`` matrices.
        positivity_class: One of ``linear``, ``positive``, ``two_positive``,
            ``completely_positive``. Only the last is numerically certifiable; the
            others are declared by the constructor.
        name: Free-form label used in reports.
    """

    in_structure: BlockStructure
    out_structure: BlockStructure
    superop: np.ndarray
    kraus: tuple | None = None
    positivity_class: str = "completely_positive"
    name: str = "channel"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        in_s, out_s = _as_structure(self.in_structure), _as_structure(self.out_structure)
        object.__setattr__(self, "in_structure", in_s)
        object.__setattr__(self, "out_structure", out_s)
        s = np.array(self.superop, dtype=complex)
        if s.shape != (out_s.vec_dim, in_s.vec_dim):
            raise ShapeMismatch(f"superoperator shape {s.shape} does not match structures")
        s.setflags(write=False)
        object.__setattr__(self, "superop", s)
        if self.positivity_class not in _RANK:
            raise ValueError(f"unknown positivity class {self.positivity_class!r}")
        if self.kraus is not None:
            ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
            for k in ks:
                if k.shape != (out_s.total, in_s.total):
                    raise ShapeMismatch(f"Kraus operator of shape {k.shape}")
            object.__setattr__(self, "kraus", ks)

    @classmethod
    def from_kraus(cls, kraus: Sequence, in_structure=None, out_structure=None, name="kraus",
                   positivity_class="completely_positive") -> "Channel":
        """Build ``x -> sum K x K*``.

        Raises:
            ShapeMismatch: if some output leaks outside the output blocks.
        """
        kraus = [np.atleast_2d(np.asarray(k, dtype=complex)) for k in kraus]
        if not kraus:
            raise ShapeMismatch("empty Kraus list")
        m, n = kraus[0].shape
        in_s = _as_structure(in_structure if in_structure is not None else (n,))
        out_s = _as_structure(out_structure if out_structure is not None else (m,))
        return cls(in_s, out_s, _kraus_superop(kraus, in_s, out_s), tuple(kraus),
                   positivity_class, name)

    @classmethod
    def from_map(cls, in_structure, out_structure, fn, **kw) -> "Channel":
        return cls(_as_structure(in_structure), _as_structure(out_structure),
                   superop_from_map(in_structure, out_structure, fn), **kw)

    def __call__(self, h) -> AlgebraElement:
        return apply(self, h)

    @cached_property
    def adjoint_channel(self) -> "Channel":
        return adjoint(self)


def apply(phi: Channel, h) -> AlgebraElement:
    """Apply ``phi`` to an element or positive functional.

    Raises:
        StructureMismatch: if ``h`` does not live on the input algebra.
    """
    h = as_element(h)
    if h.structure != phi.in_structure:
        raise StructureMismatch(f"{h.structure.dims} is not the input {phi.in_structure.dims}")
    return unvec(phi.out_structure, phi.superop @ vec(h))


def adjoint(phi: Channel) -> Channel:
    """Adjoint map under the trace pairing ``Tr(phi(h) y) = Tr(h phi*(y))``."""
    p_in = _transpose_permutation(phi.in_structure)
    p_out = _transpose_permutation(phi.out_structure)
    kraus = None if phi.kraus is None else tuple(k.conj().T for k in phi.kraus)
    return Channel(phi.out_structure, phi.in_structure, p_in @ phi.superop.T @ p_out, kraus,
                   phi.positivity_class, f"adjoint({phi.name})")


def compose(second: Channel, first: Channel) -> Channel:
    """``second o first``."""
    if first.out_structure != second.in_structure:
        raise StructureMismatch("cannot compose: structures differ")
    kraus = None
    if first.kraus is not None and second.kraus is not None:
        kraus = tuple(b @ a for b in second.kraus for a in first.kraus)
    return Channel(first.in_structure, second.out_structure, second.superop @ first.superop,
                   kraus, _weaker(first.positivity_class, second.positivity_class),
                   f"{second.name}o{first.name}")


def is_trace_preserving(phi: Channel, tol: float = 1e-9) -> bool:
    t_in = vec(AlgebraElement.identity(phi.in_structure))
    t_out = vec(AlgebraElement.identity(phi.out_structure))
    return bool(np.abs(t_out @ phi.superop - t_in).max() <= tol)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_{b,i,j} phi(E^b_ij) kron E^b_ij`` over ``out kron in``."""

    matrix: np.ndarray
    channel: Channel

    @property
    def eigenvalues(self) -> np.ndarray:
        m = self.matrix
        return np.linalg.eigvalsh(0.5 * (m + m.conj().T))

    def is_psd(self, tol: float = 1e-9) -> bool:
        w = self.eigenvalues
        return bool(w.min() >= -tol * max(1.0, np.abs(w).max()))


def choi(phi: Channel) -> ChoiMatrix:
    n_out, n_in = phi.out_structure.total, phi.in_structure.total
    mat = np.zeros((n_out * n_in, n_out * n_in), dtype=complex)
    offs = phi.in_structure.offsets
    for b, i, j, e in matrix_units(phi.in_structure):
        unit = np.zeros((n_in, n_in))
        unit[offs[b] + i, offs[b] + j] = 1.0
        mat += np.kron(apply(phi, e).dense(), unit)
    return ChoiMatrix(mat, phi)


def certify_cp(phi: Channel, tol: float = 1e-9) -> bool:
    return choi(phi).is_psd(tol)


def _split2(x: AlgebraElement, structure: BlockStructure) -> list[list[AlgebraElement]]:
    parts = [[None, None], [None, None]]
    for r in range(2):
        for c in range(2):
            parts[r][c] = AlgebraElement(structure, tuple(
                blk[r * d:(r + 1) * d, c * d:(c + 1) * d]
                for blk, d in zip(x.blocks, structure.dims)))
    return parts


def amplify2(phi: Channel) -> Channel:
    """``phi kron id_2`` acting entrywise on 2x2 matrices over the input algebra."""
    def fn(x):
        parts = _split2(x, phi.in_structure)
        return block_matrix([[apply(phi, parts[r][c]) for c in range(2)] for r in range(2)])
    return Channel.from_map(phi.in_structure.doubled(), phi.out_structure.doubled(), fn,
                            positivity_class=phi.positivity_class, name=f"{phi.name}x2")


def certify_2positive(phi: Channel, tol: float = 1e-9) -> bool:
    """Choi test of the 2-amplified map.

    This coincides with the CP test; a map that is 2-positive but not CP
    cannot be certified this way and keeps its declared class instead.
    """
    return certify_cp(amplify2(phi), tol)


def _petz_factors(phi: Channel, sigma: PositiveFunctional):
    sigma = as_functional(sigma)
    if sigma.is_zero():
        raise ZeroFunctional("Petz dual needs a nonzero reference functional")
    out_sigma = apply(phi, sigma.element).hermitian_part()
    return mpower(sigma.element, 0.5), mpower(out_sigma, -0.5)


def petz_apply(phi: Channel, sigma, y) -> AlgebraElement:
    """``sigma^{1/2} phi*(phi(sigma)^{-1/2} y phi(sigma)^{-1/2}) sigma^{1/2}``.

    Inverse powers act on supports, so the result is compressed to the
    support of sigma and the input to the support of ``phi(sigma)``.
    """
    root, inv_root = _petz_factors(phi, sigma)
    inner = inv_root @ as_element(y) @ inv_root
    return root @ apply(phi.adjoint_channel, inner) @ root


def petz_dual(phi: Channel, sigma) -> Channel:
    """Recovery map of ``phi`` with respect to ``sigma``, inheriting its positivity class.

    Raises:
        ZeroFunctional: if sigma is zero.
    """
    root, inv_root = _petz_factors(phi, sigma)
    superop = (sandwich_superop(root, root) @ phi.adjoint_channel.superop
               @ sandwich_superop(inv_root, inv_root))
    kraus = None
    if phi.kraus is not None:
        r, ir = root.dense(), inv_root.dense()
        kraus = tuple(r @ k.conj().T @ ir for k in phi.kraus)
    return Channel(phi.out_structure, phi.in_structure, superop, kraus, phi.positivity_class,
                   f"petz({phi.name})")


# -- constructors --------------------------------------------------------------

def identity(structure) -> Channel:
    s = _as_structure(structure)
    return Channel(s, s, np.eye(s.vec_dim), (np.eye(s.total),), name="identity",
                   params={"structure": list(s.dims)})


def unitary_conjugation(u, structure=None) -> Channel:
    """``x -> U x U*``; ``U`` must respect the block structure."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeMismatch("unitary must be square")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
        raise ShapeMismatch("matrix is not unitary")
    s = _as_structure(structure if structure is not None else (u.shape[0],))
    ch = Channel.from_kraus([u], s, s, name="unitary")
    object.__setattr__(ch, "params", {"unitary": u})
    return ch


def pinching(basis=None, d: int | None = None) -> Channel:
    """Dephasing in the orthonormal basis given by the columns of ``basis``."""
    if basis is None:
        if d is None:
            raise ShapeMismatch("pinching needs a basis or a dimension")
        basis = np.eye(d)
    basis = np.asarray(basis, dtype=complex)
    n = basis.shape[0]
    if basis.shape != (n, n) or not np.allclose(basis.conj().T @ basis, np.eye(n), atol=1e-10):
        raise ShapeMismatch("pinching basis must be an orthonormal square matrix")
    kraus = [np.outer(basis[:, i], basis[:, i].conj()) for i in range(n)]
    ch = Channel.from_kraus(kraus, name="pinching")
    object.__setattr__(ch, "params", {"basis": basis})
    return ch


def partial_trace(dims: Sequence[int], factor: int = 1) -> Channel:
    """Trace out tensor factor ``factor`` (0 or 1) of ``C^d0 kron C^d1``."""
    d0, d1 = (int(d) for d in dims)
    if factor not in (0, 1) or d0 < 1 or d1 < 1:
        raise ShapeMismatch("partial trace needs two positive dims and factor 0 or 1")
    if factor == 1:
        kraus = [np.kron(np.eye(d0), np.eye(d1)[j:j + 1]) for j in range(d1)]
    else:
        kraus = [np.kron(np.eye(d0)[j:j + 1], np.eye(d1)) for j in range(d0)]
    ch = Channel.from_kraus(kraus, name="partial_trace")
    object.__setattr__(ch, "params", {"dims": [d0, d1], "factor": factor})
    return ch


def depolarizing(lam: float, d: int) -> Channel:
    """``x -> lam x + (1 - lam) Tr(x) I/d``; completely positive for ``-1/(d^2-1) <= lam <= 1``.

    Raises:
        InvalidWeight: outside that range.
    """
    lo = -1.0 / (d * d - 1) if d > 1 else -np.inf
    if not lo - 1e-12 <= lam <= 1 + 1e-12:
        raise InvalidWeight(f"depolarizing parameter {lam} outside [{lo}, 1]")
    s = _as_structure((d,))
    v = vec(AlgebraElement.identity(s))
    sup = lam * np.eye(d * d) + (1 - lam) / d * np.outer(v, v)
    return Channel(s, s, sup, name="depolarizing", params={"lam": float(lam), "d": int(d)})


def transpose(structure) -> Channel:
    """Blockwise transpose. Positive and trace preserving but not 2-positive."""
    s = _as_structure(structure)
    return Channel(s, s, _transpose_permutation(s), positivity_class="positive",
                   name="transpose", params={"structure": list(s.dims)})


def direct_sum(phi1: Channel, phi2: Channel) -> Channel:
    in_s = phi1.in_structure + phi2.in_structure
    out_s = phi1.out_structure + phi2.out_structure
    a, b = phi1.superop, phi2.superop
    sup = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    sup[:a.shape[0], :a.shape[1]] = a
    sup[a.shape[0]:, a.shape[1]:] = b
    kraus = None
    if phi1.kraus is not None and phi2.kraus is not None:
        kraus = []
        for op in phi1.kraus:
            big = np.zeros((out_s.total, in_s.total), dtype=complex)
            big[:op.shape[0], :op.shape[1]] = op
            kraus.append(big)
        for op in phi2.kraus:
            big = np.zeros((out_s.total, in_s.total), dtype=complex)
            big[phi1.out_structure.total:, phi1.in_structure.total:] = op
            kraus.append(big)
        kraus = tuple(kraus)
    return Channel(in_s, out_s, sup, kraus,
                   _weaker(phi1.positivity_class, phi2.positivity_class),
                   f"{phi1.name}+{phi2.name}")


def _as_tensor4(phi: Channel) -> np.ndarray:
    (m,), (d,) = phi.out_structure.dims, phi.in_structure.dims
    return phi.superop.reshape(m, m, d, d).transpose(1, 0, 3, 2)


def tensor(phi1: Channel, phi2: Channel) -> Channel:
    """Tensor product of two single-block channels.

    Only a tensor of completely positive maps is guaranteed positive, so any
    other combination is tagged ``linear``.
    """
    if len(phi1.in_structure) != 1 or len(phi2.in_structure) != 1 \
            or len(phi1.out_structure) != 1 or len(phi2.out_structure) != 1:
        raise ShapeMismatch("tensor products are supported for single-block channels")
    cp = "completely_positive"
    cls = cp if phi1.positivity_class == cp and phi2.positivity_class == cp else "linear"
    d1, d2 = phi1.in_structure.total, phi2.in_structure.total
    m1, m2 = phi1.out_structure.total, phi2.out_structure.total
    name = f"{phi1.name}x{phi2.name}"
    if phi1.kraus is not None and phi2.kraus is not None:
        kraus = [np.kron(a, b) for a in phi1.kraus for b in phi2.kraus]
        return Channel.from_kraus(kraus, name=name, positivity_class=cls)
    t1, t2 = _as_tensor4(phi1), _as_tensor4(phi2)

    def fn(e):
        x = e.blocks[0].reshape(d1, d2, d1, d2)
        y = np.einsum("PCac,QEbe,abce->PQCE", t1, t2, x)
        return AlgebraElement.from_array(y.reshape(m1 * m2, m1 * m2))
    return Channel.from_map((d1 * d2,), (m1 * m2,), fn, positivity_class=cls, name=name)


def mixture(channels: Sequence[Channel], weights: Sequence[float]) -> Channel:
    """Convex combination ``sum w_i phi_i``.

    Raises:
        InvalidWeight: weights negative or not summing to one.
        StructureMismatch: channels act between different algebras.
    """
    w = np.asarray(weights, dtype=float)
    if len(w) != len(channels) or len(w) == 0 or (w < 0).any() or abs(w.sum() - 1) > 1e-12:
        raise InvalidWeight("weights must be nonnegative and sum to one")
    first = channels[0]
    for ch in channels[1:]:
        if ch.in_structure != first.in_structure or ch.out_structure != first.out_structure:
            raise StructureMismatch("mixture of channels between different algebras")
    sup = sum(wi * ch.superop for wi, ch in zip(w, channels))
    cls = first.positivity_class
    for ch in channels[1:]:
        cls = _weaker(cls, ch.positivity_class)
    kraus = None
    if all(ch.kraus is not None for ch in channels):
        kraus = tuple(np.sqrt(wi) * k for wi, ch in zip(w, channels) for k in ch.kraus if wi > 0)
    return Channel(first.in_structure, first.out_structure, sup, kraus, cls, "mixture")


def sum_collapse(structure) -> Channel:
    """``(h1, h2) -> h1 + h2`` from the doubled direct sum onto one copy."""
    s = _as_structure(structure)
    n = s.total
    kraus = [np.hstack([np.eye(n), np.zeros((n, n))]), np.hstack([np.zeros((n, n)), np.eye(n)])]
    ch = Channel.from_kraus(kraus, s + s, s, name="sum_collapse")
    object.__setattr__(ch, "params", {"structure": list(s.dims)})
    return ch


def contraction_check(phi: Channel, sigma, p: float, h) -> tuple[float, float]:
    """Kosaki norms of ``h`` before and after ``phi``; the second never exceeds the first."""
    sigma = as_functional(sigma)
    h = as_element(h)
    return (kosaki_norm(h, sigma, p),
            kosaki_norm(apply(phi, h), apply(phi, sigma.element).hermitian_part(), p))
