"""Random instances for experiments and tests.

States are ``A A* / Tr(A A*)`` with ``A`` a standard complex Gaussian matrix.
Channels use Kraus operators cut from a Gaussian isometry orthonormalized by QR.
All generators take a ``numpy.random.Generator``; the CLI seeds PCG64.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, BlockStructure, PositiveFunctional, _as_structure
from .channels import Channel

RNG_NAME = "PCG64"


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def ginibre(rng: np.random.Generator, m: int, n: int | None = None) -> np.ndarray:
    n = m if n is None else n
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)


def random_psd_block(rng, d: int, rank: int | None = None) -> np.ndarray:
    a = ginibre(rng, d, d if rank is None else rank)
    return a @ a.conj().T


def random_state(rng, structure, rank: int | None = None) -> PositiveFunctional:
    """Random density over ``structure``; ``rank`` caps the rank of every block."""
    s = _as_structure(structure)
    blocks = [random_psd_block(rng, d, None if rank is None else min(rank, d)) for d in s.dims]
    total = sum(np.trace(b).real for b in blocks)
    return PositiveFunctional(AlgebraElement(s, tuple(b / total for b in blocks)))


def random_full_rank_state(rng, structure, max_condition: float = 1e3) -> PositiveFunctional:
    """Random state whose eigenvalue ratio stays below ``max_condition``."""
    s = _as_structure(structure)
    while True:
        st = random_state(rng, s)
        w = np.concatenate([np.linalg.eigvalsh(b) for b in st.element.blocks])
        if w.min() > 0 and w.max() / w.min() <= max_condition:
            return st


def random_unitary(rng, d: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, structure) -> AlgebraElement:
    s = _as_structure(structure)
    blocks = []
    for d in s.dims:
        a = ginibre(rng, d)
        blocks.append(a + a.conj().T)
    return AlgebraElement(s, tuple(blocks))


def random_element(rng, structure) -> AlgebraElement:
    s = _as_structure(structure)
    return AlgebraElement(s, tuple(ginibre(rng, d) for d in s.dims))


def random_commuting_pair(rng, d: int) -> tuple[PositiveFunctional, PositiveFunctional,
                                                np.ndarray, np.ndarray]:
    """Two states diagonal in a shared random basis, plus their eigenvalue lists."""
    u = random_unitary(rng, d)
    p = rng.dirichlet(np.ones(d))
    q = rng.dirichlet(np.ones(d))
    rho = u @ np.diag(p) @ u.conj().T
    sigma = u @ np.diag(q) @ u.conj().T
    return (PositiveFunctional.from_array(rho), PositiveFunctional.from_array(sigma), p, q)


def random_channel(rng, d_in: int, d_out: int, n_kraus: int | None = None) -> Channel:
    """CPTP map from ``M_{d_in}`` to ``M_{d_out}`` with ``n_kraus`` Kraus operators."""
    if n_kraus is None:
        n_kraus = max(1, -(-d_in // d_out)) + 1
    if n_kraus * d_out < d_in:
        raise ValueError("too few Kraus operators for an isometry")
    v, _ = np.linalg.qr(ginibre(rng, n_kraus * d_out, d_in))
    kraus = [v[k * d_out:(k + 1) * d_out] for k in range(n_kraus)]
    return Channel.from_kraus(kraus, name="random")


def random_block_channel(rng, in_structure, d_out: int) -> Channel:
    """CPTP map from a block algebra into ``M_{d_out}``."""
    s: BlockStructure = _as_structure(in_structure)
    base = random_channel(rng, s.total, d_out)
    kraus = []
    for k in base.kraus:
        for off, d in zip(s.offsets, s.dims):
            piece = np.zeros_like(k)
            piece[:, off:off + d] = k[:, off:off + d]
            kraus.append(piece)
    # sum over pieces of piece* piece equals the block-diagonal part of sum k* k = I
    return Channel.from_kraus(kraus, s, (d_out,), name="random")
