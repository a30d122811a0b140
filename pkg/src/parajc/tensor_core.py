"""Sparse operator algebra on tensor products of truncated boson and fermion modes.

The ambient space is an ordered tensor product of p boson slots (dimension
M+1 each) followed by p fermion slots (dimension 2 each).  All operators are
complex scipy CSR matrices with sorted indices and explicit zeros dropped, so
structural cancellations stay exact and iteration order is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class ModeLayout:
    """Slot layout of the ambient tensor space.

    p boson slots of dimension M+1 come first, then p fermion slots of
    dimension 2, each ordered by Green-component index.  Basis index i maps
    to the occupation tuple via row-major unraveling over `dims` (slot 0 most
    significant), so the index <-> occupation bijection is fixed.
    """

    p: int
    M: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if self.M < 1:
            raise ValueError(f"boson cutoff M must be >= 1, got {self.M}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.M + 1,) * self.p + (2,) * self.p

    @property
    def n_slots(self) -> int:
        return 2 * self.p

    @property
    def ambient_dim(self) -> int:
        return (self.M + 1) ** self.p * 2 ** self.p

    def boson_slot(self, component: int) -> int:
        return component

    def fermion_slot(self, component: int) -> int:
        return self.p + component

    def occupations(self, slot: int) -> np.ndarray:
        """Occupation number of `slot` for every ambient basis state."""
        dims = self.dims
        if not 0 <= slot < len(dims):
            raise IndexError(f"slot {slot} out of range for {len(dims)} slots")
        stride = int(np.prod(dims[slot + 1:], dtype=np.int64))
        idx = np.arange(self.ambient_dim, dtype=np.int64)
        return (idx // stride) % dims[slot]


def _canonical(mat: sp.spmatrix) -> sp.csr_matrix:
    out = sp.csr_matrix(mat, dtype=complex)
    out.eliminate_zeros()
    out.sort_indices()
    return out


def make_boson_mode(M: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Truncated boson ladder pair (raise, lower) of dimension M+1.

    lower has entries sqrt(n) at (n-1, n); raise is its adjoint.  The top
    level M is the truncation boundary: raise annihilates occupation M.
    """
    if M < 1:
        raise ValueError("boson cutoff M=0 cannot represent any excitation")
    n = np.arange(1, M + 1)
    lower = sp.csr_matrix(
        (np.sqrt(n).astype(complex), (n - 1, n)), shape=(M + 1, M + 1)
    )
    return adjoint(lower), _canonical(lower)


def make_fermion_mode() -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Single fermion mode (raise, lower), dimension 2, raise^2 = 0."""
    lower = sp.csr_matrix((np.array([1.0 + 0j]), ([0], [1])), shape=(2, 2))
    return adjoint(lower), _canonical(lower)


def identity(dim: int) -> sp.csr_matrix:
    return _canonical(sp.identity(dim, dtype=complex, format="csr"))


def embed(op: sp.spmatrix, slot: int, layout: ModeLayout) -> sp.csr_matrix:
    """Lift a single-slot operator to the ambient space (identity elsewhere)."""
    dims = layout.dims
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} slots")
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator of shape {op.shape} does not fit slot {slot} "
            f"of dimension {dims[slot]}"
        )
    left = int(np.prod(dims[:slot], dtype=np.int64))
    right = int(np.prod(dims[slot + 1:], dtype=np.int64))
    out = sp.kron(sp.identity(left, dtype=complex), op, format="csr")
    out = sp.kron(out, sp.identity(right, dtype=complex), format="csr")
    return _canonical(out)


def parity_string(slots: set[int] | frozenset[int], layout: ModeLayout) -> sp.csr_matrix:
    """Diagonal Klein sign operator (-1)^(total occupation of the listed slots)."""
    total = np.zeros(layout.ambient_dim, dtype=np.int64)
    for slot in sorted(slots):
        total += layout.occupations(slot)
    signs = np.where(total % 2 == 0, 1.0 + 0j, -1.0 + 0j)
    return _canonical(sp.diags(signs, format="csr"))


def occupation_diag(slots: set[int] | frozenset[int], layout: ModeLayout) -> sp.csr_matrix:
    """Diagonal total-occupation operator over the listed slots."""
    total = np.zeros(layout.ambient_dim, dtype=np.int64)
    for slot in sorted(slots):
        total += layout.occupations(slot)
    return _canonical(sp.diags(total.astype(complex), format="csr"))


# -- elementary algebra -------------------------------------------------------

def _check_dims(a: sp.spmatrix, b: sp.spmatrix):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def add(a, b) -> sp.csr_matrix:
    _check_dims(a, b)
    return _canonical(a + b)


def scale(alpha: complex, a) -> sp.csr_matrix:
    return _canonical(alpha * a)


def multiply(a, b) -> sp.csr_matrix:
    _check_dims(a, b)
    return _canonical(a @ b)


def adjoint(a) -> sp.csr_matrix:
    return _canonical(a.conj().T)


def commutator(a, b) -> sp.csr_matrix:
    _check_dims(a, b)
    return _canonical(a @ b - b @ a)


def anticommutator(a, b) -> sp.csr_matrix:
    _check_dims(a, b)
    return _canonical(a @ b + b @ a)


def apply(op: sp.spmatrix, vec: np.ndarray) -> np.ndarray:
    if op.shape[1] != vec.shape[0]:
        raise ValueError(f"dimension mismatch: {op.shape} vs {vec.shape}")
    return op @ vec


def frobenius_norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(a.tocsr().data) ** 2))) if a.nnz else 0.0


def max_abs_entry(a) -> float:
    a = a.tocsr()
    return float(np.max(np.abs(a.data))) if a.nnz else 0.0
