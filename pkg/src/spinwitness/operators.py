"""Spin-s operator algebra, product-space bookkeeping and sparse Hermitian operators.

Spin lengths are stored as the integer 2s throughout, so half-integer spins
stay exact.  Product-basis states are ordered lexicographically in the local
magnetic quantum numbers, site 0 slowest, with m descending on each site
(local index 0 is m = +s).  A basis may be restricted to a total-Sz sector;
the restriction is only legal for operators that commute with total Sz.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

HERMITICITY_TOL = 1e-12


def parse_spin(value) -> int:
    """Convert a spin length (int, float, Fraction or string like "3/2") to 2s."""
    if isinstance(value, str):
        value = Fraction(value)
    two_s = Fraction(value) * 2
    if two_s.denominator != 1 or two_s < 0:
        raise ValueError(f"invalid spin length {value!r}: need a non-negative multiple of 1/2")
    return int(two_s)


def spin_str(two_s: int) -> str:
    """Human-readable spin length for 2s (e.g. 3 -> "3/2")."""
    return str(two_s // 2) if two_s % 2 == 0 else f"{two_s}/2"


@dataclass(frozen=True)
class LocalSpinMatrices:
    """Dense single-site spin matrices in the basis m = s, s-1, ..., -s (hbar = 1)."""

    two_s: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    splus: np.ndarray
    sminus: np.ndarray


def local_spin_matrices(two_s: int) -> LocalSpinMatrices:
    """Spin matrices for spin s = two_s/2.  sz = diag(s, s-1, ..., -s)."""
    two_s = int(two_s)
    if two_s < 0:
        raise ValueError("spin length must be non-negative")
    s = two_s / 2.0
    dim = two_s + 1
    m = s - np.arange(dim)
    sz = np.diag(m)
    # s+|m> = sqrt(s(s+1) - m(m+1)) |m+1>; with m descending, s+ is superdiagonal
    cplus = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    splus = np.zeros((dim, dim))
    splus[np.arange(dim - 1), np.arange(1, dim)] = cplus
    sminus = splus.T.copy()
    sx = (splus + sminus) / 2.0
    sy = (splus - sminus) / 2.0j
    return LocalSpinMatrices(two_s=two_s, sx=sx, sy=sy, sz=sz, splus=splus, sminus=sminus)


def _raising_coeff(two_s: int) -> np.ndarray:
    """c[idx] = <idx-1| s+ |idx> for local index idx = s - m (0 invalid, kept 0)."""
    s = two_s / 2.0
    m = s - np.arange(two_s + 1)
    c = np.zeros(two_s + 1)
    c[1:] = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    return c


class ProductBasis:
    """Tensor-product basis of a chain of spins, optionally restricted to a Sz sector.

    Parameters
    ----------
    site_two_s : sequence of int
        2s for each site.
    sector_two_m : int or None
        If given, keep only states with sum_i 2m_i == sector_two_m.
    """

    def __init__(self, site_two_s, sector_two_m: int | None = None):
        self.site_two_s = tuple(int(t) for t in site_two_s)
        if any(t < 0 for t in self.site_two_s):
            raise ValueError("spin lengths must be non-negative")
        self.n_sites = len(self.site_two_s)
        self.local_dims = np.array([t + 1 for t in self.site_two_s], dtype=np.int64)
        self.total_dim = int(np.prod(self.local_dims))
        self.sector_two_m = sector_two_m

        # strides for the mixed-radix full-space index, site 0 slowest
        strides = np.ones(self.n_sites, dtype=np.int64)
        for i in range(self.n_sites - 2, -1, -1):
            strides[i] = strides[i + 1] * self.local_dims[i + 1]
        self._strides = strides

        full = np.arange(self.total_dim, dtype=np.int64)
        states = np.empty((self.total_dim, self.n_sites), dtype=np.int64)
        rem = full
        for i in range(self.n_sites):
            states[:, i] = rem // strides[i]
            rem = rem % strides[i]
        two_m = np.array(self.site_two_s, dtype=np.int64)[None, :] - 2 * states
        total_two_m = two_m.sum(axis=1)

        if sector_two_m is None:
            self.states = states
            self.full_index = full
        else:
            if (sector_two_m - sum(self.site_two_s)) % 2 != 0:
                raise ValueError("sector 2M has wrong parity for these spins")
            keep = total_two_m == sector_two_m
            self.states = states[keep]
            self.full_index = full[keep]
        self.dim = self.states.shape[0]
        # two_m per site of each kept state, used by diagonal builders
        self.two_m = (np.array(self.site_two_s, dtype=np.int64)[None, :]
                      - 2 * self.states)

    def position_of_full(self, full_index: np.ndarray) -> np.ndarray:
        """Map full-space indices to positions in this basis (must be present)."""
        if self.sector_two_m is None:
            return full_index
        pos = np.searchsorted(self.full_index, full_index)
        if np.any(pos >= self.dim) or np.any(self.full_index[pos] != full_index):
            raise KeyError("state not in sector")
        return pos

    def sector_two_m_values(self) -> list[int]:
        """All total-2M values compatible with these spins."""
        tmax = sum(self.site_two_s)
        return list(range(-tmax, tmax + 1, 2))


def sector_two_m_values(site_two_s) -> list[int]:
    tmax = sum(int(t) for t in site_two_s)
    return list(range(-tmax, tmax + 1, 2))


class SparseHermitianOperator:
    """A Hermitian operator on a ProductBasis, stored sparse (CSR).

    Real-symmetric storage is used whenever all terms are z-collinear in the
    product basis; complex-Hermitian otherwise.  Hermiticity is verified at
    construction time.
    """

    def __init__(self, basis: ProductBasis, matrix: sp.spmatrix, check: bool = True):
        self.basis = basis
        self.matrix = sp.csr_matrix(matrix)
        if self.matrix.shape != (basis.dim, basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        if check and self.matrix.nnz:
            dev = abs(self.matrix - self.matrix.getH()).max()
            scale = max(1.0, abs(self.matrix).max())
            if dev > HERMITICITY_TOL * scale:
                raise ValueError(f"operator is not Hermitian (deviation {dev:g})")

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def is_real(self) -> bool:
        return not np.issubdtype(self.matrix.dtype, np.complexfloating)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, state: np.ndarray) -> float:
        """<state|O|state>; real by Hermiticity."""
        if state.shape[0] != self.dim:
            raise ValueError("state dimension does not match operator")
        return float(np.real(np.vdot(state, self.matrix @ state)))

    def __add__(self, other: "SparseHermitianOperator") -> "SparseHermitianOperator":
        if other.basis is not self.basis and other.basis.dim != self.dim:
            raise ValueError("operator dimensions differ")
        return SparseHermitianOperator(self.basis, self.matrix + other.matrix, check=False)

    def scaled(self, factor: float) -> "SparseHermitianOperator":
        return SparseHermitianOperator(self.basis, self.matrix * factor, check=False)


def zero_operator(basis: ProductBasis) -> SparseHermitianOperator:
    return SparseHermitianOperator(basis, sp.csr_matrix((basis.dim, basis.dim)), check=False)


def diagonal_operator(basis: ProductBasis, diag: np.ndarray) -> SparseHermitianOperator:
    return SparseHermitianOperator(basis, sp.diags(diag, format="csr"), check=False)


def szsz_diagonal(basis: ProductBasis, i: int, j: int) -> np.ndarray:
    """Diagonal of sz_i sz_j in this basis."""
    return basis.two_m[:, i] * basis.two_m[:, j] / 4.0


def sz_diagonal(basis: ProductBasis, i: int) -> np.ndarray:
    return basis.two_m[:, i] / 2.0


def _flipflop_entries(basis: ProductBasis, i: int, j: int):
    """COO entries of (1/2)(s+_i s-_j + s-_i s+_j); Sz-conserving for i != j."""
    idx = basis.states
    ci = _raising_coeff(basis.site_two_s[i])
    cj = _raising_coeff(basis.site_two_s[j])
    # s+_i s-_j |state>: idx_i -> idx_i - 1, idx_j -> idx_j + 1
    mask = (idx[:, i] > 0) & (idx[:, j] < basis.site_two_s[j])
    src = np.nonzero(mask)[0]
    vals = 0.5 * ci[idx[src, i]] * cj[idx[src, j] + 1]
    tgt_full = (basis.full_index[src]
                - basis._strides[i] + basis._strides[j])
    tgt = basis.position_of_full(tgt_full)
    rows = np.concatenate([tgt, src])
    cols = np.concatenate([src, tgt])
    return rows, cols, np.concatenate([vals, vals])


def heisenberg_bond(basis: ProductBasis, i: int, j: int,
                    coupling: float = 1.0) -> SparseHermitianOperator:
    """J * s_i . s_j embedded in the product space (identity elsewhere)."""
    if i == j:
        raise ValueError("bond needs two distinct sites")
    rows, cols, vals = _flipflop_entries(basis, i, j)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim)).tocsr()
    mat += sp.diags(szsz_diagonal(basis, i, j))
    return SparseHermitianOperator(basis, coupling * mat, check=False)


def szsz_bond(basis: ProductBasis, i: int, j: int,
              coupling: float = 1.0) -> SparseHermitianOperator:
    if i == j:
        raise ValueError("bond needs two distinct sites")
    return diagonal_operator(basis, coupling * szsz_diagonal(basis, i, j))


def field_term(basis: ProductBasis, site: int, b) -> SparseHermitianOperator:
    """b . s_site embedded in the product space.

    A transverse component (bx, by) breaks Sz conservation, so it is rejected
    on sector-restricted bases.  by != 0 promotes the operator to complex.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ValueError("field must be a real 3-vector")
    if not np.all(np.isfinite(b)):
        raise ValueError("field components must be finite")
    bx, by, bz = b
    transverse = abs(bx) > 0 or abs(by) > 0
    if transverse and basis.sector_two_m is not None:
        raise ValueError("non-z-collinear field does not conserve Sz; "
                         "use an unrestricted basis")
    diag = bz * sz_diagonal(basis, site)
    if not transverse:
        return diagonal_operator(basis, diag)
    idx = basis.states
    c = _raising_coeff(basis.site_two_s[site])
    mask = idx[:, site] > 0
    src = np.nonzero(mask)[0]
    amp = c[idx[src, site]]
    tgt = basis.position_of_full(basis.full_index[src] - basis._strides[site])
    # raising entry <tgt| s+ |src> = amp; sx = (s+ + s-)/2, sy = (s+ - s-)/(2i)
    up = (bx / 2.0) - 1j * (by / 2.0) if by else bx / 2.0
    vals_up = up * amp
    rows = np.concatenate([tgt, src])
    cols = np.concatenate([src, tgt])
    vals = np.concatenate([vals_up, np.conj(vals_up)])
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim)).tocsr()
    mat = mat + sp.diags(diag)
    return SparseHermitianOperator(basis, mat, check=False)


def embed_two_site(basis: ProductBasis, i: int, j: int, form: str,
                   b=None) -> SparseHermitianOperator:
    """Embed a standard term: 'heisenberg' or 'sz_sz' on sites (i, j), or a
    'field_vector' b . s_i (j ignored)."""
    if form == "heisenberg":
        return heisenberg_bond(basis, i, j)
    if form == "sz_sz":
        return szsz_bond(basis, i, j)
    if form == "field_vector":
        if b is None:
            raise ValueError("field_vector form needs b")
        return field_term(basis, i, b)
    raise ValueError(f"unknown form {form!r}")


def total_sz(basis: ProductBasis) -> SparseHermitianOperator:
    return diagonal_operator(basis, basis.two_m.sum(axis=1) / 2.0)


def total_spin_squared(basis: ProductBasis) -> SparseHermitianOperator:
    """S^2 = (sum_i s_i)^2; conserves Sz, so legal on sector bases."""
    casimir = sum(t / 2.0 * (t / 2.0 + 1.0) for t in basis.site_two_s)
    mat = sp.diags(np.full(basis.dim, casimir)).tocsr()
    for i in range(basis.n_sites):
        for j in range(i + 1, basis.n_sites):
            mat = mat + 2.0 * heisenberg_bond(basis, i, j).matrix
    return SparseHermitianOperator(basis, mat, check=False)
