"""Real sparse and dense linear-algebra kernels.

Matrices are held in canonical compressed sparse row (CSR) form: column
indices sorted and unique within each row, duplicates summed at
construction, exact zeros pruned. Vectors are plain 1-D ``float64`` numpy
arrays.

The matrix-vector product and the factorizations elsewhere in the package
go through a cached :mod:`scipy.sparse` view of the same arrays, so the
CSR data is shared, not copied.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import DenseLimitError, DimensionError

__all__ = [
    "SparseMatrix",
    "abs_vec",
    "add_scaled_identity",
    "as_vector",
    "axpy",
    "dense_from_sparse",
    "dense_limit",
    "kron",
    "linear_combination",
    "norm2",
    "read_matrix_market",
    "read_vector",
    "split_symmetric",
    "spmv",
    "transpose",
    "write_matrix_market",
    "write_vector",
]

DEFAULT_DENSE_LIMIT = 2048


def dense_limit():
    """Largest dimension allowed for dense oracles (``AVEKIT_DENSE_LIMIT``)."""
    raw = os.environ.get("AVEKIT_DENSE_LIMIT")
    if raw is None or raw.strip() == "":
        return DEFAULT_DENSE_LIMIT
    return int(raw)


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class SparseMatrix:
    """Immutable real matrix in canonical CSR form.

    Parameters
    ----------
    nrows, ncols : int
        Matrix shape.
    row_offsets : array_like of int, length ``nrows + 1``
    col_indices : array_like of int, length ``nnz``
    values : array_like of float, length ``nnz``
    check : bool
        Validate the canonical-form invariants. Internal constructors that
        already guarantee them pass ``False``.
    """

    __slots__ = ("nrows", "ncols", "row_offsets", "col_indices", "values", "_csr")

    def __init__(self, nrows, ncols, row_offsets, col_indices, values, check=True):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_offsets = _frozen(row_offsets, np.int64)
        self.col_indices = _frozen(col_indices, np.int64)
        self.values = _frozen(values, np.float64)
        self._csr = None
        if check:
            self._validate()

    def _validate(self):
        ro, ci, v = self.row_offsets, self.col_indices, self.values
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if ro.shape != (self.nrows + 1,):
            raise ValueError("row_offsets must have length nrows + 1")
        if ro[0] != 0 or np.any(np.diff(ro) < 0):
            raise ValueError("row_offsets must start at 0 and be non-decreasing")
        if ro[-1] != ci.size or ci.size != v.size:
            raise ValueError("row_offsets[-1], col_indices and values disagree on nnz")
        if ci.size:
            if ci.min() < 0 or ci.max() >= self.ncols:
                raise ValueError("column index out of range")
            # strictly increasing inside a row; row starts are allowed to drop
            step = np.diff(ci)
            row_start = np.zeros(ci.size, dtype=bool)
            row_start[ro[1:-1][ro[1:-1] < ci.size]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must be strictly increasing within each row")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite matrix entry")

    # construction -------------------------------------------------------
    @classmethod
    def from_coo(cls, rows, cols, vals, shape, keep_diagonal=False):
        """Build a canonical matrix from triplets, summing duplicates.

        Exact zeros are dropped, except on the diagonal when
        ``keep_diagonal`` is set.
        """
        nrows, ncols = (int(s) for s in shape)
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.size == cols.size == vals.size):
            raise DimensionError("triplet arrays differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows
                          or cols.min() < 0 or cols.max() >= ncols):
            raise IndexError("triplet index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            new = np.empty(rows.size, dtype=bool)
            new[0] = True
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        keep = vals != 0.0
        if keep_diagonal:
            keep |= rows == cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        offsets = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=offsets[1:])
        return cls(nrows, ncols, offsets, cols, vals, check=False)

    @classmethod
    def from_dense(cls, a):
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        rows, cols = np.nonzero(a)
        return cls.from_coo(rows, cols, a[rows, cols], a.shape)

    @classmethod
    def from_scipy(cls, m, keep_diagonal=False):
        coo = sp.coo_matrix(m)
        return cls.from_coo(coo.row, coo.col, coo.data, coo.shape, keep_diagonal=keep_diagonal)

    @classmethod
    def identity(cls, n, scale=1.0):
        idx = np.arange(n)
        return cls.from_coo(idx, idx, np.full(n, float(scale)), (n, n), keep_diagonal=True)

    @classmethod
    def zeros(cls, nrows, ncols=None):
        ncols = nrows if ncols is None else ncols
        return cls(nrows, ncols, np.zeros(nrows + 1), [], [], check=False)

    @classmethod
    def tridiag(cls, lower, diag, upper, n):
        """Constant-coefficient tridiagonal ``n x n`` matrix."""
        i = np.arange(n)
        rows = np.concatenate([i[1:], i, i[:-1]])
        cols = np.concatenate([i[:-1], i, i[1:]])
        vals = np.concatenate([np.full(n - 1, float(lower)), np.full(n, float(diag)),
                               np.full(n - 1, float(upper))])
        return cls.from_coo(rows, cols, vals, (n, n))

    # views --------------------------------------------------------------
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.values.size)

    @property
    def is_square(self):
        return self.nrows == self.ncols

    def row_ids(self):
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.nrows), np.diff(self.row_offsets))

    def to_scipy(self):
        """Shared-memory :class:`scipy.sparse.csr_matrix` view (cached)."""
        if self._csr is None:
            self._csr = sp.csr_matrix(
                (self.values, self.col_indices, self.row_offsets), shape=self.shape, copy=False)
        return self._csr

    def to_dense(self):
        return dense_from_sparse(self)

    def diagonal(self):
        d = np.zeros(min(self.shape))
        r = self.row_ids()
        on = r == self.col_indices
        d[r[on]] = self.values[on]
        return d

    def max_abs(self):
        return float(np.abs(self.values).max()) if self.nnz else 0.0

    @property
    def T(self):
        return transpose(self)

    def __matmul__(self, x):
        return spmv(self, x)

    def __neg__(self):
        return SparseMatrix(self.nrows, self.ncols, self.row_offsets, self.col_indices,
                            -self.values, check=False)

    def __add__(self, other):
        return linear_combination(1.0, self, 1.0, other)

    def __sub__(self, other):
        return linear_combination(1.0, self, -1.0, other)

    def __mul__(self, c):
        return linear_combination(float(c), self, 0.0, SparseMatrix.zeros(*self.shape))

    __rmul__ = __mul__

    def same_structure(self, other):
        return (self.shape == other.shape
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices))

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.same_structure(other) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def as_vector(x, length=None):
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.size != length:
        raise DimensionError(f"vector length {v.size} != {length}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def spmv(A, x):
    """Return ``A @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != A.ncols:
        raise DimensionError(f"cannot multiply {A.shape} matrix by vector of shape {x.shape}")
    return A.to_scipy() @ x


def transpose(A):
    return SparseMatrix.from_coo(A.col_indices, A.row_ids(), A.values, (A.ncols, A.nrows),
                                 keep_diagonal=True)


def linear_combination(a, A, b, B, keep_diagonal=False):
    """Return ``a*A + b*B`` in canonical form."""
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    rows = np.concatenate([A.row_ids(), B.row_ids()])
    cols = np.concatenate([A.col_indices, B.col_indices])
    vals = np.concatenate([a * A.values, b * B.values])
    return SparseMatrix.from_coo(rows, cols, vals, A.shape, keep_diagonal=keep_diagonal)


def kron(A, B):
    """Kronecker product ``A ⊗ B``."""
    if A.nrows * A.ncols == 0 or B.nrows * B.ncols == 0:
        raise ValueError("kron of an empty matrix")
    nrows, ncols = A.nrows * B.nrows, A.ncols * B.ncols
    if max(nrows, ncols) > np.iinfo(np.int64).max // 2:
        raise OverflowError("Kronecker product index range overflows int64")
    ra, ca, va = A.row_ids(), A.col_indices, A.values
    rb, cb, vb = B.row_ids(), B.col_indices, B.values
    rows = (ra[:, None] * B.nrows + rb[None, :]).ravel()
    cols = (ca[:, None] * B.ncols + cb[None, :]).ravel()
    vals = (va[:, None] * vb[None, :]).ravel()
    return SparseMatrix.from_coo(rows, cols, vals, (nrows, ncols))


def split_symmetric(A):
    """Split ``A`` into symmetric ``H = (A + Aᵀ)/2`` and skew ``S = (A - Aᵀ)/2``."""
    if not A.is_square:
        raise DimensionError(f"split_symmetric needs a square matrix, got {A.shape}")
    r, c, v = A.row_ids(), A.col_indices, A.values
    rows = np.concatenate([r, c])
    cols = np.concatenate([c, r])
    half = 0.5 * v
    H = SparseMatrix.from_coo(rows, cols, np.concatenate([half, half]), A.shape)
    S = SparseMatrix.from_coo(rows, cols, np.concatenate([half, -half]), A.shape)
    return H, S


def add_scaled_identity(A, c):
    """Return ``A + c*I``; the diagonal stays in the pattern even if it cancels."""
    if not A.is_square:
        raise DimensionError(f"add_scaled_identity needs a square matrix, got {A.shape}")
    n = A.nrows
    idx = np.arange(n)
    rows = np.concatenate([A.row_ids(), idx])
    cols = np.concatenate([A.col_indices, idx])
    vals = np.concatenate([A.values, np.full(n, float(c))])
    return SparseMatrix.from_coo(rows, cols, vals, A.shape, keep_diagonal=True)


def abs_vec(x):
    return np.abs(np.asarray(x, dtype=np.float64))


def norm2(x):
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))


def axpy(a, x, y):
    """Return ``y + a*x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 0:
        y = np.full(x.shape, float(y))
    if x.shape != y.shape:
        raise DimensionError(f"axpy shape mismatch {x.shape} vs {y.shape}")
    return y + a * x


def dense_from_sparse(A, limit=None):
    """Dense copy of ``A`` for small-instance oracles."""
    limit = dense_limit() if limit is None else limit
    if max(A.shape) > limit:
        raise DenseLimitError(f"matrix {A.shape} exceeds the dense limit {limit}")
    out = np.zeros(A.shape)
    out[A.row_ids(), A.col_indices] = A.values
    return out


# file formats -------------------------------------------------------------

def write_matrix_market(path, A, comment=""):
    """Write ``A`` as a Matrix Market ``coordinate real general`` file."""
    coo = sp.coo_matrix((A.values, (A.row_ids(), A.col_indices)), shape=A.shape)
    scipy.io.mmwrite(str(path), coo, comment=comment, field="real",
                     precision=17, symmetry="general")


def read_matrix_market(path):
    """Read a real Matrix Market file; off-diagonal exact zeros are pruned."""
    m = scipy.io.mmread(str(path))
    if np.iscomplexobj(m.data if sp.issparse(m) else m):
        raise ValueError(f"{path}: complex matrices are not supported")
    if not sp.issparse(m):
        m = sp.coo_matrix(m)
    return SparseMatrix.from_scipy(m, keep_diagonal=True)


def write_vector(path, x):
    """Write a vector as one ``%.17g`` value per line."""
    x = as_vector(x)
    Path(path).write_text("".join(f"{v:.17g}\n" for v in x))


def read_vector(path):
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    try:
        values = [float(ln) for ln in lines if ln and not ln.startswith(("%", "#"))]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed vector file ({exc})") from None
    return as_vector(values)
