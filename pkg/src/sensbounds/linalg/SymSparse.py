"""Symmetric sparse matrices stored as their lower triangle."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(slots=True, frozen=True)
class SymSparse:
    """
    Symmetric matrix held as a CSR lower triangle (diagonal included).

    Build with :meth:`from_coo` from element contributions (duplicates are
    summed, entries above the diagonal are folded onto their mirror) or with
    :meth:`from_dense`.

    Example:
        A = SymSparse.from_dense(np.array([[2.0, 1.0], [1.0, 2.0]]))
        matvec(A, np.ones(2))        # -> [3., 3.]
    """

    lower: sp.csr_matrix

    def __post_init__(self) -> None:
        rows, cols = self.lower.shape
        if rows != cols:
            raise ValueError(f"SymSparse must be square, got {self.lower.shape}")
        if sp.triu(self.lower, k=1).nnz:
            raise ValueError("SymSparse storage must be lower triangular")

    @classmethod
    def from_coo(
        cls, rows: np.ndarray, cols: np.ndarray, values: np.ndarray, dimension: int
    ) -> "SymSparse":
        r = np.maximum(rows, cols)
        c = np.minimum(rows, cols)
        # Off-diagonal pairs arrive twice (i,j) and (j,i) from symmetric element
        # matrices; keep only one copy of each.
        keep = rows >= cols
        lower = sp.coo_matrix(
            (values[keep], (r[keep], c[keep])), shape=(dimension, dimension)
        ).tocsr()
        lower.sum_duplicates()
        lower.eliminate_zeros()
        return cls(lower)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SymSparse":
        dense = np.asarray(dense, dtype=float)
        if not np.allclose(dense, dense.T, rtol=0.0, atol=0.0):
            raise ValueError("from_dense needs an exactly symmetric matrix")
        return cls(sp.csr_matrix(np.tril(dense)))

    @classmethod
    def zeros(cls, dimension: int) -> "SymSparse":
        return cls(sp.csr_matrix((dimension, dimension)))

    @property
    def dimension(self) -> int:
        return int(self.lower.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.lower.nnz)

    @property
    def bandwidth(self) -> int:
        """Largest i - j over stored entries."""
        coo = self.lower.tocoo()
        if coo.nnz == 0:
            return 0
        return int(np.max(coo.row - coo.col))

    def diagonal(self) -> np.ndarray:
        return self.lower.diagonal()

    def full(self) -> sp.csr_matrix:
        """The symmetric matrix as a full CSR matrix."""
        strict = sp.tril(self.lower, k=-1)
        return (self.lower + strict.T).tocsr()

    def to_dense(self) -> np.ndarray:
        return self.full().toarray()

    def norm_inf(self) -> float:
        """‖A‖∞ (= ‖A‖₁ for symmetric A)."""
        if self.nnz == 0:
            return 0.0
        return float(np.max(np.abs(self.full()).sum(axis=1)))

    def is_zero(self) -> bool:
        return self.nnz == 0 or not np.any(self.lower.data)

    def banded_lower(self) -> np.ndarray:
        """LAPACK lower band storage: ab[i - j, j] = A[i, j]."""
        coo = self.lower.tocoo()
        ab = np.zeros((self.bandwidth + 1, self.dimension))
        ab[coo.row - coo.col, coo.col] = coo.data
        return ab


def _check_vector(A: SymSparse, x: np.ndarray) -> None:
    if x.shape != (A.dimension,):
        raise ValueError(
            f"Dimension mismatch: matrix is {A.dimension}, vector is {x.shape}"
        )


def matvec_extended(A: SymSparse, x: np.ndarray) -> np.ndarray:
    """A x accumulated in ``np.longdouble`` over the stored triplets."""
    x = np.asarray(x, dtype=np.longdouble)
    _check_vector(A, x)
    coo = A.lower.tocoo()
    data = coo.data.astype(np.longdouble)
    y = np.zeros(A.dimension, dtype=np.longdouble)
    np.add.at(y, coo.row, data * x[coo.col])
    off = coo.row != coo.col
    np.add.at(y, coo.col[off], data[off] * x[coo.row[off]])
    return y


def matvec(A: SymSparse, x: np.ndarray) -> np.ndarray:
    """A x; ``longdouble`` vectors stay in extended precision."""
    x = np.asarray(x)
    if x.dtype == np.longdouble:
        return matvec_extended(A, x)
    x = np.asarray(x, dtype=float)
    _check_vector(A, x)
    L = A.lower
    return L @ x + L.T @ x - A.diagonal() * x
