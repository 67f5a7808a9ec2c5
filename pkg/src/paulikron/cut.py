"""Bipartitions and the cut-dependent sparse coefficient matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, InvalidCut, QubitCountMismatch
from .pauli import PauliSum, decode_many, encode_many

# 4**15 still fits a signed 32-bit index
MAX_SIDE_QUBITS = 15


@dataclass(frozen=True)
class Bipartition:
    """Contiguous prefix cut: part A is the first ``n_a`` string positions."""

    n: int
    n_a: int

    def __post_init__(self):
        if not 1 <= self.n_a <= self.n - 1:
            raise InvalidCut(f"need 1 <= n_a <= n-1, got n={self.n}, n_a={self.n_a}")
        if self.n_a > MAX_SIDE_QUBITS or self.n_b > MAX_SIDE_QUBITS:
            raise InvalidCut(
                f"each side must have at most {MAX_SIDE_QUBITS} qubits, got {self.n_a}|{self.n_b}"
            )

    @property
    def n_b(self) -> int:
        return self.n - self.n_a

    @property
    def rows(self) -> int:
        return 4**self.n_a

    @property
    def cols(self) -> int:
        return 4**self.n_b

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_balanced(self) -> bool:
        return self.n_a == self.n // 2


def make_cut(n: int, n_a: int | None = None) -> Bipartition:
    """Bipartition of ``n`` qubits; ``n_a`` defaults to the balanced ``n // 2``."""
    if n_a is None:
        n_a = n // 2
    return Bipartition(n, n_a)


@dataclass(frozen=True, eq=False)
class SparseCoeffMatrix:
    """Coefficient matrix ``C[a, b] = c(P_a ⊗ P_b)`` kept as sorted triples.

    Products with vectors cost O(m) in the number ``m`` of stored entries and
    never materialise the ``4**n_a x 4**n_b`` array.
    """

    cut: Bipartition
    rows_idx: np.ndarray
    cols_idx: np.ndarray
    values: np.ndarray
    frob_sq: float = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.rows_idx, dtype=np.int64)
        b = np.asarray(self.cols_idx, dtype=np.int64)
        c = np.asarray(self.values, dtype=np.float64)
        if not (a.shape == b.shape == c.shape and a.ndim == 1):
            raise DimensionMismatch("triple arrays must be 1-D and of equal length")
        if a.size and (a.min() < 0 or a.max() >= self.cut.rows or b.min() < 0 or b.max() >= self.cut.cols):
            raise DimensionMismatch("triple index outside the cut dimensions")
        # sort by (a, b) and merge duplicates
        order = np.lexsort((b, a))
        a, b, c = a[order], b[order], c[order]
        if a.size:
            key = a * self.cut.cols + b
            first = np.ones(a.size, dtype=bool)
            first[1:] = key[1:] != key[:-1]
            if not first.all():
                groups = np.cumsum(first) - 1
                c = np.bincount(groups, weights=c)
                a, b = a[first], b[first]
            keep = c != 0.0
            a, b, c = a[keep], b[keep], c[keep]
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "rows_idx", a)
        object.__setattr__(self, "cols_idx", b)
        object.__setattr__(self, "values", c)
        object.__setattr__(self, "frob_sq", float(np.dot(c, c)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.cut.shape

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def triples(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.rows_idx, self.cols_idx, self.values)]

    def matvec(self, x) -> np.ndarray:
        """``(C x)_a = sum_j c_j x[b_j] [a_j == a]``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.cut.cols,):
            raise DimensionMismatch(f"expected vector of length {self.cut.cols}, got shape {x.shape}")
        return np.bincount(self.rows_idx, weights=self.values * x[self.cols_idx], minlength=self.cut.rows)

    def rmatvec(self, z) -> np.ndarray:
        """``(C^T z)_b = sum_j c_j z[a_j] [b_j == b]``."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.cut.rows,):
            raise DimensionMismatch(f"expected vector of length {self.cut.rows}, got shape {z.shape}")
        return np.bincount(self.cols_idx, weights=self.values * z[self.rows_idx], minlength=self.cut.cols)

    def to_pauli(self) -> PauliSum:
        """Decode the triples back into the traceless Pauli sum they came from."""
        left = decode_many(self.rows_idx, self.cut.n_a)
        right = decode_many(self.cols_idx, self.cut.n_b)
        return PauliSum._trusted(self.cut.n, {la + rb: float(c) for la, rb, c in zip(left, right, self.values)})


def reshape(traceless: PauliSum, cut: Bipartition) -> SparseCoeffMatrix:
    """Scatter the traceless coefficients into the cut-dependent matrix."""
    if traceless.n != cut.n:
        raise QubitCountMismatch(f"sum has {traceless.n} qubits, cut expects {cut.n}")
    if "I" * cut.n in traceless:
        raise ValueError("reshape expects a traceless sum; split the identity term first")
    strings = list(traceless)
    a = encode_many(strings, cut.n, 0, cut.n_a)
    b = encode_many(strings, cut.n, cut.n_a, cut.n)
    return SparseCoeffMatrix(cut, a, b, traceless.coefficients())
