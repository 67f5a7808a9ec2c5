"""Leading singular triplets by power iteration with implicit deflation.

Everything here talks to matrices only through ``shape``, ``matvec`` and
``rmatvec``, so the sparse coefficient matrix, its deflated residuals and
small dense arrays (via :class:`MatrixOperator`) are interchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol, Sequence

import numpy as np

from .cut import Bipartition, SparseCoeffMatrix
from .exceptions import DimensionMismatch, RankOutOfRange, ZeroMatrix
from .pauli import PauliSum, decode_many

EMISSION_TOL = 1e-14
# residual counted as numerically zero once sigma**2 <= ZERO_RESIDUAL * ||C||_F**2
ZERO_RESIDUAL = 1e-24


class LinearOperator(Protocol):
    @property
    def shape(self) -> tuple[int, int]: ...

    def matvec(self, x: np.ndarray) -> np.ndarray: ...

    def rmatvec(self, z: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class PowerIterOptions:
    max_iters: int = 300
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


SCREENING = PowerIterOptions(max_iters=200, tol=1e-8, seed=0)
RANK_SCAN = PowerIterOptions(max_iters=300, tol=1e-10, seed=0)
# stricter profile for checks against dense SVD on small problems
VALIDATION = PowerIterOptions(max_iters=20000, tol=1e-13, seed=0)


class MatrixOperator:
    """Adapter giving a dense 2-D array the operator interface."""

    def __init__(self, array):
        self.array = np.asarray(array, dtype=np.float64)
        if self.array.ndim != 2:
            raise DimensionMismatch("MatrixOperator needs a 2-D array")

    @property
    def shape(self) -> tuple[int, int]:
        return self.array.shape

    def matvec(self, x):
        return self.array @ x

    def rmatvec(self, z):
        return self.array.T @ z


@dataclass(frozen=True, eq=False)
class SingularTriplet:
    sigma: float
    u: np.ndarray
    v: np.ndarray
    iters_used: int
    converged: bool


class DeflatedMatrix:
    """``base - sum_r sigma_r u_r v_r^T`` applied implicitly.

    Products cost O(m + r (rows + cols)) for ``r`` removed triplets.
    """

    def __init__(self, base: LinearOperator, removed: Sequence[SingularTriplet] = ()):
        self.base = base
        self.removed = tuple(removed)
        rows, cols = base.shape
        if self.removed:
            self._U = np.column_stack([t.u for t in self.removed])
            self._V = np.column_stack([t.v for t in self.removed])
            self._S = np.array([t.sigma for t in self.removed])
        else:
            self._U = np.zeros((rows, 0))
            self._V = np.zeros((cols, 0))
            self._S = np.zeros(0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = self.base.matvec(x)
        if self._S.size:
            y = y - self._U @ (self._S * (self._V.T @ x))
        return y

    def rmatvec(self, z):
        z = np.asarray(z, dtype=np.float64)
        y = self.base.rmatvec(z)
        if self._S.size:
            y = y - self._V @ (self._S * (self._U.T @ z))
        return y

    def deflate(self, triplet: SingularTriplet) -> "DeflatedMatrix":
        return DeflatedMatrix(self.base, self.removed + (triplet,))


def _is_structurally_zero(M) -> bool:
    if isinstance(M, SparseCoeffMatrix):
        return M.nnz == 0
    if isinstance(M, DeflatedMatrix) and not M.removed:
        return _is_structurally_zero(M.base)
    return False


def top_singular_triplet(
    M: LinearOperator,
    opts: PowerIterOptions = RANK_SCAN,
    start: np.ndarray | None = None,
) -> SingularTriplet:
    """Leading singular triplet of ``M`` by power iteration on ``M^T M``.

    The start vector is seeded uniform noise on the smaller side of ``M``;
    when that is the row side it is pushed through ``M^T`` once to land in
    the row space. ``start`` overrides this with a warm start in the column
    space. Iteration stops once the relative change of ``sigma = ||M v||``
    between sweeps is at most ``opts.tol``.

    The returned ``u`` is exactly ``M v / sigma`` for the returned ``v``, so
    deflating by the triplet removes ``sigma**2`` from ``||M||_F**2`` even
    when the iteration has not fully converged.
    """
    rows, cols = M.shape
    if _is_structurally_zero(M):
        raise ZeroMatrix("matrix has no nonzero entries")

    v = None
    if start is not None:
        v = np.array(start, dtype=np.float64)
        if v.shape != (cols,):
            raise DimensionMismatch(f"start vector must have length {cols}")
        if not np.linalg.norm(v) > 0:
            v = None
    if v is None:
        rng = np.random.default_rng(opts.seed)
        for _ in range(4):
            if rows <= cols:
                v = M.rmatvec(rng.uniform(-1.0, 1.0, rows))
            else:
                v = rng.uniform(-1.0, 1.0, cols)
            if np.linalg.norm(v) > 0:
                break
        else:
            raise ZeroMatrix("start vectors are annihilated; matrix is zero")
    v = v / np.linalg.norm(v)
    w = M.matvec(v)
    sigma = float(np.linalg.norm(w))
    if sigma == 0.0:
        raise ZeroMatrix("matrix annihilates the start vector")

    converged = False
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        v_next = M.rmatvec(w)
        nv = np.linalg.norm(v_next)
        if nv == 0.0:
            break
        v_next = v_next / nv
        w_next = M.matvec(v_next)
        s_next = float(np.linalg.norm(w_next))
        if s_next == 0.0:
            break
        v, w = v_next, w_next
        change = abs(s_next - sigma)
        sigma = s_next
        if change <= opts.tol * sigma:
            converged = True
            break

    u = w / sigma
    pivot = int(np.argmax(np.abs(u)))
    if u[pivot] < 0:
        u, v = -u, -v
    return SingularTriplet(sigma, u, v, iters, converged)


@dataclass(frozen=True)
class FirstHit:
    target: float
    rank: int
    censored: bool


@dataclass(frozen=True)
class RankProfile:
    """Captured-energy curve of one coefficient matrix under one cut.

    ``rho[k-1]`` is the fraction of ``||C||_F**2`` captured by the first
    ``k`` triplets. Censored first hits carry ``rank == k_max``.
    """

    cut: Bipartition
    sigmas: tuple[float, ...]
    rho: tuple[float, ...]
    delta_rho: tuple[float, ...]
    frob_sq_total: float
    k_max: int
    first_hits: dict[float, FirstHit] = field(default_factory=dict)
    n_retained: int = 0

    def rho_at(self, k: int) -> float:
        if not 0 <= k <= self.k_max:
            raise RankOutOfRange(f"rank {k} outside [0, {self.k_max}]")
        return 0.0 if k == 0 else self.rho[k - 1]

    @property
    def rho_1(self) -> float:
        return self.rho[0]


class KroneckerFactorization:
    """Retained triplets with their subsystem Pauli-sum factors.

    ``factors[r]`` is ``(sigma_r, A_r, B_r)`` where ``A_r`` and ``B_r`` hold
    the entries of ``u_r`` and ``v_r`` above :data:`EMISSION_TOL`.
    """

    def __init__(self, identity_coeff: float, cut: Bipartition, triplets: Sequence[SingularTriplet]):
        self.identity_coeff = float(identity_coeff)
        self.cut = cut
        self.triplets = tuple(triplets)

    def __len__(self) -> int:
        return len(self.triplets)

    @cached_property
    def factors(self) -> list[tuple[float, PauliSum, PauliSum]]:
        return [
            (t.sigma, _vector_to_pauli(t.u, self.cut.n_a), _vector_to_pauli(t.v, self.cut.n_b))
            for t in self.triplets
        ]

    def support_sizes(self, k: int | None = None) -> list[tuple[int, int]]:
        """Per-triplet count of emitted entries in ``u_r`` and ``v_r``."""
        k = len(self.triplets) if k is None else k
        return [
            (int(np.count_nonzero(np.abs(t.u) > EMISSION_TOL)), int(np.count_nonzero(np.abs(t.v) > EMISSION_TOL)))
            for t in self.triplets[:k]
        ]

    def dense_coefficients(self, k: int) -> np.ndarray:
        """``C_k = sum_{r<=k} sigma_r u_r v_r^T`` as a dense array."""
        _check_rank(k, len(self.triplets))
        out = np.zeros(self.cut.shape)
        for t in self.triplets[:k]:
            out += t.sigma * np.outer(t.u, t.v)
        return out


def _vector_to_pauli(vec: np.ndarray, n: int) -> PauliSum:
    idx = np.flatnonzero(np.abs(vec) > EMISSION_TOL)
    return PauliSum._trusted(n, dict(zip(decode_many(idx, n), vec[idx].tolist())))


def _check_rank(k: int, available: int) -> None:
    if not 0 <= k <= available:
        raise RankOutOfRange(f"rank {k} outside [0, {available}]")


def rank_scan(
    C: SparseCoeffMatrix,
    k_max: int = 32,
    targets: Sequence[float] = (0.999, 0.9995),
    opts: PowerIterOptions = RANK_SCAN,
    identity_coeff: float = 0.0,
    refine: bool = True,
) -> tuple[RankProfile, KroneckerFactorization]:
    """Greedy rank-``k_max`` decomposition by repeated top-triplet deflation.

    Extraction stops early once the next singular value is numerically zero
    relative to ``||C||_F``; all later ranks then report ``rho == 1`` and
    ``sigma == 0``.

    With ``refine`` the extracted left and right vectors are orthonormalised
    and rotated by the SVD of the small projected block ``U^T C V``. This
    separates nearly degenerate pairs that power iteration leaves mixed and
    never lowers the captured energy of any prefix; the returned triplets
    still satisfy ``||C - C_k||_F**2 = ||C||_F**2 - sum_{i<=k} sigma_i**2``.
    """
    rows, cols = C.shape
    if not 1 <= k_max <= min(rows, cols):
        raise RankOutOfRange(f"k_max={k_max} outside [1, {min(rows, cols)}]")
    for tau in targets:
        if not 0.0 < tau < 1.0:
            raise ValueError(f"capture target {tau} outside (0, 1)")
    if C.nnz == 0:
        raise ZeroMatrix("traceless sum is empty; nothing to decompose")

    total = C.frob_sq
    M = DeflatedMatrix(C)
    kept: list[SingularTriplet] = []
    while len(kept) < k_max:
        try:
            t = top_singular_triplet(M, opts)
        except ZeroMatrix:
            break
        if t.sigma**2 <= ZERO_RESIDUAL * total:
            break
        kept.append(t)
        M = M.deflate(t)
    if refine and len(kept) > 1:
        kept = rayleigh_ritz(C, kept)

    sig = np.zeros(k_max)
    sig[: len(kept)] = [t.sigma for t in kept]
    rho = np.minimum(np.cumsum(sig**2) / total, 1.0)
    if len(kept) < k_max:
        rho[len(kept):] = 1.0
    rho = np.maximum.accumulate(rho)
    delta = np.diff(rho, prepend=0.0)

    hits = {}
    for tau in targets:
        reached = np.flatnonzero(rho >= tau)
        if reached.size:
            hits[float(tau)] = FirstHit(float(tau), int(reached[0]) + 1, False)
        else:
            hits[float(tau)] = FirstHit(float(tau), k_max, True)

    profile = RankProfile(
        cut=C.cut,
        sigmas=tuple(sig.tolist()),
        rho=tuple(rho.tolist()),
        delta_rho=tuple(delta.tolist()),
        frob_sq_total=total,
        k_max=k_max,
        first_hits=hits,
        n_retained=len(kept),
    )
    return profile, KroneckerFactorization(identity_coeff, C.cut, kept)


def rayleigh_ritz(M: LinearOperator, triplets: Sequence[SingularTriplet]) -> list[SingularTriplet]:
    """Best rank-``r`` triplets of ``M`` inside the spans of the given vectors."""
    U, _ = np.linalg.qr(np.column_stack([t.u for t in triplets]))
    V, _ = np.linalg.qr(np.column_stack([t.v for t in triplets]))
    B = np.column_stack([U.T @ M.matvec(V[:, i]) for i in range(V.shape[1])])
    W, s, Zt = np.linalg.svd(B)
    U, V = U @ W, V @ Zt.T
    out = []
    for i, old in enumerate(triplets):
        u, v = U[:, i], V[:, i]
        pivot = int(np.argmax(np.abs(u)))
        if u[pivot] < 0:
            u, v = -u, -v
        out.append(SingularTriplet(float(s[i]), u, v, old.iters_used, old.converged))
    return out


def factors_to_pauli(fact: KroneckerFactorization, k: int) -> PauliSum:
    """Reconstruct ``c_0 I + sum_{r<=k} sigma_r A_r ⊗ B_r`` as a Pauli sum.

    Individual contributions ``|sigma_r u_r[a] v_r[b]| <= 1e-14`` are dropped.
    """
    _check_rank(k, len(fact.triplets))
    cut = fact.cut
    terms: dict[str, float] = {}
    if k:
        trip = fact.triplets[:k]
        rows = np.unique(np.concatenate([np.flatnonzero(t.u) for t in trip]))
        cols = np.unique(np.concatenate([np.flatnonzero(t.v) for t in trip]))
        block = np.zeros((rows.size, cols.size))
        for t in trip:
            part = t.sigma * np.outer(t.u[rows], t.v[cols])
            part[np.abs(part) <= EMISSION_TOL] = 0.0
            block += part
        ia, ib = np.nonzero(block)
        left = decode_many(rows[ia], cut.n_a)
        right = decode_many(cols[ib], cut.n_b)
        terms = {la + rb: float(c) for la, rb, c in zip(left, right, block[ia, ib])}
    ident = "I" * cut.n
    c0 = terms.pop(ident, 0.0) + fact.identity_coeff
    if c0:
        terms[ident] = c0
    return PauliSum._trusted(cut.n, terms)


def residual_norm(profile: RankProfile, k: int) -> float:
    """``||C - C_k||_F = ||C||_F sqrt(1 - rho_k)``; ``k = 0`` gives ``||C||_F``."""
    gap = 1.0 - profile.rho_at(k)
    if gap <= 1e-15:
        return 0.0
    return math.sqrt(profile.frob_sq_total * gap)
