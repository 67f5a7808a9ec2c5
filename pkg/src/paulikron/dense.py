"""Dense reference computations used for audits and tests.

Nothing in the main decomposition path calls into this module; it exists
to check that path against explicit matrices at small sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .cut import SparseCoeffMatrix
from .exceptions import GuardExceeded, NotHermitian, NumericalFailure
from .lowrank import KroneckerFactorization
from .pauli import PauliSum, decode_many, encode_many

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class DenseGuards:
    max_side: int = 5500
    max_elements: float = 3.2e7
    max_qubits_operator: int = 12

    def check_coeff_matrix(self, n_a: int, n_b: int) -> None:
        elements = 4 ** (n_a + n_b)
        if elements > self.max_elements:
            raise GuardExceeded("max_elements", elements, self.max_elements)
        side = max(4**n_a, 4**n_b)
        if side > self.max_side:
            raise GuardExceeded("max_side", side, self.max_side)

    def check_operator(self, n: int) -> None:
        if n > self.max_qubits_operator:
            raise GuardExceeded("max_qubits_operator", n, self.max_qubits_operator)

    def allows_coeff_matrix(self, n_a: int, n_b: int) -> bool:
        try:
            self.check_coeff_matrix(n_a, n_b)
        except GuardExceeded:
            return False
        return True

    def allows_operator(self, n: int) -> bool:
        return n <= self.max_qubits_operator


DEFAULT_GUARDS = DenseGuards()


def dense_coeff_matrix(C: SparseCoeffMatrix, guards: DenseGuards = DEFAULT_GUARDS) -> np.ndarray:
    guards.check_coeff_matrix(C.cut.n_a, C.cut.n_b)
    out = np.zeros(C.shape)
    out[C.rows_idx, C.cols_idx] = C.values
    return out


def dense_svd_spectrum(M) -> np.ndarray:
    """All singular values of ``M``, nonincreasing."""
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise NumericalFailure("matrix has non-finite entries")
    if M.size == 0:
        return np.zeros(0)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return np.sort(s)[::-1]


def _pauli_masks(strings: list[str], n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bit masks (qubit 0 = most significant bit) of X-type, Z-type and Y letters."""
    codes = [encode_many(strings, n, q, q + 1) for q in range(n)]
    flip = np.zeros(len(strings), dtype=np.int64)
    phase = np.zeros(len(strings), dtype=np.int64)
    ys = np.zeros(len(strings), dtype=np.int64)
    for q, digit in enumerate(codes):
        bit = np.int64(1) << (n - 1 - q)
        flip |= np.where((digit == 1) | (digit == 2), bit, 0)
        phase |= np.where((digit == 2) | (digit == 3), bit, 0)
        ys += digit == 2
    return flip, phase, ys


def dense_operator(h: PauliSum, guards: DenseGuards = DEFAULT_GUARDS) -> np.ndarray:
    """``sum_p c_p P_p`` as a dense ``2**n x 2**n`` complex matrix.

    Each string acts as ``P|x> = i**n_Y (-1)**popcount(x & zy) |x ^ xy>`` so
    the matrix is filled one permutation-with-phases at a time.
    """
    n = h.n
    guards.check_operator(n)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    if not len(h):
        return out
    strings = list(h)
    flip, zmask, ys = _pauli_masks(strings, n)
    x = np.arange(dim, dtype=np.int64)
    ipow = np.array([1, 1j, -1, -1j])
    for c, f, z, ny in zip(h.coefficients(), flip, zmask, ys):
        signs = 1 - 2 * (np.bitwise_count(x & z) & 1).astype(np.int64)
        out[x ^ f, x] += c * ipow[ny % 4] * signs
    return out


def kron_operator(h: PauliSum) -> np.ndarray:
    """Same as :func:`dense_operator` by explicit Kronecker products; slow."""
    dim = 2**h.n
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in h.items():
        out += c * reduce(np.kron, [PAULI_MATRICES[ch] for ch in s])
    return out


def factor_operator(vec: np.ndarray, n: int) -> np.ndarray:
    idx = np.flatnonzero(vec)
    return dense_operator(PauliSum._trusted(n, dict(zip(decode_many(idx, n), vec[idx].tolist()))),
                          DenseGuards(max_qubits_operator=n))


def dense_kronecker_operator(
    fact: KroneckerFactorization, k: int, guards: DenseGuards = DEFAULT_GUARDS
) -> np.ndarray:
    """``c_0 I + sum_{r<=k} sigma_r A_r ⊗ B_r`` without entry dropping."""
    cut = fact.cut
    guards.check_operator(cut.n)
    out = fact.identity_coeff * np.eye(2**cut.n, dtype=complex)
    for t in fact.triplets[:k]:
        out += t.sigma * np.kron(factor_operator(t.u, cut.n_a), factor_operator(t.v, cut.n_b))
    return out


def check_hermitian(H: np.ndarray, atol: float = 1e-12) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NotHermitian(f"matrix of shape {H.shape} is not square")
    dev = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if dev > atol:
        raise NotHermitian(f"max |H - H^dagger| = {dev:.3e} exceeds {atol:.1e}")


def ground_energy(H: np.ndarray) -> float:
    check_hermitian(H)
    try:
        return float(np.linalg.eigvalsh(H)[0])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def spectral_norm_power(H: np.ndarray, iters: int = 40, seed: int = 0) -> float:
    """Power-iteration estimate of the largest ``|eigenvalue|`` of Hermitian ``H``.

    The estimate ``||H x||`` for unit ``x`` never exceeds the true norm.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    dim = H.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = H @ x
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        x = y / est
    return est
