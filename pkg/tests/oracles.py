"""Reference implementations that share no code with the package.

Everything here is written the slow, obvious way: explicit Kronecker
products, traces against Pauli matrices, full SVDs and eigensolves.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

SIGMA = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
ORDER = "IXYZ"


def pauli_matrix(word: str) -> np.ndarray:
    return reduce(np.kron, [SIGMA[ch] for ch in word], np.eye(1, dtype=complex))


def operator(terms: dict[str, float], n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for word, c in terms.items():
        out += c * pauli_matrix(word)
    return out


def all_words(n: int) -> list[str]:
    return ["".join(p) for p in itertools.product(ORDER, repeat=n)]


def index_of(word: str) -> int:
    code = 0
    for ch in word:
        code = 4 * code + ORDER.index(ch)
    return code


def coefficient_matrix_from_operator(H: np.ndarray, n: int, n_a: int) -> np.ndarray:
    """``C[a, b] = Tr((P_a ⊗ P_b) H) / 2**n`` with the identity entry zeroed."""
    n_b = n - n_a
    left, right = all_words(n_a), all_words(n_b)
    C = np.zeros((4**n_a, 4**n_b))
    for i, la in enumerate(left):
        for j, rb in enumerate(right):
            C[i, j] = np.trace(pauli_matrix(la + rb) @ H).real / 2**n
    C[0, 0] = 0.0
    return C


def coefficient_matrix(terms: dict[str, float], n: int, n_a: int) -> np.ndarray:
    C = np.zeros((4**n_a, 4**(n - n_a)))
    for word, c in terms.items():
        if word != "I" * n:
            C[index_of(word[:n_a]), index_of(word[n_a:])] += c
    return C


def svd_rho(C: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(C, compute_uv=False)
    return np.cumsum(s**2) / np.sum(s**2)


def truncated(C: np.ndarray, k: int) -> np.ndarray:
    U, s, Vt = np.linalg.svd(C, full_matrices=False)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def ground(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(H)[0])


def tfim_brute_force(n: int, g: float) -> np.ndarray:
    """TFIM spectrum by building the Hamiltonian entry by entry in the Z basis."""
    dim = 2**n
    H = np.zeros((dim, dim))
    for x in range(dim):
        bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
        H[x, x] = sum((1 - 2 * bits[i]) * (1 - 2 * bits[i + 1]) for i in range(n - 1))
        for i in range(n):
            H[x ^ (1 << (n - 1 - i)), x] += g
    return np.linalg.eigvalsh(H)


def numeric_gradient(fun, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function of an array."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + step
        fp = fun(x)
        x[idx] = old - step
        fm = fun(x)
        x[idx] = old
        g[idx] = (fp - fm) / (2 * step)
    return g
