"""Seeded synthetic Hamiltonian families for testing and benchmarking."""

from __future__ import annotations

import numpy as np

from .cut import make_cut
from .exceptions import DomainError, InvalidCut
from .formats import SystemRecord
from .pauli import PauliSum, decode_many


def generate_tfim(n: int, g: float) -> SystemRecord:
    """Open transverse-field Ising chain ``sum_i Z_i Z_{i+1} + g sum_i X_i``."""
    if n < 2:
        raise DomainError(f"tfim needs n >= 2, got {n}")
    terms = []
    for i in range(n - 1):
        terms.append(("I" * i + "ZZ" + "I" * (n - i - 2), 1.0))
    for i in range(n):
        terms.append(("I" * i + "X" + "I" * (n - i - 1), float(g)))
    return SystemRecord(f"tfim_n{n}_g{g:g}", n, "generator", PauliSum(n, terms),
                        {"family": "tfim", "g": float(g)})


def generate_random(n: int, terms: int = 32, seed: int = 0, identity: float = 0.0) -> SystemRecord:
    """``terms`` distinct non-identity strings with standard normal coefficients."""
    if n < 1 or terms < 1:
        raise DomainError("n and terms must be positive")
    total = 4**n - 1
    terms = min(terms, total)
    rng = np.random.default_rng(seed)
    if total <= 1 << 20:
        codes = 1 + rng.choice(total, size=terms, replace=False)
    else:
        picked: set[int] = set()
        while len(picked) < terms:
            picked.update(int(c) for c in rng.integers(1, total + 1, size=terms - len(picked)))
        codes = np.array(sorted(picked))
    coeffs = rng.standard_normal(terms)
    body = dict(zip(decode_many(np.asarray(codes), n), coeffs.tolist()))
    if identity:
        body["I" * n] = float(identity)
    return SystemRecord(f"random_n{n}_m{terms}_s{seed}", n, "generator", PauliSum(n, body),
                        {"family": "random", "terms": terms, "seed": seed})


def generate_planted(
    n: int,
    n_a: int,
    rank: int,
    decay: float,
    seed: int = 0,
    scale: float = 1.0,
) -> SystemRecord:
    """Traceless sum whose coefficient matrix has spectrum ``scale * decay**r``.

    The singular vectors are seeded random orthonormal columns supported
    away from the identity row and column, so ``C[0, 0] = 0``. The planted
    weights are returned in ``meta["sigmas"]``.
    """
    cut = make_cut(n, n_a)
    if not 0 < decay <= 1:
        raise DomainError(f"decay must lie in (0, 1], got {decay}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    if not 1 <= rank <= min(cut.rows, cut.cols) - 1:
        raise InvalidCut(f"rank {rank} does not fit a {cut.rows}x{cut.cols} matrix without identity row/col")
    rng = np.random.default_rng(seed)
    U = np.linalg.qr(rng.standard_normal((cut.rows - 1, rank)))[0]
    V = np.linalg.qr(rng.standard_normal((cut.cols - 1, rank)))[0]
    sigmas = scale * decay ** np.arange(rank, dtype=float)
    C = np.zeros(cut.shape)
    C[1:, 1:] = (U * sigmas) @ V.T
    rows, cols = np.nonzero(C)
    left = decode_many(rows, cut.n_a)
    right = decode_many(cols, cut.n_b)
    h = PauliSum(n, {la + rb: float(c) for la, rb, c in zip(left, right, C[rows, cols])})
    meta = {"family": "planted", "n_a": n_a, "rank": rank, "decay": decay, "seed": seed,
            "scale": scale, "sigmas": sigmas.tolist()}
    return SystemRecord(f"planted_n{n}_a{n_a}_r{rank}_s{seed}", n, "generator", h, meta)


def planted_rho(sigmas, k: int) -> float:
    """Closed-form captured energy of the top ``k`` planted weights."""
    s = np.asarray(sigmas, dtype=float) ** 2
    return float(s[:k].sum() / s.sum())


def planted_tail(sigmas, k: int) -> float:
    """``||C - C_k||_F`` for the planted spectrum."""
    s = np.asarray(sigmas, dtype=float) ** 2
    return float(np.sqrt(s[k:].sum()))
