"""Input coercion shared by the estimators and the CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np

from .cut import Bipartition, make_cut
from .exceptions import DimensionMismatch, UnnormalizedState
from .formats import SystemRecord, read_hamiltonian
from .pauli import PauliSum


def check_pauli_sum(X, n: int | None = None) -> PauliSum:
    """Accept a PauliSum, SystemRecord, file path or ``{string: coeff}`` mapping."""
    if isinstance(X, PauliSum):
        h = X
    elif isinstance(X, SystemRecord):
        h = X.sum
    elif isinstance(X, (str, Path)):
        h = read_hamiltonian(X).sum
    elif isinstance(X, Mapping):
        if not X:
            raise ValueError("empty mapping; the qubit count cannot be inferred")
        width = len(next(iter(X)))
        h = PauliSum(width if n is None else n, X)
    else:
        raise TypeError(f"cannot interpret {type(X).__name__} as a Pauli sum")
    if n is not None and h.n != n:
        raise DimensionMismatch(f"expected {n} qubits, got {h.n}")
    return h


def check_cut(n: int, n_a: int | Bipartition | None = None) -> Bipartition:
    if isinstance(n_a, Bipartition):
        if n_a.n != n:
            raise DimensionMismatch(f"cut is for {n_a.n} qubits, sum has {n}")
        return n_a
    return make_cut(n, n_a)


def check_states(states, n: int, atol: float = 1e-10) -> np.ndarray:
    """Rows of unit-norm complex vectors of length ``2**n``."""
    psi = np.atleast_2d(np.asarray(states, dtype=complex))
    if psi.ndim != 2 or psi.shape[1] != 2**n:
        raise DimensionMismatch(f"states must have shape (m, {2**n}), got {psi.shape}")
    dev = np.abs(np.linalg.norm(psi, axis=1) - 1.0)
    if np.any(dev > atol):
        raise UnnormalizedState(f"state norms deviate from 1 by up to {dev.max():.2e}")
    return psi
