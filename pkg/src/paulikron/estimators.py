"""scikit-learn style wrappers.

A "sample" here is one Hamiltonian rather than a row of a design matrix,
so ``fit`` takes a single Pauli sum (or anything :func:`check_pauli_sum`
accepts) and fitted state lives in trailing-underscore attributes. Outputs
are Pauli sums, not arrays, so sklearn's output-wrapping mixins are not used.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .certificate import EPSILON_CHEM, EPSILON_CHEM_ROUNDED, certificate_curve, energy_bound, first_certified_rank
from .chem import AdamConfig, ChemConfig, run_chem_boundary
from .cut import reshape
from .lowrank import PowerIterOptions, factors_to_pauli, rank_scan
from .pauli import DEFAULT_TOL, PauliSum, filter_coefficients, split_identity, traceless_frobenius_norm
from .validation import check_cut, check_pauli_sum


def _check_fitted(est, attr: str) -> None:
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class KroneckerCompressor(BaseEstimator):
    """Low-rank Kronecker compression of a Pauli sum across one cut.

    Parameters
    ----------
    k_max : int
        Ranks to scan (clipped to the smaller side of the coefficient matrix).
    n_components : int or None
        Rank used by :meth:`transform`; ``None`` means ``k_max``.
    n_a : int or None
        Qubits in part A; ``None`` selects the balanced cut.
    targets : tuple of float
        Captured-energy targets for first-hit ranks.
    max_iters, tol, seed : power-iteration settings.
    refine : bool
        Rayleigh-Ritz rotation of the extracted triplets.
    coeff_tol : float
        Input coefficient filter.
    epsilon : float
        Target used for ``certified_rank_``.
    """

    def __init__(self, k_max=32, n_components=None, n_a=None, targets=(0.999, 0.9995),
                 max_iters=300, tol=1e-10, seed=0, refine=True, coeff_tol=DEFAULT_TOL, epsilon=EPSILON_CHEM):
        self.k_max = k_max
        self.n_components = n_components
        self.n_a = n_a
        self.targets = targets
        self.max_iters = max_iters
        self.tol = tol
        self.seed = seed
        self.refine = refine
        self.coeff_tol = coeff_tol
        self.epsilon = epsilon

    def fit(self, X, y=None):
        h = filter_coefficients(check_pauli_sum(X), self.coeff_tol)
        cut = check_cut(h.n, self.n_a)
        split = split_identity(h)
        C = reshape(split.traceless, cut)
        opts = PowerIterOptions(self.max_iters, self.tol, self.seed)
        k_max = min(self.k_max, min(cut.shape))
        self.profile_, self.factorization_ = rank_scan(C, k_max, tuple(self.targets), opts,
                                                       split.identity_coeff, self.refine)
        self.cut_ = cut
        self.n_qubits_ = h.n
        self.norm_tr_ = traceless_frobenius_norm(split)
        self.rho_ = np.asarray(self.profile_.rho)
        self.singular_values_ = np.asarray(self.profile_.sigmas)
        self.bounds_ = np.array([r.bound for r in certificate_curve(self.profile_, self.norm_tr_)])
        self.certified_rank_ = first_certified_rank(self.profile_, self.norm_tr_, self.epsilon)
        return self

    def _rank(self, k):
        _check_fitted(self, "factorization_")
        if k is None:
            k = self.n_components if self.n_components is not None else self.profile_.k_max
        return min(k, len(self.factorization_))

    def transform(self, X=None, k: int | None = None) -> PauliSum:
        """Rank-``k`` reconstruction ``c_0 I + sum_r sigma_r A_r ⊗ B_r`` as a Pauli sum.

        ``X`` is accepted for pipeline compatibility; the fitted system is used.
        """
        k = self._rank(k)
        return factors_to_pauli(self.factorization_, k)

    def fit_transform(self, X, y=None, k: int | None = None) -> PauliSum:
        return self.fit(X).transform(k=k)

    def bound(self, k: int) -> float:
        """Certified worst-case energy deviation at rank ``k``."""
        _check_fitted(self, "profile_")
        return energy_bound(self.norm_tr_, self.profile_.rho_at(k))


class ChemBoundaryCertifier(BaseEstimator):
    """Rank escalation until the coefficient residual certifies ``epsilon``."""

    def __init__(self, epsilon=EPSILON_CHEM_ROUNDED, lambda_f=1.0, lambda_spec=0.05, lambda_tr=1e-4,
                 steps_per_rank=300, max_rank=512, spec_update_interval=5, seed=0, lr0=0.05, n_a=None):
        self.epsilon = epsilon
        self.lambda_f = lambda_f
        self.lambda_spec = lambda_spec
        self.lambda_tr = lambda_tr
        self.steps_per_rank = steps_per_rank
        self.max_rank = max_rank
        self.spec_update_interval = spec_update_interval
        self.seed = seed
        self.lr0 = lr0
        self.n_a = n_a

    def config(self) -> ChemConfig:
        return ChemConfig(self.lambda_f, self.lambda_spec, self.lambda_tr, self.steps_per_rank, self.max_rank,
                          self.spec_update_interval, self.seed, self.epsilon, AdamConfig(lr0=self.lr0))

    def fit(self, X, y=None):
        h = check_pauli_sum(X)
        self.trace_ = run_chem_boundary(h, check_cut(h.n, self.n_a), self.config())
        self.certified_ = self.trace_.certified
        self.certified_rank_ = self.trace_.certified_rank
        self.bounds_ = np.array(self.trace_.bounds)
        return self
