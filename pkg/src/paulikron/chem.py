"""Rank escalation until the coefficient-space residual certifies chemical accuracy.

Unlike the sparse engine this works on the dense coefficient matrix and
fits ``C ≈ A B^T`` column by column, where column ``r`` of ``A`` and ``B``
are the subsystem factors ``a_r`` and ``b_r``. Each rank stage appends one
factor aligned with the leading singular pair of the current residual and
then runs Adam on

    lambda_f ||D||_F^2 + lambda_spec (u^T D v)^2 / 2 + lambda_tr ||theta - theta_0||^2

with ``D = C - A B^T`` and ``(u, v)`` the leading singular pair of ``D``,
refreshed every ``spec_update_interval`` steps and frozen in between. The
pass/fail decision uses only ``sqrt(2**n) ||D||_F`` recomputed from the
factors.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .certificate import EPSILON_CHEM_ROUNDED
from .cut import Bipartition, make_cut, reshape
from .dense import DEFAULT_GUARDS, DenseGuards, dense_coeff_matrix
from .exceptions import BudgetExhausted, DomainError, NotCertified, ZeroMatrix
from .lowrank import MatrixOperator, PowerIterOptions, top_singular_triplet
from .pauli import PauliSum, split_identity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamConfig:
    lr0: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    plateau_patience: int = 25
    plateau_rtol: float = 1e-12
    decay_factor: float = 0.5
    min_lr: float = 1e-4
    # step sizes are multiplied by the RMS of the stage-initial parameters
    relative: bool = True


@dataclass(frozen=True)
class ChemConfig:
    lambda_f: float = 1.0
    lambda_spec: float = 0.05
    lambda_tr: float = 1e-4
    steps_per_rank: int = 300
    max_rank: int = 512
    spec_update_interval: int = 5
    seed: int = 0
    epsilon: float = EPSILON_CHEM_ROUNDED
    adam: AdamConfig = field(default_factory=AdamConfig)
    guards: DenseGuards = DEFAULT_GUARDS

    def __post_init__(self):
        if min(self.lambda_f, self.lambda_spec, self.lambda_tr) < 0:
            raise DomainError("loss weights must be nonnegative")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.steps_per_rank < 0 or self.max_rank < 1 or self.spec_update_interval < 1:
            raise DomainError("steps_per_rank >= 0, max_rank >= 1 and spec_update_interval >= 1 required")

    @property
    def power_options(self) -> PowerIterOptions:
        return PowerIterOptions(max_iters=300, tol=1e-10, seed=self.seed)


@dataclass
class FactorParams:
    """Factor columns ``A[:, r] = a_r`` and ``B[:, r] = b_r`` plus the stage reference."""

    A: np.ndarray
    B: np.ndarray
    A0: np.ndarray
    B0: np.ndarray

    @classmethod
    def empty(cls, rows: int, cols: int) -> "FactorParams":
        A, B = np.zeros((rows, 0)), np.zeros((cols, 0))
        return cls(A, B, A.copy(), B.copy())

    @property
    def rank(self) -> int:
        return self.A.shape[1]

    def copy(self) -> "FactorParams":
        return FactorParams(self.A.copy(), self.B.copy(), self.A0.copy(), self.B0.copy())

    def snapshot(self) -> "FactorParams":
        """Same factors with the reference point moved to them."""
        return FactorParams(self.A.copy(), self.B.copy(), self.A.copy(), self.B.copy())

    def residual(self, C: np.ndarray) -> np.ndarray:
        return C - self.A @ self.B.T

    def weights(self) -> np.ndarray:
        """``alpha_r = ||a_r|| ||b_r||``; the sign stays on ``a_r``."""
        return np.linalg.norm(self.A, axis=0) * np.linalg.norm(self.B, axis=0)

    def drift_sq(self) -> float:
        return float(np.sum((self.A - self.A0) ** 2) + np.sum((self.B - self.B0) ** 2))


@dataclass(frozen=True, eq=False)
class SpectralPair:
    u: np.ndarray
    v: np.ndarray
    sigma: float


@dataclass(frozen=True)
class LossTerms:
    total: float
    frob_term: float
    spec_term: float
    tr_term: float


def refresh_spectral(D: np.ndarray, previous: SpectralPair | None = None,
                     opts: PowerIterOptions = PowerIterOptions()) -> SpectralPair:
    """Leading singular pair of the residual by warm-started power iteration."""
    try:
        t = top_singular_triplet(MatrixOperator(D), opts, start=None if previous is None else previous.v)
    except ZeroMatrix:
        rows, cols = D.shape
        return SpectralPair(np.eye(rows)[0], np.eye(cols)[0], 0.0)
    return SpectralPair(t.u, t.v, t.sigma)


def mixed_loss(params: FactorParams, C: np.ndarray, cfg: ChemConfig, frozen_uv: SpectralPair,
               D: np.ndarray | None = None) -> LossTerms:
    """Weighted loss terms; the spectral term uses ``sigma ≈ u^T D v`` for frozen ``(u, v)``."""
    D = params.residual(C) if D is None else D
    frob = cfg.lambda_f * float(np.sum(D * D))
    s = float(frozen_uv.u @ D @ frozen_uv.v)
    spec = cfg.lambda_spec * 0.5 * s * s
    tr = cfg.lambda_tr * params.drift_sq()
    return LossTerms(frob + spec + tr, frob, spec, tr)


def mixed_gradient(params: FactorParams, C: np.ndarray, cfg: ChemConfig, frozen_uv: SpectralPair,
                   D: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of :func:`mixed_loss` with respect to ``A`` and ``B``."""
    D = params.residual(C) if D is None else D
    u, v = frozen_uv.u, frozen_uv.v
    s = float(u @ D @ v)
    gA = -2.0 * cfg.lambda_f * (D @ params.B)
    gB = -2.0 * cfg.lambda_f * (D.T @ params.A)
    if cfg.lambda_spec:
        gA -= cfg.lambda_spec * s * np.outer(u, params.B.T @ v)
        gB -= cfg.lambda_spec * s * np.outer(v, params.A.T @ u)
    if cfg.lambda_tr:
        gA += 2.0 * cfg.lambda_tr * (params.A - params.A0)
        gB += 2.0 * cfg.lambda_tr * (params.B - params.B0)
    return gA, gB


@dataclass(frozen=True)
class StageRecord:
    rank: int
    loss: LossTerms
    bound_chem: float
    rho_tl: float
    wall_ms: float
    steps_used: int
    certified: bool


def chem_bound(C: np.ndarray, params: FactorParams, n: int) -> float:
    """``sqrt(2**n) ||C - A B^T||_F`` recomputed from the factors."""
    D = params.residual(C)
    return math.sqrt(2.0**n) * float(np.linalg.norm(D))


def _rho_tl(D_frob_sq: float, C_frob_sq: float) -> float:
    if C_frob_sq == 0.0:
        return 1.0
    return max(0.0, 1.0 - D_frob_sq / C_frob_sq)


def optimize_rank_stage(params: FactorParams, C: np.ndarray, cfg: ChemConfig,
                        n: int | None = None) -> tuple[FactorParams, StageRecord]:
    """Add one factor and optimise all factors for up to ``cfg.steps_per_rank`` steps.

    The returned parameters are the iterate with the smallest exact bound
    seen during the stage, which includes the stage starting point, so the
    stage never ends worse than the previous rank plus the new factor.
    ``n`` defaults to ``log2`` of the operator dimension implied by ``C``.
    """
    if params.rank >= cfg.max_rank:
        raise BudgetExhausted(f"rank budget {cfg.max_rank} exhausted")
    rows, cols = C.shape
    if n is None:
        n = int(round(math.log(rows * cols, 4)))
    scale = math.sqrt(2.0**n)
    eps = cfg.epsilon
    start = time.perf_counter()
    opts = cfg.power_options

    D = params.residual(C)
    try:
        t = top_singular_triplet(MatrixOperator(D), opts)
        a_new, b_new = math.sqrt(t.sigma) * t.u, math.sqrt(t.sigma) * t.v
    except ZeroMatrix:
        a_new, b_new = np.zeros(rows), np.zeros(cols)
    p = FactorParams(np.column_stack([params.A, a_new]), np.column_stack([params.B, b_new]),
                     params.A0, params.B0).snapshot()

    ad = cfg.adam
    theta_rms = math.sqrt((np.sum(p.A**2) + np.sum(p.B**2)) / (p.A.size + p.B.size))
    lr_scale = theta_rms if ad.relative and theta_rms > 0 else 1.0
    lr = ad.lr0
    mA, vA = np.zeros_like(p.A), np.zeros_like(p.A)
    mB, vB = np.zeros_like(p.B), np.zeros_like(p.B)
    best_loss, wait = math.inf, 0

    D = p.residual(C)
    best_sq = float(np.sum(D * D))
    best = p.copy()
    pair = None
    steps = 0
    certified = scale * math.sqrt(best_sq) <= eps
    while not certified and steps < cfg.steps_per_rank:
        if steps % cfg.spec_update_interval == 0:
            pair = refresh_spectral(D, pair, opts)
            if steps and scale * math.sqrt(best_sq) <= eps:
                certified = True
                break
        gA, gB = mixed_gradient(p, C, cfg, pair, D)
        steps += 1
        mA = ad.beta1 * mA + (1 - ad.beta1) * gA
        mB = ad.beta1 * mB + (1 - ad.beta1) * gB
        vA = ad.beta2 * vA + (1 - ad.beta2) * gA * gA
        vB = ad.beta2 * vB + (1 - ad.beta2) * gB * gB
        c1, c2 = 1 - ad.beta1**steps, 1 - ad.beta2**steps
        step = lr * lr_scale
        p.A -= step * (mA / c1) / (np.sqrt(vA / c2) + ad.eps_hat)
        p.B -= step * (mB / c1) / (np.sqrt(vB / c2) + ad.eps_hat)

        D = p.residual(C)
        d_sq = float(np.sum(D * D))
        if d_sq < best_sq:
            best_sq, best = d_sq, p.copy()
        loss = mixed_loss(p, C, cfg, pair, D).total
        if loss < best_loss * (1 - ad.plateau_rtol):
            best_loss, wait = loss, 0
        else:
            wait += 1
            if wait >= ad.plateau_patience:
                lr, wait = max(lr * ad.decay_factor, ad.min_lr), 0

    D = best.residual(C)
    d_sq = float(np.sum(D * D))
    bound = scale * math.sqrt(d_sq)
    loss = mixed_loss(best, C, cfg, refresh_spectral(D, pair, opts), D)
    record = StageRecord(
        rank=best.rank,
        loss=loss,
        bound_chem=bound,
        rho_tl=_rho_tl(d_sq, float(np.sum(C * C))),
        wall_ms=1e3 * (time.perf_counter() - start),
        steps_used=steps,
        certified=bound <= eps,
    )
    return best, record


@dataclass
class ChemBoundaryTrace:
    n: int
    cut: Bipartition
    epsilon: float
    per_rank: list[StageRecord]
    certified_rank: int | None
    certified: bool
    time_to_cert_ms: float | None
    params: FactorParams | None = field(default=None, repr=False)

    @property
    def bounds(self) -> list[float]:
        return [s.bound_chem for s in self.per_rank]

    def require_certified(self) -> "ChemBoundaryTrace":
        if not self.certified:
            raise NotCertified(self)
        return self


def run_chem_boundary(h: PauliSum, cut: Bipartition | None = None, cfg: ChemConfig = ChemConfig()) -> ChemBoundaryTrace:
    """Escalate the rank until ``sqrt(2**n) ||D_R||_F <= cfg.epsilon`` or the budget runs out.

    An uncertified run still returns its full trace with ``certified=False``;
    call :meth:`ChemBoundaryTrace.require_certified` to turn that into
    :class:`NotCertified`.
    """
    cut = make_cut(h.n) if cut is None else cut
    split = split_identity(h)
    C = dense_coeff_matrix(reshape(split.traceless, cut), cfg.guards)
    params = FactorParams.empty(*C.shape)
    stages: list[StageRecord] = []
    elapsed = 0.0
    certified_rank = None
    limit = min(cfg.max_rank, min(C.shape))
    cfg_run = replace(cfg, max_rank=limit)
    while params.rank < limit:
        params, rec = optimize_rank_stage(params, C, cfg_run, cut.n)
        stages.append(rec)
        elapsed += rec.wall_ms
        log.debug("rank %d: bound %.3e rho_tl %.12f", rec.rank, rec.bound_chem, rec.rho_tl)
        if rec.certified:
            certified_rank = rec.rank
            break
    return ChemBoundaryTrace(
        n=h.n,
        cut=cut,
        epsilon=cfg.epsilon,
        per_rank=stages,
        certified_rank=certified_rank,
        certified=certified_rank is not None,
        time_to_cert_ms=elapsed if certified_rank is not None else None,
        params=params,
    )
