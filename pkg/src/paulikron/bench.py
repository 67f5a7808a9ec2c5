"""Dense-versus-sparse preprocessing benchmark and storage accounting."""

from __future__ import annotations

import os
import platform
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .cut import Bipartition, make_cut, reshape
from .dense import DEFAULT_GUARDS, DenseGuards, dense_coeff_matrix
from .exceptions import DomainError, GuardExceeded, RankOutOfRange, StorageOverflow
from .lowrank import EMISSION_TOL, RANK_SCAN, KroneckerFactorization, PowerIterOptions, rank_scan
from .pauli import PauliSum, split_identity

THREADS_ENV = "PAULIKRON_NUM_THREADS"
BYTES_PER_WEIGHT = 8
BYTES_PER_ENTRY = 12  # int32 index + float64 value
MAX_DENSE_QUBITS = 30

MEASURED = "measured"
GUARD_EXCEEDED = "guard_exceeded"


@dataclass(frozen=True)
class TimingProtocol:
    warmup_runs: int = 1
    repeats: int = 5

    def __post_init__(self):
        if self.repeats < 1 or self.warmup_runs < 0:
            raise DomainError("need repeats >= 1 and warmup_runs >= 0")


def time_with_protocol(task: Callable[[], object], proto: TimingProtocol = TimingProtocol(),
                       clock: Callable[[], float] = time.perf_counter) -> float:
    """Median wall time of ``task`` in milliseconds, warmup runs discarded."""
    for _ in range(proto.warmup_runs):
        task()
    samples = []
    for _ in range(proto.repeats):
        t0 = clock()
        task()
        samples.append(1e3 * (clock() - t0))
    return float(statistics.median(samples))


def storage_bytes_dense(cut: Bipartition | int) -> int:
    """Bytes of the dense float64 coefficient matrix, ``8 * 4**n``."""
    n = cut if isinstance(cut, int) else cut.n
    if n > MAX_DENSE_QUBITS:
        raise StorageOverflow(f"dense storage for n={n} exceeds the {MAX_DENSE_QUBITS}-qubit accounting limit")
    return 8 * 4**n


def storage_bytes_factors(fact: KroneckerFactorization, k: int) -> int:
    """One weight plus 12 bytes per emitted factor entry, for each ``r <= k``."""
    if not 0 <= k <= len(fact):
        raise RankOutOfRange(f"rank {k} outside [0, {len(fact)}]")
    total = 0
    for t in fact.triplets[:k]:
        nz = int(np.count_nonzero(np.abs(t.u) > EMISSION_TOL) + np.count_nonzero(np.abs(t.v) > EMISSION_TOL))
        total += BYTES_PER_WEIGHT + BYTES_PER_ENTRY * nz
    return total


@dataclass(frozen=True)
class BenefitRecord:
    system_id: str
    n: int
    n_a: int
    k: int
    t_decomp_ms: float
    bytes_dense: int
    bytes_factors: int
    t_dense_ms: float | None = None
    speedup: float | None = None
    memory_ratio: float | None = None
    dense_status: str = MEASURED
    dense_note: str | None = None


def benefit_ratios(rec: BenefitRecord) -> BenefitRecord:
    """Fill speedup and memory ratio; no dense timing means ``guard_exceeded``."""
    if not rec.t_decomp_ms > 0:
        raise ZeroDivisionError("t_decomp_ms must be positive")
    if not rec.bytes_factors > 0:
        raise ZeroDivisionError("bytes_factors must be positive")
    memory_ratio = rec.bytes_dense / rec.bytes_factors
    if rec.t_dense_ms is None:
        return replace(rec, speedup=None, memory_ratio=memory_ratio, dense_status=GUARD_EXCEEDED)
    return replace(rec, speedup=rec.t_dense_ms / rec.t_decomp_ms, memory_ratio=memory_ratio, dense_status=MEASURED)


def thread_count() -> int:
    """Threads for timed sections, from ``PAULIKRON_NUM_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise DomainError(f"{THREADS_ENV} must be at least 1")
    return value


def hardware_descriptor() -> str:
    return f"{platform.machine()} {platform.processor() or 'unknown-cpu'} cpus={os.cpu_count()} {platform.system()} python={platform.python_version()} numpy={np.__version__}"


@contextmanager
def pinned_threads(threads: int | None = None):
    with threadpool_limits(limits=thread_count() if threads is None else threads):
        yield


def bench_system(
    system_id: str,
    h: PauliSum,
    cut: Bipartition | None = None,
    k: int = 1,
    proto: TimingProtocol = TimingProtocol(),
    guards: DenseGuards = DEFAULT_GUARDS,
    opts: PowerIterOptions = RANK_SCAN,
    threads: int | None = None,
) -> BenefitRecord:
    """Time sparse rank-``k`` extraction against a full dense SVD of the same ``C``.

    Both timings start from the traceless sum, so reshaping is charged to
    each side. The dense side is skipped, never extrapolated, when the
    guards reject the dense matrix.
    """
    cut = make_cut(h.n) if cut is None else cut
    split = split_identity(h)
    traceless = split.traceless
    k = min(k, min(cut.shape))

    def decompose():
        return rank_scan(reshape(traceless, cut), k_max=k, targets=(), opts=opts, identity_coeff=split.identity_coeff)

    def dense():
        return np.linalg.svd(dense_coeff_matrix(reshape(traceless, cut), guards))

    with pinned_threads(threads):
        t_decomp = time_with_protocol(decompose, proto)
        _, fact = decompose()
        t_dense = note = None
        try:
            guards.check_coeff_matrix(cut.n_a, cut.n_b)
        except GuardExceeded as exc:
            note = str(exc)
        else:
            t_dense = time_with_protocol(dense, proto)
    rec = BenefitRecord(
        system_id=system_id, n=cut.n, n_a=cut.n_a, k=min(k, len(fact)),
        t_decomp_ms=t_decomp, bytes_dense=storage_bytes_dense(cut),
        bytes_factors=storage_bytes_factors(fact, min(k, len(fact))),
        t_dense_ms=t_dense, dense_note=note,
    )
    return benefit_ratios(rec)
