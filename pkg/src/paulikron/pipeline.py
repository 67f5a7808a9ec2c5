"""End-to-end runs over many systems: screen, scan, certify, audit, bench, chem."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ._version import __version__
from .bench import TimingProtocol, bench_system, hardware_descriptor, thread_count
from .certificate import AUDIT_STATE_SEED, EPSILON_CHEM, audit_profile, certificate_curve, first_certified_rank
from .chem import ChemConfig, run_chem_boundary
from .cut import make_cut, reshape
from .dense import DenseGuards
from .exceptions import DomainError, GuardExceeded, PauliKronError
from .formats import SystemRecord, read_hamiltonian
from .lowrank import RANK_SCAN, SCREENING, PowerIterOptions, rank_scan
from .pauli import DEFAULT_TOL, split_identity, traceless_frobenius_norm
from .report import (
    SCHEMA_VERSION,
    benefit_digest,
    certificate_digest,
    chem_digest,
    profile_digest,
    screen_tier,
)

log = logging.getLogger(__name__)

STAGES = ("screen", "scan", "certify", "audit", "bench", "chem")
INPUT_SUFFIXES = (".txt", ".ham", ".pauli")


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple[str, ...] = ("screen", "scan", "certify", "audit")
    n_a: int | None = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    k_max: int = 32
    targets: tuple[float, ...] = (0.999, 0.9995)
    max_iters: int = RANK_SCAN.max_iters
    epsilon: float = EPSILON_CHEM
    audit_max_qubits: int = 12
    guards: DenseGuards = DenseGuards()
    timing: TimingProtocol = TimingProtocol()
    bench_k: int = 1
    chem: ChemConfig = ChemConfig()
    jobs: int = 1

    def __post_init__(self):
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise DomainError(f"unknown stages {sorted(unknown)}")
        if self.jobs < 1:
            raise DomainError("jobs must be at least 1")

    @property
    def scan_options(self) -> PowerIterOptions:
        return PowerIterOptions(self.max_iters, RANK_SCAN.tol, self.seed)

    @property
    def screen_options(self) -> PowerIterOptions:
        return PowerIterOptions(SCREENING.max_iters, SCREENING.tol, self.seed)


@dataclass
class LoadedSystem:
    system_id: str
    record: SystemRecord | None = None
    error: str | None = None
    meta: dict = field(default_factory=dict)


def load_inputs(paths: Iterable[str | Path], tol: float = DEFAULT_TOL) -> list[LoadedSystem]:
    """Every Hamiltonian file under ``paths``; unreadable files become error entries."""
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(f for f in p.rglob("*") if f.is_file() and f.suffix in INPUT_SUFFIXES)
        else:
            files.append(p)
    out = []
    for f in files:
        sid = f.stem
        try:
            out.append(LoadedSystem(sid, read_hamiltonian(f, tol, sid)))
        except (PauliKronError, OSError) as exc:
            out.append(LoadedSystem(sid, error=f"{type(exc).__name__}: {exc}", meta={"path": str(f)}))
    return out


def _error(exc: BaseException) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def process_system(rec: SystemRecord, cfg: PipelineConfig) -> dict:
    """Run the configured stages on one system; stage failures are recorded, not raised."""
    h = rec.sum
    out: dict = {"system_id": rec.system_id, "n": rec.n, "source": rec.source, "terms": len(h),
                 "meta": {k: v for k, v in rec.meta.items() if k != "sigmas"}}
    try:
        cut = make_cut(h.n, cfg.n_a)
    except PauliKronError as exc:
        out["error"] = _error(exc)
        return out
    split = split_identity(h)
    norm_tr = traceless_frobenius_norm(split)
    out.update(identity_coeff=split.identity_coeff, norm_tr=norm_tr, cut={"n_a": cut.n_a, "n_b": cut.n_b})
    stages = set(cfg.stages)
    tier = None
    try:
        C = reshape(split.traceless, cut)
        out["nnz"] = C.nnz
        if stages & {"screen", "bench"}:
            prof1, _ = rank_scan(C, k_max=1, targets=(), opts=cfg.screen_options)
            tier = screen_tier(prof1.rho_1)
            out["screen"] = {"rho_1_tr": prof1.rho_1, "tier": tier}
        profile = fact = None
        if stages & {"scan", "certify", "audit"}:
            k_max = min(cfg.k_max, min(cut.shape))
            profile, fact = rank_scan(C, k_max=k_max, targets=cfg.targets, opts=cfg.scan_options,
                                      identity_coeff=split.identity_coeff)
            out["scan"] = profile_digest(profile)
        if stages & {"certify", "audit"}:
            out["certify"] = {
                "epsilon": cfg.epsilon,
                "first_certified_rank": first_certified_rank(profile, norm_tr, cfg.epsilon),
                "records": [certificate_digest(r) for r in certificate_curve(profile, norm_tr)],
            }
    except PauliKronError as exc:
        out["error"] = _error(exc)
        return out
    if "audit" in stages:
        guards = DenseGuards(cfg.guards.max_side, cfg.guards.max_elements, cfg.audit_max_qubits)
        try:
            records = audit_profile(h, fact, profile, guards)
            out["audit"] = {"status": "measured", "records": [certificate_digest(r) for r in records],
                            "violations": sum(1 for r in records if not r.passed)}
        except GuardExceeded as exc:
            out["audit"] = {"status": "guard_exceeded", "note": str(exc)}
        except PauliKronError as exc:
            out["audit"] = {"status": "error", "error": _error(exc)}
    if "bench" in stages:
        if tier == "excluded":
            out["bench"] = {"status": "excluded"}
        else:
            try:
                out["bench"] = benefit_digest(bench_system(rec.system_id, h, cut, cfg.bench_k, cfg.timing,
                                                           cfg.guards, cfg.scan_options))
            except PauliKronError as exc:
                out["bench"] = {"status": "error", "error": _error(exc)}
    if "chem" in stages:
        try:
            out["chem"] = chem_digest(run_chem_boundary(h, cut, cfg.chem))
        except GuardExceeded as exc:
            out["chem"] = {"status": "guard_exceeded", "note": str(exc)}
        except PauliKronError as exc:
            out["chem"] = {"status": "error", "error": _error(exc)}
    return out


def _safe_process(rec: SystemRecord, cfg: PipelineConfig) -> dict:
    try:
        return process_system(rec, cfg)
    except Exception as exc:  # isolate unexpected failures per system
        log.exception("system %s failed", rec.system_id)
        return {"system_id": rec.system_id, "n": rec.n, "source": rec.source, "error": _error(exc)}


def _config_digest(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    d["stages"] = list(cfg.stages)
    d["targets"] = list(cfg.targets)
    return d


def run_pipeline(systems: Sequence[SystemRecord | LoadedSystem], cfg: PipelineConfig = PipelineConfig()) -> dict:
    """Process every system and assemble the run report, ordered by ``system_id``."""
    loaded = [s if isinstance(s, LoadedSystem) else LoadedSystem(s.system_id, s) for s in systems]
    ids = [s.system_id for s in loaded]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise DomainError(f"duplicate system ids: {dupes}")
    loaded.sort(key=lambda s: s.system_id)
    jobs = 1 if "bench" in cfg.stages else cfg.jobs
    good = [s.record for s in loaded if s.record is not None]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = dict(zip((r.system_id for r in good), pool.map(lambda r: _safe_process(r, cfg), good)))
    entries = []
    for s in loaded:
        if s.record is None:
            entries.append({"system_id": s.system_id, "error": {"type": "LoadError", "message": s.error}, "meta": s.meta})
        else:
            entries.append(results[s.system_id])
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "version": __version__,
            "seeds": {"decomposition": cfg.seed, "optimization": cfg.chem.seed, "audit_states": AUDIT_STATE_SEED},
            "config": _config_digest(cfg),
            "thread_count": thread_count(),
            "jobs": jobs,
            "hardware": hardware_descriptor(),
        },
        "systems": entries,
    }
