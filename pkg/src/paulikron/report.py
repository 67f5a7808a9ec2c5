"""JSON run reports: schema, record digests and deterministic serialization.

Fields whose names end in ``_ms`` (and the timing-derived ``speedup``) are
wall-clock measurements; everything else is a deterministic function of the
configuration and inputs.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

from .bench import BenefitRecord
from .certificate import CertificateRecord
from .chem import ChemBoundaryTrace
from .lowrank import RankProfile

SCHEMA_VERSION = "paulikron.run-report/1"
TIMING_KEYS = frozenset({"speedup"})

PRIMARY_MIN = 0.85
SECONDARY_MIN = 0.70


def screen_tier(rho_1: float) -> str:
    if rho_1 >= PRIMARY_MIN:
        return "primary"
    if rho_1 >= SECONDARY_MIN:
        return "secondary"
    return "excluded"


def _num(x: float | None):
    """Finite floats stay numbers; infinities and NaN become strings."""
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def cut_digest(cut) -> dict:
    return {"n": cut.n, "n_a": cut.n_a, "n_b": cut.n_b}


def profile_digest(p: RankProfile) -> dict:
    return {
        "cut": cut_digest(p.cut),
        "k_max": p.k_max,
        "n_retained": p.n_retained,
        "frob_sq_total": p.frob_sq_total,
        "sigmas": list(p.sigmas),
        "rho": list(p.rho),
        "delta_rho": list(p.delta_rho),
        "first_hits": [
            {"target": h.target, "rank": h.rank, "censored": h.censored}
            for h in sorted(p.first_hits.values(), key=lambda h: h.target)
        ],
    }


def _flat(record) -> dict:
    return {k: _num(v) if isinstance(v, float) else v for k, v in dataclasses.asdict(record).items()}


def certificate_digest(r: CertificateRecord) -> dict:
    return _flat(r)


def benefit_digest(r: BenefitRecord) -> dict:
    return _flat(r)


def chem_digest(t: ChemBoundaryTrace) -> dict:
    stages = []
    for s in t.per_rank:
        stages.append({
            "rank": s.rank,
            "loss_total": s.loss.total,
            "frob_term": s.loss.frob_term,
            "spec_term": s.loss.spec_term,
            "tr_term": s.loss.tr_term,
            "bound_chem": s.bound_chem,
            "rho_tl": s.rho_tl,
            "steps_used": s.steps_used,
            "certified": s.certified,
            "wall_ms": s.wall_ms,
        })
    return {
        "cut": cut_digest(t.cut),
        "epsilon": t.epsilon,
        "certified": t.certified,
        "certified_rank": t.certified_rank,
        "time_to_cert_ms": t.time_to_cert_ms,
        "per_rank": stages,
    }


def dumps(report: dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def is_timing_key(key: str) -> bool:
    return key.endswith("_ms") or key in TIMING_KEYS


def strip_timing(obj):
    """Copy of ``obj`` with wall-clock fields removed, for determinism checks."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if not is_timing_key(k)}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
