"""End-to-end acceptance checks, one test per criterion.

Each test records a single ``criterion N: PASS|FAIL`` line; the lines are
printed together at the end of the pytest run (see ``conftest.py``) and
also immediately when the module is run as a script.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from oracles import numeric_gradient, operator
from paulikron.bench import TimingProtocol, bench_system
from paulikron.certificate import EPSILON_CHEM, EPSILON_CHEM_ROUNDED, audit_profile, energy_bound, required_rho
from paulikron.chem import ChemConfig, FactorParams, chem_bound, mixed_gradient, mixed_loss, refresh_spectral, run_chem_boundary
from paulikron.cli import main as cli_main
from paulikron.cut import make_cut, reshape
from paulikron.dense import DenseGuards, dense_coeff_matrix, dense_operator, dense_svd_spectrum
from paulikron.generators import generate_planted, generate_random, generate_tfim, planted_rho, planted_tail
from paulikron.lowrank import PowerIterOptions, rank_scan, residual_norm
from paulikron.pauli import split_identity, traceless_frobenius_norm
from paulikron.pipeline import PipelineConfig, run_pipeline
from paulikron.report import dumps, strip_timing

RESULTS: dict[int, str] = {}
UNIT_ROUNDOFF = 2.0**-53


def _report(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {title} ({detail})"
    RESULTS[num] = line
    print(line, flush=True)
    assert ok, line


def _cuts(n: int) -> list[int]:
    return sorted({n // 2, *(a for a in (1, 2) if a <= n - 1)})


def _corpus() -> list:
    systems = []
    for n in range(2, 9):
        for i, g in enumerate(np.linspace(0.2, 2.0, 10)):
            systems.append(generate_tfim(n, float(g)))
        for seed in range(10):
            terms = 4 + 6 * seed
            systems.append(generate_random(n, terms, seed=1000 * n + seed, identity=0.3 * (seed % 3)))
        side = 4 ** (n // 2) - 1
        for seed in range(10):
            rank = 1 + seed % min(side, 5)
            decay = (0.1, 0.3, 0.6, 0.9)[seed % 4]
            systems.append(generate_planted(n, n // 2, rank, decay, seed=seed, scale=0.5 + seed))
    return systems


@pytest.fixture(scope="module")
def audit_corpus():
    start = time.perf_counter()
    rows = []
    for rec in _corpus():
        split = split_identity(rec.sum)
        for n_a in _cuts(rec.n):
            cut = make_cut(rec.n, n_a)
            prof, fact = rank_scan(reshape(split.traceless, cut), k_max=min(cut.shape), identity_coeff=split.identity_coeff)
            audits = audit_profile(rec.sum, fact, prof)
            rows.append((rec, cut, prof, audits))
    return rows, time.perf_counter() - start


def _eckart_young_instances():
    guards = DenseGuards()
    out = []
    seed = 0
    while len(out) < 50:
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        n_a = int(rng.integers(1, n))
        seed += 1
        if not guards.allows_coeff_matrix(n_a, n - n_a):
            continue
        out.append((generate_random(n, int(rng.integers(3, 200)), seed=seed), make_cut(n, n_a)))
    return out


@pytest.fixture(scope="module")
def eckart_young_runs():
    rows = []
    for rec, cut in _eckart_young_instances():
        C = reshape(split_identity(rec.sum).traceless, cut)
        prof, fact = rank_scan(C, k_max=min(cut.shape))
        rows.append((C, dense_coeff_matrix(C), prof, fact))
    return rows


def test_criterion_01_certificate_validity(audit_corpus):
    rows, elapsed = audit_corpus
    systems = {r[0].system_id for r in rows}
    checks = sum(len(a) for *_, a in rows)
    violations = [(rec.system_id, cut.n_a, r.k) for rec, cut, _, audits in rows for r in audits
                  if not r.observed_err <= r.bound + 1e-9]
    ok = len(systems) >= 200 and checks > 0 and not violations and elapsed <= 300
    _report(1, "certificate validity", ok,
            f"{len(systems)} systems, {len(rows)} cuts, {checks} (k, cut) audits, "
            f"{len(violations)} violations, {elapsed:.1f}s")


def test_criterion_02_eckart_young(eckart_young_runs):
    worst_rho = 0.0
    worst_res = 0.0
    strict_points = 0
    for C, M, prof, fact in eckart_young_runs:
        s = dense_svd_spectrum(M)
        total = float(np.sum(s**2))
        cum = np.minimum(np.cumsum(s**2) / total, 1.0)
        F = math.sqrt(C.frob_sq)
        for k in range(1, prof.k_max + 1):
            worst_rho = max(worst_rho, abs(prof.rho_at(k) - cum[k - 1]))
            dense_res = float(np.linalg.norm(M - fact.dense_coefficients(min(k, len(fact)))))
            formula = residual_norm(prof, k)
            # 1 - rho_k cancels once the tail is tiny; the identity can only
            # hold up to that rounding floor, which vanishes for ample tails
            floor = min(k * UNIT_ROUNDOFF * F * F / max(dense_res, 1e-300), math.sqrt(k * UNIT_ROUNDOFF) * F)
            if floor <= 1e-8 * dense_res:
                strict_points += 1
            worst_res = max(worst_res, abs(dense_res - formula) / (1e-8 * dense_res + floor))
    ok = len(eckart_young_runs) == 50 and worst_rho <= 1e-8 and worst_res <= 1.0
    _report(2, "Eckart-Young agreement", ok,
            f"50 instances, max |drho| {worst_rho:.2e}, residual error / allowance {worst_res:.3f}, "
            f"{strict_points} points in the purely relative regime")


def test_criterion_03_norm_identity():
    worst = 0.0
    count = 0
    for n in range(2, 7):
        for seed in range(8):
            rec = generate_random(n, 5 + 7 * seed, seed=seed, identity=0.7)
            tr = split_identity(rec.sum).traceless
            H = operator(tr, n)
            dense_sq = float(np.sum(np.abs(H) ** 2))
            for n_a in range(1, n):
                C = reshape(tr, make_cut(n, n_a))
                worst = max(worst, abs(dense_sq - 2**n * C.frob_sq) / dense_sq)
                count += 1
            # the fast operator builder must agree with the Kronecker oracle too
            worst = max(worst, abs(float(np.sum(np.abs(dense_operator(tr)) ** 2)) - dense_sq) / dense_sq)
    _report(3, "norm identity", worst <= 1e-10, f"{count} (system, cut) pairs, n <= 6, max rel {worst:.2e}")


def test_criterion_04_constants():
    rho = required_rho(30.0)
    gap = 1.0 - rho
    b = energy_bound(30.0, 0.999)
    checks = {
        "epsilon": EPSILON_CHEM == 1.5936e-3,
        "rounded epsilon": EPSILON_CHEM_ROUNDED == 1.6e-3 and ChemConfig().epsilon == 1.6e-3,
        "1-rho window": 2.7e-9 <= gap <= 2.9e-9,
        "rho to 9 digits": round(rho, 9) == 0.999999997,
        "bound at 0.999": abs(b - 0.9487) < 5e-5 and b > EPSILON_CHEM,
    }
    failed = [k for k, v in checks.items() if not v]
    _report(4, "constants", not failed,
            f"1-rho={gap:.4e}, rho={rho:.9f}, bound={b:.4f}" + (f", failed: {failed}" if failed else ""))


def test_criterion_05_planted_recovery():
    worst = 0.0
    bad = []
    for n in (6, 8):
        for r in (1, 2, 3, 5):
            rec = generate_planted(n, n // 2, r, 0.1, seed=r)
            sig = rec.meta["sigmas"]
            cut = make_cut(n)
            tau = 1 - 1e-10
            prof, _ = rank_scan(reshape(rec.sum, cut), k_max=r + 2, targets=(tau,))
            hit = prof.first_hits[tau]
            if hit.rank != r or hit.censored:
                bad.append((n, r, hit.rank))
            for k in range(1, r + 3):
                worst = max(worst, abs(prof.rho_at(k) - planted_rho(sig, min(k, r))))
    ok = not bad and worst <= 1e-8
    _report(5, "planted recovery", ok, f"8 instances, max |rho - closed form| {worst:.2e}, wrong k*: {bad}")


def test_criterion_06_gradient_audit():
    tight = PowerIterOptions(20000, 1e-14)
    worst_partial = worst_full = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        C = rng.standard_normal((16, 16))
        rank = 1 + seed % 3
        A, B = 0.5 * rng.standard_normal((16, rank)), 0.5 * rng.standard_normal((16, rank))
        p = FactorParams(A, B, A + 0.1 * rng.standard_normal(A.shape), B + 0.1 * rng.standard_normal(B.shape))

        partial = ChemConfig(lambda_spec=0.0)
        pair = refresh_spectral(p.residual(C))
        gA, gB = mixed_gradient(p, C, partial, pair)
        fdA = numeric_gradient(lambda X: mixed_loss(FactorParams(X, p.B, p.A0, p.B0), C, partial, pair).total, p.A.copy())
        fdB = numeric_gradient(lambda X: mixed_loss(FactorParams(p.A, X, p.A0, p.B0), C, partial, pair).total, p.B.copy())
        g, fd = np.concatenate([gA.ravel(), gB.ravel()]), np.concatenate([fdA.ravel(), fdB.ravel()])
        worst_partial = max(worst_partial, np.linalg.norm(g - fd) / np.linalg.norm(fd))

        cfg = ChemConfig()
        pair = refresh_spectral(p.residual(C), opts=tight)
        gA, gB = mixed_gradient(p, C, cfg, pair)

        def surrogate(X, Y):
            D = C - X @ Y.T
            s = np.linalg.svd(D, compute_uv=False)[0]
            drift = np.sum((X - p.A0) ** 2) + np.sum((Y - p.B0) ** 2)
            return cfg.lambda_f * np.sum(D**2) + cfg.lambda_spec * s**2 / 2 + cfg.lambda_tr * drift

        fdA = numeric_gradient(lambda X: surrogate(X, p.B), p.A.copy())
        fdB = numeric_gradient(lambda Y: surrogate(p.A, Y), p.B.copy())
        g, fd = np.concatenate([gA.ravel(), gB.ravel()]), np.concatenate([fdA.ravel(), fdB.ravel()])
        worst_full = max(worst_full, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    ok = worst_partial <= 1e-5 and worst_full <= 1e-4
    _report(6, "gradient finite-difference audit", ok,
            f"20 seeds, Frobenius+trust {worst_partial:.2e}, full surrogate {worst_full:.2e}")


def _planted_chem_cases():
    """Planted instances scaled so the threshold falls midway between two tails."""
    eps = EPSILON_CHEM_ROUNDED
    cases = []
    for n, rank, target in [(6, 2, 1), (6, 3, 2), (6, 3, 3), (8, 3, 2), (8, 5, 4), (8, 5, 5), (10, 3, 2), (10, 5, 3)]:
        unit = generate_planted(n, n // 2, rank, 0.1, seed=n + target).meta["sigmas"]
        amp = math.sqrt(2**n)
        above = amp * planted_tail(unit, target - 1)
        below = amp * planted_tail(unit, target)
        mid = math.sqrt(above * below) if below > 0 else above / 10
        scale = eps / mid
        cases.append((generate_planted(n, n // 2, rank, 0.1, seed=n + target, scale=scale), target))
    return cases


def test_criterion_07_chem_boundary_contract():
    start = time.perf_counter()
    problems = []
    eps = EPSILON_CHEM_ROUNDED
    for rec, target in _planted_chem_cases():
        sig = rec.meta["sigmas"]
        amp = math.sqrt(2**rec.n)
        first = next(r for r in range(1, len(sig) + 1) if amp * planted_tail(sig, r) <= eps)
        trace = run_chem_boundary(rec.sum, make_cut(rec.n))
        if first != target or trace.certified_rank != first or len(trace.per_rank) != first:
            problems.append(f"{rec.system_id}: expected {first}, got {trace.certified_rank}")
        b = trace.bounds
        if any(y > x for x, y in zip(b, b[1:])):
            problems.append(f"{rec.system_id}: bounds increase")
        C = dense_coeff_matrix(reshape(rec.sum, make_cut(rec.n)))
        if not chem_bound(C, trace.params, rec.n) <= eps:
            problems.append(f"{rec.system_id}: recomputed bound above epsilon")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed <= 600
    _report(7, "chem-boundary contract", ok, f"8 planted instances up to n=10, {elapsed:.1f}s"
            + (f", problems: {problems}" if problems else ""))


def test_criterion_08_monotone_safety(audit_corpus, eckart_young_runs):
    profiles = [(prof, r[0].sum) for r in audit_corpus[0] for prof in [r[2]]]
    bad = 0
    for prof, h in profiles:
        norm = traceless_frobenius_norm(h)
        rho = [prof.rho_at(k) for k in range(1, prof.k_max + 1)]
        bounds = [energy_bound(norm, x) for x in rho]
        bad += any(y < x for x, y in zip(rho, rho[1:])) or any(y > x for x, y in zip(bounds, bounds[1:]))
    for C, _, prof, _ in eckart_young_runs:
        rho = [prof.rho_at(k) for k in range(1, prof.k_max + 1)]
        res = [residual_norm(prof, k) for k in range(1, prof.k_max + 1)]
        bad += any(y < x for x, y in zip(rho, rho[1:])) or any(y > x for x, y in zip(res, res[1:]))
    total = len(profiles) + len(eckart_young_runs)
    _report(8, "monotone safety", bad == 0, f"{total} profiles, {bad} non-monotone")


def test_criterion_09_bench_ordering():
    proto = TimingProtocol(warmup_runs=1, repeats=5)
    systems = [generate_tfim(10, 1.0), generate_random(10, 64, seed=3),
               generate_planted(10, 5, 3, 0.3, seed=1)]
    lines = []
    ok = True
    for rec in systems:
        b = bench_system(rec.system_id, rec.sum, make_cut(10), k=1, proto=proto)
        ok &= b.dense_status == "measured" and b.speedup is not None and b.speedup > 1
        lines.append(f"{rec.system_id} x{b.speedup:.1f}")
    big = generate_tfim(14, 1.0)
    b = bench_system(big.system_id, big.sum, make_cut(14), k=1, proto=TimingProtocol(0, 1))
    labeled = b.dense_status == "guard_exceeded" and b.t_dense_ms is None and b.speedup is None and bool(b.dense_note)
    ok &= labeled
    _report(9, "bench ordering", ok, f"n=10 balanced: {', '.join(lines)}; n=14 labeled {b.dense_status}")


def test_criterion_10_determinism(tmp_path):
    systems = [generate_tfim(6, 0.8), generate_random(6, 40, seed=2), generate_planted(6, 3, 2, 0.2, seed=4)]
    cfg = PipelineConfig(stages=("screen", "scan", "certify", "audit", "bench", "chem"), k_max=8,
                         timing=TimingProtocol(0, 1), chem=ChemConfig(max_rank=4, steps_per_rank=30))
    first = dumps(strip_timing(run_pipeline(systems, cfg)))
    second = dumps(strip_timing(run_pipeline(systems, cfg)))

    for i, rec in enumerate(systems):
        (tmp_path / f"{rec.system_id}.txt").write_text(
            "# qubits: %d\n" % rec.n + "".join(f"{s} {c!r}\n" for s, c in rec.sum.items()))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"report_{tag}.json"
        assert cli_main(["pipeline", "--input", str(tmp_path), "--k-max", "6", "--repeats", "1",
                         "--warmup", "0", "--jobs", "2", "--bench", "--chem", "--max-rank", "3",
                         "--steps-per-rank", "20", "-o", str(out)]) == 0
        outs.append(dumps(strip_timing(json.loads(out.read_text()))))
    ok = first == second and outs[0] == outs[1]
    _report(10, "determinism", ok, f"API reports {len(first)} bytes, CLI reports {len(outs[0])} bytes, identical={ok}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
