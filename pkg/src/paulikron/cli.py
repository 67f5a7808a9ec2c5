"""Command-line entry point: ``paulikron <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .bench import TimingProtocol
from .certificate import EPSILON_CHEM, EPSILON_CHEM_ROUNDED
from .chem import AdamConfig, ChemConfig
from .dense import DenseGuards
from .exceptions import PauliKronError
from .formats import format_hamiltonian
from .generators import generate_planted, generate_random, generate_tfim
from .pipeline import PipelineConfig, load_inputs, run_pipeline
from .report import dumps

STAGES_FOR = {
    "screen": ("screen",),
    "scan": ("screen", "scan"),
    "certify": ("screen", "scan", "certify"),
    "audit": ("screen", "scan", "certify", "audit"),
    "bench": ("screen", "bench"),
    "chem-boundary": ("chem",),
}


def _targets(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"targets must be comma-separated reals, got {text!r}") from None


def _parents() -> dict[str, argparse.ArgumentParser]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", nargs="+", required=True, help="Hamiltonian files or directories")
    common.add_argument("--n-a", type=int, default=None, help="qubits in part A (default n//2)")
    common.add_argument("--tol", type=float, default=1e-12, help="coefficient filter tolerance")
    common.add_argument("--seed", type=int, default=0, help="decomposition seed")
    common.add_argument("--jobs", type=int, default=1, help="worker threads across systems")
    common.add_argument("--output", "-o", default="-", help="report path ('-' for stdout)")

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--k-max", type=int, default=32)
    scan.add_argument("--targets", type=_targets, default=(0.999, 0.9995))
    scan.add_argument("--max-iters", type=int, default=300, help="power-iteration step limit")

    cert = argparse.ArgumentParser(add_help=False)
    cert.add_argument("--epsilon", type=float, default=EPSILON_CHEM)

    audit = argparse.ArgumentParser(add_help=False)
    audit.add_argument("--max-qubits", type=int, default=12)

    guards = argparse.ArgumentParser(add_help=False)
    guards.add_argument("--max-side", type=int, default=5500)
    guards.add_argument("--max-elements", type=float, default=3.2e7)

    bench = argparse.ArgumentParser(add_help=False)
    bench.add_argument("--repeats", type=int, default=5)
    bench.add_argument("--warmup", type=int, default=1)
    bench.add_argument("--bench-k", type=int, default=1, help="rank of the timed sparse decomposition")

    chem = argparse.ArgumentParser(add_help=False)
    chem.add_argument("--lambda-f", type=float, default=1.0)
    chem.add_argument("--lambda-spec", type=float, default=0.05)
    chem.add_argument("--lambda-tr", type=float, default=1e-4)
    chem.add_argument("--steps-per-rank", type=int, default=300)
    chem.add_argument("--max-rank", type=int, default=512)
    chem.add_argument("--spec-interval", type=int, default=5)
    chem.add_argument("--lr0", type=float, default=0.05)
    return {"common": common, "scan": scan, "cert": cert, "audit": audit,
            "guards": guards, "bench": bench, "chem": chem}


def build_parser() -> argparse.ArgumentParser:
    p = _parents()
    parser = argparse.ArgumentParser(prog="paulikron", description="Cut-aware low-rank Kronecker analysis of Pauli sums.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("screen", parents=[p["common"]], help="rank-1 screening tiers")
    sub.add_parser("scan", parents=[p["common"], p["scan"]], help="rank profiles")
    sub.add_parser("certify", parents=[p["common"], p["scan"], p["cert"]], help="energy certificates")
    sub.add_parser("audit", parents=[p["common"], p["scan"], p["cert"], p["audit"], p["guards"]],
                   help="dense audit of the certificates")
    sub.add_parser("bench", parents=[p["common"], p["bench"], p["guards"]], help="dense vs sparse timing")
    chem = sub.add_parser("chem-boundary", parents=[p["common"], p["guards"], p["chem"]],
                          help="rank escalation to chemical accuracy")
    chem.add_argument("--epsilon", dest="chem_epsilon", type=float, default=EPSILON_CHEM_ROUNDED)
    pipe = sub.add_parser("pipeline", parents=[p["common"], p["scan"], p["cert"], p["audit"], p["guards"],
                                               p["bench"], p["chem"]], help="all stages")
    pipe.add_argument("--bench", action="store_true", help="include the timing stage")
    pipe.add_argument("--chem", action="store_true", help="include the chem-boundary stage")
    pipe.add_argument("--chem-epsilon", type=float, default=EPSILON_CHEM_ROUNDED)

    plot = sub.add_parser("plot", help="curve tables from a report")
    plot.add_argument("--report", required=True)
    plot.add_argument("--out-dir", default=".")

    gen = sub.add_parser("gen", help="write a synthetic Hamiltonian")
    gsub = gen.add_subparsers(dest="family", required=True)
    g = gsub.add_parser("tfim")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--g", type=float, default=1.0)
    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--terms", type=int, default=32)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--identity", type=float, default=0.0)
    g = gsub.add_parser("planted")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--n-a", type=int, default=None)
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--decay", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", type=float, default=1.0)
    for g in gsub.choices.values():
        g.add_argument("--output", "-o", default="-")
    return parser


def _config(args) -> PipelineConfig:
    if args.command == "pipeline":
        stages = ("screen", "scan", "certify", "audit") + (("bench",) if args.bench else ()) + (("chem",) if args.chem else ())
    else:
        stages = STAGES_FOR[args.command]
    get = lambda name, default: getattr(args, name, default)
    guards = DenseGuards(get("max_side", 5500), get("max_elements", 3.2e7), get("max_qubits", 12))
    chem = ChemConfig(
        lambda_f=get("lambda_f", 1.0), lambda_spec=get("lambda_spec", 0.05), lambda_tr=get("lambda_tr", 1e-4),
        steps_per_rank=get("steps_per_rank", 300), max_rank=get("max_rank", 512),
        spec_update_interval=get("spec_interval", 5), seed=args.seed,
        epsilon=get("chem_epsilon", EPSILON_CHEM_ROUNDED), adam=AdamConfig(lr0=get("lr0", 0.05)), guards=guards,
    )
    return PipelineConfig(
        stages=stages, n_a=args.n_a, tol=args.tol, seed=args.seed,
        k_max=get("k_max", 32), targets=get("targets", (0.999, 0.9995)), max_iters=get("max_iters", 300),
        epsilon=get("epsilon", EPSILON_CHEM), audit_max_qubits=get("max_qubits", 12), guards=guards,
        timing=TimingProtocol(get("warmup", 1), get("repeats", 5)), bench_k=get("bench_k", 1),
        chem=chem, jobs=args.jobs,
    )


def _write(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        Path(dest).write_text(text)


def _plot(args) -> None:
    report = json.loads(Path(args.report).read_text())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "compressibility.csv", "w", newline="") as fc, open(out / "bounds.csv", "w", newline="") as fb:
        wc, wb = csv.writer(fc), csv.writer(fb)
        wc.writerow(["system_id", "n", "n_a", "k", "rho_k", "delta_rho_k", "sigma_k"])
        wb.writerow(["system_id", "k", "rho_k", "norm_tr", "bound", "observed_err", "eta"])
        for s in report["systems"]:
            scan = s.get("scan")
            if scan:
                for k, (r, d, sg) in enumerate(zip(scan["rho"], scan["delta_rho"], scan["sigmas"]), start=1):
                    wc.writerow([s["system_id"], s["n"], scan["cut"]["n_a"], k, repr(r), repr(d), repr(sg)])
            audit = {r["k"]: r for r in (s.get("audit") or {}).get("records", [])}
            for r in (s.get("certify") or {}).get("records", []):
                a = audit.get(r["k"], {})
                wb.writerow([s["system_id"], r["k"], repr(r["rho_k"]), repr(r["norm_tr"]), repr(r["bound"]),
                             a.get("observed_err", ""), a.get("eta", "")])


def _gen(args) -> None:
    if args.family == "tfim":
        rec = generate_tfim(args.n, args.g)
    elif args.family == "random":
        rec = generate_random(args.n, args.terms, args.seed, args.identity)
    else:
        rec = generate_planted(args.n, args.n // 2 if args.n_a is None else args.n_a, args.rank,
                               args.decay, args.seed, args.scale)
    header = f"# generator: {rec.system_id}\n"
    if "sigmas" in rec.meta:
        header += "# planted sigmas: " + " ".join(repr(s) for s in rec.meta["sigmas"]) + "\n"
    _write(format_hamiltonian(rec.sum).replace("\n", "\n" + header, 1), args.output)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            _gen(args)
        elif args.command == "plot":
            _plot(args)
        else:
            cfg = _config(args)
            report = run_pipeline(load_inputs(args.input, args.tol), cfg)
            _write(dumps(report), args.output)
    except (PauliKronError, OSError) as exc:
        print(f"paulikron: error: {exc}", file=sys.stderr)
        return 1
    return 0
