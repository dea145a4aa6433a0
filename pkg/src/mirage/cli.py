"""Command line front end: transpile, score, coverage and bench subcommands.

Reports are JSON with a versioned schema, written atomically; identical
invocations (including the seed) reproduce every field except wall_clock_s.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__, circuit, coverage, qasm, router, sabre, score
from . import simverify, topology

REPORT_VERSION = 1


class UsageError(ValueError):
    pass


def parse_basis(spec: str) -> coverage.BasisGateSpec:
    if spec == "sqiswap":
        return coverage.BasisGateSpec.iswap_root(2)
    if spec == "iswap":
        return coverage.BasisGateSpec.iswap_root(1)
    if spec.startswith("niswap:"):
        return coverage.BasisGateSpec.iswap_root(int(spec.split(":", 1)[1]))
    raise UsageError(f"unknown basis {spec!r} (use sqiswap or niswap:N)")


def _positive(kind=int):
    def conv(text):
        val = kind(text)
        if val <= 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return val
    return conv


def write_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    out_path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent or Path("."),
                               prefix=out_path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        os.unlink(tmp)
        raise


def _report_shell(args, command: str, argv) -> dict:
    echo = list(argv) if argv is not None else sys.argv[1:]
    return {"report_version": REPORT_VERSION, "tool_version": __version__,
            "command": command, "argv": echo, "seed": args.seed}


def _coverage_pair(args, basis, mirror: bool):
    return coverage.get_coverage(
        basis, mirror=mirror, build_seed=args.coverage_seed,
        samples_per_k=args.coverage_samples, cache_dir=args.cache_dir)


def _load_input(path: str) -> circuit.CircuitDag:
    dag = qasm.lower(qasm.parse(Path(path).read_text()))
    return circuit.consolidate_blocks(circuit.clean_input(dag))


def _plan_for(args) -> router.TrialPlan:
    if args.mode == "sabre":
        return router.TrialPlan.fixed(0, args.trials, args.metric)
    if args.mode == "vswap":
        return router.TrialPlan.fixed(1, args.trials, args.metric)
    if args.aggression == "mixed":
        return router.TrialPlan(args.trials, router.MIX_DEFAULT, args.metric)
    return router.TrialPlan.fixed(int(args.aggression), args.trials, args.metric)


def _route_one(dag, cm, args, basis, cs):
    params = sabre.SabreParams(layout_trials=args.layout_trials,
                               layout_passes=args.layout_passes)
    kappa = 0.0 if args.mode == "vswap" else args.kappa
    plan = _plan_for(args)
    return router.run_trials(dag, cm, plan, params, basis, cs, args.seed,
                             kappa=kappa, jobs=args.jobs)


def cmd_transpile(args) -> dict:
    basis = parse_basis(args.basis)
    cm = topology.parse_topology_spec(args.topology)
    dag = _load_input(args.input)
    if dag.num_qubits > cm.num_qubits:
        raise UsageError(f"circuit has {dag.num_qubits} qubits; "
                         f"topology only {cm.num_qubits}")
    cs = _coverage_pair(args, basis, mirror=False)
    best = _route_one(dag, cm, args, basis, cs)

    record = {
        "name": Path(args.input).stem,
        "qubits": dag.num_qubits,
        "input_two_q_count": dag.two_qubit_count(),
        "mode": args.mode,
        "metric": args.metric,
        "aggression": best.aggression,
        "mirror_acceptance_rate": best.mirror_acceptance_rate,
        "trials": best.trial_summaries,
        **best.metrics.as_dict(),
    }
    if args.verify:
        if cm.num_qubits > simverify.MAX_QUBITS:
            raise UsageError("--verify is refused above "
                             f"{simverify.MAX_QUBITS} qubits")
        ok = simverify.routed_equivalent(dag, best.dag,
                                         best.initial_layout.v2p,
                                         best.final_layout.v2p)
        record["verified"] = bool(ok)
        if not ok:
            raise RuntimeError("routed circuit failed the simulator oracle")
    if args.emit_qasm:
        text = qasm.serialize(best.dag, basis, synth=True, cs=cs,
                              synth_seed=args.seed)
        Path(args.emit_qasm).write_text(text)
        record["emitted_qasm"] = args.emit_qasm
    return record


def cmd_score(args) -> dict:
    basis = parse_basis(args.basis)
    cs = _coverage_pair(args, basis, mirror=args.mirror == "on")
    rng = np.random.default_rng(args.seed)
    if args.approx == "on":
        rep = score.haar_score_approx(cs, args.samples, rng)
    else:
        rep = score.haar_score_exact(cs, args.samples, rng)
    return rep.as_dict()


def cmd_coverage(args) -> dict:
    basis = parse_basis(args.basis)
    cs = _coverage_pair(args, basis, mirror=args.mirror == "on")
    ks = [e.k for e in cs.entries]
    if args.k not in ks:
        raise UsageError(f"depth k={args.k} not in coverage set (have {ks})")
    entry = cs.entries[ks.index(args.k)]
    frac, stderr = coverage.haar_volume(entry, args.samples,
                                        np.random.default_rng(args.seed))
    return {"basis": basis.name, "k": args.k, "mirror": args.mirror == "on",
            "cost": entry.cost, "volume": frac, "std_error": stderr,
            "samples": args.samples}


def cmd_bench(args) -> dict:
    suite = Path(args.suite)
    manifest_path = suite / "manifest.json"
    if not manifest_path.exists():
        raise UsageError(f"suite manifest not found: {manifest_path}")
    manifest = json.loads(manifest_path.read_text())
    basis = parse_basis(args.basis)
    cm = topology.parse_topology_spec(args.topology)
    cs = _coverage_pair(args, basis, mirror=False)
    modes = args.modes.split(",")
    seeds = list(range(args.seed, args.seed + args.instances))

    records = []
    for entry in manifest.get("circuits", []):
        name = entry.get("name", Path(entry["file"]).stem)
        rec = {"name": name, "modes": {}}
        try:
            dag = _load_input(str(suite / entry["file"]))
            if dag.num_qubits > cm.num_qubits:
                raise UsageError(f"{name} needs {dag.num_qubits} qubits")
            rec["qubits"] = dag.num_qubits
            rec["input_two_q_count"] = dag.two_qubit_count()
            for mode in modes:
                runs = []
                for seed in seeds:
                    run_args = argparse.Namespace(**vars(args))
                    run_args.mode = mode
                    run_args.seed = seed
                    best = _route_one(dag, cm, run_args, basis, cs)
                    runs.append({"seed": seed, **best.metrics.as_dict(),
                                 "mirror_acceptance_rate":
                                     best.mirror_acceptance_rate})
                depths = [r["pulse_depth"] for r in runs]
                rec["modes"][mode] = {
                    "runs": runs,
                    "geomean_pulse_depth": float(np.exp(np.mean(np.log(depths)))),
                    "mean_total_cost": float(np.mean([r["total_cost"] for r in runs])),
                    "mean_swap_count": float(np.mean([r["swap_count"] for r in runs])),
                }
        except Exception as exc:  # record per-circuit errors, keep going
            rec["error"] = {"type": type(exc).__name__, "message": str(exc)}
        records.append(rec)

    summary = {}
    if len(modes) == 2 and records:
        a, b = modes
        ok = [r for r in records if "error" not in r and r["modes"]]
        if ok:
            ga = [r["modes"][a]["geomean_pulse_depth"] for r in ok]
            gb = [r["modes"][b]["geomean_pulse_depth"] for r in ok]
            summary = {
                f"geomean_depth_{a}": float(np.exp(np.mean(np.log(ga)))),
                f"geomean_depth_{b}": float(np.exp(np.mean(np.log(gb)))),
            }
    return {"circuits": records, "summary": summary, "topology": args.topology,
            "instances": args.instances}


def _add_common(p) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--basis", default="sqiswap",
                   help="sqiswap or niswap:N (iSWAP^(1/N))")
    p.add_argument("--cache-dir", default=None,
                   help="coverage sidecar directory (default ~/.cache)")
    p.add_argument("--coverage-samples", type=_positive(),
                   default=coverage.DEFAULT_SAMPLES_PER_K,
                   help="ansatz samples per depth for coverage builds")
    p.add_argument("--coverage-seed", type=int, default=0,
                   help="build seed for coverage sidecars")
    p.add_argument("--out", default=None, help="report path (default stdout)")


def _add_routing(p) -> None:
    p.add_argument("--topology", required=True,
                   help="line:N | ring:N | grid:RxC | heavyhex57 | file:PATH")
    p.add_argument("--mode", choices=("sabre", "mirage", "vswap"),
                   default="mirage")
    p.add_argument("--metric", choices=("depth", "swaps"), default="depth")
    p.add_argument("--trials", type=_positive(), default=20)
    p.add_argument("--aggression", default="mixed",
                   choices=("mixed", "0", "1", "2", "3"))
    p.add_argument("--kappa", type=float, default=1.0,
                   help="decomposition-cost weight in the mirror decision")
    p.add_argument("--jobs", type=_positive(), default=1)
    p.add_argument("--layout-trials", type=_positive(), default=20)
    p.add_argument("--layout-passes", type=_positive(), default=4)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mirage",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transpile", help="route a QASM circuit")
    p.add_argument("--input", required=True)
    _add_routing(p)
    p.add_argument("--emit-qasm", default=None,
                   help="write the synthesized basis-gate circuit here")
    p.add_argument("--verify", action="store_true",
                   help="check the routed circuit against the simulator")
    _add_common(p)
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("score", help="Haar-score a basis gate")
    p.add_argument("--samples", type=_positive(), default=10000)
    p.add_argument("--mirror", choices=("on", "off"), default="off")
    p.add_argument("--approx", choices=("on", "off"), default="off")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("coverage", help="Haar-weighted coverage volume")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=_positive(), default=100000)
    p.add_argument("--mirror", choices=("on", "off"), default="off")
    _add_common(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", default=str(Path(__file__).parent / "data" / "bench"))
    p.add_argument("--modes", default="sabre,mirage")
    p.add_argument("--instances", type=_positive(), default=5,
                   help="seeds per circuit (geometric means)")
    _add_routing(p)
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    report = _report_shell(args, args.command, argv)
    try:
        record = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        report["wall_clock_s"] = time.time() - started
        write_report(report, args.out)
        return 1
    report["record"] = record
    report["wall_clock_s"] = time.time() - started
    write_report(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
