"""Command-line entry point: ``pauli-sew <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._config import set_max_qubits


def _load_circuit(path: str):
    from .circuit import QacCircuit

    return QacCircuit.from_json(Path(path).read_text())


def _emit(args, name: str, text: str) -> None:
    """Write ``text`` to ``--out/name`` when an output directory is given, else stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tool_version"] + header)
    for r in rows:
        w.writerow([__version__] + [repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    from .circuit import to_unitary
    from .linalg import is_unitary

    c = _load_circuit(args.circuit)
    u = to_unitary(c)
    if args.unitary:
        if not args.out:
            raise SystemExit("--unitary needs --out to write the .npy file")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        np.save(Path(args.out) / "unitary.npy", u)
    summary = {"n": c.n, "a": c.a, "depth": c.depth, "size": c.size, "layers": len(c.layers),
               "cz_widths": c.cz_widths, "unitary": is_unitary(u)}
    _emit(args, "simulate.json", json.dumps(summary, indent=2))
    return 0


def cmd_spectrum(args) -> int:
    from .spectrum import concentration_curve, heisenberg_observable

    c = _load_circuit(args.circuit)
    obs = heisenberg_observable(c, args.pauli, args.qubit)
    coeffs = [[p.label, v] for p, v in obs.table.items()]
    curve = [[k, w, b] for k, w, b in concentration_curve(c, args.pauli, args.qubit, obs=obs)]
    _emit(args, "coefficients.csv", _csv(["pauli", "coefficient"], coeffs))
    _emit(args, "concentration.csv", _csv(["k", "weight_above_k", "advisory_bound"], curve))
    return 0


def _estimator_config(args):
    from .estimator import EstimatorConfig

    return EstimatorConfig(args.mode, args.ell, args.eta, args.delta, args.seed, args.shots)


def cmd_estimate(args) -> int:
    from .estimator import estimate_all_low_degree

    c = _load_circuit(args.circuit)
    table = estimate_all_low_degree(c, args.pauli, args.qubit, _estimator_config(args))
    doc = {"n": table.n, "accuracy": table.accuracy, "entries": table.to_dict()}
    _emit(args, "estimate.json", json.dumps(doc, indent=2))
    return 0


def cmd_learn(args) -> int:
    from .learner import learn_observable

    c = _load_circuit(args.circuit)
    eps_star = args.eps_star
    if eps_star is None and args.kappa is not None:
        from .spectrum import removal_error

        eps_star = removal_error(c, args.kappa, args.pauli, args.qubit).measured
    learned = learn_observable(c, args.pauli, args.qubit, _estimator_config(args), eps_star=eps_star)
    _emit(args, f"learned_{args.pauli}{args.qubit}.json", learned.to_json())
    return 0


def report_to_json(report) -> str:
    doc = report.summary()
    doc["learned"] = [obs.to_dict() for obs in report.learned]
    return json.dumps(doc, indent=2)


def cmd_sew(args) -> int:
    from .learner import LearnedObservable
    from .sewing import sew_learned

    learned = [LearnedObservable.from_dict(json.loads(Path(f).read_text())) for f in args.learned]
    n = learned[0].n
    ref = _load_circuit(args.circuit) if args.circuit else None
    report = sew_learned(learned, n, reference=ref)
    _emit(args, "sew_report.json", report_to_json(report))
    row = [n, report.measured_d_avg, report.measured_d_f, report.bound, report.chi]
    _emit(args, "sew.csv", _csv(["n", "d_avg", "d_f", "bound", "chi"], [row]))
    return 0


def cmd_synth(args) -> int:
    from .learner import LearnedObservable
    from .sewing import sew_learned
    from .synthesis import synthesize

    doc = json.loads(Path(args.report).read_text())
    learned = [LearnedObservable.from_dict(d) for d in doc["learned"]]
    report = sew_learned(learned, int(doc["n"]), order=doc.get("order"))
    res = synthesize(report, d=args.d, kappa=args.kappa, eps=args.net_eps, max_candidates=args.max_candidates)
    _emit(args, "synth_circuit.json", res.schedule.circuit.to_json())
    s = res.summary()
    header = ["depth", "block_section_depth", "chi", "max_block_depth", "d_f_vs_sewn", "hybrid_bound"]
    _emit(args, "synth.csv", _csv(header, [[s[h] for h in header]]))
    return 0


def cmd_distance(args) -> int:
    from .circuit import to_unitary
    from .metrics import distance_report

    u, v = to_unitary(_load_circuit(args.a)), to_unitary(_load_circuit(args.b))
    _emit(args, "distance.json", json.dumps(distance_report(u, v).to_dict(), indent=2))
    return 0


def cmd_experiment(args) -> int:
    from .harness import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.from_file(args.config)
    if args.out:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    for path in run_experiment(cfg):
        print(path)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import verify_acceptance

    results = verify_acceptance(args.only or None)
    failed = [r for r in results if not r.passed and not r.skipped]
    skipped = [r for r in results if r.skipped]
    print(f"{len(results) - len(failed) - len(skipped)} passed, {len(failed)} failed, {len(skipped)} skipped")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pauli-sew", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    p.add_argument("--max-qubits", type=int, default=None, help="dense-simulation qubit limit (default 12)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a circuit JSON file")
    s.add_argument("--circuit", required=True)
    s.add_argument("--unitary", action="store_true", help="also save unitary.npy under --out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="Pauli spectrum and degree curve of C^dag P_i C")
    s.add_argument("--circuit", required=True)
    s.add_argument("--pauli", choices="XYZ", required=True)
    s.add_argument("--qubit", type=int, required=True)
    s.set_defaults(func=cmd_spectrum)

    for name, func in (("estimate", cmd_estimate), ("learn", cmd_learn)):
        s = sub.add_parser(name, help=f"{name} a Heisenberg-evolved observable")
        s.add_argument("--circuit", required=True)
        s.add_argument("--pauli", choices="XYZ", required=True)
        s.add_argument("--qubit", type=int, required=True)
        s.add_argument("--ell", type=int, default=2)
        s.add_argument("--eta", type=float, default=0.05)
        s.add_argument("--delta", type=float, default=0.05)
        s.add_argument("--mode", choices=("exact", "sampled"), default="exact")
        s.add_argument("--shots", type=int, default=None, help="override the Hoeffding shot count")
        if name == "learn":
            s.add_argument("--eps-star", type=float, default=None)
            s.add_argument("--kappa", type=int, default=None,
                           help="compute eps* as the measured removal error at this cutoff")
        s.set_defaults(func=func)

    s = sub.add_parser("sew", help="sew 3n learned observables")
    s.add_argument("--learned", nargs="+", required=True)
    s.add_argument("--circuit", default=None, help="reference circuit for measured distances")
    s.set_defaults(func=cmd_sew)

    s = sub.add_parser("synth", help="compile a sewing report into a circuit")
    s.add_argument("--report", required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--kappa", type=int, default=2)
    s.add_argument("--net-eps", type=float, default=0.75)
    s.add_argument("--max-candidates", type=int, default=5_000_000)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("distance", help="distances between two circuits")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("experiment", help="run an experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("verify", help="run the acceptance suite")
    s.add_argument("--only", type=int, nargs="*", default=None)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_qubits is not None:
        set_max_qubits(args.max_qubits)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
