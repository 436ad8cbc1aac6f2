"""Seeded experiment driver that writes CSV rows and a JSON summary per experiment."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .circuit import QacCircuit, build_grover_phase, light_cone, random_circuit, random_clean_circuit, to_unitary
from .estimator import EstimatorConfig
from .learner import learn_observable, learned_distance
from .sewing import PAULI_LETTERS, end_to_end_learn
from .spectrum import (
    ancilla_coefficient_discrepancy,
    ancilla_restrict,
    ancilla_weight_check,
    concentration_curve,
    heisenberg_observable,
    removal_error,
    weight_outside_support,
)

EXPERIMENTS = ("concentration", "ancilla", "learn", "sew", "synth", "hardness")
GENERATOR_KINDS = ("random", "identity", "clean")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    circuit_file: str | None = None
    generator: dict = field(default_factory=lambda: {"kind": "random", "n": 3, "d": 2,
                                                     "kappa_max": 3, "density": 0.5})
    ell: int = 2
    kappa: int = 2
    eta: float = 0.05
    delta: float = 0.05
    mode: str = "exact"
    seeds: tuple[int, ...] = (0,)
    out_dir: str = "results"
    net_eps: float = 0.75
    synth_d: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"field 'experiment': expected one of {EXPERIMENTS}, got {self.experiment!r}")
        if not self.seeds:
            raise ConfigError("field 'seeds': at least one seed is required")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"field 'mode': expected 'exact' or 'sampled', got {self.mode!r}")
        if self.circuit_file is not None and not Path(self.circuit_file).is_file():
            raise ConfigError(f"field 'circuit_file': no such file {self.circuit_file!r}")
        if self.circuit_file is None:
            kind = self.generator.get("kind", "random")
            if kind not in GENERATOR_KINDS:
                raise ConfigError(f"field 'generator.kind': expected one of {GENERATOR_KINDS}, got {kind!r}")
            if "n" not in self.generator:
                raise ConfigError("field 'generator.n': required")
        if self.ell < 0 or self.kappa < 2:
            raise ConfigError("fields 'ell'/'kappa': need ell >= 0 and kappa >= 2")
        if not 0 < self.eta <= 1 or not 0 < self.delta < 1:
            raise ConfigError("fields 'eta'/'delta': need 0 < eta <= 1 and 0 < delta < 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"field {key!r}: unknown configuration field")
        if "experiment" not in data:
            raise ConfigError("field 'experiment': required")
        data = dict(data)
        if "seeds" in data:
            if not isinstance(data["seeds"], list):
                raise ConfigError("field 'seeds': expected a list of integers")
            data["seeds"] = tuple(data["seeds"])
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError("line 1: configuration must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def estimator(self, seed: int, ell: int | None = None) -> EstimatorConfig:
        return EstimatorConfig(self.mode, self.ell if ell is None else ell, self.eta, self.delta, seed)


def task_rng(experiment: str, seed: int, task: int) -> np.random.Generator:
    """One stream per (experiment, seed, task) triple."""
    code = EXPERIMENTS.index(experiment)
    return np.random.default_rng(np.random.SeedSequence([code, int(seed), int(task)]))


def make_circuit(config: ExperimentConfig, seed: int) -> QacCircuit:
    if config.circuit_file is not None:
        return QacCircuit.from_json(Path(config.circuit_file).read_text())
    g = config.generator
    n = int(g["n"])
    kind = g.get("kind", "random")
    if kind == "identity":
        return QacCircuit(n, int(g.get("a", 0)))
    if kind == "clean":
        return random_clean_circuit(n, int(g.get("a", 1)), seed=seed)
    return random_circuit(n, int(g.get("d", 2)), int(g.get("kappa_max", min(n, 3))),
                          float(g.get("density", 0.5)), task_rng(config.experiment, seed, 0),
                          a=int(g.get("a", 0)))


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tool_version"] + columns)
    for row in rows:
        w.writerow([__version__] + [_fmt(row[c]) for c in columns])
    path.write_text(buf.getvalue())


def _concentration(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    cols = ["seed", "qubit", "pauli", "k", "weight_above_k", "advisory_bound", "m",
            "removal_measured", "removal_bound", "outside_support_weight"]
    rows = []
    for seed in config.seeds:
        c = make_circuit(config, seed)
        for i in range(c.n):
            for p in PAULI_LETTERS:
                rem = removal_error(c, config.kappa, p, i)
                outside = weight_outside_support(rem.observable, rem.truncated.support)
                for k, w, b in concentration_curve(c, p, i, obs=rem.observable):
                    rows.append(dict(seed=seed, qubit=i, pauli=p, k=k, weight_above_k=w, advisory_bound=b,
                                     m=rem.m, removal_measured=rem.measured, removal_bound=rem.bound,
                                     outside_support_weight=outside))
    return cols, rows


def _ancilla(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    cols = ["seed", "n", "a", "qubit", "pauli", "lhs", "rhs", "rhs_iz", "holds",
            "coefficient_discrepancy", "restricted_outside_cone"]
    rows = []
    for seed in config.seeds:
        c = make_circuit(config, seed)
        for i in range(c.n):
            for p in PAULI_LETTERS:
                chk = ancilla_weight_check(c, None, p, i)
                obs = heisenberg_observable(c, p, i)
                disc = ancilla_coefficient_discrepancy(obs, c.a) if c.a else 0.0
                # inspection-only column: restricted weight outside the computational light-cone
                restricted = ancilla_restrict(obs, c.a) if c.a else obs
                cone = light_cone(c, i) & set(range(c.n))
                outside = weight_outside_support(restricted, cone)
                rows.append(dict(seed=seed, n=c.n, a=c.a, qubit=i, pauli=p, lhs=chk.lhs, rhs=chk.rhs,
                                 rhs_iz=chk.rhs_iz, holds=chk.holds, coefficient_discrepancy=disc,
                                 restricted_outside_cone=outside))
    return cols, rows


def _learn(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    cols = ["seed", "qubit", "pauli", "ell", "support", "eps_star", "learned_distance", "bound", "within_bound"]
    rows = []
    for seed in config.seeds:
        c = make_circuit(config, seed)
        for i in range(c.n):
            for j, p in enumerate(PAULI_LETTERS):
                rem = removal_error(c, config.kappa, p, i)
                est = config.estimator(seed * 1000 + 3 * i + j)
                learned = learn_observable(c, p, i, est, eps_star=rem.measured, obs=rem.observable)
                dist = learned_distance(learned, rem.observable)
                rows.append(dict(seed=seed, qubit=i, pauli=p, ell=config.ell, support=list(learned.support),
                                 eps_star=rem.measured, learned_distance=dist, bound=learned.error_bound,
                                 within_bound=dist <= learned.error_bound))
    return cols, rows


def _sew(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    cols = ["seed", "n", "ell", "mode", "d_avg", "d_f", "bound", "chi", "within_bound"]
    rows = []
    for seed in config.seeds:
        c = make_circuit(config, seed)
        ell = min(config.ell, c.n)
        rep = end_to_end_learn(c, ell, config.estimator(seed, ell))
        rows.append(dict(seed=seed, n=c.n, ell=ell, mode=config.mode, d_avg=rep.measured_d_avg,
                         d_f=rep.measured_d_f, bound=rep.bound, chi=rep.chi,
                         within_bound=rep.measured_d_avg <= rep.bound + 1e-9))
    return cols, rows


def _synth(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    from .synthesis import synthesize

    cols = ["seed", "n", "depth", "block_section_depth", "chi", "max_block_depth", "max_block_error",
            "d_f_vs_sewn", "hybrid_bound", "schedule_vs_product"]
    rows = []
    for seed in config.seeds:
        c = make_circuit(config, seed)
        ell = min(config.ell, c.n)
        rep = end_to_end_learn(c, ell, config.estimator(seed, ell))
        res = synthesize(rep, d=config.synth_d, kappa=config.kappa, eps=config.net_eps)
        rows.append(dict(seed=seed, n=c.n, depth=res.schedule.depth,
                         block_section_depth=res.schedule.block_section_depth, chi=res.schedule.chi,
                         max_block_depth=res.schedule.max_block_depth,
                         max_block_error=max(res.block_errors.values()), d_f_vs_sewn=res.d_f_vs_sewn,
                         hybrid_bound=res.hybrid_bound, schedule_vs_product=res.schedule_vs_product))
    return cols, rows


def _hardness(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    cols = ["n", "x", "depth", "diag_at_x", "max_other_deviation", "max_offdiag"]
    rows = []
    n = int(config.generator.get("n", 3))
    for value in range(1 << n):
        x = format(value, f"0{n}b")
        c = build_grover_phase(x)
        u = to_unitary(c)
        diag = np.diag(u)
        others = np.delete(diag, value)
        rows.append(dict(n=n, x=x, depth=c.depth, diag_at_x=float(diag[value].real),
                         max_other_deviation=float(np.max(np.abs(others - 1.0), initial=0.0)),
                         max_offdiag=float(np.max(np.abs(u - np.diag(diag))))))
    return cols, rows


RUNNERS: dict[str, Callable[[ExperimentConfig], tuple[list[str], list[dict]]]] = {
    "concentration": _concentration, "ancilla": _ancilla, "learn": _learn,
    "sew": _sew, "synth": _synth, "hardness": _hardness,
}


def _summarize(columns: list[str], rows: list[dict]) -> dict:
    out: dict[str, Any] = {"rows": len(rows)}
    for c in columns:
        vals = [r[c] for r in rows]
        if vals and all(isinstance(v, bool) for v in vals):
            out[c] = {"all": all(vals), "count_true": sum(vals)}
        elif vals and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            out[c] = {"min": float(min(vals)), "max": float(max(vals))}
    return out


def run_experiment(config: ExperimentConfig) -> list[Path]:
    """Run one experiment; returns the CSV and summary JSON paths."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns, rows = RUNNERS[config.experiment](config)
    csv_path = out / f"{config.experiment}.csv"
    write_csv(csv_path, columns, rows)
    summary = {"tool_version": __version__, "config": asdict(config), "summary": _summarize(columns, rows)}
    json_path = out / f"{config.experiment}_summary.json"
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=list) + "\n")
    return [csv_path, json_path]
