"""Experiment runner: config in, traces and a certification report out.

Config is JSON with ``schema_version: 1``::

    {
      "schema_version": 1,
      "generator": {"kind": "gaussian_noise", "d": 3, "T": 500, "seed": 7, "sigma": 0.1},
      "learners": [{"algorithm": "wemm", "b": 2.0}, {"algorithm": "aar", "b": 1.0}],
      "certifications": ["loss_identity", {"theorem": "logdet", "tol": 1e-6}],
      "nonstationary": {"c": [4, "c_V"]},
      "output_dir": "out",
      "norm_policy": "reject"
    }

``input_csv`` (plus optional ``ground_truth`` sidecar) may replace
``generator``. Certificates apply to every primal WEMM learner.
"""
import copy
import hashlib
import json
import math
import os
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import baselines, bounds, kernel, oracle, primal
from .datagen import GeneratorSpec, generate, read_ground_truth, write_ground_truth
from .errors import ConfigError, InvalidParameter, InvalidSpec, WemmError
from .stream import apply_norm_policy, load_stream, write_stream_csv

SCHEMA_VERSION = 1
ALGORITHMS = ("wemm", "kernel_wemm", "aar", "ridge", "arowr", "rls")
CERTIFICATIONS = ("loss_identity", "logdet", "logdet_closed_form", "sublog", "stacking",
                  "a_range", "logdet_sum", "drift")
DEFAULT_CERTIFICATIONS = ("loss_identity", "logdet", "logdet_closed_form", "sublog", "stacking",
                          "a_range", "logdet_sum")
CONFIG_KEYS = {"schema_version", "generator", "input_csv", "ground_truth", "learners",
               "certifications", "nonstationary", "output_dir", "norm_policy"}

EXIT_OK, EXIT_CONFIG, EXIT_CERT = 0, 2, 3


@dataclass
class LearnerConfig:
    algorithm: str
    b: float
    r: float = 1.0
    kernel_spec: kernel.KernelSpec | None = None
    name: str = ""


@dataclass
class ExperimentConfig:
    learners: list
    certifications: list
    generator: GeneratorSpec | None = None
    input_csv: str | None = None
    ground_truth: str | None = None
    nonstationary: list = field(default_factory=list)
    output_dir: str = "out"
    norm_policy: str = "reject"
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self):
        hashed = {k: v for k, v in self.raw.items() if k != "output_dir"}
        blob = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _num(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{what} must be a finite number, got {value!r}")
    return float(value)


def _parse_learner(entry, index):
    if not isinstance(entry, dict):
        raise ConfigError(f"learner {index} must be an object")
    extra = set(entry) - {"algorithm", "b", "r", "kernel", "name"}
    if extra:
        raise ConfigError(f"learner {index}: unknown keys {sorted(extra)}")
    algo = entry.get("algorithm")
    if algo not in ALGORITHMS:
        raise ConfigError(f"learner {index}: unknown algorithm {algo!r}")
    b = _num(entry.get("b", 2.0 if algo in ("wemm", "kernel_wemm") else 1.0), f"learner {index} b")
    r = _num(entry.get("r", 1.0), f"learner {index} r")
    if algo in ("wemm", "kernel_wemm") and not b > 1.0:
        raise ConfigError(f"learner {index}: {algo} needs b > 1, got {b}")
    if algo not in ("wemm", "kernel_wemm"):
        try:
            baselines.baseline_init(algo, 1, b, r)
        except InvalidParameter as exc:
            raise ConfigError(f"learner {index}: {exc}") from None
    spec = None
    if algo == "kernel_wemm":
        try:
            spec = kernel.KernelSpec.from_dict(entry.get("kernel", {"kind": "linear"}))
        except (TypeError, InvalidParameter) as exc:
            raise ConfigError(f"learner {index}: bad kernel: {exc}") from None
    name = entry.get("name") or algo
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError(f"learner {index}: name {name!r} is not filename-safe")
    return LearnerConfig(algo, b, r, spec, name)


def _parse_cert(entry):
    if isinstance(entry, str):
        entry = {"theorem": entry}
    if not isinstance(entry, dict) or entry.get("theorem") not in CERTIFICATIONS:
        raise ConfigError(f"unknown certification {entry!r}")
    tol = _num(entry.get("tol", bounds.REL_TOL), "certification tol")
    if tol < 0:
        raise ConfigError("certification tol must be >= 0")
    return (entry["theorem"], tol)


def parse_config(raw, seed_override=None):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw = copy.deepcopy(raw)
    extra = set(raw) - CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    if ("generator" in raw) == ("input_csv" in raw):
        raise ConfigError("give exactly one of 'generator' and 'input_csv'")
    generator = None
    if "generator" in raw:
        if seed_override is not None:
            raw["generator"]["seed"] = int(seed_override)
        try:
            generator = GeneratorSpec.from_dict(raw["generator"])
        except InvalidSpec as exc:
            raise ConfigError(f"bad generator: {exc}") from None
    learners = raw.get("learners")
    if not isinstance(learners, list) or not learners:
        raise ConfigError("'learners' must be a non-empty list")
    parsed = [_parse_learner(e, i) for i, e in enumerate(learners)]
    names = [lc.name for lc in parsed]
    for i, lc in enumerate(parsed):
        seen = names[:i].count(lc.name)
        if seen:
            lc.name = f"{lc.name}_{seen + 1}"
    certs = raw.get("certifications")
    certs = [_parse_cert(e) for e in certs] if certs is not None else [
        (c, bounds.REL_TOL) for c in DEFAULT_CERTIFICATIONS]
    ns = raw.get("nonstationary")
    cs = []
    if ns is not None:
        if not isinstance(ns, dict) or "c" not in ns:
            raise ConfigError("'nonstationary' must be an object with key 'c'")
        cs = ns["c"] if isinstance(ns["c"], list) else [ns["c"]]
        for c in cs:
            if c == "c_V":
                continue
            c = _num(c, "nonstationary c")
            for lc in parsed:
                if lc.algorithm == "wemm" and (c <= 0 or 1.0 / lc.b + 1.0 / c > 1.0):
                    raise ConfigError(f"c={c} infeasible for b={lc.b}: need 1/b + 1/c <= 1")
        if not any(name == "drift" for name, _ in certs):
            certs.append(("drift", bounds.REL_TOL))
    policy = raw.get("norm_policy", "reject")
    if policy not in ("reject", "prescale"):
        raise ConfigError(f"unknown norm_policy {policy!r}")
    return ExperimentConfig(
        learners=parsed,
        certifications=certs,
        generator=generator,
        input_csv=raw.get("input_csv"),
        ground_truth=raw.get("ground_truth"),
        nonstationary=cs,
        output_dir=raw.get("output_dir", "out"),
        norm_policy=policy,
        raw=raw,
    )


def load_config(path, seed_override=None):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(raw, seed_override)


@dataclass
class ExperimentResult:
    traces: dict
    comparators: dict
    reports: list
    report: dict
    stream: object

    @property
    def passed(self):
        return all(r.passed for r in self.reports)

    @property
    def exit_code(self):
        return EXIT_OK if self.passed else EXIT_CERT


def _run_learner(lc, stream):
    if lc.algorithm == "wemm":
        return primal.run_trace(stream, lc.b, name=lc.name)
    if lc.algorithm == "kernel_wemm":
        diag = [kernel.kernel_eval(lc.kernel_spec, x, x) for x in stream.X]
        if diag and max(diag) > 1.0 + 1e-12:
            warnings.warn(f"{lc.name}: K(x, x) = {max(diag):.6g} > 1 on this stream", stacklevel=2)
        return kernel.run_trace(stream, lc.b, lc.kernel_spec, name=lc.name)
    return baselines.run_trace(stream, lc.algorithm, lc.b, lc.r, name=lc.name)


def _certify(trace, stream, comparator, truth, config):
    reports = []
    for cert, tol in config.certifications:
        if cert == "loss_identity":
            reports.append(bounds.certify_loss_identity(trace, comparator, stream, tol))
        elif cert == "logdet":
            reports.extend(bounds.certify_logdet(trace, comparator, stream, tol))
        elif cert == "logdet_closed_form":
            reports.append(bounds.logdet_closed_form(trace, comparator, stream))
        elif cert == "sublog":
            reports.extend(bounds.certify_sublog(trace, comparator, stream, tol))
        elif cert == "stacking":
            reports.append(bounds.stacking_report(trace, comparator))
        elif cert == "a_range":
            reports.extend(bounds.certify_weight_range(trace, stream))
        elif cert == "logdet_sum":
            reports.append(bounds.certify_log_det_sum(trace, stream))
        elif cert == "drift":
            if truth is not None and truth.u_seq is not None:
                u_bar, u_seq = truth.u_bar, truth.u_seq
            else:
                u_bar = comparator.u_star
                u_seq = np.tile(u_bar, (stream.T, 1))
            for c in config.nonstationary or ["c_V"]:
                reports.extend(bounds.certify_drift(trace, stream, u_bar, u_seq, c, tol))
    return reports


def _prepare_stream(config):
    if config.generator is not None:
        stream, truth = generate(config.generator)
        return apply_norm_policy(stream, config.norm_policy), truth
    stream = load_stream(config.input_csv, config.norm_policy)
    truth = read_ground_truth(config.ground_truth) if config.ground_truth else None
    return stream, truth


def run_experiment(config, output_dir=None):
    """Run every learner on one shared stream, certify, and write outputs."""
    out = output_dir or config.output_dir
    stream, truth = _prepare_stream(config)
    traces, comparators, all_reports = {}, {}, []
    for lc in config.learners:
        trace = _run_learner(lc, stream)
        traces[lc.name] = trace
        if lc.algorithm != "wemm":
            continue
        comparator = oracle.comparator_report(stream, trace.a, lc.b)
        comparators[lc.name] = comparator
        all_reports.extend(_certify(trace, stream, comparator, truth, config))

    os.makedirs(out, exist_ok=True)
    write_stream_csv(stream, os.path.join(out, "stream.csv"))
    if truth is not None:
        write_ground_truth(truth, os.path.join(out, "ground_truth.json"))
    learners_out = []
    for name, trace in traces.items():
        trace.write_csv(os.path.join(out, f"trace_{name}.csv"))
        entry = {"name": name, "algorithm": trace.algorithm, "L_T": trace.L_T,
                 "runtime_ms": round(trace.runtime_ms, 3)}
        if trace.a is not None:
            entry["log_det_ratio"] = bounds.replay(trace, stream).log_det_ratio
        learners_out.append(entry)
    report = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config.config_hash,
        "stream": stream.metadata(),
        "learners": learners_out,
        "comparator": {name: comp.to_dict() for name, comp in comparators.items()},
        "bounds": [r.to_dict() for r in all_reports],
        "all_pass": all(r.passed for r in all_reports),
    }
    if truth is not None:
        report["ground_truth"] = {"u_bar": truth.u_bar.tolist(), "V_m": truth.V_m}
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return ExperimentResult(traces, comparators, all_reports, report, stream)
