"""Command line entry point: ``wemm run | gen | certify``.

Exit codes: 0 all certificates pass, 2 configuration or input error,
3 a certificate failed (outputs are still written).
"""
import argparse
import json
import os
import sys

import numpy as np

from . import bounds, oracle
from .datagen import GeneratorSpec, generate, read_ground_truth, write_ground_truth
from .errors import WemmError
from .harness import EXIT_CERT, EXIT_CONFIG, EXIT_OK, load_config, run_experiment
from .stream import load_stream, write_stream_csv
from .trace import read_trace_csv


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _c_value(text):
    return text if text == "c_V" else float(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="wemm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help="output directory (overrides the config)")
    run.add_argument("--seed-override", type=_u64, default=None)

    gen = sub.add_parser("gen", help="generate a stream CSV from a generator spec")
    gen.add_argument("--spec", required=True, help="JSON generator spec")
    gen.add_argument("--out", required=True, help="CSV path; ground truth goes next to it")

    cert = sub.add_parser("certify", help="certify a saved WEMM trace")
    cert.add_argument("--trace", required=True)
    cert.add_argument("--stream", required=True)
    cert.add_argument("--theorem", required=True,
                      choices=["loss_identity", "logdet", "logdet_closed_form", "sublog",
                               "stacking", "a_range", "logdet_sum", "drift"])
    cert.add_argument("--b", type=float, required=True, help="regularizer the trace was run with")
    cert.add_argument("--c", type=_c_value, default="c_V", help="drift penalty or c_V")
    cert.add_argument("--truth", default=None, help="ground-truth JSON for the drift certificates")
    cert.add_argument("--tol", type=float, default=bounds.REL_TOL)
    return parser


def _cmd_run(args):
    config = load_config(args.config, args.seed_override)
    result = run_experiment(config, args.out)
    for r in result.reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.learner or '-'} {r.theorem} lhs={r.lhs:.10g} rhs={r.rhs:.10g} slack={r.slack:.3g}")
    return result.exit_code


def _cmd_gen(args):
    with open(args.spec) as fh:
        spec = GeneratorSpec.from_dict(json.load(fh))
    stream, truth = generate(spec)
    write_stream_csv(stream, args.out)
    root, _ = os.path.splitext(args.out)
    write_ground_truth(truth, root + ".truth.json")
    return EXIT_OK


def _cmd_certify(args):
    stream = load_stream(args.stream, "reject")
    trace = read_trace_csv(args.trace, b_reg=args.b)
    if trace.a is None:
        raise WemmError("trace has no a_t column; only WEMM traces are certifiable")
    comparator = oracle.comparator_report(stream, trace.a, args.b)
    th = args.theorem
    if th == "loss_identity":
        reports = [bounds.certify_loss_identity(trace, comparator, stream, args.tol)]
    elif th == "logdet":
        reports = list(bounds.certify_logdet(trace, comparator, stream, args.tol))
    elif th == "logdet_closed_form":
        reports = [bounds.logdet_closed_form(trace, comparator, stream)]
    elif th == "sublog":
        reports = list(bounds.certify_sublog(trace, comparator, stream, args.tol))
    elif th == "stacking":
        reports = [bounds.stacking_report(trace, comparator)]
    elif th == "a_range":
        reports = list(bounds.certify_weight_range(trace, stream))
    elif th == "logdet_sum":
        reports = [bounds.certify_log_det_sum(trace, stream)]
    else:
        if args.truth:
            truth = read_ground_truth(args.truth)
            u_bar = truth.u_bar
            u_seq = truth.u_seq if truth.u_seq is not None else np.tile(u_bar, (stream.T, 1))
        else:
            u_bar = comparator.u_star
            u_seq = np.tile(u_bar, (stream.T, 1))
        reports = bounds.certify_drift(trace, stream, u_bar, u_seq, args.c, args.tol)
    json.dump([r.to_dict() for r in reports], sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CERT


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "gen": _cmd_gen, "certify": _cmd_certify}[args.command]
    try:
        return handler(args)
    except (WemmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
