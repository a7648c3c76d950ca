"""Command-line interface: ``train``, ``eval``, ``gen-synth`` and ``verify``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .data import InvalidInput
from .dataio import (
    ParseError,
    SynthSpec,
    gen_synthetic,
    load_model,
    read_libsvm,
    save_model,
    stratified_split,
    write_libsvm,
    write_trace,
)
from .experiment import SOLVERS, ExperimentConfig, default_measure, report_measure, run_experiment
from .losses import KINDS, loss_value
from .metrics import raw_measure

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("nondecomp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_loss_flags(p):
    p.add_argument("--loss", choices=KINDS, default="pauc")
    p.add_argument("--k", type=float, default=None, help="Prec@k fraction (default: positive rate)")
    p.add_argument("--beta", type=float, default=0.1, help="pAUC false-positive range (default 0.1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nondecomp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    train = sub.add_parser("train", help="train a model and write a time/accuracy trace")
    train.add_argument("--solver", choices=SOLVERS, default="1pmb")
    _add_loss_flags(train)
    train.add_argument("--eta", type=float, default=1.0, help="step length scale")
    train.add_argument("--buffer", type=int, default=500, help="buffer size = epoch length")
    train.add_argument("--passes", type=int, default=5)
    train.add_argument("--radius", type=float, default=100.0)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--rare-label", type=int, choices=(-1, 1), default=1)
    train.add_argument("--inner-iters", type=int, default=200, help="FTRL inner solver iterations")
    train.add_argument("--train-file", required=True)
    train.add_argument("--test-file")
    train.add_argument("--split", type=float, default=0.7, help="train fraction when no --test-file")
    train.add_argument("--out", default="trace.csv")
    train.add_argument("--model-out")

    ev = sub.add_parser("eval", help="evaluate a saved model")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    _add_loss_flags(ev)

    gen = sub.add_parser("gen-synth", help="write a synthetic two-Gaussian dataset")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--pos-fraction", type=float, required=True)
    gen.add_argument("--separation", type=float, default=2.0)
    gen.add_argument("--noise", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="run the oracle and inequality checks")
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--seed", type=int, default=0)
    return parser


def _validate_loss_flags(args):
    if not 0 < args.beta <= 1:
        raise UsageError(f"--beta must lie in (0, 1], got {args.beta}")
    if args.k is not None and not 0 < args.k < 1:
        raise UsageError(f"--k must lie in (0, 1), got {args.k}")


def _cmd_train(args) -> int:
    _validate_loss_flags(args)
    for flag, val, ok in (
        ("--eta", args.eta, args.eta > 0),
        ("--buffer", args.buffer, args.buffer >= 1),
        ("--passes", args.passes, args.passes >= 1),
        ("--radius", args.radius, args.radius > 0),
        ("--split", args.split, 0 < args.split < 1),
        ("--inner-iters", args.inner_iters, args.inner_iters >= 1),
    ):
        if not ok:
            raise UsageError(f"invalid value for {flag}: {val}")
    data = read_libsvm(args.train_file)
    if args.test_file:
        train, test = data, read_libsvm(args.test_file)
    else:
        train, test = stratified_split(data, args.split, args.seed)
    measure = default_measure(args.loss, args.k, args.beta, train)
    config = ExperimentConfig(
        measure=measure,
        eta=args.eta,
        buffer_size=args.buffer,
        passes=args.passes,
        radius=args.radius,
        seed=args.seed,
        rare_label=args.rare_label,
        ftrl_inner_iters=args.inner_iters,
    )
    trace = run_experiment(train, test, args.solver, config)
    with open(args.out, "w") as fh:
        write_trace(trace.rows, fh)
    if args.model_out:
        with open(args.model_out, "w") as fh:
            save_model(trace.model, fh)
    last = trace.rows[-1]
    print(
        f"{args.solver} {args.loss}: epochs={last.epoch} time_ms={last.wall_clock_ms} "
        f"train_surrogate={last.train_surrogate:.6g} test_measure={last.test_measure:.6g}"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    _validate_loss_flags(args)
    with open(args.model) as fh:
        w = load_model(fh)
    data = read_libsvm(args.data)
    if w.size != data.dimension:
        if w.size < data.dimension:
            raise InvalidInput(f"model dimension {w.size} < data dimension {data.dimension}")
        data = type(data).from_points(data.points, dimension=w.size)
    measure = default_measure(args.loss, args.k, args.beta, data)
    raw = raw_measure(measure.kind, data.X, data.y, w, k=measure.k, beta=measure.beta)
    surrogate = loss_value(report_measure(measure), data.X, data.y, w)
    print(f"{raw.measure_name}={raw.value:.6g} surrogate={surrogate:.6g} support={raw.support}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        spec = SynthSpec(args.n, args.dim, args.pos_fraction, args.separation, args.noise, args.seed)
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None
    d = gen_synthetic(spec)
    with open(args.out, "w") as fh:
        write_libsvm(d, fh)
    print(f"wrote {len(d)} points ({d.n_pos} positive, dim {d.dimension}) to {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_all

    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    results = run_all(args.trials, args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {"train": _cmd_train, "eval": _cmd_eval, "gen-synth": _cmd_gen, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidInput, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
