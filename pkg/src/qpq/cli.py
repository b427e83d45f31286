"""``qpq`` command line.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage error,
3 resource limit or unwritable output.
"""

import argparse
import logging
import os
import sys

from qpq import harness
from qpq.errors import InvalidParameterError, InvalidStateError, ResourceLimitError

log = logging.getLogger("qpq")

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (falls back to $QPQ_SEED, then 0)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", default=None,
                   help="report path; '-' for stdout; omitted = summary only")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tol-sigma", type=float, default=5.0,
                   help="statistical verdict band in standard errors")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def _state_args(p):
    p.add_argument("--preset", choices=harness.PURE_PRESETS, default=None)
    p.add_argument("--state-file", default=None,
                   help="JSON array of [re, im] pairs")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="qpq", description="Quantum private query simulator and analyzer")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", parents=[common], help="honest Protocol II / II' sessions")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--item", type=int, default=0)
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--loss", type=float, default=0.0)
    q.add_argument("--mode", choices=("II", "II'", "ii", "ii-prime"), default="II")
    q.add_argument("--max-rounds", type=int, default=1000)
    q.add_argument("--db", default=None, help="database as a 0/1 string of length n")

    b = sub.add_parser("bitshare", parents=[common], help="Protocol I bit sharing")
    b.add_argument("--pulses", type=int, default=None, help="L (default n+1)")
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--trials", type=int, default=10_000)

    bound = sub.add_parser("bound", help="information bounds")
    bsub = bound.add_subparsers(dest="which", required=True)
    h = bsub.add_parser("holevo", parents=[common])
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--method", choices=("analytic", "enumerate", "both"), default="enumerate")

    attack = sub.add_parser("attack", help="dishonest-Bob analyses")
    asub = attack.add_subparsers(dest="which", required=True)
    ap = asub.add_parser("pure", parents=[common])
    ap.add_argument("--n", type=int, default=3)
    _state_args(ap)
    ap.add_argument("--expect-pmin", type=float, default=None)
    ae = asub.add_parser("entangled", parents=[common])
    ae.add_argument("--n", type=int, required=True)
    ae.add_argument("--preset", choices=("ghz",), default="ghz")
    ae.add_argument("--strategy", choices=("z", "x"), required=True)
    ae.add_argument("--trials", type=int, default=10_000)
    asrch = asub.add_parser("search", parents=[common])
    asrch.add_argument("--n", type=int, default=3)
    asrch.add_argument("--samples", type=int, default=10_000)
    asrch.add_argument("--inject-legal", type=int, default=0)
    asrch.add_argument("--legal-radius", type=float, default=0.1)

    val = sub.add_parser("validate", help="sampling checks")
    vsub = val.add_subparsers(dest="which", required=True)
    mc = vsub.add_parser("mc", parents=[common])
    mc.add_argument("--n", type=int, default=3)
    mc.add_argument("--trials", type=int, default=100_000)
    mc.add_argument("--states", type=int, default=1, help="number of random states")
    _state_args(mc)
    return parser


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QPQ_SEED")
    return int(env) if env else 0


def _load_state(args):
    if args.state_file:
        return harness.load_state_file(args.state_file), os.path.basename(args.state_file)
    preset = args.preset or "random"
    return harness.preset_state(preset, args.n, _seed(args)), preset


def _dispatch(args):
    seed = _seed(args)
    cmd = args.command
    if cmd == "query":
        mode = "II'" if args.mode.lower() in ("ii'", "ii-prime") else "II"
        db = None
        if args.db is not None:
            if len(args.db) != args.n or set(args.db) - {"0", "1"}:
                raise InvalidParameterError("--db must be a 0/1 string of length n")
            db = [int(c) for c in args.db]
        return harness.run_query_experiment(
            args.n, args.item, args.trials, seed, mode=mode, loss_prob=args.loss,
            max_rounds=args.max_rounds, db=db, workers=args.workers,
            tol_sigma=args.tol_sigma)
    if cmd == "bitshare":
        pulses = args.pulses if args.pulses is not None else args.n + 1
        return harness.run_bitshare_experiment(pulses, args.trials, seed,
                                               workers=args.workers, tol_sigma=args.tol_sigma)
    if cmd == "bound":
        return harness.run_holevo_experiment(args.n, args.method, seed)
    if cmd == "attack" and args.which == "pure":
        state, label = _load_state(args)
        return harness.run_pure_attack_experiment(state, seed, expect=args.expect_pmin,
                                                  label=label)
    if cmd == "attack" and args.which == "entangled":
        return harness.run_entangled_experiment(
            args.n, args.strategy, args.trials, seed, preset=args.preset,
            workers=args.workers, tol_sigma=args.tol_sigma)
    if cmd == "attack" and args.which == "search":
        return harness.run_search_experiment(args.n, args.samples, seed,
                                             inject_legal=args.inject_legal,
                                             legal_radius=args.legal_radius)
    if cmd == "validate":
        state = None
        if args.state_file or args.preset:
            state, _ = _load_state(args)
        return harness.run_mc_experiment(args.n, args.trials, seed, states=args.states,
                                         state=state, tol_sigma=args.tol_sigma)
    raise AssertionError(cmd)


def cli_run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = _dispatch(args)
    except ResourceLimitError as exc:
        print(f"qpq: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidParameterError, InvalidStateError, ValueError) as exc:
        print(f"qpq: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qpq: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output is not None:
        try:
            harness.emit_report(report, args.format, args.output)
        except OSError as exc:
            print(f"qpq: cannot write report: {exc}", file=sys.stderr)
            return EXIT_RESOURCE
    print(report.summary())
    for v in report.verdicts:
        if not v.passed:
            log.warning("verdict failed: %s %s", v.name, v.detail)
    return EXIT_OK if report.passed else EXIT_VERDICT


def main():
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
