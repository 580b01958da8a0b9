"""Command-line driver.

    twogen generate --n 3 --trials 1000000 --seed 7
    twogen word --u xx --v x --n 10 --trials 100000
    twogen word --u x --v y --n 4 --exact
    twogen chain --n 40 --u x --v y --k 10 --trials 100000
    twogen orders --n 100 --r 4 --trials 10000
    twogen exact --n 5
    twogen series --n 10 --order 5

A table goes to stdout; ``--output`` additionally writes CSV or JSON.  The
exit status is 1 when a bound is exceeded beyond tolerance, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
import time
from pathlib import Path

from . import estimators as est
from .exact import exact_generation_probability, exact_word_identity_probability
from .query import trajectory_records, write_jsonl
from .words import make_unimodal

log = logging.getLogger("twogen")

CSV_FIELDS = ["experiment", "n", "parameters", "trials", "successes", "p_hat", "ci_low", "ci_high", "bound_or_series", "seed"]


def _row(experiment, n, parameters, e: est.Estimate, reference, seed):
    return {
        "experiment": experiment,
        "n": n,
        "parameters": parameters,
        "trials": e.trials,
        "successes": e.successes,
        "p_hat": repr(e.p_hat),
        "ci_low": repr(e.ci_low),
        "ci_high": repr(e.ci_high),
        "bound_or_series": repr(reference),
        "seed": seed,
    }


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "parser", "verbose")}


def _write(args, rows: list[dict], payload: dict) -> None:
    if not args.output:
        return
    path = Path(args.output)
    header = json.dumps(_config(args), sort_keys=True)
    if args.format == "json":
        text = json.dumps({"config": _config(args), "rows": rows, **payload}, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# config: {header}\n")
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    path.write_text(text)


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [[str(c) for c in r] for r in [headers] + rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class UsageError(ValueError):
    pass


def _word(args):
    try:
        return make_unimodal(args.u, args.v)
    except ValueError as exc:
        raise UsageError(f"{exc}; the satisfaction bound only covers w = u v^-1 with u != v positive") from None


def _usage(args, msg: str) -> int:
    args.parser.print_usage(sys.stderr)
    print(f"{args.parser.prog}: error: {msg}", file=sys.stderr)
    return 2


def cmd_generate(args) -> int:
    rep = est.estimate_generation(args.n, args.trials, args.seed, args.workers)
    e, k = rep.estimate, args.series_order
    series = est.series_value(args.n, k) if args.n >= 2 else None
    rows = [[args.n, e.trials, e.successes, _fmt(e.p_hat), f"[{_fmt(e.ci_low)}, {_fmt(e.ci_high)}]"]]
    headers = ["n", "trials", "successes", "p_hat", "95% CI"]
    if series is not None:
        headers += [f"series(k={k})", "deviation", "tolerance"]
        rows[0] += [_fmt(series), _fmt(rep.deviation(k)), _fmt(rep.tolerance(k))]
    print(_table(headers, rows))
    print()
    print(_table(["verdict", "count"], [[v, c] for v, c in rep.verdicts.items()]))
    _write(args, [_row("generate", args.n, f"series_order={k}", e, series, args.seed)],
           {"verdicts": rep.verdicts, "series": series})
    return 0


def cmd_word(args) -> int:
    w = _word(args)
    bound = est.satisfaction_bound(w.ell, args.n)
    rows, payload = [], {"word": w.w.text or "", "ell": w.ell, "bound": bound}
    params = f"u={args.u};v={args.v};ell={w.ell}"
    violation = False
    print(f"w = {w.w} (cyclically reduced), l = l(u) + l(v) = {w.ell}, bound = {_fmt(bound)}")
    if args.exact:
        try:
            p = exact_word_identity_probability(w, args.n)
        except ValueError as exc:
            return _usage(args, str(exc))
        print(_table(["n", "exact", "decimal", "bound"], [[args.n, p, p.decimal, _fmt(bound)]]))
        payload["exact"] = str(p)
        rows.append(_row("word-exact", args.n, params, est.Estimate(p.denominator, p.numerator), bound, None))
    if args.trials:
        rep = est.estimate_word_identity(w, args.n, args.trials, args.seed, args.workers)
        e = rep.estimate
        print(_table(["n", "trials", "successes", "p_hat", "95% CI", "bound", "violation"],
                     [[args.n, e.trials, e.successes, _fmt(e.p_hat), f"[{_fmt(e.ci_low)}, {_fmt(e.ci_high)}]",
                       _fmt(bound), rep.violation]]))
        rows.append(_row("word", args.n, params, e, bound, args.seed))
        violation = rep.violation
    _write(args, rows, payload)
    return 1 if violation else 0


def cmd_chain(args) -> int:
    w = _word(args)
    try:
        rep = est.run_event_chain_experiment(args.n, w, args.k, args.trials, args.seed,
                                             workers=args.workers, keep_logs=args.log_trials if args.log else 0)
    except ValueError as exc:
        return _usage(args, str(exc))
    rows, table = [], []
    for s in rep.steps:
        e = s.estimate
        table.append([s.i, s.attempts, s.held, _fmt(e.p_hat) if s.attempts else "-", _fmt(s.bound), s.exceeds()])
        if s.attempts:
            rows.append(_row(f"chain-step-{s.i}", args.n, f"u={args.u};v={args.v};k={rep.k}", e, s.bound, args.seed))
    print(f"w = {w.w}, l = {w.ell}, k = {rep.k}")
    print(_table(["i", "attempts", "E_i held", "P(E_i | earlier)", "l/(n-il)", "exceeded"], table))
    fc = rep.full_chain
    print(f"all of E_1..E_k: {fc.successes}/{fc.trials} = {_fmt(fc.p_hat)}; "
          f"product bound {_fmt(rep.product_bound)}; satisfaction bound {_fmt(rep.bound)}")
    print(f"coincidence-necessity violations: {rep.violations}; hits not flagged as coincidences: {rep.unflagged_hits}")
    rows.append(_row("chain-full", args.n, f"u={args.u};v={args.v};k={rep.k}", fc, rep.product_bound, args.seed))
    _write(args, rows, {"violations": rep.violations, "unflagged_hits": rep.unflagged_hits})
    if args.log:
        with open(args.log, "w") as fh:
            write_jsonl(trajectory_records(rep.logs), fh)
    return 1 if rep.violation else 0


def cmd_orders(args) -> int:
    try:
        rep = est.order_growth_experiment(args.n, args.r, args.trials, args.seed, c3=args.c3,
                                          verify=args.verify, workers=args.workers)
    except (ValueError, OverflowError) as exc:
        return _usage(args, str(exc))
    c, cert = rep.collisions, rep.certified
    print(_table(["n", "r", "words", "trials", "collisions", "freq", "union bound", "P(|G| >= 2^r-1) >="],
                 [[rep.n, rep.r, rep.words, c.trials, c.successes, _fmt(c.p_hat), _fmt(rep.bound), _fmt(cert.ci_low)]]))
    print(f"exact group orders checked on {rep.verified} collision-free trials, failures: {rep.verification_failures}")
    _write(args, [_row("orders", args.n, f"r={rep.r}", c, rep.bound, args.seed)],
           {"r": rep.r, "verified": rep.verified, "verification_failures": rep.verification_failures})
    return 1 if rep.violation or rep.verification_failures else 0


def cmd_exact(args) -> int:
    try:
        if args.u is not None or args.v is not None:
            if args.u is None or args.v is None:
                return _usage(args, "give both --u and --v")
            w = _word(args)
            p = exact_word_identity_probability(w, args.n)
            bound = est.satisfaction_bound(w.ell, args.n)
            print(_table(["n", "word", "exact", "decimal", "bound"], [[args.n, w.w, p, p.decimal, _fmt(bound)]]))
            _write(args, [_row("exact-word", args.n, f"u={args.u};v={args.v}",
                               est.Estimate(p.denominator, p.numerator), bound, None)],
                   {"probability": str(p), "decimal": p.decimal})
            return 0
        res = exact_generation_probability(args.n, allow_seven=args.allow_seven)
    except ValueError as exc:
        return _usage(args, str(exc))
    p = res.probability
    print(_table(["n", "probability", "decimal", "pairs"], [[args.n, p, p.decimal, p.denominator]]))
    print()
    print(_table(["verdict", "count"], [[v, c] for v, c in res.verdicts.items()]))
    series = est.series_value(args.n, 5)
    _write(args, [_row("exact-generation", args.n, "", est.Estimate(p.denominator, p.numerator), series, None)],
           {"probability": str(p), "decimal": p.decimal, "verdicts": res.verdicts})
    return 0


def cmd_series(args) -> int:
    try:
        values = [(k, est.series_value(args.n, k)) for k in range(args.order + 1)]
    except ValueError as exc:
        return _usage(args, str(exc))
    print(_table(["k", "value"], [[k, f"{v:.12g}"] for k, v in values]))
    if args.output:
        rows = [{"experiment": "series", "n": args.n, "parameters": f"order={k}", "trials": "", "successes": "",
                 "p_hat": "", "ci_low": "", "ci_high": "", "bound_or_series": repr(v), "seed": ""} for k, v in values]
        _write(args, rows, {"values": {str(k): v for k, v in values}})
    return 0


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twogen", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=None, seeded=True):
        p.add_argument("--n", type=_positive, required=True, help="degree")
        if trials is not False:
            p.add_argument("--trials", type=_positive if trials is None else int, default=trials)
        if seeded:
            p.add_argument("--seed", type=int, default=None, help="master seed (random if omitted, always echoed)")
            p.add_argument("--workers", type=_positive, default=est.default_workers(),
                           help="worker processes (default $TWOGEN_WORKERS or 1)")
        p.add_argument("--output", help="write machine-readable results here")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("generate", help="Monte Carlo probability that <x, y> contains A_n")
    common(p, trials=100_000)
    p.add_argument("--series-order", type=int, default=5, choices=range(6))
    p.set_defaults(func=cmd_generate, parser=p)

    p = sub.add_parser("word", help="probability that w = u v^-1 evaluates to 1")
    common(p, trials=0)
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--exact", action="store_true", help="exhaustive enumeration (n <= 5)")
    p.set_defaults(func=cmd_word, parser=p)

    p = sub.add_parser("chain", help="conditional event chain of the query model")
    common(p, trials=100_000)
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--k", type=_positive, default=None, help="chain length (default floor(n / 2l))")
    p.add_argument("--log", help="write trajectory records as JSON lines")
    p.add_argument("--log-trials", type=_positive, default=100)
    p.set_defaults(func=cmd_chain, parser=p)

    p = sub.add_parser("orders", help="collisions among positive words of length < r")
    common(p, trials=10_000)
    p.add_argument("--r", type=_positive, default=None, help="default floor(c3 sqrt(n ln n))")
    p.add_argument("--c3", type=float, default=0.5)
    p.add_argument("--verify", type=int, default=20, help="collision-free trials re-checked by exact order")
    p.set_defaults(func=cmd_orders, parser=p)

    p = sub.add_parser("exact", help="exact probabilities by enumeration")
    common(p, trials=False, seeded=False)
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--allow-seven", action="store_true", help="permit n = 7 (slow)")
    p.set_defaults(func=cmd_exact, parser=p)

    p = sub.add_parser("series", help="truncated asymptotic series")
    common(p, trials=False, seeded=False)
    p.add_argument("--order", type=int, default=5)
    p.set_defaults(func=cmd_series, parser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "seed", "absent") is None:
        args.seed = secrets.randbits(63)
    print(f"# twogen {args.command} config: {json.dumps(_config(args), sort_keys=True)}")
    t0 = time.perf_counter()
    try:
        status = args.func(args)
    except UsageError as exc:
        return _usage(args, str(exc))
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
    return status


if __name__ == "__main__":
    sys.exit(main())
