"""Command-line surface: one subcommand per theorem/figure reproduction.

Every run writes a versioned JSON report (endpoints as exact hex-floats
plus decimal display strings) and, for scans, an RFC-4180 CSV. Exit
codes: 0 success, 2 verification failure (the computation is sound but
the claim could not be certified), 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .continuation import (
    extended_nk_validate,
    lambda_derivatives_at,
    rate_at_zero_from_certificate,
)
from .errors import (
    BracketFailure,
    DomainError,
    LyapcertError,
    OracleFailure,
    UsageError,
    VerificationError,
)
from .hermite import PitchforkParams
from .homotopy import moment_lyapunov_pitchfork
from .intervals import Interval
from .ratefn import bracket_minimizer, rate_at_zero
from .shear import ShearParams

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_USAGE = 64

_DEFAULT_P_GRID = "0.3,0.5,0.7,0.9,1.2"
_DEFAULT_FIG_ALPHAS = [x / 4.0 for x in range(-4, 13)]  # -1.0, -0.75, .., 3.0
_DEFAULT_FIG_BS = [x / 2.0 for x in range(1, 21)]  # 0.5, 1.0, .., 10.0


# -- plumbing ------------------------------------------------------------


def _iv(text: str) -> Interval:
    """Outward-rounded interval from a decimal flag value."""
    try:
        return Interval.from_decimal(str(text))
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _decimal_list(text: str) -> list:
    items = [s for s in str(text).split(",") if s.strip()]
    if not items:
        raise UsageError("empty list flag")
    return [_iv(s.strip()) for s in items]


def _range_list(text: str) -> list:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError("range flag must be lo:hi:step")
    lo, hi, step = (_float(s) for s in parts)
    if step <= 0 or hi < lo:
        raise UsageError("range flag must have lo <= hi and step > 0")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [_iv(repr(round(lo + i * step, 12))) for i in range(n)]


def _enc(iv) -> dict | None:
    if iv is None:
        return None
    return {
        "lo": repr(iv.lo),
        "hi": repr(iv.hi),
        "lo_hex": iv.lo.hex(),
        "hi_hex": iv.hi.hex(),
    }


def _report(command: str, params: dict, enclosures: dict, t0: float,
            bounds: dict | None = None, oracle: dict | None = None,
            notes: list | None = None, status: str = "ok") -> dict:
    rep = {
        "schema_version": 1,
        "command": command,
        "status": status,
        "params": params,
        "enclosures": enclosures,
        "wall_time_s": time.time() - t0,
        "code_version": __version__,
    }
    if bounds is not None:
        rep["bounds"] = bounds
    if oracle is not None:
        rep["oracle"] = oracle
    if notes:
        rep["notes"] = notes
    return rep


def validate_report(report: dict) -> None:
    """Validate a report against the shipped schema (no-op when the
    optional jsonschema dependency is missing)."""
    try:
        import jsonschema
    except ImportError:  # pragma: no cover - optional dependency
        return
    from importlib import resources

    schema = json.loads(
        resources.files("lyapcert.schemas")
        .joinpath("report.schema.json")
        .read_text()
    )
    jsonschema.validate(report, schema)


def _write_json(path: str | None, report: dict) -> None:
    validate_report(report)
    text = json.dumps(report, indent=2, allow_nan=False)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LYAPCERT_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items: list) -> list:
    """Order-preserving map, optionally over a process pool."""
    n = _workers()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- pitchfork commands --------------------------------------------------


def _pitchfork_evaluator(alpha: Interval, sigma: Interval):
    def ev(p):
        pr = PitchforkParams(alpha=alpha, sigma=sigma,
                             p=Interval._coerce(p))
        return moment_lyapunov_pitchfork(pr).lam

    return ev


def pitchfork_rate_result(alpha: Interval, sigma: Interval,
                          p_grid: list, bracket_tol: float = 1e-3,
                          target_width: float = 1e-6):
    """(I0, bracket, evidence dict) for one pitchfork parameter set."""
    ev = _pitchfork_evaluator(alpha, sigma)
    cache: dict = {}
    bracket = bracket_minimizer(ev, [g.mid for g in p_grid],
                                tol=bracket_tol, cache=cache)
    I0 = rate_at_zero(ev, bracket, cache=cache, target_width=target_width)
    return I0, bracket, cache


def cmd_pitchfork_rate(args) -> int:
    t0 = time.time()
    alpha, sigma = _iv(args.alpha), _iv(args.sigma)
    p_grid = _decimal_list(args.p_grid)
    I0, bracket, _ = pitchfork_rate_result(
        alpha, sigma, p_grid, bracket_tol=args.bracket_tol,
        target_width=args.target_width)
    report = _report(
        "pitchfork-rate",
        {"alpha": args.alpha, "sigma": args.sigma,
         "p_grid": [g.mid for g in p_grid]},
        {"I0": _enc(I0), "minimizer_bracket": _enc(bracket)},
        t0,
    )
    _write_json(args.out, report)
    if args.csv:
        _write_csv(args.csv, ["alpha", "I0_lo", "I0_hi"],
                   [[args.alpha, repr(I0.lo), repr(I0.hi)]])
    return EXIT_OK


def _scan_alpha_task(task):
    alpha_text, sigma_text, grid_text, tol, width = task
    try:
        I0, bracket, _ = pitchfork_rate_result(
            _iv(alpha_text), _iv(sigma_text), _decimal_list(grid_text),
            bracket_tol=tol, target_width=width)
        return alpha_text, I0, bracket, None
    except LyapcertError as exc:
        return alpha_text, None, None, f"{type(exc).__name__}: {exc}"


def _alpha_list(args) -> list:
    if args.alpha_list:
        return _decimal_list(args.alpha_list)
    if args.alpha_range:
        return _range_list(args.alpha_range)
    raise UsageError("one of --alpha-list/--alpha-range is required")


def cmd_pitchfork_scan(args) -> int:
    t0 = time.time()
    alphas = _alpha_list(args)
    tasks = [(repr(a.mid), args.sigma, args.p_grid,
              args.bracket_tol, args.target_width) for a in alphas]
    results = _pmap(_scan_alpha_task, tasks)
    rows, records, failed = [], [], False
    for alpha_text, I0, bracket, err in results:
        records.append({
            "enclosures": {"I0": _enc(I0),
                           "minimizer_bracket": _enc(bracket)},
            "alpha": alpha_text,
            "error": err,
        })
        if err is None:
            rows.append([alpha_text, repr(I0.lo), repr(I0.hi)])
        else:
            failed = True
    status = "verification-failed" if failed else "ok"
    report = _report(
        "pitchfork-scan",
        {"sigma": args.sigma, "alphas": [r[0] for r in results]},
        {"rows": records},
        t0, status=status,
    )
    _write_json(args.out, report)
    if args.csv:
        _write_csv(args.csv, ["alpha", "I0_lo", "I0_hi"], rows)
    return EXIT_VERIFICATION if failed else EXIT_OK


def cmd_pitchfork_minimum(args) -> int:
    t0 = time.time()
    alphas = _decimal_list(args.alphas)
    if len(alphas) != 3:
        raise UsageError("--alphas needs exactly three values a1,a2,a3")
    tasks = [(repr(a.mid), args.sigma, args.p_grid,
              args.bracket_tol, args.target_width) for a in alphas]
    results = _pmap(_scan_alpha_task, tasks)
    encs, notes = {}, []
    vals = []
    for alpha_text, I0, bracket, err in results:
        encs[f"I0[{alpha_text}]"] = _enc(I0)
        if err is not None:
            raise VerificationError(f"alpha={alpha_text}: {err}")
        vals.append(I0)
    certified = (vals[1].hi < vals[0].lo) and (vals[1].hi < vals[2].lo)
    status = "ok" if certified else "verification-failed"
    if certified:
        lo, hi = alphas[0].lo, alphas[2].hi
        encs["minimum_alpha_bracket"] = _enc(Interval(lo, hi))
        notes.append("strict interior minimum certified")
    report = _report(
        "pitchfork-minimum",
        {"sigma": args.sigma, "alphas": [repr(a.mid) for a in alphas]},
        encs, t0, notes=notes, status=status,
    )
    _write_json(args.out, report)
    if not certified:
        print("strict minimum NOT certified", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


# -- shear commands ------------------------------------------------------


def shear_validate_result(alpha: Interval, b: Interval, sigma: Interval,
                          p_lo: Interval, p_hi: Interval, N: int, K: int,
                          eta: float):
    """(certificate, lam0, dlam0, d2lam0, I0 or None, bracket or None,
    note or None) for one shear parameter set."""
    params = ShearParams(alpha=alpha, b=b, sigma=sigma, p=Interval(0.0))
    cert = extended_nk_validate(params, (p_lo, p_hi), N=N, K=K, eta=eta)
    lam0, dlam0, d2lam0 = lambda_derivatives_at(cert, Interval(0.0))
    I0 = bracket = note = None
    try:
        I0, bracket = rate_at_zero_from_certificate(cert)
    except BracketFailure as exc:
        note = f"rate bracketing failed: {exc}"
    return cert, lam0, dlam0, d2lam0, I0, bracket, note


def cmd_shear_validate(args) -> int:
    t0 = time.time()
    alpha, b, sigma = _iv(args.alpha), _iv(args.b), _iv(args.sigma)
    p_lo, p_hi = _iv(args.p_min), _iv(args.p_max)
    if p_lo.lo >= p_hi.hi:
        raise UsageError("--p-min must be below --p-max")
    cert, lam0, dlam0, d2lam0, I0, bracket, note = shear_validate_result(
        alpha, b, sigma, p_lo, p_hi, args.N, args.K, args.eta)
    report = _report(
        "shear-validate",
        {"alpha": args.alpha, "b": args.b, "sigma": args.sigma,
         "p_min": args.p_min, "p_max": args.p_max,
         "N": args.N, "K": args.K, "eta": args.eta},
        {"Lambda0": _enc(lam0), "dLambda0": _enc(dlam0),
         "d2Lambda0": _enc(d2lam0), "I0": _enc(I0),
         "minimizer_bracket": _enc(bracket)},
        t0,
        bounds={"Y": cert.Y, "Z1": cert.Z1, "Z2": cert.Z2, "r": cert.r,
                "positivity": cert.positivity},
        notes=[note] if note else None,
    )
    _write_json(args.out, report)
    return EXIT_OK


def _scan_b_task(task):
    (b_text, alpha_text, sigma_text, p_min, p_max, N, K, eta) = task
    try:
        cert, lam0, dlam0, d2lam0, I0, bracket, note = shear_validate_result(
            _iv(alpha_text), _iv(b_text), _iv(sigma_text),
            _iv(p_min), _iv(p_max), N, K, eta)
        return b_text, lam0, dlam0, d2lam0, I0, note, None
    except LyapcertError as exc:
        return b_text, None, None, None, None, None, \
            f"{type(exc).__name__}: {exc}"


def cmd_shear_scan(args) -> int:
    t0 = time.time()
    bs = _decimal_list(args.b_list)
    tasks = [(repr(b.mid), args.alpha, args.sigma, args.p_min, args.p_max,
              args.N, args.K, args.eta) for b in bs]
    results = _pmap(_scan_b_task, tasks)
    rows, records, failed = [], [], False
    for b_text, lam0, dlam0, d2lam0, I0, note, err in results:
        positive_le = (err is None and dlam0.lo > 0.0)
        records.append({
            "enclosures": {"Lambda0": _enc(lam0), "dLambda0": _enc(dlam0),
                           "d2Lambda0": _enc(d2lam0), "I0": _enc(I0)},
            "b": b_text,
            "positive_lyapunov_exponent": positive_le,
            "note": note,
            "error": err,
        })
        if err is None:
            rows.append([
                b_text,
                repr(I0.lo) if I0 is not None else "",
                repr(I0.hi) if I0 is not None else "",
                repr(dlam0.lo), repr(dlam0.hi),
                repr(d2lam0.lo), repr(d2lam0.hi),
                int(positive_le),
            ])
        else:
            failed = True
    status = "verification-failed" if failed else "ok"
    report = _report(
        "shear-scan",
        {"alpha": args.alpha, "sigma": args.sigma,
         "b_list": [r[0] for r in results],
         "p_min": args.p_min, "p_max": args.p_max,
         "N": args.N, "K": args.K, "eta": args.eta},
        {"rows": records}, t0, status=status,
    )
    _write_json(args.out, report)
    if args.csv:
        _write_csv(
            args.csv,
            ["b", "I0_lo", "I0_hi", "dLambda0_lo", "dLambda0_hi",
             "d2Lambda0_lo", "d2Lambda0_hi", "positive_le"],
            rows)
    return EXIT_VERIFICATION if failed else EXIT_OK


# -- oracle and figure data ----------------------------------------------


def cmd_oracle(args) -> int:
    from . import oracle

    t0 = time.time()
    alpha, sigma = float(args.alpha), float(args.sigma)
    out: dict = {}
    if args.model == "pitchfork":
        value, err = oracle.fk_lambda_pitchfork(alpha, sigma)
        sample = oracle.simulate_ftle_pitchfork(
            alpha, sigma, t=args.t, count=args.count, dt=args.dt,
            seed=args.seed)
    elif args.model == "shear":
        bb = float(args.b)
        value, err = oracle.fk_lambda_shear(alpha, bb, sigma)
        sample = oracle.simulate_ftle_shear(
            alpha, bb, sigma, t=args.t, count=args.count, dt=args.dt,
            seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown model {args.model!r}")
    out["fk_lambda"] = {"value": value, "err_est": err}
    out["ftle"] = {
        "t": sample.t, "count": len(sample.values), "dt": sample.dt,
        "seed": sample.seed, "mean": sample.mean, "stderr": sample.stderr,
        "t_var": sample.t * float(sample.std) ** 2,
        "fraction_positive": float((sample.values > 0).mean()),
    }
    if args.p is not None:
        est, ci = oracle.empirical_mle(sample, float(args.p),
                                       seed=args.seed)
        out["empirical_mle"] = {"p": float(args.p), "estimate": est,
                                "ci99": list(ci)}
    report = _report(
        "oracle",
        {"model": args.model, "alpha": args.alpha, "b": args.b,
         "sigma": args.sigma, "t": args.t, "count": args.count,
         "dt": args.dt, "seed": args.seed},
        {}, t0, oracle=out,
    )
    _write_json(args.out, report)
    return EXIT_OK


def cmd_figure_data(args) -> int:
    from . import oracle

    t0 = time.time()
    which = args.which
    if which == "fig2":
        alphas = (_alpha_list(args) if (args.alpha_list or args.alpha_range)
                  else [_iv(repr(a)) for a in _DEFAULT_FIG_ALPHAS])
        rows = []
        for a in alphas:
            value, _ = oracle.fk_lambda_pitchfork(a.mid, float(args.sigma))
            rows.append([repr(a.mid), repr(value)])
        _write_csv(args.out, ["alpha", "lambda_fk"], rows)
    elif which == "fig1":
        alphas = (_alpha_list(args) if (args.alpha_list or args.alpha_range)
                  else [_iv(repr(a)) for a in _DEFAULT_FIG_ALPHAS])
        tasks = [(repr(a.mid), args.sigma, args.p_grid,
                  args.bracket_tol, args.target_width) for a in alphas]
        results = _pmap(_scan_alpha_task, tasks)
        rows = []
        for alpha_text, I0, _, err in results:
            if err is not None:
                raise VerificationError(f"alpha={alpha_text}: {err}")
            rows.append([alpha_text, repr(I0.lo), repr(I0.hi)])
        _write_csv(args.out, ["alpha", "I0_lo", "I0_hi"], rows)
    elif which == "fig4":
        bs = (_decimal_list(args.b_list) if args.b_list
              else [_iv(repr(b)) for b in _DEFAULT_FIG_BS])
        tasks = [(repr(b.mid), args.alpha, args.sigma, args.p_min,
                  args.p_max, args.N, args.K, args.eta) for b in bs]
        results = _pmap(_scan_b_task, tasks)
        rows, failed = [], False
        for b_text, lam0, dlam0, d2lam0, I0, note, err in results:
            if err is not None:
                failed = True
                rows.append([b_text] + [""] * 7)
                continue
            rows.append([
                b_text,
                repr(I0.lo) if I0 is not None else "",
                repr(I0.hi) if I0 is not None else "",
                repr(dlam0.lo), repr(dlam0.hi),
                repr(d2lam0.lo), repr(d2lam0.hi),
                int(dlam0.lo > 0.0),
            ])
        _write_csv(
            args.out,
            ["b", "I0_lo", "I0_hi", "dLambda0_lo", "dLambda0_hi",
             "d2Lambda0_lo", "d2Lambda0_hi", "positive_le"],
            rows)
        if failed:
            return EXIT_VERIFICATION
    else:
        raise UsageError("--which must be one of fig1, fig2, fig4")
    print(f"wrote {args.out} ({time.time() - t0:.1f}s)")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _add_pitchfork_shared(sp):
    sp.add_argument("--sigma", default="1")
    sp.add_argument("--p-grid", default=_DEFAULT_P_GRID,
                    help="comma-separated seed grid for the minimizer")
    sp.add_argument("--bracket-tol", type=float, default=1e-3)
    sp.add_argument("--target-width", type=float, default=1e-6)


def _add_shear_shared(sp):
    sp.add_argument("--sigma", default="1")
    sp.add_argument("--p-min", default="-4")
    sp.add_argument("--p-max", default="6")
    sp.add_argument("--N", type=int, default=60)
    sp.add_argument("--K", type=int, default=80)
    sp.add_argument("--eta", type=float, default=1.01)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lyapcert", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("pitchfork-rate",
                        help="certified I(0) for the pitchfork model")
    sp.add_argument("--alpha", required=True)
    _add_pitchfork_shared(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_pitchfork_rate)

    sp = sub.add_parser("pitchfork-scan",
                        help="certified I(0) over an alpha grid")
    sp.add_argument("--alpha-list", default=None)
    sp.add_argument("--alpha-range", default=None,
                    help="lo:hi:step decimal range")
    _add_pitchfork_shared(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_pitchfork_scan)

    sp = sub.add_parser("pitchfork-minimum",
                        help="certify a strict interior minimum of I(0)")
    sp.add_argument("--alphas", required=True,
                    help="three comma-separated alpha values")
    _add_pitchfork_shared(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_pitchfork_minimum)

    sp = sub.add_parser("shear-validate",
                        help="parameter-uniform certificate for the "
                             "shear model and derived quantities")
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--b", default="5")
    _add_shear_shared(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_shear_validate)

    sp = sub.add_parser("shear-scan",
                        help="certified triples over a list of b values")
    sp.add_argument("--b-list", required=True)
    sp.add_argument("--alpha", default="1")
    _add_shear_shared(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_shear_scan)

    sp = sub.add_parser("oracle", help="non-rigorous cross-checks")
    sp.add_argument("--model", choices=["pitchfork", "shear"],
                    required=True)
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--b", default="5")
    sp.add_argument("--sigma", default="1")
    sp.add_argument("--t", type=float, default=100.0)
    sp.add_argument("--count", type=int, default=10_000)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--p", default=None,
                    help="also report the empirical moment estimate at p")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("figure-data",
                        help="CSV series for the survey figures")
    sp.add_argument("--which", choices=["fig1", "fig2", "fig4"],
                    required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--alpha-list", default=None)
    sp.add_argument("--alpha-range", default=None)
    sp.add_argument("--b-list", default=None)
    sp.add_argument("--p-grid", default=_DEFAULT_P_GRID)
    sp.add_argument("--bracket-tol", type=float, default=1e-3)
    sp.add_argument("--target-width", type=float, default=1e-6)
    sp.add_argument("--sigma", default="1")
    sp.add_argument("--p-min", default="-1")
    sp.add_argument("--p-max", default="3")
    sp.add_argument("--N", type=int, default=60)
    sp.add_argument("--K", type=int, default=48)
    sp.add_argument("--eta", type=float, default=1.01)
    sp.set_defaults(func=cmd_figure_data)

    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VerificationError, BracketFailure, OracleFailure) as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_VERIFICATION
    except LyapcertError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
