"""Command-line front end: ``mockdepth {list,expand,verify,verify-all,eval,residual}``.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 a verification or residual check failed, 2 an evaluation error, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import identities as ids
from . import numerics as num
from .identities import SCHEMA_VERSION, rat_str
from .series import QSeries, SeriesUsageError, TruncationPolicy, UnsupportedSeriesError
from .special import CATALOG, SeriesId, build_series

EXIT_OK, EXIT_FAIL, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 64


def report_schema_version() -> str:
    return SCHEMA_VERSION


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dump(obj, out) -> None:
    out.write(json.dumps(obj, sort_keys=False) + "\n")


def _doc(**fields) -> dict:
    return {"schema": SCHEMA_VERSION, **fields}


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


# ---------------------------------------------------------------------------
# list / expand


def cmd_list(args, out) -> int:
    series = [
        {"name": name, "params": {k: v for k, v in defaults.items()}, "description": desc}
        for name, (_, defaults, desc) in sorted(CATALOG.items())
    ]
    records = [
        {"id": r.id, "lhs": r.lhs.label, "rhs": r.rhs.label, "clearing": r.clearing, "citation": r.citation}
        for r in ids.registry()
    ]
    _dump(_doc(series=series, identities=records, numeric_functions=sorted(_EVAL_FNS)), out)
    return EXIT_OK


def _parse_params(items: Sequence[str]) -> Tuple[Tuple[str, object], ...]:
    out = []
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out.append((k.strip(), v.strip()))
    return tuple(out)


def series_to_json(s: QSeries) -> Dict[str, Dict[str, str]]:
    table: Dict[str, Dict[str, str]] = {}
    for b in range(s.min_order, s.qmax + 1):
        d = s.coefficient(b)
        if d:
            table[str(b)] = {str(a): rat_str(d[a]) for a in sorted(d)}
    return table


def series_from_json(table: Dict[str, Dict[str, str]], qmax: int) -> QSeries:
    from fractions import Fraction

    terms = {}
    for b, d in table.items():
        for a, c in d.items():
            terms[(int(b), int(a))] = Fraction(c)
    return QSeries.from_terms(terms, qmax)


def _csv_coeff(c) -> str:
    return str(c) if isinstance(c, int) else rat_str(c)


def cmd_expand(args, out) -> int:
    if args.qmax < 0:
        raise UsageError("--qmax must be nonnegative")
    sid = SeriesId(args.series, _parse_params(args.param))
    if sid.name not in CATALOG:
        raise UsageError(f"unknown series {sid.name!r}; run `list` for the catalog ({', '.join(sorted(CATALOG))})")
    policy = TruncationPolicy(zeta_cap=args.zeta_cap, q_cap=max(args.qmax, 0))
    s = build_series(sid, args.qmax, policy).truncate_zeta(args.zeta_cap)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        if s.zeta_free():
            w.writerow(["q_exp", "coeff"])
            for b in range(min(s.min_order, 0), s.qmax + 1):
                w.writerow([b, _csv_coeff(s[b, 0])])
        else:
            w.writerow(["q_exp", "zeta_exp", "coeff"])
            for b, a, c in s.terms():
                w.writerow([b, a, _csv_coeff(c)])
        return EXIT_OK
    _dump(
        _doc(
            series=sid.name,
            params=dict(sid.params),
            qmax=s.qmax,
            zeta_cap=args.zeta_cap,
            min_order=s.min_order,
            coefficients=series_to_json(s),
        ),
        out,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _policy(args) -> TruncationPolicy:
    if args.B == 0:
        raise UsageError("--B must be positive")
    return TruncationPolicy(zeta_cap=args.A, q_cap=args.B, stability_margin=args.margin)


def _status_code(statuses: List[str]) -> int:
    if "ERROR" in statuses:
        return EXIT_ERROR
    if "FAIL" in statuses:
        return EXIT_FAIL
    return EXIT_OK


def _verify_one(rec_id: str, policy: TruncationPolicy, timing: bool) -> Tuple[dict, List[str]]:
    rep = ids.verify(rec_id, policy)
    doc = rep.to_json(timing=timing)
    statuses = [rep.status]
    if policy.stability_margin > 0:
        st = ids.stability_check(rec_id, policy)
        doc["stability"] = {k: v for k, v in st.to_json().items() if k not in ("schema", "id")}
        statuses.append(st.status)
    return doc, statuses


def cmd_verify(args, out) -> int:
    policy = _policy(args)
    ids.lookup(args.id)
    doc, statuses = _verify_one(args.id, policy, not args.no_timing)
    _dump(doc, out)
    return _status_code(statuses)


def cmd_verify_all(args, out) -> int:
    policy = _policy(args)
    reports = ids.verify_all(policy, jobs=args.jobs)
    statuses = []
    for rep in reports:
        doc = rep.to_json(timing=not args.no_timing)
        statuses.append(rep.status)
        if policy.stability_margin > 0:
            st = ids.stability_check(rep.id, policy)
            doc["stability"] = {k: v for k, v in st.to_json().items() if k not in ("schema", "id")}
            statuses.append(st.status)
        _dump(doc, out)
    return _status_code(statuses)


# ---------------------------------------------------------------------------
# eval / residual

# name -> (argument names, evaluator taking (_Eval, args))
_EVAL_FNS: Dict[str, Tuple[Tuple[str, ...], Callable]] = {
    "E": (("z",), lambda ev, a: ev.E(a["z"].real)),
    "R": (("u", "tau"), lambda ev, a: ev.R(a["u"], a["tau"])),
    "mu": (("u", "v", "tau"), lambda ev, a: ev.mu(a["u"], a["v"], a["tau"])),
    "M": (("u", "v", "tau"), lambda ev, a: ev.M(a["u"], a["v"], a["tau"])),
    "r_univ": (("alpha", "beta", "q"), lambda ev, a: ev.r_univ(a["alpha"], a["beta"], a["q"])),
    "u_univ": (("alpha", "beta", "q"), lambda ev, a: ev.u_univ(a["alpha"], a["beta"], a["q"])),
    "C": (("u", "v", "tau"), lambda ev, a: ev.C(a["u"], a["v"], a["tau"])),
    "completion_nu": (("tau",), lambda ev, a: ev.completion(1, a["tau"])),
    "completion_phi": (("tau",), lambda ev, a: ev.completion(2, a["tau"])),
    "completion_rho": (("tau",), lambda ev, a: ev.completion(3, a["tau"])),
    "f_hat": (("j", "z", "tau"), lambda ev, a: ev.f_hat(a["j"], a["z"], a["tau"])),
    "nu": (("q",), lambda ev, a: ev.mock(1, a["q"])),
    "phi": (("q",), lambda ev, a: ev.mock(2, a["q"])),
    "rho": (("q",), lambda ev, a: ev.mock(3, a["q"])),
    "loos_m10": (("q",), lambda ev, a: ev.loos(a["q"], 1)),
    "loos_m17": (("q",), lambda ev, a: ev.loos(a["q"], -1)),
    "ds": (("j", "zeta", "q"), lambda ev, a: ev.ds(a["j"], a["zeta"], a["q"])),
    "f": (("j", "zeta", "q"), lambda ev, a: ev.f(a["j"], a["zeta"], a["q"])),
}


def cmd_eval(args, out) -> int:
    if args.fn not in _EVAL_FNS:
        raise UsageError(f"unknown function {args.fn!r}; known: {', '.join(sorted(_EVAL_FNS))}")
    need, fn = _EVAL_FNS[args.fn]
    vals: Dict[str, object] = {}
    for name in need:
        raw = getattr(args, name)
        if raw is None:
            raise UsageError(f"--fn {args.fn} needs --{name}")
        if name == "j":
            if raw not in (1, 2, 3):
                raise UsageError("--j must be 1, 2 or 3")
            vals[name] = raw
        else:
            vals[name] = parse_complex(raw)
    if args.fn == "E" and vals["z"].imag != 0:
        raise UsageError("E takes a real argument")
    try:
        policy = num.NumericPolicy(target_tol=args.tol, precision=args.precision)
    except num.NumericError as exc:
        raise UsageError(str(exc)) from None
    ev = num.evaluate(lambda e: fn(e, vals), policy)
    shown = {k: (v if isinstance(v, int) else [v.real, v.imag]) for k, v in vals.items()}
    _dump(_doc(fn=args.fn, args=shown, tol=args.tol, value=[ev.value.real, ev.value.imag], diagnostics=ev.to_json()), out)
    return EXIT_OK


def cmd_residual(args, out) -> int:
    if args.check != "ramanujan":
        raise UsageError(f"unknown check {args.check!r}; known: ramanujan")
    points = list(num.DEFAULT_GRID)
    tol = args.tol
    if args.grid:
        try:
            with open(args.grid) as fh:
                points, grid_tol = num.load_grid(fh.read())
        except (OSError, json.JSONDecodeError, num.NumericError) as exc:
            raise UsageError(f"cannot read grid {args.grid!r}: {exc}") from None
        if tol is None:
            tol = grid_tol
    tol = 1e-9 if tol is None else tol
    rows = num.residual_report(points, tol)
    _dump(_doc(check=args.check, tol=tol, points=rows), out)
    return _status_code([r["status"] for r in rows])


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mockdepth", description="Exact q-series identities and numeric completions.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("list", help="series catalogue and identity registry")

    e = sub.add_parser("expand", help="expand a named series")
    e.add_argument("--series", required=True)
    e.add_argument("--qmax", type=int, default=TruncationPolicy.q_cap)
    e.add_argument("--zeta-cap", type=int, default=TruncationPolicy.zeta_cap)
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--param", action="append", metavar="KEY=VALUE", help="series parameter, e.g. beta=-q^2")

    for name in ("verify", "verify-all"):
        v = sub.add_parser(name, help="window-verify " + ("one identity" if name == "verify" else "every identity"))
        if name == "verify":
            v.add_argument("--id", required=True)
        else:
            v.add_argument("--jobs", type=int, default=1)
        v.add_argument("--A", type=int, default=TruncationPolicy.zeta_cap)
        v.add_argument("--B", type=int, default=TruncationPolicy.q_cap)
        v.add_argument("--margin", type=int, default=TruncationPolicy.stability_margin)
        v.add_argument("--no-timing", action="store_true", help="omit wall_time for byte-stable output")

    ev = sub.add_parser("eval", help="evaluate a numeric function")
    ev.add_argument("--fn", required=True)
    for name in ("z", "u", "v", "tau", "alpha", "beta", "q", "zeta"):
        ev.add_argument(f"--{name}")
    ev.add_argument("--j", type=int)
    ev.add_argument("--tol", type=float, default=1e-12)
    ev.add_argument("--precision", type=int, default=50)

    r = sub.add_parser("residual", help="numeric identity residuals on a sample grid")
    r.add_argument("--check", default="ramanujan")
    r.add_argument("--grid", help="JSON grid file")
    r.add_argument("--tol", type=float)
    return p


_COMMANDS = {
    "list": cmd_list,
    "expand": cmd_expand,
    "verify": cmd_verify,
    "verify-all": cmd_verify_all,
    "eval": cmd_eval,
    "residual": cmd_residual,
}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name in ("A", "B", "margin", "zeta_cap"):
            if getattr(args, name, 0) is not None and getattr(args, name, 0) < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be nonnegative")
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be positive")
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (SeriesUsageError, UnsupportedSeriesError) as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except num.NumericError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
