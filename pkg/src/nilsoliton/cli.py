"""Command line front end: ``nilsoliton analyze`` and ``nilsoliton sweep``.

Exit codes: 0 on success, 1 when the input is not a nilpotent Lie bracket,
2 on I/O, parse or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .algebra_core import Bracket
from .bracket_dsl import ParseError, parse, parse_value, render
from .families import (FAMILIES, HYPOTHESIS_NOTE, NilsolitonReport, analyze, certificate,
                       family)
from .strata import EigenvalueType

SCHEMA = "nilsoliton-report/1"
EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class InputError(Exception):
    """Bad file, parse failure or inconsistent flags (exit code 2)."""


# -- serialization ------------------------------------------------------------


def _plain(x):
    """Turn report values into JSON-ready Python objects, keeping key order."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _float_text(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return json.dumps(str(v))
    return format(v, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits, in insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        return _float_text(obj)
    return json.dumps(obj)


def report_dict(rep: NilsolitonReport) -> dict:
    b = rep.bracket
    v = rep.validation
    out: dict = {
        "name": rep.name,
        "t": rep.t,
        "dim": b.dim,
        "bracket": render(b),
        "validation": {"jacobi_ok": v.jacobi_ok, "nilpotent": v.nilpotent, "step": v.step,
                       "jacobi_residual": v.jacobi_residual},
    }
    cert = rep.certificate
    if cert is not None:
        out["nilsoliton"] = {"is_nilsoliton": cert.is_nilsoliton, "c": cert.c,
                             "derivation_residual": cert.residual}
    ws = rep.weight_system
    if ws is not None:
        out["weights"] = {"ordering": ws.ordering, "support": [list(k) for k in ws.order],
                          "gram": [list(r) for r in ws.gram]}
    if rep.payne is not None:
        out["payne"] = {"holds": rep.payne.holds, "nu": rep.payne.nu,
                        "deviation": rep.payne.deviation}
    es = rep.einstein
    if es is not None:
        out["einstein_system"] = {
            "nu": es.nu, "particular": list(es.particular),
            "null_dimension": len(es.null_basis),
            "convex_solution": None if es.convex_solution is None else list(es.convex_solution)}
    if rep.beta is not None:
        out["beta"] = rep.beta
        out["beta_exact"] = None if rep.beta_exact is None else list(rep.beta_exact)
        out["nu"] = rep.nu
        et = rep.eigen_type
        out["eigenvalue_type"] = str(et) if isinstance(et, EigenvalueType) else et
    if rep.two_step_type is not None:
        ts: dict = {"type": list(rep.two_step_type)}
        if rep.pfaffian is not None:
            ts["pfaffian_form"] = str(rep.pfaffian)
        if rep.linear_factors is not None:
            ts["linear_factor_count"] = len(rep.linear_factors)
            ts["linear_factors"] = [{"coefficients": list(f.coeffs), "residual": f.residual}
                                    for f in rep.linear_factors]
        if rep.trace_max is not None:
            ts["trace4_sphere_max"] = {"max": rep.trace_max.max, "argmax": rep.trace_max.argmax,
                                       "certified": rep.trace_max.certified}
        out["two_step"] = ts
    d = rep.degeneration
    if d is not None:
        out["degeneration"] = {
            "target": d.target_name,
            "A": None if d.direction is None else list(d.direction.A),
            "limit_verified": d.limit_verified,
            "target_nilsoliton": d.target_nilsoliton,
            "same_stratum": d.same_stratum,
            "target_linear_factor_count": d.target_factor_count,
            "separated": d.separated,
            "failure": d.failure}
    f = rep.flow
    if f is not None:
        out["flow"] = {"converged_to_nilsoliton": f.converged_to_nilsoliton,
                       "residual": f.residual, "iterations": f.iterations,
                       "final_step": f.step,
                       "energy_initial": f.energy_initial, "energy_final": f.energy_final,
                       "limit": {",".join(map(str, k)): c for k, c in f.limit.items()},
                       "surviving": [list(k) for k, alive in f.support_pattern().items() if alive]}
    out["verdict"] = rep.verdict
    out["notes"] = list(rep.notes)
    return _plain(out)


def summary_row(rep: NilsolitonReport) -> dict:
    cert = rep.certificate
    return _plain({
        "name": rep.name,
        "t": rep.t,
        "c": None if cert is None else cert.c,
        "nilsoliton": None if cert is None else cert.is_nilsoliton,
        "nu": rep.nu,
        "linear_factor_count": rep.factor_count,
        "M_t": None if rep.trace_max is None else rep.trace_max.max,
        "verdict": rep.verdict})


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow(["" if v is None else _float_text(v) if isinstance(v, float) else v
                    for v in r.values()])
    return buf.getvalue()


def text_report(rep: NilsolitonReport) -> str:
    d = report_dict(rep)
    lines = [f"algebra {d['name']}" + ("" if d["t"] is None else f" (t = {d['t']})")]
    lines.append(d["bracket"])
    v = d["validation"]
    lines.append(f"jacobi: {v['jacobi_ok']}  nilpotent: {v['nilpotent']}  step: {v['step']}")
    if "nilsoliton" in d:
        n = d["nilsoliton"]
        lines.append(f"nilsoliton: {n['is_nilsoliton']}  c = {n['c']:.12g}  "
                     f"derivation residual = {n['derivation_residual']:.3g}")
    if "weights" in d:
        lines.append(f"U ({d['weights']['ordering']} order):")
        lines.extend("  " + " ".join(f"{x:3d}" for x in row) for row in d["weights"]["gram"])
    if "payne" in d:
        lines.append(f"payne: {d['payne']['holds']}  deviation = {d['payne']['deviation']:.3g}")
    if "beta" in d:
        shown = d["beta_exact"] if d["beta_exact"] is not None else [f"{x:.6g}" for x in d["beta"]]
        lines.append(f"beta = ({', '.join(map(str, shown))})  nu = {d['nu']:.12g}")
        lines.append(f"eigenvalue type: {d['eigenvalue_type']}")
    ts = d.get("two_step")
    if ts:
        lines.append(f"type: {tuple(ts['type'])}")
        if "pfaffian_form" in ts:
            lines.append(f"pfaffian form: {ts['pfaffian_form']}")
        if "linear_factor_count" in ts:
            lines.append(f"real linear factors: {ts['linear_factor_count']}")
        if "trace4_sphere_max" in ts:
            lines.append(f"max of tr J(w)^4 on the unit sphere: {ts['trace4_sphere_max']['max']:.12g}")
    dg = d.get("degeneration")
    if dg:
        lines.append(f"degeneration to {dg['target']}: A = ({', '.join(map(str, dg['A'] or []))})  verified: {dg['limit_verified']}")
        lines.append(f"  target nilsoliton: {dg['target_nilsoliton']}  same stratum: "
                     f"{dg['same_stratum']}  separated: {dg['separated']}")
        if dg["failure"]:
            lines.append(f"  failure: {dg['failure']}")
    fl = d.get("flow")
    if fl:
        lines.append(f"flow: converged {fl['converged_to_nilsoliton']} after {fl['iterations']} "
                     f"steps, residual {fl['residual']:.3g}, energy {fl['energy_initial']:.6g} "
                     f"-> {fl['energy_final']:.6g}")
        lines.append(f"  surviving terms: {fl['surviving']}")
    lines.append(f"verdict: {d['verdict']}")
    lines.extend(f"note: {n}" for n in d["notes"])
    return "\n".join(lines) + "\n"


# -- argument handling ----------------------------------------------------------


def _params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"--param expects name=value, got {item!r}")
        try:
            out[name.strip()] = parse_value(value.strip())
        except ValueError:
            raise InputError(f"bad value in --param {item!r}") from None
    return out


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _parse_file(path: str, params: dict) -> Bracket:
    text = _read(path)
    try:
        return parse(text, params)
    except ParseError as exc:
        raise InputError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _load_target(spec: str, params: dict) -> tuple[str, Bracket]:
    kind, sep, rest = spec.partition(":")
    if kind == "family" and sep:
        if rest not in FAMILIES:
            raise InputError(f"unknown family {rest!r}")
        return f"{rest}(t={params.get('t')})", family(rest, _need_t(params))
    if kind == "file" and sep:
        return rest, _parse_file(rest, params)
    raise InputError("--degeneration-target expects family:NAME or file:PATH")


def _need_t(params: dict):
    if "t" not in params:
        raise InputError("built-in families need --param t=VALUE")
    return params["t"]


def _hash(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def _document(args, input_hash: str, body_key: str, body) -> dict:
    return {"schema": SCHEMA, "tool_version": __version__, "input_hash": input_hash,
            "seed": args.seed, "tolerances": {"nilsoliton": args.tol},
            "ordering": args.ordering, body_key: body}


def _emit(text: str, out: str | None):
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    params = _params(args.param)
    if (args.path is None) == (args.family is None):
        raise InputError("give either an input file or --family")
    if args.family:
        t = _need_t(params)
        b = family(args.family, t)
        name, source = args.family, f"family:{args.family}"
    else:
        b = _parse_file(args.path, params)
        t = params.get("t")
        name, source = Path(args.path).name, _read(args.path)
    target = _load_target(args.degeneration_target, params) if args.degeneration_target else None
    rep = analyze(b, name, t, ordering=args.ordering, tol=args.tol, seed=args.seed,
                  target=target, flow=args.flow)
    if args.family in ("mu_tilde", "mu_bar") and float(t) <= 1:
        rep.notes.append(HYPOTHESIS_NOTE)
    h = _hash(source, json.dumps(sorted(params.items()), default=str),
              args.degeneration_target or "")
    if args.format == "json":
        text = dumps(_document(args, h, "reports", [report_dict(rep)])) + "\n"
    elif args.format == "csv":
        text = _csv([summary_row(rep)])
    else:
        text = text_report(rep)
    _emit(text, args.out)
    valid = rep.validation.jacobi_ok and rep.validation.nilpotent
    if not valid:
        print("input is not a nilpotent Lie bracket", file=sys.stderr)
    return EXIT_OK if valid else EXIT_INVALID


def _grid(start, stop, steps: int) -> list:
    if steps < 1:
        raise InputError("--steps must be at least 1")
    if steps == 1:
        return [start]
    return [start + (stop - start) * Fraction(i, steps - 1) if isinstance(start - stop, Fraction)
            else start + (stop - start) * i / (steps - 1) for i in range(steps)]


def cmd_sweep(args) -> int:
    try:
        start, stop = (parse_value(v) for v in args.range)
    except ValueError:
        raise InputError(f"bad --range {args.range}") from None
    rows = []
    for t in _grid(start, stop, args.steps):
        rep = certificate(args.family, t, seed=args.seed, tol=args.tol, ordering=args.ordering)
        rows.append(summary_row(rep))
    if args.format == "json":
        h = _hash(f"sweep:{args.family}", *map(str, args.range), str(args.steps))
        text = dumps(_document(args, h, "rows", rows)) + "\n"
    elif args.format == "csv":
        text = _csv(rows)
    else:
        text = "".join(" ".join(f"{k}={v}" for k, v in r.items()) + "\n" for r in rows)
    _emit(text, args.out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_IO)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--ordering", choices=["lex", "declared"], default="lex")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.add_argument("--out", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nilsoliton", description="Nilsoliton and stratum invariants of nilpotent Lie brackets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analyze one bracket")
    a.add_argument("path", nargs="?", help=".lie file")
    a.add_argument("--family", choices=sorted(FAMILIES))
    a.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    a.add_argument("--degeneration-target", metavar="family:NAME|file:PATH")
    a.add_argument("--flow", action="store_true", help="run the normalized soliton flow")
    _common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="tabulate invariants along a built-in curve")
    s.add_argument("--family", choices=sorted(FAMILIES), required=True)
    s.add_argument("--range", nargs=2, required=True, metavar=("START", "STOP"))
    s.add_argument("--steps", type=int, required=True)
    _common(s)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

