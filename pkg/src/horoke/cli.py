"""Command-line front end.

Inputs are catalog ids (--id, repeatable, or --all) or datum files (--file)
in the catalog TOML schema. Reports are text, JSON (schema 1) or CSV for
grid solutions. Exit codes: 0 exists/computed, 3 not_exists, 4 boundary,
2 usage, 10 and above for errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, is_dataclass
from fractions import Fraction
from typing import Any, Sequence

import mpmath
import numpy as np
import tomli

from . import __version__, catalog, criteria
from .catalog import CatalogError, ManifoldEntry, UnknownId
from .geometry import GeometryError
from .quadrature import HighPrecisionScalar, QuadratureError, WeightSpec
from .rational import RationalParseError, parse_rational
from .roots import RealRoot
from .rootdata import DatumError

SCHEMA = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_EXISTS = 3
EXIT_BOUNDARY = 4
EXIT_PARSE = 10
EXIT_VALIDATION = 11
EXIT_UNKNOWN_ID = 12
EXIT_NUMERICAL = 13
EXIT_CRITERIA = 14
EXIT_INTERNAL = 15

VERDICT_CODES = {"exists": EXIT_OK, "not_exists": EXIT_NOT_EXISTS, "boundary": EXIT_BOUNDARY}
COMMANDS = (
    "check-ke",
    "rlb",
    "solve-soliton",
    "solve-mabuchi",
    "power-mabuchi",
    "coupled-search",
    "check-general",
    "solve-ma",
    "catalog",
    "validate",
)


class UsageError(Exception):
    code = EXIT_USAGE


class UnknownFlag(UsageError):
    pass


class ParseError(Exception):
    code = EXIT_PARSE

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


class ValidationError(Exception):
    code = EXIT_VALIDATION

    def __init__(self, clause: str, message: str):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


# -- job specification ---------------------------------------------------------------------

@dataclass(frozen=True)
class JobSpec:
    command: str
    ids: tuple[str, ...] = ()
    files: tuple[str, ...] = ()
    all_entries: bool = False
    fmt: str = "text"
    jobs: int = 1
    tol: float | None = None
    t: Fraction | None = None
    k: int | None = None
    free: str | None = None
    fix: tuple[tuple[str, Fraction], ...] = ()
    ts: tuple[float, ...] = ()
    weight: str = "constant"
    n: int = 3000
    L: float = 30.0
    action: str | None = None
    target: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(message)
        raise UsageError(message)


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--id", action="append", default=[], dest="ids", help="catalog id or alias (repeatable)")
    p.add_argument("--file", action="append", default=[], dest="files", help="datum file in the catalog schema")
    p.add_argument("--all", action="store_true", dest="all_entries", help="every catalog entry")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text", dest="fmt")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent entries")
    p.add_argument("--tol", type=float, default=None, help="certified tolerance (overrides HOROKE_TOL)")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horoke", description="Canonical metric existence on horosymmetric manifolds")
    parser.add_argument("--version", action="version", version=f"horoke {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in ("check-ke", "rlb", "solve-soliton", "solve-mabuchi", "validate"):
        _add_inputs(sub.add_parser(name))
    p = sub.add_parser("power-mabuchi")
    p.add_argument("k", type=int)
    _add_inputs(p)
    p = sub.add_parser("check-general")
    p.add_argument("t")
    _add_inputs(p)
    p = sub.add_parser("coupled-search")
    p.add_argument("--free", default=None)
    p.add_argument("--fix", default="")
    _add_inputs(p)
    p = sub.add_parser("solve-ma")
    p.add_argument("--t", required=True, help="t value or comma-separated list in (0, 1]")
    p.add_argument("--weight", choices=("constant", "soliton"), default="constant")
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--L", type=float, default=30.0)
    _add_inputs(p)
    p = sub.add_parser("catalog")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("target", nargs="?")
    p.add_argument("--format", choices=("text", "json"), default="text", dest="fmt")
    return parser


def _parse_fix(text: str) -> tuple[tuple[str, Fraction], ...]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise UsageError(f"--fix expects name=value, got {item!r}")
        name, value = item.split("=", 1)
        try:
            out.append((name.strip(), parse_rational(value.strip())))
        except RationalParseError as exc:
            raise UsageError(str(exc)) from None
    return tuple(sorted(out))


def parse_args(argv: Sequence[str]) -> JobSpec:
    ns = _build_parser().parse_args(list(argv))
    if ns.command is None:
        raise UsageError("missing command")
    if ns.command == "catalog":
        if ns.action == "show" and not ns.target:
            raise UsageError("catalog show needs an id")
        return JobSpec("catalog", fmt=ns.fmt, action=ns.action, target=ns.target)
    n_inputs = len(ns.ids) + len(ns.files) + (1 if ns.all_entries else 0)
    if n_inputs == 0:
        raise UsageError("give --id, --file or --all")
    if ns.jobs < 1:
        raise UsageError("--jobs must be positive")
    if ns.tol is not None and not ns.tol > 0:
        raise UsageError("--tol must be positive")
    kw: dict[str, Any] = {}
    if ns.command == "power-mabuchi":
        if ns.k < 1:
            raise UsageError("k must be a positive integer")
        kw["k"] = ns.k
    if ns.command == "check-general":
        try:
            kw["t"] = parse_rational(ns.t)
        except RationalParseError as exc:
            raise UsageError(str(exc)) from None
        if not 0 <= kw["t"] <= 1:
            raise UsageError("t must lie in [0, 1]")
    if ns.command == "coupled-search":
        kw["free"] = ns.free
        kw["fix"] = _parse_fix(ns.fix)
    if ns.command == "solve-ma":
        try:
            ts = tuple(float(x) for x in ns.t.split(",") if x.strip())
        except ValueError:
            raise UsageError(f"bad --t {ns.t!r}") from None
        if not ts or not all(0 < t <= 1 for t in ts):
            raise UsageError("--t values must lie in (0, 1]")
        if ns.n < 10 or ns.L <= 0:
            raise UsageError("grid needs --n >= 10 and --L > 0")
        kw.update(ts=ts, weight=ns.weight, n=ns.n, L=ns.L)
        if ns.fmt == "csv" and (len(ts) != 1 or n_inputs != 1):
            raise UsageError("csv output takes one input and one t")
    elif ns.fmt == "csv":
        raise UsageError("csv output is only for solve-ma")
    return JobSpec(
        ns.command,
        ids=tuple(ns.ids),
        files=tuple(ns.files),
        all_entries=ns.all_entries,
        fmt=ns.fmt,
        jobs=ns.jobs,
        tol=ns.tol,
        **kw,
    )


# -- loading ---------------------------------------------------------------------------------

_TOML_POS = re.compile(r"\(at line (\d+), column (\d+)\)")


def _locate(text: str, needle: str) -> tuple[int | None, int | None]:
    idx = text.find(needle)
    if idx < 0:
        return None, None
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def loads_datum(text: str) -> ManifoldEntry:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = _TOML_POS.search(str(exc))
        msg = _TOML_POS.sub("", str(exc)).strip()
        raise ParseError(msg, *(map(int, m.groups()) if m else (None, None))) from None
    try:
        return catalog.parse_entry(doc)
    except RationalParseError as exc:
        bad = re.search(r"'([^']*)'", str(exc))
        line, col = _locate(text, f'"{bad.group(1)}"') if bad else (None, None)
        raise ParseError(str(exc), line, col) from None
    except DatumError as exc:
        raise ValidationError(type(exc).__name__, str(exc)) from None
    except (CatalogError, GeometryError) as exc:
        raise ValidationError(type(exc).__name__, str(exc)) from None
    except KeyError as exc:
        raise ValidationError("MissingField", f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError("Schema", str(exc)) from None


def load_datum(path: str) -> ManifoldEntry:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads_datum(text)


# -- number tagging --------------------------------------------------------------------------

def _mp_str(x) -> str:
    return mpmath.nstr(x, 25, min_fixed=-30, max_fixed=30, strip_zeros=False)


def tag(x) -> Any:
    """Deterministic JSON form; every number says whether it is exact or enclosed."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return {"exact": str(Fraction(x))}
    if isinstance(x, HighPrecisionScalar):
        with mpmath.workdps(40):
            pad = abs(x.value) * mpmath.mpf(10) ** -24 + x.error
            lo, hi = x.value - pad, x.value + pad
        return {"interval": [_mp_str(lo), _mp_str(hi)]}
    if isinstance(x, RealRoot):
        return {"interval": [str(x.lo), str(x.hi)], "poly": [str(c) for c in x.poly]}
    if isinstance(x, mpmath.mpf):
        return {"approx": _mp_str(x)}
    if isinstance(x, (float, np.floating)):
        return {"approx": format(float(x), ".17g")}
    if isinstance(x, np.integer):
        return {"exact": str(int(x))}
    if isinstance(x, np.ndarray):
        return [tag(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): tag(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [tag(v) for v in x]
    if is_dataclass(x):
        return {f.name: tag(getattr(x, f.name)) for f in fields(x)}
    return str(x)


# -- plain formatting ------------------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, HighPrecisionScalar):
        return f"{mpmath.nstr(x.value, 15)} ± {mpmath.nstr(x.error, 2)}"
    if isinstance(x, RealRoot):
        return f"{float(x.midpoint):.12g}" if x.hi - x.lo < Fraction(1, 10**12) else f"[{float(x.lo):.12g}, {float(x.hi):.12g}]"
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 15)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    if isinstance(x, (list, tuple)):
        return "(" + ", ".join(_num(v) for v in x) + ")"
    if is_dataclass(x):
        return "{" + ", ".join(f"{f.name}={_num(getattr(x, f.name))}" for f in fields(x)) + "}"
    return str(x)


_VARS = "abcdefgh"


def linear_relation(coeffs: Sequence[int], names: str = _VARS) -> str:
    """112, −65 ↦ '112a−65b=0'."""
    out = ""
    for c, v in zip(coeffs, names):
        if c == 0:
            continue
        sign = "−" if c < 0 else ("+" if out else "")
        mag = abs(c)
        out += sign + ("" if mag == 1 else str(mag)) + v
    return (out or "0") + "=0"


def homogeneous_relation(coeffs: Sequence[int]) -> str:
    """Coefficients of a^k, a^{k−1}b, …, b^k ↦ '114a^2+49ab+5b^2=0'."""
    k = len(coeffs) - 1
    out = ""
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        pa, pb = k - i, i
        mono = ("a" if pa == 1 else f"a^{pa}" if pa else "") + ("b" if pb == 1 else f"b^{pb}" if pb else "")
        sign = "−" if c < 0 else ("+" if out else "")
        mag = abs(c)
        out += sign + ("" if mag == 1 and mono else str(mag)) + mono
    return (out or "0") + "=0"


# -- running ---------------------------------------------------------------------------------

def _inputs(job: JobSpec) -> list[tuple[str, str]]:
    items = [("id", i) for i in job.ids] + [("file", f) for f in job.files]
    if job.all_entries:
        items += [("id", i) for i in catalog.list_ids()]
    return items


def _resolve(kind: str, ref: str) -> ManifoldEntry:
    if kind == "file":
        return load_datum(ref)
    try:
        return catalog.get(ref)
    except UnknownId:
        raise UnknownIdError(ref) from None


class UnknownIdError(Exception):
    code = EXIT_UNKNOWN_ID

    def __init__(self, ref: str):
        super().__init__(f"unknown catalog id {ref!r}")


def _report_from_existence(rep: criteria.ExistenceReport) -> dict:
    return {
        "verdict": rep.verdict,
        "kind": rep.kind,
        "t": rep.t,
        "certificate": rep.certificate,
        "numerics": rep.numerics,
    }


def _ratio_line(rep: criteria.ExistenceReport) -> str | None:
    """Rank one: the barycenter as a multiple of 2ρ_H."""
    num = rep.numerics
    rho = num.get("two_rho_H")
    bars = num.get("barycenters") or ([num["barycenter"]] if "barycenter" in num else [])
    if not rho or len(rho) != 1 or rho[0] == 0 or len(bars) != 1:
        return None
    b = bars[0][0]
    if not isinstance(b, Fraction):
        return None
    rel = "=" if b == rho[0] else "≠"
    return f"bar = {b / rho[0]}·2ρ_H {rel} 2ρ_H"


def _run_check_ke(job, e):
    rep = criteria.check_ke(e.datum, e.anticanonical_polytope)
    return _report_from_existence(rep), VERDICT_CODES[rep.verdict]


def _run_check_general(job, e):
    dec = criteria.Decomposition.single(e.anticanonical_polytope)
    rep = criteria.check_general(e.datum, dec, job.t, e.anticanonical_polytope, job.tol)
    return _report_from_existence(rep), VERDICT_CODES[rep.verdict]


def _run_rlb(job, e):
    rb = criteria.greatest_ricci_lower_bound(e.datum, e.anticanonical_polytope)
    return {"verdict": None, "ricci_lower_bound": rb}, EXIT_OK


def _run_soliton(job, e):
    rep = criteria.solve_soliton(e.datum, e.anticanonical_polytope, job.tol)
    return _report_from_existence(rep), VERDICT_CODES[rep.verdict]


def _run_mabuchi(job, e):
    rep = criteria.solve_mabuchi(e.datum, e.anticanonical_polytope)
    out = _report_from_existence(rep)
    out["relations"] = [linear_relation(r) for r in rep.numerics.get("relations", [])]
    return out, VERDICT_CODES[rep.verdict]


def _run_power(job, e):
    rep = criteria.solve_power_mabuchi(e.datum, e.anticanonical_polytope, job.k)
    out = _report_from_existence(rep)
    if "equation_ab" in rep.numerics:
        out["relations"] = [homogeneous_relation(rep.numerics["equation_ab"])]
    return out, VERDICT_CODES[rep.verdict]


def _run_coupled(job, e):
    if e.family is None:
        raise ValidationError("NoFamily", f"{e.id} carries no coupled family")
    fam = e.family
    free = job.free or fam.free
    fixed = dict(fam.fixed)
    fixed.update(dict(job.fix))
    fam = fam.with_values(free, fixed)
    res = criteria.coupled_search(e.datum, fam)
    out = {
        "verdict": res.report.verdict,
        "free": free,
        "fixed": dict(sorted(fixed.items())),
        "polynomial": list(res.polynomial),
        "window": list(res.window),
        "roots": res.roots,
        "certificate": res.report.certificate,
    }
    return out, VERDICT_CODES[res.report.verdict]


def _run_solve_ma(job, e):
    from . import masolver

    weight = WeightSpec.constant()
    extra: dict[str, Any] = {}
    if job.weight == "soliton":
        srep = criteria.solve_soliton(e.datum, e.anticanonical_polytope, job.tol)
        if "exponent" in srep.numerics:
            weight = WeightSpec.exp_affine(srep.numerics["exponent"])
        extra["soliton"] = {"xi": srep.numerics.get("xi"), "verdict": srep.verdict}
    problem = masolver.build_problem(e.datum, criteria.Decomposition.single(e.anticanonical_polytope, weight), e.id)
    cfg = masolver.SolverConfig(n=job.n, L=job.L)
    runs = []
    csv_text = None
    code = EXIT_OK
    for t in job.ts:
        sol = masolver.solve_at_t(problem, t, cfg)
        if isinstance(sol, masolver.DivergenceDiagnosis):
            code = EXIT_NOT_EXISTS
            runs.append({"t": t, "converged": False, "reason": sol.reason, "x_path": list(sol.x_path), "windows": [list(w) for w in sol.windows]})
        else:
            diag = {k: v for k, v in sol.diagnostics.items() if k != "backend"}
            runs.append({"converged": True, **diag})
            csv_text = masolver.to_csv(sol)
    out = {"verdict": None, "weight": job.weight, "runs": runs, **extra}
    if job.fmt == "csv":
        out["csv"] = csv_text
    return out, code


_RUNNERS = {
    "check-ke": _run_check_ke,
    "check-general": _run_check_general,
    "rlb": _run_rlb,
    "solve-soliton": _run_soliton,
    "solve-mabuchi": _run_mabuchi,
    "power-mabuchi": _run_power,
    "coupled-search": _run_coupled,
    "solve-ma": _run_solve_ma,
    "validate": lambda job, e: ({"verdict": None, "valid": True, "dimension": e.dimension, "rank": e.datum.rank}, EXIT_OK),
}

_NUMERICAL = ("NewtonStall", "NewtonDiverged", "WindowTooSmall", "ToleranceUnreachable")


def _error_code(exc: BaseException) -> int:
    code = getattr(exc, "code", None)
    if isinstance(code, int):
        return code
    if type(exc).__name__ in _NUMERICAL:
        return EXIT_NUMERICAL
    if isinstance(exc, (DatumError, CatalogError)):
        return EXIT_VALIDATION
    if isinstance(exc, (criteria.CriteriaError, QuadratureError, GeometryError)):
        return EXIT_CRITERIA
    if type(exc).__module__.startswith("horoke.masolver"):
        return EXIT_CRITERIA
    return EXIT_INTERNAL


def run_one(job: JobSpec, kind: str, ref: str) -> tuple[dict, int]:
    """One input: (report body, exit code). Errors become reports too."""
    head: dict[str, Any] = {"input": {kind: ref}}
    try:
        e = _resolve(kind, ref)
        head["id"] = e.id
        head["provenance"] = e.provenance
        body, code = _RUNNERS[job.command](job, e)
    except Exception as exc:  # reported, never swallowed silently
        code = _error_code(exc)
        err = {"type": type(exc).__name__, "message": str(exc), "code": code}
        for attr in ("clause", "line", "col"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        return {**head, "error": err}, code
    return {**head, **body}, code


def _worker(args):
    job, kind, ref = args
    return run_one(job, kind, ref)


def _combine(codes: Sequence[int]) -> int:
    return max(codes) if codes else EXIT_OK


def render_json(job: JobSpec, reports: list[dict]) -> str:
    doc = {"schema": SCHEMA, "command": job.command, "reports": [tag(r) for r in reports]}
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _text_report(job: JobSpec, r: dict) -> list[str]:
    name = r.get("id") or next(iter(r["input"].values()))
    lines = [f"[{name}] {job.command}"]
    if "error" in r:
        err = r["error"]
        lines.append(f"  error {err['type']}: {err['message']}")
        return lines
    if r.get("verdict"):
        lines.append(f"  verdict: {r['verdict']}")
    cert = r.get("certificate")
    if cert:
        lines.append("  certificate: " + ", ".join(f"{k}={_num(v)}" for k, v in sorted(cert.items())))
    for rel in r.get("relations", []):
        lines.append(f"  relation: {rel}")
    if job.command in ("check-ke", "check-general") and "numerics" in r:
        line = _ratio_line(criteria.ExistenceReport(r["verdict"], cert, r["numerics"], r["t"], r["kind"]))
        if line:
            lines.append(f"  {line}")
    num = r.get("numerics") or {}
    for key in sorted(num):
        if key in ("relations",):
            continue
        lines.append(f"  {key}: {_num(num[key])}")
    if "ricci_lower_bound" in r:
        rb = r["ricci_lower_bound"]
        lines.append(f"  R = {rb.value} ({rb.flag})")
        lines.append(f"  barycenter: {_num(rb.barycenter)}  2ρ_H: {_num(rb.two_rho_H)}")
    if "polynomial" in r:
        lines.append(f"  polynomial (high to low): {_num(r['polynomial'])}")
        lines.append(f"  window: {_num(r['window'])}")
        for root in r["roots"]:
            lines.append(
                f"  root {_num(root.root)}: in_window={root.in_window} dh_positive={root.dh_positive} admissible={root.admissible}"
            )
    for run in r.get("runs", []):
        if run["converged"]:
            lines.append(
                f"  t={run['t']:.6g}: converged, x_t={run['x_t']:.6g}, m_t={run['m_t']:.6g}, "
                f"residual={run['residual_inf']:.2e}, stokes={run['stokes_residual']:.2e}"
            )
        else:
            lines.append(f"  t={run['t']:.6g}: diverged, {run['reason']}")
    if r.get("valid"):
        lines.append(f"  valid: dimension {r['dimension']}, rank {r['rank']}")
    return lines


def render_text(job: JobSpec, reports: list[dict]) -> str:
    out = []
    for r in reports:
        out.extend(_text_report(job, r))
    return "\n".join(out) + "\n"


def _catalog(job: JobSpec, out) -> int:
    if job.action == "list":
        ids = catalog.list_ids()
        aliases: dict[str, list[str]] = {}
        for a, target in catalog.all_aliases(include_shadowed=False).items():
            aliases.setdefault(target, []).append(a)
        if job.fmt == "json":
            doc = {"schema": SCHEMA, "command": "catalog list", "ids": ids, "aliases": aliases}
            out.write(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
        else:
            for i in ids:
                e = catalog.get(i)
                al = ", ".join(aliases.get(i, []))
                out.write(f"{i}\t{e.group}\tdim {e.dimension}\trank {e.datum.rank}" + (f"\taliases: {al}" if al else "") + "\n")
        return EXIT_OK
    try:
        e = catalog.get(job.target)
    except UnknownId:
        print(f"error: unknown catalog id {job.target!r}", file=sys.stderr)
        return EXIT_UNKNOWN_ID
    if job.fmt == "json":
        doc = {"schema": SCHEMA, "command": "catalog show", "entry": catalog.canonical_document(e.raw)}
        out.write(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(catalog.dumps(e))
    return EXIT_OK


def run(job: JobSpec, out=None) -> int:
    out = out or sys.stdout
    if job.tol is not None:
        os.environ["HOROKE_TOL"] = repr(job.tol)
    if job.command == "catalog":
        return _catalog(job, out)
    items = _inputs(job)
    if job.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=job.jobs) as pool:
            results = list(pool.map(_worker, [(job, k, r) for k, r in items]))
    else:
        results = [run_one(job, k, r) for k, r in items]
    reports = [r for r, _ in results]
    code = _combine([c for _, c in results])
    if job.fmt == "json":
        out.write(render_json(job, reports))
    elif job.fmt == "csv":
        r = reports[0]
        if "error" in r:
            print(f"error: {r['error']['message']}", file=sys.stderr)
        elif r.get("csv") is None:
            print("error: no converged solution to write", file=sys.stderr)
        else:
            out.write(r["csv"])
    else:
        out.write(render_text(job, reports))
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        job = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
