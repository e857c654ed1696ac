"""Batch experiment runner.

Every experiment resolves to a config dict ``{experiment, params, quad, seed}``
and writes ``<experiment>.json`` and ``<experiment>.csv`` into the output
directory.  Reports are byte-identical for identical configs.

Exit codes: 0 ok, 1 numerical non-convergence (report still written), 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .apclass import ap_constant, berezin_many, berezin_sup_condition, kt_check, lattice_comparability
from .carleson_mult import (
    carleson_diagnose,
    mult_classify,
    multiplier_empirical_norm,
    multiplier_reduce,
    parse_measure,
)
from .errors import NumericalFailure, UsageError
from .fockcore import (
    FockParams,
    fock_integral,
    kernel_norm_checks,
    lp_ratios,
    lp_test_family,
    parse_function,
    remainder_many,
)
from .minilang import parse_complex, parse_real, split_top
from .quadcore import QuadSpec, Region, lattice_points
from .weights import ALIASES, FAMILIES, parse_weight

CSV_FIELDS = ["case", "inputs", "lhs", "rhs", "value", "levels", "error", "verdict", "quad_fingerprint"]
REQUIRED = object()


# ---------------------------------------------------------------------------
# value conversion
# ---------------------------------------------------------------------------


def _cfmt(z) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _to_real(v, name):
    if isinstance(v, bool):
        raise UsageError(f"{name} must be a number")
    if isinstance(v, (int, float)):
        return float(v)
    return parse_real(str(v), name)


def _to_complex(v, name):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(_to_real(v[0], name), _to_real(v[1], name))
    return parse_complex(str(v))


def _as_list(v, sep):
    if isinstance(v, (list, tuple)):
        return list(v)
    if isinstance(v, (int, float)):
        return [v]
    return [s for s in split_top(str(v), sep) if s]


CONVERTERS: dict[str, tuple[Callable, Callable]] = {
    # kind -> (convert, canonical echo)
    "real": (_to_real, float),
    "pos": (_to_real, float),
    "int": (lambda v, n: int(_to_real(v, n)), int),
    "complex": (_to_complex, _cfmt),
    "complexes": (lambda v, n: [_to_complex(x, n) for x in _as_list(v, ";")], lambda xs: [_cfmt(x) for x in xs]),
    "reals": (lambda v, n: [_to_real(x, n) for x in _as_list(v, ",")], lambda xs: [float(x) for x in xs]),
    "weight": (lambda v, n: str(v), str),
    "function": (lambda v, n: str(v), str),
    "measure": (lambda v, n: str(v), str),
}


@dataclass(frozen=True)
class Param:
    kind: str
    default: object = REQUIRED
    help: str = ""


FAMILY = "family"

SCHEMA: dict[str, dict[str, Param]] = {
    "ap-constant": {
        "weight": Param("weight"),
        "p": Param("pos"),
        "r": Param("pos"),
        "search_radius": Param("pos", 4.0, "radius of the center grid"),
        "search_center": Param("complex", 0j),
    },
    "berezin": {
        "weight": Param("weight"),
        "alpha": Param("pos"),
        "points": Param("complexes", [0j], "evaluation points, ';'-separated"),
    },
    "berezin-sup": {
        "weight": Param("weight"),
        "p": Param("pos"),
        "alpha": Param("pos"),
        "gamma": Param("pos", None, "defaults to alpha"),
        "grid_radius": Param("pos", 10.0),
        "spacing": Param("pos", 0.25),
    },
    "kt-check": {
        "weight": Param("weight"),
        "r": Param("pos"),
        "squares": Param("complexes", [0j], "square centers"),
        "c_max": Param("pos", 10.0),
        "chain_tol": Param("pos", 1.05),
    },
    "lattice-ratio": {
        "weight": Param("weight"),
        "r": Param("pos"),
        "nu": Param("complex"),
        "nu_prime": Param("complex"),
    },
    "fock-norm": {
        "function": Param("function"),
        "p": Param("pos"),
        "alpha": Param("pos"),
        "weight": Param("weight", "constant"),
        "k": Param("int", 0, "Sobolev order"),
    },
    "lp-ratio": {
        "function": Param("function", FAMILY, "'family' runs the built-in test family"),
        "p": Param("pos"),
        "alpha": Param("pos"),
        "k": Param("int"),
        "weight": Param("weight", "constant"),
    },
    "kernel-norm": {
        "weight": Param("weight", "constant"),
        "p": Param("pos"),
        "alpha": Param("pos"),
        "radius": Param("pos", 5.0, "kernel centers on the unit lattice within this radius"),
    },
    "remainder": {
        "function": Param("function", FAMILY),
        "k": Param("int"),
        "alpha": Param("pos"),
        "radius": Param("pos", 2.0, "evaluation points on the unit lattice within this radius"),
    },
    "carleson": {
        "measure": Param("measure"),
        "p": Param("pos"),
        "q": Param("pos"),
        "alpha": Param("pos"),
        "weight": Param("weight", "constant"),
        "n": Param("int", 0),
        "radii": Param("reals", [2.0, 6.0], "two grid radii"),
    },
    "multiplier": {
        "g": Param("function"),
        "p": Param("pos"),
        "q": Param("pos"),
        "alpha": Param("pos"),
        "beta": Param("pos"),
        "weight": Param("weight", "constant"),
        "eta": Param("weight", None, "defaults to weight"),
        "radii": Param("reals", [2.0, 6.0]),
        "empirical": Param("int", 1, "also compute the kernel-family norm (p = q only)"),
    },
    "classify": {
        "p": Param("pos"),
        "q": Param("pos"),
        "alpha": Param("pos"),
        "beta": Param("pos"),
    },
}

EXAMPLES: dict[str, dict] = {
    "ap-constant": {"weight": "constant", "p": 2, "r": 1},
    "berezin": {"weight": "exp_abs:gamma=1", "alpha": 1, "points": "0;1+i"},
    "berezin-sup": {"weight": "exp_abs:gamma=1", "p": 1, "alpha": 1, "grid_radius": 4},
    "kt-check": {"weight": "power_pure:delta=2", "r": 1, "squares": "0"},
    "lattice-ratio": {"weight": "exp_re:gamma=1", "r": 1, "nu": "1", "nu_prime": "0"},
    "fock-norm": {"function": "monomial:1", "p": 2, "alpha": 1},
    "lp-ratio": {"function": "monomial:2", "p": 2, "alpha": 1, "k": 1, "weight": "power:gamma=2"},
    "kernel-norm": {"p": 2, "alpha": 1, "radius": 2},
    "remainder": {"function": "monomial:4", "k": 1, "alpha": 1, "radius": 1},
    "carleson": {"measure": "atoms:(0:1)", "p": 2, "q": 1, "alpha": 1, "radii": "2,3"},
    "multiplier": {"g": "poly:3", "p": 2, "q": 2, "alpha": 1, "beta": 1, "radii": "2,3", "empirical": 0},
    "classify": {"p": 2, "q": 3, "alpha": 1, "beta": 2},
}

QUAD_KEYS = {"rel_tol": float, "abs_tol": float, "base_tile": float, "max_refine": int, "truncation_margin": float, "workers": int}


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------


def resolve_config(raw: dict) -> tuple[dict, dict, QuadSpec]:
    """Validate ``raw`` and return ``(resolved echo, converted params, spec)``."""
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(raw) - {"experiment", "params", "quad", "seed", "out"}
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    exp = raw.get("experiment")
    if exp not in SCHEMA:
        raise UsageError(f"unknown experiment {exp!r}; expected one of {sorted(SCHEMA)}")
    schema = SCHEMA[exp]
    given = dict(raw.get("params") or {})
    extra = set(given) - set(schema)
    if extra:
        raise UsageError(f"unknown parameters {sorted(extra)} for {exp}")
    params, echo = {}, {}
    for name, spec_ in schema.items():
        conv, canon = CONVERTERS[spec_.kind]
        if name in given and given[name] is not None:
            v = conv(given[name], name)
        elif spec_.default is REQUIRED:
            raise UsageError(f"{exp} needs parameter {name!r}")
        else:
            v = spec_.default
        if spec_.kind == "pos" and v is not None and not v > 0:
            raise UsageError(f"{name} must be positive")
        params[name] = v
        echo[name] = None if v is None else canon(v)
    _check_objects(params, schema)
    q = dict(raw.get("quad") or {})
    bad = set(q) - set(QUAD_KEYS)
    if bad:
        raise UsageError(f"unknown quad keys {sorted(bad)}")
    try:
        spec = QuadSpec(**{k: QUAD_KEYS[k](v) for k, v in q.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad quad settings: {exc}") from None
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise UsageError("seed must be a nonnegative integer")
    resolved = {"experiment": exp, "params": echo, "quad": spec.as_dict(), "seed": seed}
    return resolved, params, spec


def _check_objects(params, schema):
    for name, sp in schema.items():
        v = params[name]
        if v is None:
            continue
        if sp.kind == "weight":
            parse_weight(v)
        elif sp.kind == "function" and v != FAMILY:
            parse_function(v, params.get("alpha"))
        elif sp.kind == "measure":
            parse_measure(v, params.get("alpha"))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _row(case, inputs, lhs=None, rhs=None, value=None, levels=None, error=None, verdict="ok"):
    return {
        "case": case,
        "inputs": inputs,
        "lhs": lhs,
        "rhs": rhs,
        "value": value,
        "levels": levels,
        "error": error,
        "verdict": verdict,
    }


def _fail_row(case, inputs, exc: NumericalFailure):
    est = exc.estimate
    return _row(case, inputs, value=est, error=exc.error, verdict=f"failed: {exc}"), {"case": case, "trace": exc.trace}


def _exp_ap_constant(P, spec, seed):
    w = parse_weight(P["weight"])
    rep = ap_constant(w, P["p"], P["r"], P["search_radius"], spec, P["search_center"])
    arg = None if rep.argmax_square is None else _cfmt(rep.argmax_square.center)
    verdict = "infinite" if rep.infinite else "finite"
    if rep.note:
        verdict += f" ({rep.note})"
    rows = [_row("ap_constant", {"argmax_center": arg}, value=rep.constant_estimate, levels=len(rep.refinement_trace), verdict=verdict)]
    return rows, [{"case": "ap_constant", "trace": rep.refinement_trace}]


def _exp_berezin(P, spec, seed):
    w = parse_weight(P["weight"])
    vals = berezin_many(w, P["alpha"], P["points"], spec)
    wz = w.eval(np.asarray(P["points"], dtype=complex))
    rows = [
        _row(f"B[{_cfmt(z)}]", {"z": _cfmt(z)}, lhs=float(v), rhs=float(o), value=float(v / o) if o > 0 else math.inf)
        for z, v, o in zip(P["points"], vals, wz)
    ]
    return rows, []


def _exp_berezin_sup(P, spec, seed):
    w = parse_weight(P["weight"])
    gamma = P["gamma"] if P["gamma"] is not None else P["alpha"]
    rep = berezin_sup_condition(w, P["p"], P["alpha"], gamma, P["grid_radius"], spec, P["spacing"])
    rows = [_row("berezin_sup", {"argmax": _cfmt(rep.argmax)}, value=rep.value, levels=len(rep.trace))]
    return rows, [{"case": "berezin_sup", "trace": [[str(a), b] for a, b in rep.trace]}]


def _exp_kt(P, spec, seed):
    w = parse_weight(P["weight"])
    squares = [Region.square(c, P["r"]) for c in P["squares"]]
    rep = kt_check(w, P["r"], squares, spec, seed=seed, c_max=P["c_max"], chain_tol=P["chain_tol"])
    verdict = "feasible" if rep.feasible else "infeasible"
    rows = [_row("kt", {"witness": rep.witness_set}, lhs=rep.delta, rhs=rep.C_r, value=rep.delta, verdict=verdict)]
    return rows, [{"case": "kt", "table": rep.table}]


def _exp_lattice(P, spec, seed):
    w = parse_weight(P["weight"])
    ratio, fit = lattice_comparability(w, P["r"], P["nu"], P["nu_prime"], spec)
    return [_row("lattice", {}, lhs=ratio, value=fit)], []


def _exp_fock_norm(P, spec, seed):
    f = parse_function(P["function"], P["alpha"])
    w = parse_weight(P["weight"])
    par = FockParams(P["p"], P["alpha"], P["k"])
    val = fock_integral(f, par, w, spec)
    return [_row("fock_norm", {"describe": f.describe()}, lhs=val, value=val ** (1 / P["p"]))], []


def _family(P, seed):
    if P["function"] == FAMILY:
        return lp_test_family(P["alpha"], seed=seed)
    return [("f", parse_function(P["function"], P["alpha"]))]


def _exp_lp(P, spec, seed):
    fam = _family(P, seed)
    w = parse_weight(P["weight"])
    reps = lp_ratios(fam, FockParams(P["p"], P["alpha"], P["k"]), w, spec)
    return [_row(r.case, {}, lhs=r.lhs, rhs=r.rhs, value=r.ratio) for r in reps], []


def _exp_kernel(P, spec, seed):
    w = parse_weight(P["weight"])
    pts = [c.z for c in lattice_points(1.0, P["radius"])]
    reps = kernel_norm_checks(pts, FockParams(P["p"], P["alpha"]), w, spec)
    rows = [_row(r.case, {"a": _cfmt(a)}, lhs=r.lhs, rhs=r.rhs, value=r.ratio, levels=r.levels) for a, r in zip(pts, reps)]
    return rows, []


def _exp_remainder(P, spec, seed):
    pts = [c.z for c in lattice_points(1.0, P["radius"])]
    rows = []
    for name, f in _family(P, seed):
        lhs, rhs = remainder_many(f, P["k"], P["alpha"], pts, spec)
        for z, a, b in zip(pts, lhs, rhs):
            rows.append(_row(f"{name}@{_cfmt(z)}", {"z": _cfmt(z)}, lhs=complex(a), rhs=complex(b), value=float(abs(a - b))))
    return rows, []


def _exp_carleson(P, spec, seed):
    mu = parse_measure(P["measure"], P["alpha"])
    w = parse_weight(P["weight"])
    radii = P["radii"]
    if len(radii) != 2:
        raise UsageError("radii needs two values")
    rep = carleson_diagnose(mu, P["p"], P["q"], P["alpha"], w, P["n"], spec, radii=tuple(radii))
    rows = []
    for R, c, e in zip(radii, rep.evidence["condition"], rep.evidence["empirical"]):
        rows.append(_row(f"R={R:g}", {"case": rep.case, "C_mu_n": rep.C_mu_n}, lhs=c, rhs=e, value=c / e if e > 0 else math.inf, verdict=rep.verdict))
    return rows, [{"case": "carleson", "evidence": rep.evidence}]


def _exp_multiplier(P, spec, seed):
    g = parse_function(P["g"], P["alpha"])
    w = parse_weight(P["weight"])
    eta = parse_weight(P["eta"]) if P["eta"] is not None else w
    cls = mult_classify(P["p"], P["q"], P["alpha"], P["beta"])
    rows = []
    for R in P["radii"]:
        v = multiplier_reduce(g, P["p"], P["q"], P["alpha"], P["beta"], w, eta, R, spec)
        rows.append(_row(f"reduce R={R:g}", {"class": cls.verdict}, value=v, verdict=cls.verdict))
    if P["empirical"] and P["p"] == P["q"]:
        v, arg, _ = multiplier_empirical_norm(g, P["p"], P["q"], P["alpha"], P["beta"], w, spec, eta=eta)
        rows.append(_row("empirical", {"argmax": _cfmt(arg)}, value=v, verdict=cls.verdict))
    return rows, []


def _exp_classify(P, spec, seed):
    c = mult_classify(P["p"], P["q"], P["alpha"], P["beta"])
    return [_row("classify", {"condition": c.checkable_condition}, value=c.exponent, verdict=c.verdict)], []


RUNNERS = {
    "ap-constant": _exp_ap_constant,
    "berezin": _exp_berezin,
    "berezin-sup": _exp_berezin_sup,
    "kt-check": _exp_kt,
    "lattice-ratio": _exp_lattice,
    "fock-norm": _exp_fock_norm,
    "lp-ratio": _exp_lp,
    "kernel-norm": _exp_kernel,
    "remainder": _exp_remainder,
    "carleson": _exp_carleson,
    "multiplier": _exp_multiplier,
    "classify": _exp_classify,
}


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _num(x):
    """JSON/CSV-safe scalar with 17 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (complex, np.complexfloating)):
        return _cfmt(x)
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else _num(x)
    if isinstance(x, (complex, np.complexfloating)):
        return _cfmt(x)
    return str(x)


def _atomic_write(path: str, data: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_reports(out_dir: str, resolved: dict, rows: list, traces: list, fingerprint: str, status: str):
    name = resolved["experiment"]
    for r in rows:
        r["quad_fingerprint"] = fingerprint
    doc = {
        "version": __version__,
        "config": resolved,
        "quad_fingerprint": fingerprint,
        "status": status,
        "rows": rows,
        "traces": traces,
    }
    _atomic_write(os.path.join(out_dir, f"{name}.json"), json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_FIELDS)
    for r in rows:
        wr.writerow(
            [
                r["case"],
                json.dumps(_jsonable(r["inputs"]), sort_keys=True),
                *(_num(r[k]) for k in ("lhs", "rhs", "value", "levels", "error")),
                r["verdict"],
                fingerprint,
            ]
        )
    _atomic_write(os.path.join(out_dir, f"{name}.csv"), buf.getvalue())


def run_experiment(raw: dict, out_dir: str = "reports") -> int:
    """Resolve, run and write reports; returns the process exit code."""
    resolved, params, spec = resolve_config(raw)
    runner = RUNNERS[resolved["experiment"]]
    status, code = "ok", 0
    try:
        rows, traces = runner(params, spec, resolved["seed"])
    except NumericalFailure as exc:
        row, tr = _fail_row(resolved["experiment"], {}, exc)
        rows, traces = [row], [tr]
        status, code = "numerical-failure", 1
    write_reports(out_dir, resolved, rows, traces, spec.fingerprint(), status)
    return code


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

_GRAMMAR = """\
weights:    family[:k=v,...][|distort:G][|translate:X+Yi][|dual:P]
            product:(w1;w2;...)
functions:  poly:c0,c1,...   monomial:m   kernel:alpha=A,a=X+Yi[,c=C]   sum:(f1;f2;...)
measures:   atoms:(X+Yi:m;...)   density:weight=<weight>,gauss=G   mu_g:g=<function>,q=Q,beta=B,eta=<weight>
complex:    1, 2i, 1+2i, -0.5-1.5i"""


def emit_manifest() -> str:
    lines = [f"focklab {__version__} experiment manifest", "", "experiments:"]
    for name, schema in SCHEMA.items():
        lines.append(f"  {name}")
        for p, s in schema.items():
            d = "required" if s.default is REQUIRED else f"default={json.dumps(_jsonable(s.default))}"
            h = f"  {s.help}" if s.help else ""
            lines.append(f"    {p:<14} {s.kind:<10} {d}{h}")
        lines.append(f"    example: {json.dumps({'experiment': name, 'params': EXAMPLES[name]}, sort_keys=True)}")
    lines += ["", "weight families:"]
    for fam, (_, allowed) in FAMILIES.items():
        alias = [a for a, t in ALIASES.items() if t == fam]
        keys = ",".join(allowed) if fam != "product" else "(factors;...)"
        lines.append(f"  {fam:<22} {keys:<12} aliases: {','.join(alias) or '-'}")
    lines += ["", "function families: poly monomial kernel sum", "measure families: atoms density mu_g", "", "grammar:"]
    lines += ["  " + s for s in _GRAMMAR.splitlines()]
    lines += ["", "exit codes: 0 ok, 1 numerical non-convergence (report written), 2 usage error (no report)"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help="output directory (default: reports)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quad.rel-tol", dest="quad_rel_tol", type=float, default=None)
    p.add_argument("--quad.abs-tol", dest="quad_abs_tol", type=float, default=None)
    p.add_argument("--quad.max-refine", dest="quad_max_refine", type=int, default=None)
    p.add_argument("--quad.workers", dest="quad_workers", type=int, default=None)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="focklab", description="Weighted Fock space experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        for p, s in schema.items():
            sp.add_argument("--" + p.replace("_", "-"), dest="param_" + p, default=None, help=s.help or s.kind)
        _add_common(sp)
    rp = sub.add_parser("run", help="run a JSON config file")
    rp.add_argument("config")
    _add_common(rp)
    sub.add_parser("manifest", help="list experiments, catalogs and grammar")
    return ap


def _overlay(raw: dict, ns) -> dict:
    raw = dict(raw)
    quad = dict(raw.get("quad") or {})
    for key, attr in (("rel_tol", "quad_rel_tol"), ("abs_tol", "quad_abs_tol"), ("max_refine", "quad_max_refine"), ("workers", "quad_workers")):
        v = getattr(ns, attr, None)
        if v is not None:
            quad[key] = v
    if quad:
        raw["quad"] = quad
    if getattr(ns, "seed", None) is not None:
        raw["seed"] = ns.seed
    return raw


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command == "manifest":
            sys.stdout.write(emit_manifest())
            return 0
        if ns.command == "run":
            try:
                with open(ns.config) as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config: {exc}") from None
            if not isinstance(raw, dict):
                raise UsageError("config must be a JSON object")
        else:
            params = {k[6:]: v for k, v in vars(ns).items() if k.startswith("param_") and v is not None}
            raw = {"experiment": ns.command, "params": params}
        raw = _overlay(raw, ns)
        out = ns.out or raw.pop("out", None) or "reports"
        raw.pop("out", None)
        code = run_experiment(raw, out)
        print(os.path.join(out, raw["experiment"] + ".json"))
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
