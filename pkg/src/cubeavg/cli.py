"""Command-line entry point.

Every subcommand builds a Report (config echo, version, results, path taken)
and emits it as JSON or CSV.  Exit codes: 0 success, 2 usage or validation
error, 3 a mathematical check failed.

Wall time is recorded only with --timing, so that repeated runs with the
same config produce byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bounds import empirical_C_table, lemma1_margin, random_sequences
from .cesaro import (
    WORKERS_ENV,
    CesaroSeries,
    cube_average_2,
    theorem1_rotation_closed_form,
    theorem1_series,
    weighted_series,
)
from .counterexamples import (
    DEFAULT_ALPHA,
    PROP9_BUDGET,
    CONTROL_LADDER,
    Prop7Instance,
    Prop9Instance,
    prop7_check,
    prop7_control,
    prop7_divergence,
    prop9_check,
    prop9_weight_defects,
    quadratic_identity_holds,
    uniform_ww_control,
    uniform_ww_failure,
)
from .dynamics import (
    BoundedSequence,
    Identity,
    Observable,
    Product,
    Rotation,
    SkewProduct2,
    commutator_defect,
    iterate_many,
    orbit_sequence,
    weyl_sequence,
)
from .recurrence import BoxSet, MCConfig, khintchine2_series, khintchine3_series, threshold_root
from .wiener_wintner import TwistedSumSpec, ww1_defect, ww_sup

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 2, 3
MAX_N = 1 << 22
SERIES_HEADER = ("N", "value_re", "value_im")
MARGIN_HEADER = ("name", "lhs", "rhs", "margin")

# default Theorem-1 configuration: alternating skew products
THEOREM1_ALPHAS = (math.sqrt(2.0) - 1.0, (math.sqrt(5.0) - 1.0) / 2.0)
THEOREM1_POINT = (0.3137, 0.6021)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# encoding

def encode(value: Any) -> Any:
    """JSON-safe form: complex -> {re, im}, non-finite floats -> strings."""
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": encode(float(value.real)), "im": encode(float(value.imag))}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [encode(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode_number(value: Any) -> Any:
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return complex(decode_number(value["re"]), decode_number(value["im"]))
    if value in ("inf", "-inf", "nan"):
        return float(value)
    return value


@dataclass
class Report:
    command: str
    config: dict
    results: dict
    path: str | None = None
    version: str = __version__
    wall_time: float | None = None
    csv_kind: str | None = field(default=None, compare=False)
    csv_rows: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        self.config = encode(self.config)
        self.results = encode(self.results)

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "path": self.path,
            "results": self.results,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(
            command=d["command"],
            config=d["config"],
            results=d["results"],
            path=d.get("path"),
            version=d["version"],
            wall_time=d.get("wall_time"),
        )


def series_rows(series: CesaroSeries) -> list[tuple]:
    return [(N, v.real, v.imag) for N, v in zip(series.Ns, series.values)]


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def emit(report: Report, fmt: str, path: str | None, stream=None) -> None:
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        if report.csv_kind is None:
            raise UsageError(f"csv output is not available for '{report.command}'")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if report.csv_kind == "series":
            w.writerow(SERIES_HEADER)
            for N, re, im in report.csv_rows:
                w.writerow((int(N), _fmt(re), _fmt(im)))
        else:
            w.writerow(MARGIN_HEADER)
            for name, lhs, rhs, margin in report.csv_rows:
                w.writerow((name, f"{lhs:.12e}", f"{rhs:.12e}", f"{margin:.12e}"))
        text = buf.getvalue()
    else:
        raise UsageError(f"unknown format {fmt!r}")
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from exc
    else:
        (stream or sys.stdout).write(text)


# ---------------------------------------------------------------------------
# argument parsing helpers

def parse_system(text: str):
    """rot:a[,b..] | skew:a | id:d, joined with '*' for products, or a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        return _system_from_json(json.loads(text))
    parts = [p.strip() for p in text.split("*")]
    factors = [_system_atom(p) for p in parts]
    return factors[0] if len(factors) == 1 else Product(tuple(factors))


def _system_atom(text: str):
    kind, _, arg = text.partition(":")
    try:
        if kind == "rot":
            return Rotation(tuple(_num(v) for v in arg.split(",")))
        if kind == "skew":
            return SkewProduct2(_num(arg))
        if kind == "id":
            return Identity(int(arg))
    except ValueError as exc:
        raise UsageError(f"bad system {text!r}: {exc}") from exc
    raise UsageError(f"unknown system {text!r}; use rot:, skew:, id:")


def _system_from_json(d: dict):
    kind = d.get("type")
    if kind == "rotation":
        return Rotation(tuple(float(v) for v in d["alphas"]))
    if kind == "skew":
        return SkewProduct2(float(d["alpha"]))
    if kind == "identity":
        return Identity(int(d["dim"]))
    if kind == "product":
        return Product(tuple(_system_from_json(f) for f in d["factors"]))
    raise UsageError(f"unknown system type {kind!r}")


_CONSTANTS = {
    "sqrt2-1": math.sqrt(2.0) - 1.0,
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
    "sqrt3-1": math.sqrt(3.0) - 1.0,
}


def _num(text: str) -> float:
    text = text.strip()
    if text in _CONSTANTS:
        return _CONSTANTS[text]
    return float(text)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(_num(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc
    return vals


def _ladder(text: str) -> tuple[int, ...]:
    Ns = _ints(text)
    if not Ns or Ns[0] < 1 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise UsageError("Ns must be strictly increasing positive integers")
    _budget(Ns[-1])
    return Ns


def _budget(N: int, limit: int = MAX_N) -> int:
    if N < 1:
        raise UsageError("N must be positive")
    if N > limit:
        raise UsageError(f"N={N} exceeds the budget {limit}")
    return N


def _observable(text: str | None, dim: int) -> Observable:
    if text is None:
        freq = [0] * dim
        freq[-1] = 1
        return Observable.character(freq)
    terms = []
    for chunk in text.split(";"):
        freq, _, coef = chunk.partition("@")
        terms.append((_ints(freq), complex(coef) if coef else 1.0))
    obs = Observable(tuple(terms))
    if obs.dimension != dim:
        raise UsageError("observable dimension does not match the system")
    return obs


def read_sequence(path: str) -> tuple[BoundedSequence, float]:
    """CSV with columns re,im; the bound is the max modulus."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not rows or not {"re", "im"} <= set(rows[0]):
        raise UsageError(f"{path}: expected columns re,im")
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    bound = float(np.max(np.abs(vals)))
    return BoundedSequence(vals, bound), bound


def _box_set(text: str, dim: int) -> BoxSet:
    # "lo:hi,lo:hi;..." boxes separated by ';', coordinates by ','
    boxes = []
    for chunk in text.split(";"):
        box = []
        for iv in chunk.split(","):
            lo, _, hi = iv.partition(":")
            box.append((float(lo), float(hi)))
        boxes.append(box)
    A = BoxSet.from_intervals(boxes)
    if A.dimension != dim:
        raise UsageError("set dimension does not match the systems")
    return A


# ---------------------------------------------------------------------------
# subcommands; each returns (Report, check_passed)

def cmd_orbit(args) -> tuple[Report, bool]:
    T = parse_system(args.system)
    x = _floats(args.point)
    N = _budget(args.N, 1 << 20)
    cfg = {"system": args.system, "point": x, "N": N, "observable": args.observable}
    if args.observable is None:
        pts = iterate_many(T, np.asarray(x), np.arange(N, dtype=np.int64))
        return Report("orbit", cfg, {"points": pts.tolist()}), True
    seq = orbit_sequence(T, x, _observable(args.observable, T.dimension), N)
    rep = Report("orbit", cfg, {"values": list(seq.values)})
    rep.csv_kind, rep.csv_rows = "series", [(n, v.real, v.imag) for n, v in enumerate(seq.values)]
    return rep, True


def cmd_average(args) -> tuple[Report, bool]:
    Ns = _ladder(args.Ns)
    cfg = {"Ns": Ns, "method": args.method}
    weights = []
    for name in ("a", "b"):
        path = getattr(args, name)
        if path:
            seq, bound = read_sequence(path)
            cfg[f"{name}_file"], cfg[f"{name}_bound"] = path, bound
        else:
            seq = BoundedSequence.ones(Ns[-1])
        weights.append(seq)
    a, b = weights
    if args.c:
        c, bound = read_sequence(args.c)
        cfg["c_file"], cfg["c_bound"] = args.c, bound
        series = CesaroSeries(Ns, tuple(cube_average_2(a, b, c, N, method=args.method) for N in Ns))
    else:
        if not (args.system and args.point):
            raise UsageError("give --c FILE or --system and --point")
        T = parse_system(args.system)
        x = _floats(args.point)
        cfg.update(system=args.system, point=x, observable=args.observable)
        series = weighted_series(a, b, T, _observable(args.observable, T.dimension), x, Ns)
    rep = Report("average", cfg, {
        "series": [{"N": N, "value": v} for N, v in zip(series.Ns, series.values)],
        "increments": series.increments(),
    })
    rep.csv_kind, rep.csv_rows = "series", series_rows(series)
    return rep, True


def _input_sequence(args, N: int, cfg: dict) -> BoundedSequence:
    if args.seq:
        seq, bound = read_sequence(args.seq)
        cfg["seq_file"], cfg["seq_bound"] = args.seq, bound
        return seq
    alpha = _num(args.weyl)
    cfg["weyl_alpha"] = alpha
    return weyl_sequence(alpha, N)


def cmd_ww_sup(args) -> tuple[Report, bool]:
    N = _budget(args.N)
    cfg = {"N": N, "grid_factor": args.grid_factor, "refine_tol": args.refine_tol}
    seq = _input_sequence(args, N, cfg)
    rep = ww_sup(seq, TwistedSumSpec.standard(N), args.grid_factor, args.refine_tol)
    return Report("ww-sup", cfg, {
        "sup_value": rep.sup_value, "argmax_t": rep.argmax_t,
        "grid_size": rep.grid_size, "refined": rep.refined,
    }), True


def cmd_ww1(args) -> tuple[Report, bool]:
    Ns = _ladder(args.Ns)
    cfg = {"Ns": Ns, "grid": args.grid}
    seq = _input_sequence(args, Ns[-1], cfg)
    defect = ww1_defect(seq, np.arange(args.grid) / args.grid, Ns)
    return Report("ww1", cfg, {"defect": defect}), True


def cmd_lemma1(args) -> tuple[Report, bool]:
    N = _budget(args.N, 1 << 16)
    cfg = {"which": 1, "N": N, "trials": args.trials, "seed": args.seed,
           "kind": args.kind, "ranges": args.ranges, "tolerance": args.tolerance}
    children = np.random.SeedSequence(args.seed).spawn(args.trials)
    rows, margins = [], []
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        a, b, c = random_sequences(rng, 3, 2 * N, args.kind)
        m = lemma1_margin(a, b, c, N, ranges=args.ranges)
        rows.append((f"trial{k}", m.lhs, m.rhs, m.margin))
        margins.append(m.margin)
    worst = int(np.argmin(margins))
    ok = margins[worst] >= -args.tolerance
    rep = Report("lemma-check", cfg, {
        "min_margin": margins[worst], "argmin_trial": worst, "passed": ok,
    })
    rep.csv_kind, rep.csv_rows = "margins", rows
    return rep, ok


def cmd_lemma2(args) -> tuple[Report, bool]:
    Ns = _ladder(args.Ns)
    for N in Ns:
        _budget(N, 256)
    cfg = {"which": 2, "Ns": Ns, "trials": args.trials, "seed": args.seed, "kind": args.kind}
    table = empirical_C_table(args.trials, Ns, args.seed, args.kind)
    ok = all(math.isfinite(v) for v in table.values())
    return Report("lemma-check", cfg, {
        "C_emp": {str(N): v for N, v in table.items()}, "finite": ok,
    }), ok


def cmd_lemma(args) -> tuple[Report, bool]:
    if args.which == 1:
        if args.N is None:
            raise UsageError("lemma-check 1 needs --N")
        return cmd_lemma1(args)
    return cmd_lemma2(args)


def cmd_recurrence(args) -> tuple[Report, bool]:
    systems = [parse_system(s) for s in args.systems]
    need = 2 if args.which == 2 else 3
    if len(systems) != need:
        raise UsageError(f"recurrence {args.which} needs {need} systems")
    dims = {T.dimension for T in systems}
    if len(dims) != 1:
        raise UsageError("systems must share a dimension")
    A = _box_set(args.set, dims.pop())
    Ns = _ladder(args.Ns)
    for N in Ns:
        _budget(N, 4096)
    mc = MCConfig(samples=args.samples, seed=args.seed)
    fn = khintchine2_series if args.which == 2 else khintchine3_series
    rep = fn(*systems, A, Ns, mc, method=args.method)
    cfg = {"which": args.which, "systems": list(args.systems), "set": args.set, "Ns": Ns,
           "method": args.method}
    results = {
        "muA": rep.muA,
        "series": [{"N": N, "value": v} for N, v in zip(rep.Ns, rep.series_values)],
        "limit_estimate": rep.limit_estimate,
        "uncertainty": rep.uncertainty,
        "lower_bound": rep.lower_bound,
        "bound_name": rep.bound_name,
        "satisfied": "not-applicable" if rep.satisfied is None else rep.satisfied,
        "convention": rep.convention,
    }
    if rep.path == "monte-carlo":
        results.update(samples=rep.samples, seed=rep.seed)
    results.update(rep.extra)
    out = Report("recurrence", cfg, results, path=rep.path)
    out.csv_kind = "series"
    out.csv_rows = [(N, v, 0.0) for N, v in zip(rep.Ns, rep.series_values)]
    return out, rep.satisfied is not False


def cmd_roots(args) -> tuple[Report, bool]:
    if args.tol <= 0:
        raise UsageError("tol must be positive")
    value = threshold_root(args.which, args.tol)
    x = 1.0 - value if args.which == "delta" else value
    poly = 0.5 * x ** 7 + x - 1.0 if args.which == "delta" else x ** 7 + x - 1.0
    return Report("roots", {"which": args.which, "tol": args.tol}, {
        "value": value, "polynomial_root": x, "residual": poly,
    }), True


def cmd_counterexample(args) -> tuple[Report, bool]:
    alpha = _num(args.alpha)
    if args.which == "prop7":
        N = _budget(args.N, 1 << 20)
        inst = Prop7Instance(alpha=alpha, x=_floats(args.point) if args.point else Prop7Instance.x,
                             growth=args.growth)
        chk = prop7_check(inst, N)
        Ns = [args.growth ** k for k in range(1, 64) if args.growth ** k <= N]
        osc = prop7_divergence(inst, Ns) if Ns else 0.0
        control_Ns = [n for n in CONTROL_LADDER if n <= N] or [N]
        ctrl = prop7_control(inst, control_Ns)
        ok = chk["diff"] < args.tolerance and osc >= 0.5
        cfg = {"which": "prop7", "N": N, "alpha": alpha, "point": inst.x, "growth": args.growth,
               "tolerance": args.tolerance}
        return Report("counterexample", cfg, {
            **chk, "oscillation_Ns": Ns, "oscillation": osc,
            "control_Ns": control_Ns, "control_oscillation": ctrl, "passed": ok,
        }), ok
    if args.which == "prop9":
        N = _budget(args.N, PROP9_BUDGET)
        inst = Prop9Instance(alpha=alpha, point=_floats(args.point) if args.point else Prop9Instance.point,
                             growth=args.growth)
        chk = prop9_check(inst, N)
        results = {**chk, "quadratic_identity": quadratic_identity_holds(seed=args.seed)}
        ok = chk["diff"] < args.tolerance and results["quadratic_identity"]
        if args.ww1:
            defects = prop9_weight_defects(inst)
            results["ww1_defects"] = defects
            ok = ok and max(defects.values()) < 0.1
        results["passed"] = ok
        cfg = {"which": "prop9", "N": N, "alpha": alpha, "point": inst.point, "growth": args.growth,
               "tolerance": args.tolerance, "seed": args.seed, "ww1": args.ww1}
        return Report("counterexample", cfg, results), ok
    N = _budget(args.N)
    x = _floats(args.point) if args.point else Prop7Instance.x
    rep = uniform_ww_failure(x, alpha, N)
    ctrl = uniform_ww_control(x[2:], alpha, N)
    ok = abs(rep.sup_value - 1.0) <= args.tolerance
    cfg = {"which": "uniform-ww", "N": N, "alpha": alpha, "point": x, "tolerance": args.tolerance}
    return Report("counterexample", cfg, {
        "sup_value": rep.sup_value, "argmax_t": rep.argmax_t,
        "expected_argmax": (-(x[2] - x[0])) % 1.0,
        "control_sup": ctrl.sup_value, "passed": ok,
    }), ok


def cmd_theorem1(args) -> tuple[Report, bool]:
    Ns = _ladder(args.Ns)
    for N in Ns:
        _budget(N, 1024)
    a1, a2 = THEOREM1_ALPHAS
    f = Observable.character((0, 1))
    if args.rotations:
        alphas = [(a1, a2) if k % 2 == 0 else (a2, a1) for k in range(6)]
        systems = [Rotation(al) for al in alphas]
        fs = [Observable.character((1, 1))] * 6
    else:
        systems = [SkewProduct2(a1 if k % 2 == 0 else a2) for k in range(6)]
        fs = [f] * 6
    series = theorem1_series(systems, fs, THEOREM1_POINT, Ns)
    incs = series.increments()
    results = {
        "series": [{"N": N, "value": v} for N, v in zip(series.Ns, series.values)],
        "increments": incs,
        "commutator_defect": commutator_defect(systems[0], systems[1], THEOREM1_POINT),
    }
    if args.rotations:
        oracle = [theorem1_rotation_closed_form(alphas, fs, THEOREM1_POINT, N) for N in Ns]
        results["closed_form_diff"] = max(abs(o - v) for o, v in zip(oracle, series.values))
    cfg = {"Ns": Ns, "rotations": args.rotations, "alphas": THEOREM1_ALPHAS, "point": THEOREM1_POINT}
    rep = Report("theorem1", cfg, results)
    rep.csv_kind, rep.csv_rows = "series", series_rows(series)
    return rep, True


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--workers", type=int, help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    common.add_argument("--timing", action="store_true", help="record wall time in the report")

    p = argparse.ArgumentParser(prog="cubeavg", description="Multilinear cube averages on torus systems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("orbit", parents=[common], help="orbit points or observable values")
    s.add_argument("--system", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--observable", help="freq[@coef];... e.g. 0,1 or 0,1@0.5;1,0")
    s.set_defaults(func=cmd_orbit)

    s = sub.add_parser("average", parents=[common], help="weighted two-index average series")
    s.add_argument("--Ns", required=True)
    s.add_argument("--a")
    s.add_argument("--b")
    s.add_argument("--c")
    s.add_argument("--system")
    s.add_argument("--point")
    s.add_argument("--observable")
    s.add_argument("--method", choices=("convolution", "naive"), default="convolution")
    s.set_defaults(func=cmd_average)

    for name, func, text in (
        ("ww-sup", cmd_ww_sup, "sup over t of a normalized twisted sum"),
        ("ww1", cmd_ww1, "uniform Cauchy defect of twisted averages"),
    ):
        s = sub.add_parser(name, parents=[common], help=text)
        src = s.add_mutually_exclusive_group()
        src.add_argument("--seq", help="CSV with columns re,im")
        src.add_argument("--weyl", default="sqrt2-1", help="alpha for e(n^2 alpha)")
        if name == "ww-sup":
            s.add_argument("--N", type=int, required=True)
            s.add_argument("--grid-factor", type=int, default=8)
            s.add_argument("--refine-tol", type=float, default=1e-10)
        else:
            s.add_argument("--Ns", default="1024,2048,4096")
            s.add_argument("--grid", type=int, default=256)
        s.set_defaults(func=func)

    s = sub.add_parser("lemma-check", parents=[common], help="randomized finite-N inequality checks")
    s.add_argument("which", type=int, choices=(1, 2))
    s.add_argument("--N", type=int)
    s.add_argument("--Ns", default="16,32,64")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kind", choices=("unit", "sign"), default="unit")
    s.add_argument("--ranges", choices=("printed", "aligned"), default="printed")
    s.add_argument("--tolerance", type=float, default=1e-9)
    s.set_defaults(func=cmd_lemma)

    s = sub.add_parser("recurrence", parents=[common], help="recurrence series and lower bounds")
    s.add_argument("which", type=int, choices=(2, 3))
    s.add_argument("--systems", nargs="+", required=True)
    s.add_argument("--set", default="0:0.5", help="boxes lo:hi,...;... (lo > hi wraps)")
    s.add_argument("--Ns", default="64,128,256,512")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", choices=("auto", "exact", "monte-carlo"), default="auto")
    s.set_defaults(func=cmd_recurrence)

    s = sub.add_parser("roots", parents=[common], help="threshold roots by bisection")
    s.add_argument("--which", choices=("delta", "beta"), default="delta")
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_roots)

    s = sub.add_parser("counterexample", parents=[common], help="divergence witnesses")
    s.add_argument("which", choices=("prop7", "prop9", "uniform-ww"))
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--alpha", default="sqrt2-1")
    s.add_argument("--point")
    s.add_argument("--growth", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ww1", action="store_true", help="also run the weight WW1 defects (prop9)")
    s.add_argument("--tolerance", type=float, default=None)
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("theorem1", parents=[common], help="six-slot cube average series")
    s.add_argument("--Ns", default="16,32,64,128,256")
    s.add_argument("--rotations", action="store_true", help="rotation-only config with closed-form oracle")
    s.set_defaults(func=cmd_theorem1)
    return p


_CE_DEFAULTS = {"prop7": (4096, 1e-10), "prop9": (64, 1e-9), "uniform-ww": (4096, 1e-9)}


def run(argv: Sequence[str] | None = None, stream=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "counterexample":
        N, tol = _CE_DEFAULTS[args.which]
        args.N = N if args.N is None else args.N
        args.tolerance = tol if args.tolerance is None else args.tolerance
    if args.workers is not None:
        if args.workers < 1:
            print("error: --workers must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ[WORKERS_ENV] = str(args.workers)
    start = time.perf_counter()
    try:
        report, ok = args.func(args)
        if args.timing:
            report.wall_time = time.perf_counter() - start
        emit(report, args.format, args.output, stream)
    except (UsageError, ValueError, TypeError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if ok else EXIT_CHECK


def main() -> None:
    sys.exit(run())
