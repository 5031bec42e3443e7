"""Command-line front end.

    python -m heattrace eval           --triple T.json --out DIR
    python -m heattrace traces         --triple T.json --out DIR   (or --field solution.csv)
    python -m heattrace roundtrip      --triple T.json [--mutation NAME]
    python -m heattrace oracle-compare --triple T.json
    python -m heattrace kernel-check   [--mutation NAME]

Every command accepts ``--config PATH`` (JSON, see RunConfig), ``--seed``,
``--strict`` and ``--fixture NAME`` in place of ``--triple``. The
environment variable HEATTRACE_TOL_SCALE multiplies every tolerance.

Exit codes: 0 pass, 1 check failure, 2 usage or schema error,
3 requested tolerance not achievable.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import __version__
from .domain import DomainError, make_domain
from .fdsolve import fd_data_from_triple, fd_solve
from .fixtures import FIXTURES, get_fixture
from .kernels import KernelEvaluator, green_1d, normal_1d
from .measures import MeasureError, TraceTriple, parse_triple_text, triple_to_dict
from .representation import Evaluation, RepresentationConfig, SolutionField, evaluate_on_grid, solution_field
from .traces import ExtractionSchedule, TraceError, extract_traces
from .verify import KERNEL_MUTATIONS, ROUNDTRIP_MUTATIONS, SuiteReport, _probes, kernel_check, oracle_compare, roundtrip

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_UNACHIEVABLE = 0, 1, 2, 3
CONFIG_SCHEMA = "heattrace.config/1"
TOL_ENV = "HEATTRACE_TOL_SCALE"
ROUNDING_FLOOR = 1e-14  # no kernel or quadrature value is certified below this relative level


class UsageError(Exception):
    pass


class Unachievable(Exception):
    pass


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class DomainSpec:
    kind: str = "interval"
    bounds: tuple = (0.0, float(np.pi))
    epsilon0: float = 0.3


@dataclass(frozen=True)
class Tolerances:
    kernel: float = 1e-10
    quadrature: float = 1e-9
    mu_relative_l1: float = 0.02
    lambda_absolute: float = 1e-3
    nu_bin_relative: float = 0.02
    noise_floor: float = 1e-3
    oracle_relative: float = 1e-3


@dataclass(frozen=True)
class ScheduleSpec:
    t0: float = 0.005
    levels: int = 8
    bins: int = 16


@dataclass(frozen=True)
class GridSpec:
    nx: int = 64
    nt: int = 64
    t_min: float = 0.01
    t_max: float = 1.0
    x_margin: float = 0.0  # fraction of the length kept clear of each end


@dataclass(frozen=True)
class OracleSpec:
    h: float = 1 / 256
    k: float = 1 / 256
    probes: int = 20
    t_min: float = 0.05


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec = field(default_factory=DomainSpec)
    horizon: float = 1.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    kernel_probes: int = 100
    seed: int = 0

    def validate(self):
        for f in dataclasses.fields(self.tolerances):
            if not getattr(self.tolerances, f.name) > 0:
                raise UsageError(f"config tolerances.{f.name} must be positive")
        if self.horizon <= 0:
            raise UsageError("config horizon must be positive")
        if self.schedule.levels < 3 or self.schedule.t0 <= 0 or self.schedule.t0 >= self.horizon:
            raise UsageError("config schedule: need levels >= 3 and 0 < t0 < horizon")
        if self.schedule.bins < 1:
            raise UsageError("config schedule.bins must be >= 1")
        g = self.grid
        if g.nx < 1 or g.nt < 1 or not 0 <= g.x_margin < 0.5:
            raise UsageError("config grid: need nx, nt >= 1 and 0 <= x_margin < 0.5")
        if not (0 < g.t_min <= g.t_max <= self.horizon):
            raise UsageError(f"config grid: times must satisfy 0 < t_min <= t_max <= horizon, got [{g.t_min}, {g.t_max}]")
        o = self.oracle
        if o.h <= 0 or o.k <= 0 or o.probes < 1:
            raise UsageError("config oracle: need h, k > 0 and probes >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def sha256(self) -> str:
        return hashlib.sha256(_dumps(self.to_dict()).encode()).hexdigest()


_SECTIONS = {"domain": DomainSpec, "tolerances": Tolerances, "schedule": ScheduleSpec, "grid": GridSpec,
             "oracle": OracleSpec}


def _section(cls, obj, where):
    if not isinstance(obj, dict):
        raise UsageError(f"config {where}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(obj) - set(names)
    if unknown:
        raise UsageError(f"config {where}: unknown key(s) {sorted(unknown)}")
    kw = {}
    for k, v in obj.items():
        default = getattr(cls(), k)
        try:
            if isinstance(default, tuple):
                kw[k] = tuple(float(_num(x)) for x in v)
            elif isinstance(default, bool) or isinstance(default, str):
                kw[k] = type(default)(v)
            elif isinstance(default, int):
                if isinstance(v, bool) or int(v) != v:
                    raise ValueError
                kw[k] = int(v)
            else:
                kw[k] = float(_num(v))
        except (TypeError, ValueError):
            raise UsageError(f"config {where}.{k}: invalid value {v!r}") from None
    return cls(**kw)


def _num(v):
    if isinstance(v, str) and v.strip() == "pi":
        return np.pi
    return float(v)


def config_from_dict(obj: dict) -> RunConfig:
    if not isinstance(obj, dict):
        raise UsageError("config: expected a JSON object")
    obj = dict(obj)
    schema = obj.pop("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise UsageError(f"config schema: expected {CONFIG_SCHEMA!r}, got {schema!r}")
    kw = {}
    for k, v in obj.items():
        if k in _SECTIONS:
            kw[k] = _section(_SECTIONS[k], v, k)
        elif k in ("horizon",):
            kw[k] = float(_num(v))
        elif k in ("seed", "kernel_probes"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise UsageError(f"config {k}: expected an integer")
            kw[k] = v
        else:
            raise UsageError(f"config: unknown key {k!r}")
    return RunConfig(**kw)


def load_config(path: str | None, seed: int | None = None) -> RunConfig:
    cfg = RunConfig()
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        cfg = config_from_dict(obj)
    scale = os.environ.get(TOL_ENV)
    if scale:
        try:
            c = float(scale)
        except ValueError:
            raise UsageError(f"{TOL_ENV}={scale!r} is not a number") from None
        if c <= 0:
            raise UsageError(f"{TOL_ENV} must be positive")
        tol = cfg.tolerances
        cfg = dataclasses.replace(cfg, tolerances=Tolerances(
            **{f.name: getattr(tol, f.name) * c for f in dataclasses.fields(tol)}))
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    cfg.validate()
    return cfg


def check_achievable(cfg: RunConfig):
    """Budget arithmetic: a check cannot be certified tighter than the
    evaluations it consumes, and no evaluation below rounding level."""
    t = cfg.tolerances
    problems = []
    if t.kernel < ROUNDING_FLOOR:
        problems.append(f"kernel tolerance {t.kernel:g} is below the rounding floor {ROUNDING_FLOOR:g}")
    if t.quadrature < max(t.kernel, ROUNDING_FLOOR):
        problems.append(f"quadrature tolerance {t.quadrature:g} is below the kernel tolerance {t.kernel:g}")
    for name in ("mu_relative_l1", "lambda_absolute", "nu_bin_relative", "noise_floor", "oracle_relative"):
        if getattr(t, name) < t.quadrature:
            problems.append(f"acceptance tolerance {name}={getattr(t, name):g} is below the quadrature tolerance "
                            f"{t.quadrature:g}")
    if problems:
        raise Unachievable("; ".join(problems))


# ------------------------------------------------------------------ I/O

def _dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


class Output:
    """Collects output files and writes them with a manifest."""

    def __init__(self, out: str | None, command: str, cfg: RunConfig, inputs: dict):
        self.dir = Path(out) if out else None
        self.command = command
        self.cfg = cfg
        self.inputs = inputs
        self.files = {}
        self.anchors = {}

    def add(self, name: str, text: str, anchor: str):
        self.files[name] = text
        self.anchors[name] = anchor

    def write(self):
        if self.dir is None:
            return
        for p in self.inputs.values():
            if p.get("path") and Path(p["path"]).resolve().parent == self.dir.resolve() and \
                    Path(p["path"]).name in set(self.files) | {"manifest.json"}:
                raise UsageError(f"output would overwrite input {p['path']}")
        self.dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "schema": "heattrace.manifest/1",
            "command": self.command,
            "version": __version__,
            "config": self.cfg.to_dict(),
            "config_sha256": self.cfg.sha256(),
            "inputs": {k: {kk: vv for kk, vv in v.items() if kk != "path"} for k, v in self.inputs.items()},
            "outputs": {name: {"sha256": hashlib.sha256(text.encode()).hexdigest(), "contains": self.anchors[name]}
                        for name, text in sorted(self.files.items())},
        }
        for name, text in sorted(self.files.items()):
            (self.dir / name).write_text(text, encoding="utf-8")
        (self.dir / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")


def _domain(cfg: RunConfig):
    try:
        return make_domain(cfg.domain.kind, cfg.domain.bounds, cfg.domain.epsilon0)
    except DomainError as exc:
        raise UsageError(f"config domain: {exc}") from None


def _load_source(args, cfg, d, required=True):
    if getattr(args, "triple", None) and getattr(args, "fixture", None):
        raise UsageError("give either --triple or --fixture, not both")
    if getattr(args, "fixture", None):
        tr = get_fixture(args.fixture) if args.fixture in FIXTURES else None
        if tr is None:
            raise UsageError(f"unknown fixture {args.fixture!r}; known: {', '.join(sorted(FIXTURES))}")
        text = json.dumps(triple_to_dict(tr), sort_keys=True)
        info = {"fixture": args.fixture, "sha256": hashlib.sha256(text.encode()).hexdigest()}
    elif getattr(args, "triple", None):
        try:
            text = Path(args.triple).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read triple {args.triple}: {exc.strerror}") from None
        try:
            tr = parse_triple_text(text, d)
        except (MeasureError, DomainError) as exc:
            raise UsageError(f"{args.triple}: {exc}") from None
        info = {"path": args.triple, "file": Path(args.triple).name, "sha256": hashlib.sha256(text.encode()).hexdigest()}
    elif required:
        raise UsageError("a solution source is required: --triple PATH or --fixture NAME")
    else:
        return None, {}
    if abs(tr.horizon - cfg.horizon) > 1e-12 * cfg.horizon:
        raise UsageError(f"triple horizon {tr.horizon} differs from config horizon {cfg.horizon}")
    return tr, {"triple": info}


def _rep_cfg(cfg: RunConfig) -> RepresentationConfig:
    return RepresentationConfig(tolerance=cfg.tolerances.quadrature, kernel_tolerance=cfg.tolerances.kernel)


def _schedule(cfg: RunConfig, d) -> ExtractionSchedule:
    j = np.arange(cfg.schedule.levels)
    return ExtractionSchedule(tuple(d.epsilon0 * 0.5 ** j), tuple(cfg.schedule.t0 * 0.5 ** j))


def _report_files(out: Output, rep: SuiteReport):
    out.add("report.json", _dumps(rep.to_dict()), "suite checks with anchors, measured values and tolerances")
    out.add("report.txt", rep.table() + "\n", "human-readable table of the same checks")


# ------------------------------------------------------------------ commands

def cmd_eval(args, cfg: RunConfig) -> int:
    d = _domain(cfg)
    tr, inputs = _load_source(args, cfg, d)
    g = cfg.grid
    a, b = d.bounds
    m = g.x_margin * (b - a)
    if g.nx == 1:
        xs = np.array([0.5 * (a + b)])
    elif m > 0:
        xs = np.linspace(a + m, b - m, g.nx)
    else:
        xs = np.linspace(a, b, g.nx + 2)[1:-1]
    ts = np.linspace(g.t_min, g.t_max, g.nt)
    if g.t_max > tr.horizon:
        raise UsageError("grid reaches beyond the horizon")
    try:
        fld = evaluate_on_grid(tr, d, xs, ts, _rep_cfg(cfg))
    except DomainError as exc:
        raise UsageError(f"grid rejected: {exc}") from None
    _, _, values, errors = fld.grid_cache
    rows = [(float(x), float(t), float(values[i, j]), float(errors[i, j]))
            for i, t in enumerate(ts) for j, x in enumerate(xs)]
    out = Output(args.out, "eval", cfg, inputs)
    out.add("solution.csv", _csv_text(["x", "t", "u", "err"], rows),
            "u(x,t) from the representation formula (bottom, corner and lateral kernel terms) with error bounds")
    out.write()
    worst = float(errors.max()) if errors.size else 0.0
    print(f"eval: {len(rows)} points, max |u| {np.abs(values).max() if values.size else 0:.6g}, "
          f"max error estimate {worst:.3e}")
    if worst > cfg.tolerances.quadrature:
        raise Unachievable(f"error estimate {worst:.3e} exceeds the requested tolerance {cfg.tolerances.quadrature:.3e}")
    return EXIT_PASS


def _field_from_csv(path: str, d, horizon: float) -> SolutionField:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read sampled field {path}: {exc}") from None
    if data.shape[1] < 3:
        raise UsageError(f"{path}: expected columns x,t,u[,err]")
    xs, ts = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(xs) * len(ts) != len(data) or len(xs) < 4 or len(ts) < 4:
        raise UsageError(f"{path}: samples must form a tensor grid with at least 4 points per axis")
    order = np.lexsort((data[:, 0], data[:, 1]))
    vals = data[order, 2].reshape(len(ts), len(xs))
    a, b = d.bounds
    # the solution vanishes at the ends only when there is no lateral data; keep the
    # samples as given and extrapolate linearly in x toward the ends
    interp = RegularGridInterpolator((ts, xs), vals, method="cubic", bounds_error=False, fill_value=None)

    def ev(x, t):
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        v = interp(np.stack([np.clip(t.ravel(), ts[0], ts[-1]), x.ravel()], axis=-1)).reshape(x.shape)
        return Evaluation(np.maximum(v, 0.0), np.zeros(x.shape))
    return SolutionField(d, horizon, ev, time_floor=float(ts[0]))


def cmd_traces(args, cfg: RunConfig) -> int:
    d = _domain(cfg)
    if args.field and (args.triple or args.fixture):
        raise UsageError("give one solution source: --triple, --fixture or --field")
    if args.field:
        u = _field_from_csv(args.field, d, cfg.horizon)
        text = Path(args.field).read_bytes()
        inputs = {"field": {"path": args.field, "file": Path(args.field).name,
                            "sha256": hashlib.sha256(text).hexdigest()}}
    else:
        tr, inputs = _load_source(args, cfg, d)
        u = solution_field(tr, d, _rep_cfg(cfg))
    sched = _schedule(cfg, d)
    T = cfg.horizon
    edges = np.linspace(0.05 * T, 0.95 * T, cfg.schedule.bins + 1)
    try:
        rep = extract_traces(u, sched, edges)
    except (TraceError, ValueError) as exc:
        hint = " (raise schedule.t0 or lower schedule.levels in --config)" if "floor" in str(exc) else ""
        print(f"traces: extraction failed: {exc}{hint}", file=sys.stderr)
        return EXIT_FAIL
    di, dl = rep.diagnostics["initial"], rep.diagnostics["lateral"]
    est = TraceTriple(rep.mu_estimate, rep.lambda_estimate, rep.nu_estimate, T)
    flags = []
    noise = cfg.tolerances.noise_floor
    for side, s in dl["sides"].items():
        bad = np.nonzero(s["error"] > np.maximum(cfg.tolerances.nu_bin_relative * np.abs(s["mass"]), noise))[0]
        if bad.size:
            flags.append(f"lateral {side}: bins {bad.tolist()} did not converge")
    if di["affine_fit_residual"] > noise:
        flags.append(f"initial trace: affine fit residual {di['affine_fit_residual']:.3e} above noise floor")
    warnings = []
    orders = np.concatenate([np.atleast_1d(s["order"]) for s in dl["sides"].values()])
    orders = orders[np.isfinite(orders)]
    if orders.size and (orders.min() < 0.5 or orders.max() > 3.0):
        warnings.append(f"empirical lateral orders span [{orders.min():.2f}, {orders.max():.2f}]")
    doc = {
        "schema": "heattrace.traces/1",
        "estimate": triple_to_dict(est),
        "diagnostics": {
            "lambda_raw": di["lambda_raw"],
            "affine_fit_residual": di["affine_fit_residual"],
            "min_second_difference": di["min_second_difference"],
            "w_star_max_error": float(np.max(di["w_star_error"])),
            "lateral_max_error": {side: float(np.max(s["error"])) for side, s in dl["sides"].items()},
            "lateral_spikes": {side: s["spikes"] for side, s in dl["sides"].items()},
            "flags": flags,
            "warnings": warnings,
        },
    }
    out = Output(args.out, "traces", cfg, inputs)
    out.add("traces.json", _dumps(doc),
            "estimated initial trace (mu, lambda) and lateral trace nu histogram, with convergence flags")
    out.add("w_star.csv", _csv_text(["x", "w_star", "error"],
                                    zip(di["xs"].tolist(), di["w_star"].tolist(), di["w_star_error"].tolist())),
            "t -> 0 limit of the Green potential of u(., t); its negative second difference is the mu density")
    rows, table = [], []
    for side, s in dl["sides"].items():
        for i in range(len(edges) - 1):
            rows.append((side, float(edges[i]), float(edges[i + 1]), float(s["mass"][i]), float(s["error"][i]),
                         float(s["order"][i])))
            for j, eps in enumerate(dl["epsilons"]):
                table.append((side, i, float(eps), float(s["table"][j, i])))
    out.add("lateral_bins.csv", _csv_text(["side", "t_lo", "t_hi", "mass", "error", "order"], rows),
            "lateral trace mass per time bin, extrapolated from shrinking boundaries")
    out.add("lateral_table.csv", _csv_text(["side", "bin", "eps", "mass"], table),
            "boundary integrals per bin at each eps of the schedule (convergence table)")
    out.write()
    lam = rep.lambda_estimate
    print(f"traces: lambda left {lam.mass_at('left'):.6g}, right {lam.mass_at('right'):.6g}; "
          f"nu bins per side {len(edges) - 1}; flags {len(flags)}, warnings {len(warnings)}")
    for f_ in flags + warnings:
        print("  " + f_)
    if flags or (args.strict and warnings):
        return EXIT_FAIL
    return EXIT_PASS


def _finish(rep: SuiteReport, args, cfg, inputs, command) -> int:
    out = Output(args.out, command, cfg, inputs)
    _report_files(out, rep)
    out.write()
    print(rep.table())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_roundtrip(args, cfg: RunConfig) -> int:
    d = _domain(cfg)
    tr, inputs = _load_source(args, cfg, d)
    if args.mutation and args.mutation not in ROUNDTRIP_MUTATIONS:
        raise UsageError(f"unknown mutation {args.mutation!r}; known: {', '.join(sorted(ROUNDTRIP_MUTATIONS))}")
    t = cfg.tolerances
    T = cfg.horizon
    rep = roundtrip(tr, d, mutation=args.mutation, sched=_schedule(cfg, d), cfg=_rep_cfg(cfg),
                    edges=np.linspace(0.05 * T, 0.95 * T, cfg.schedule.bins + 1),
                    mu_tol=t.mu_relative_l1, lam_tol=t.lambda_absolute, nu_tol=t.nu_bin_relative,
                    noise_floor=t.noise_floor)
    if args.mutation:
        inputs = dict(inputs, mutation={"name": args.mutation})
    return _finish(rep, args, cfg, inputs, "roundtrip")


def cmd_oracle_compare(args, cfg: RunConfig) -> int:
    d = _domain(cfg)
    tr, inputs = _load_source(args, cfg, d)
    o = cfg.oracle
    probes = _probes(d, tr.horizon, o.probes, cfg.seed, o.t_min)
    try:
        rep = oracle_compare(tr, d, o.h, o.k, probes=probes, rel_tol=cfg.tolerances.oracle_relative, cfg=_rep_cfg(cfg))
        # a priori budget: the oracle's own discretisation error, from a solve at half the steps
        u0, gl, gr = fd_data_from_triple(tr, d, o.h / 2)
        fine = fd_solve(d, u0, gl, gr, tr.horizon, o.h / 2, o.k / 2)(probes[:, 0], probes[:, 1])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    coarse = rep.extra["fd"]
    fd_err = 4.0 / 3.0 * np.abs(coarse - fine)
    need = cfg.tolerances.oracle_relative * np.abs(coarse)
    code = _finish(rep, args, cfg, inputs, "oracle-compare")
    worst = float(np.max(fd_err / np.maximum(need, 1e-300)))
    if worst > 1.0:
        print(f"oracle-compare: the finite-difference error estimate exceeds the requested relative tolerance "
              f"by a factor {worst:.3g}; tolerance not achievable at h={o.h:g}, k={o.k:g}", file=sys.stderr)
        return EXIT_UNACHIEVABLE
    return code


def cmd_kernel_check(args, cfg: RunConfig) -> int:
    d = _domain(cfg)
    if args.mutation and args.mutation not in KERNEL_MUTATIONS:
        raise UsageError(f"unknown mutation {args.mutation!r}; known: {', '.join(sorted(KERNEL_MUTATIONS))}")
    k = KernelEvaluator(d, tolerance=cfg.tolerances.kernel)
    rep = kernel_check(d, k, n_probes=cfg.kernel_probes, seed=cfg.seed, mutation=args.mutation)
    out = Output(args.out, "kernel-check", cfg, {"mutation": {"name": args.mutation}} if args.mutation else {})
    _report_files(out, rep)
    # probe table of G and the left normal derivative
    rng = np.random.default_rng(cfg.seed)
    a, b = d.bounds
    L = b - a
    x = rng.uniform(0.02, 0.98, cfg.kernel_probes) * L
    y = rng.uniform(0.02, 0.98, cfg.kernel_probes) * L
    tau = 10 ** rng.uniform(-3, 0, cfg.kernel_probes)
    g = green_1d(x, y, tau, L, tol=k.tolerance)
    n = normal_1d(x, tau, L, tol=k.tolerance)
    rows = zip((x + a).tolist(), (y + a).tolist(), tau.tolist(), g.value.tolist(), g.error.tolist(),
               n.value.tolist(), n.error.tolist())
    out.add("kernel_probes.csv", _csv_text(["x", "y", "tau", "G", "G_err", "dGdN_left", "dGdN_left_err"], rows),
            "heat kernel and its inner normal derivative at the left end, with certified truncation bounds")
    out.write()
    print(rep.table())
    return EXIT_PASS if rep.passed else EXIT_FAIL


COMMANDS = {
    "eval": cmd_eval,
    "traces": cmd_traces,
    "roundtrip": cmd_roundtrip,
    "oracle-compare": cmd_oracle_compare,
    "kernel-check": cmd_kernel_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heattrace", description="Trace triples of nonnegative heat solutions.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed for randomized probes (overrides the config)")
        p.add_argument("--strict", action="store_true", help="treat warnings as failures")
        if name != "kernel-check":
            p.add_argument("--triple", help="trace triple file (JSON measure schema)")
            p.add_argument("--fixture", help=f"built-in triple: {', '.join(sorted(FIXTURES))}")
        if name == "traces":
            p.add_argument("--field", help="sampled solution CSV with columns x,t,u (tensor grid)")
        if name == "roundtrip":
            p.add_argument("--mutation", help=f"fault injection: {', '.join(sorted(ROUNDTRIP_MUTATIONS))}")
        if name == "kernel-check":
            p.add_argument("--mutation", help=f"fault injection: {', '.join(sorted(KERNEL_MUTATIONS))}")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        cfg = load_config(args.config, args.seed)
        check_achievable(cfg)
        if args.out and getattr(args, "triple", None) and Path(args.triple).resolve() == Path(args.out).resolve():
            raise UsageError("--out must differ from the input path")
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"heattrace {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Unachievable as exc:
        print(f"heattrace {args.command}: tolerance not achievable: {exc}", file=sys.stderr)
        return EXIT_UNACHIEVABLE


if __name__ == "__main__":
    sys.exit(main())
