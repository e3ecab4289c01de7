"""Command-line front end: sweeps over a JSON-configured grid, CSV out.

Exit codes: 0 success, 1 configuration error, 2 numerical validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import core, gme, infometrics as im, spatial, thermo
from .core import EngineParams, ParameterError
from .oracle import IntegrationError, SteadyStateError

log = logging.getLogger("otto2q")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

# canonical row-major order; t is always the fastest axis
AXES = ("p", "g", "TcOverTh", "r12", "t")

THERMO_QUANTITIES = ("Qc", "Qh", "W", "P", "eta", "cop", "regime")
STATE_QUANTITIES = ("trace_deviation", "hermiticity_deviation", "min_eigenvalue",
                    "coherence", "concurrence", "entropyA", "entropyB")
SPATIAL_QUANTITIES = ("F", "rate_factor", "delta_plus", "delta_minus", "Omega_plus", "Omega_minus")

COMMANDS = {
    "evolve": {"axes": {"p", "g", "TcOverTh", "t"},
               "quantities": STATE_QUANTITIES + THERMO_QUANTITIES,
               "default": ("coherence", "concurrence", "entropyA", "entropyB") + THERMO_QUANTITIES},
    "regime-map": {"axes": {"p", "g", "TcOverTh", "t"},
                   "quantities": THERMO_QUANTITIES,
                   "default": ("regime", "Qc", "Qh", "W", "eta", "cop")},
    "spatial": {"axes": {"p", "r12", "t"},
                "quantities": SPATIAL_QUANTITIES + THERMO_QUANTITIES,
                "default": ("F", "rate_factor", "Qc", "Qh", "W", "eta", "cop", "regime")},
    "bath-coherence": {"axes": {"p"},
                       "quantities": ("W_re", "W_im", "W2N_re", "W2N_im", "delta", "converged",
                                      "correction_amplitude", "correction_vanishes"),
                       "default": ("W_re", "W_im", "W2N_re", "W2N_im", "delta", "converged",
                                   "correction_amplitude", "correction_vanishes")},
    "validate": {"axes": {"p", "t"}, "quantities": (), "default": ()},
}

PARAM_FIELDS = {f.name for f in fields(EngineParams)}
OPTION_KEYS = {"operators", "absorption", "hamiltonian", "schedule"}
TOP_KEYS = {"params", "description", "options", "grid", "outputs", "dt", "spatial", "bath", "eps"}


class ConfigError(ValueError):
    """Malformed or out-of-domain configuration; ``where`` names the field."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    @property
    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.steps)


@dataclass
class RunConfig:
    command: str
    params: EngineParams
    description: str
    axes: dict
    outputs: tuple
    dt: float
    options: dict
    spatial: dict
    bath: dict
    eps: Optional[float]


@dataclass
class ResultTable:
    columns: list
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        columns = next(reader)
        return cls(columns, [[parse_cell(v) for v in row] for row in reader])


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    return str(v)


def parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


# ---------------------------------------------------------------------------
# configuration

def _number(value, where, *, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", where)
    if not math.isfinite(value):
        raise ConfigError("must be finite", where)
    if integer and int(value) != value:
        raise ConfigError("expected an integer", where)
    if positive and value <= 0:
        raise ConfigError("must be positive", where)
    return int(value) if integer else float(value)


def parse_config(text: str, command: str, description: Optional[str] = None) -> RunConfig:
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "config")
    spec = COMMANDS[command]

    raw_params = raw.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError("expected an object", "params")
    bad = set(raw_params) - PARAM_FIELDS
    if bad:
        raise ConfigError(f"unknown parameters {sorted(bad)}", "params")
    for k, v in raw_params.items():
        if v is not None:
            _number(v, f"params.{k}")
    try:
        params = EngineParams(**raw_params)
    except ParameterError as exc:
        raise ConfigError(str(exc), "params") from None

    desc = description or raw.get("description", "global")
    if desc not in thermo.DESCRIPTIONS:
        raise ConfigError(f"must be one of {thermo.DESCRIPTIONS}", "description")

    options = raw.get("options", {})
    if not isinstance(options, dict) or set(options) - OPTION_KEYS:
        raise ConfigError(f"allowed keys are {sorted(OPTION_KEYS)}", "options")
    if "operators" in options and options["operators"] not in gme.OPERATORS:
        raise ConfigError(f"must be one of {gme.OPERATORS}", "options.operators")
    if "schedule" in options and options["schedule"] not in thermo.SCHEDULES:
        raise ConfigError(f"must be one of {thermo.SCHEDULES}", "options.schedule")
    for key in ("absorption", "hamiltonian"):
        if key in options and not isinstance(options[key], bool):
            raise ConfigError("expected true or false", f"options.{key}")

    axes = {}
    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("expected an object", "grid")
    for name, ax in grid.items():
        where = f"grid.{name}"
        if name not in spec["axes"]:
            raise ConfigError(f"axis not available for '{command}'; allowed {sorted(spec['axes'])}", where)
        if not isinstance(ax, dict) or set(ax) - {"min", "max", "steps"} or "min" not in ax:
            raise ConfigError("expected {min, max, steps}", where)
        lo = _number(ax["min"], f"{where}.min")
        hi = _number(ax.get("max", lo), f"{where}.max")
        steps = _number(ax.get("steps", 1), f"{where}.steps", positive=True, integer=True)
        if hi < lo:
            raise ConfigError("max < min", where)
        axes[name] = Axis(name, lo, hi, steps)
    _check_axis_domains(axes, params)

    outputs = raw.get("outputs", list(spec["default"]))
    if not isinstance(outputs, list) or not all(isinstance(q, str) for q in outputs):
        raise ConfigError("expected a list of names", "outputs")
    unknown_q = [q for q in outputs if q not in spec["quantities"]]
    if unknown_q:
        raise ConfigError(f"unknown quantities {unknown_q}; allowed {list(spec['quantities'])}", "outputs")

    dt = _number(raw.get("dt", 0.01), "dt", positive=True)
    if "t" in axes:
        for t in axes["t"].values:
            if abs(round(t / dt) * dt - t) > 1e-9 * max(1.0, t):
                raise ConfigError(f"t={t!r} is not a multiple of dt={dt!r}", "grid.t")

    sp = raw.get("spatial", {})
    if not isinstance(sp, dict) or set(sp) - {"mode", "scale_differences"}:
        raise ConfigError("allowed keys are ['mode', 'scale_differences']", "spatial")
    if sp.get("mode", "collective") not in spatial.MODES:
        raise ConfigError(f"must be one of {spatial.MODES}", "spatial.mode")

    bath = raw.get("bath", {})
    allowed_bath = {"cutoff", "omega", "lambda", "tau", "beta", "couplings", "qubit", "gamma", "c1"}
    if not isinstance(bath, dict) or set(bath) - allowed_bath:
        raise ConfigError(f"allowed keys are {sorted(allowed_bath)}", "bath")
    if "cutoff" in bath:
        n = _number(bath["cutoff"], "bath.cutoff", positive=True, integer=True)
        if n < 8:
            raise ConfigError("cutoff must be at least 8", "bath.cutoff")
    for c in bath.get("couplings", []):
        if c not in thermo.COUPLINGS:
            raise ConfigError(f"unknown coupling {c!r}", "bath.couplings")

    eps = raw.get("eps")
    if eps is not None:
        eps = _number(eps, "eps", positive=True)
    return RunConfig(command, params, desc, axes, tuple(outputs), dt, dict(options), dict(sp), dict(bath), eps)


def _check_axis_domains(axes, params):
    if "p" in axes and not (0 <= axes["p"].min and axes["p"].max <= 1):
        raise ConfigError("p must lie in [0, 1]", "grid.p")
    if "t" in axes and axes["t"].min < 0:
        raise ConfigError("t must be non-negative", "grid.t")
    if "TcOverTh" in axes and not (0 < axes["TcOverTh"].min and axes["TcOverTh"].max < 1):
        raise ConfigError("TcOverTh must lie in (0, 1)", "grid.TcOverTh")
    if "g" in axes and axes["g"].min < 0:
        raise ConfigError("g must be non-negative", "grid.g")
    if "r12" in axes and axes["r12"].min < 0:
        raise ConfigError("r12 must be non-negative", "grid.r12")


# ---------------------------------------------------------------------------
# evaluation

def _outer_points(cfg: RunConfig):
    names = [a for a in AXES if a in cfg.axes and a != "t"]
    for combo in itertools.product(*(cfg.axes[a].values for a in names)):
        yield dict(zip(names, (float(v) for v in combo)))


def _point_params(cfg: RunConfig, point: dict) -> EngineParams:
    changes = {}
    if "p" in point:
        changes["p"] = point["p"]
    if "g" in point:
        changes["g"] = point["g"]
    if "TcOverTh" in point:
        changes["t_c"] = point["TcOverTh"] * cfg.params.t_h
    return cfg.params.with_(**changes)


def _times(cfg: RunConfig) -> np.ndarray:
    if "t" in cfg.axes:
        return cfg.axes["t"].values
    return np.array([1.0])


def _cycle_kwargs(cfg: RunConfig) -> dict:
    kw = {k: v for k, v in cfg.options.items()}
    if cfg.description == "local":
        kw.pop("operators", None)
        kw.pop("absorption", None)
    if cfg.eps is not None:
        kw["eps"] = cfg.eps
    return kw


def _thermo_values(result: thermo.CycleResult, t: float) -> dict:
    k = int(round(t / result.dt))
    rec = result.record(k)
    return {"Qc": rec.Qc, "Qh": rec.Qh, "W": rec.W, "P": rec.P, "eta": rec.eta, "cop": rec.cop,
            "regime": rec.regime.value}


def _run_cycle(cfg: RunConfig, params: EngineParams, times, **extra) -> thermo.CycleResult:
    tmax = max(float(times.max()), cfg.dt)
    tmax = round(tmax / cfg.dt) * cfg.dt
    return thermo.integrate_cycle(params, cfg.description, tmax, cfg.dt, **_cycle_kwargs(cfg), **extra)


def _task(args):
    cfg, point = args
    times = _times(cfg)
    params = _point_params(cfg, point)
    rows = []
    invalid = 0
    if cfg.command in ("evolve", "regime-map"):
        need_thermo = any(q in THERMO_QUANTITIES for q in cfg.outputs)
        need_state = any(q in STATE_QUANTITIES for q in cfg.outputs)
        cycle = _run_cycle(cfg, params, times) if need_thermo else None
        states = None
        if need_state:
            gen_opts = {k: v for k, v in _cycle_kwargs(cfg).items() if k in ("operators", "absorption", "hamiltonian")}
            states = im.propagate_series(params, times, cfg.description, **gen_opts)
        for k, t in enumerate(times):
            vals = {}
            if cycle is not None:
                vals.update(_thermo_values(cycle, t))
            if states is not None:
                rho = states[k]
                rep = core.validate_density_matrix(rho)
                invalid += not rep.ok
                vals.update({
                    "trace_deviation": rep.trace_deviation,
                    "hermiticity_deviation": rep.hermiticity_deviation,
                    "min_eigenvalue": rep.min_eigenvalue,
                    "coherence": im.l1_coherence(rho),
                    "concurrence": im.concurrence(rho),
                    "entropyA": im.von_neumann_entropy(core.partial_trace(rho, "A")),
                    "entropyB": im.von_neumann_entropy(core.partial_trace(rho, "B")),
                })
            rows.append([*point.values(), float(t), *(vals[q] for q in cfg.outputs)])
    elif cfg.command == "spatial":
        r12 = point.get("r12", params.r12 if params.r12 is not None else 0.0)
        scfg = spatial.SpatialConfig.from_params(params, r12)
        mode = cfg.spatial.get("mode", "collective")
        f = spatial.spatial_correlation(scfg)
        absorption = cfg.options.get("absorption", thermo.GLOBAL_DEFAULTS["absorption"])
        rates = spatial.distance_rates(params, scfg, mode=mode, absorption=absorption,
                                       scale_differences=cfg.spatial.get("scale_differences", True))
        extra = {"rates": rates} if cfg.description == "global" else {}
        cycle = _run_cycle(cfg, params, times, **extra)
        base = {"F": f, "rate_factor": spatial.rate_factor(f, mode), "delta_plus": rates.delta_plus,
                "delta_minus": rates.delta_minus, "Omega_plus": rates.Omega_plus,
                "Omega_minus": rates.Omega_minus}
        for t in times:
            vals = {**base, **_thermo_values(cycle, t)}
            rows.append([*point.values(), float(t), *(vals[q] for q in cfg.outputs)])
    elif cfg.command == "bath-coherence":
        b = cfg.bath
        mode = thermo.BosonicMode(int(b.get("cutoff", 20)), float(b.get("omega", params.omega_a)))
        rho = core.initial_state_phi(params.p)
        for coupling in b.get("couplings", list(thermo.COUPLINGS)):
            res = thermo.bath_coherence_work(
                coupling, mode, float(b.get("lambda", 0.01)), float(b.get("tau", 1.0)),
                float(b.get("beta", 1 / params.t_h)), rho, qubit=b.get("qubit", "A"),
                gamma=float(b.get("gamma", params.gamma_h)), c1=complex(b.get("c1", 1.0)))
            vals = {"W_re": res.value.real, "W_im": res.value.imag, "W2N_re": res.value_doubled.real,
                    "W2N_im": res.value_doubled.imag, "delta": res.delta, "converged": res.converged,
                    "correction_amplitude": abs(res.correction_amplitude),
                    "correction_vanishes": res.correction_vanishes}
            rows.append([coupling, *point.values(), *(vals[q] for q in cfg.outputs)])
    return rows, invalid


def _columns(cfg: RunConfig) -> list:
    names = [a for a in AXES if a in cfg.axes and a != "t"]
    if cfg.command == "bath-coherence":
        return ["coupling", *names, *cfg.outputs]
    return [*names, "t", *cfg.outputs]


def run(cfg: RunConfig, workers: int = 1) -> tuple[ResultTable, int]:
    """Evaluate every grid point; rows come back in grid order for any ``workers``."""
    tasks = [(cfg, point) for point in _outer_points(cfg)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    rows = [row for chunk, _ in results for row in chunk]
    invalid = sum(n for _, n in results)
    return ResultTable(_columns(cfg), rows), invalid


# ---------------------------------------------------------------------------
# validate

def validate_suite(cfg: RunConfig) -> ResultTable:
    """Core numerical properties; one row per check."""
    from .oracle import evolve, rk4_integrate, steady_state
    from . import lme

    params = cfg.params
    rows = []

    def add(name, value, tol, ok):
        rows.append([name, float(value), float(tol), bool(ok)])

    ps = cfg.axes["p"].values if "p" in cfg.axes else np.linspace(0, 1, 5)
    ts = cfg.axes["t"].values if "t" in cfg.axes else np.linspace(0, 2, 5)
    worst = [0.0, 0.0, 0.0]
    for desc in thermo.DESCRIPTIONS:
        gen = thermo.make_generator(params, desc)
        for p in ps:
            for t in ts:
                rep = core.validate_density_matrix(evolve(gen, core.initial_state_phi(float(p)), float(t)))
                worst = [max(worst[0], rep.trace_deviation), max(worst[1], rep.hermiticity_deviation),
                         max(worst[2], -rep.min_eigenvalue)]
    add("trace_deviation", worst[0], core.TRACE_TOL, worst[0] <= core.TRACE_TOL)
    add("hermiticity_deviation", worst[1], core.HERMITIAN_TOL, worst[1] <= core.HERMITIAN_TOL)
    add("negative_eigenvalue", worst[2], core.EIGEN_TOL, worst[2] <= core.EIGEN_TOL)

    rho0 = core.initial_state_phi(0.5)
    for desc in thermo.DESCRIPTIONS:
        gen = thermo.make_generator(params, desc)
        traj = rk4_integrate(gen, rho0, 0.1, 1e-4)
        gap = float(np.max(np.abs(traj.final - evolve(gen, rho0, 0.1))))
        add(f"rk4_vs_expm_{desc}", gap, 1e-8, gap <= 1e-8)

    h = core.build_hamiltonian(params)
    w_p, w_m = gme.transition_frequencies(params)
    ops = gme.jump_operators(params, "spectral")
    res = max(gme.eigenoperator_residual(h, a, w_p if br == "+" else w_m) for _, br, a in ops.items())
    add("eigenoperator_residual_spectral", res, 1e-9, res <= 1e-9)

    rates = gme.gme_rates(params)
    one_bath = gme.GlobalRates(rates.delta_plus, rates.delta_minus, 0.0, 0.0,
                               gme.GlobalRates(rates.absorption.delta_plus, rates.absorption.delta_minus, 0.0, 0.0))
    gen = gme.gme_generator(params, rates=one_bath, operators="spectral")
    gibbs = core.gibbs_state(h, params.t_h)
    kms = float(np.max(np.abs(gen.apply(gibbs))))
    add("gibbs_stationary_single_bath", kms, 1e-7, kms <= 1e-7)

    g0 = params.with_(g=0.0)
    ss = steady_state(lme.lme_generator(g0))
    target = core.product_state(core.gibbs_qubit(g0.omega_a, g0.t_h), core.gibbs_qubit(g0.omega_b, g0.t_c))
    gap = float(np.max(np.abs(ss - target)))
    add("local_steady_state_product_gibbs", gap, 1e-10, gap <= 1e-10)
    return ResultTable(["check", "value", "tolerance", "pass"], rows)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otto2q", description=__doc__.splitlines()[0])
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration (default: built-in defaults)")
    parser.add_argument("--out", metavar="PATH", help="CSV destination (default: stdout)")
    parser.add_argument("--workers", type=int, default=1, metavar="N", help="worker processes")
    parser.add_argument("--description", choices=thermo.DESCRIPTIONS, help="override the config's description")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("command", choices=tuple(COMMANDS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, args.command, args.description)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    status = EXIT_OK
    try:
        if cfg.command == "validate":
            table = validate_suite(cfg)
            if not all(row[-1] for row in table.rows):
                status = EXIT_NUMERIC
        else:
            table, invalid = run(cfg, args.workers)
            if invalid:
                print(f"numeric validation: {invalid} state(s) failed the density-matrix checks",
                      file=sys.stderr)
                status = EXIT_NUMERIC
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SteadyStateError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    data = table.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)
    return status


if __name__ == "__main__":
    sys.exit(main())
