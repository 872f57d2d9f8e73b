"""Command-line surface: simulate, classify, bisect, sweep, hamiltonian, background.

Output contracts:

* ``simulate`` writes a trajectory CSV (header exactly
  ``t,x,y,xp,yp,tau,sigma_sq,scalar_curv,ham_residual,first_integral_residual,h_red``,
  LF line endings, '.' decimal separator, h_red empty when out of gauge
  range) and a JSON manifest next to it at ``<out>.manifest.json``.
* every other command prints a single JSON object
  ``{"result": ..., "diagnostics": ..., "manifest": ...}`` to stdout with
  floats serialized to 17 significant digits.

Exit codes: 0 success (a blow-up is a reported scientific result, not a
failure), 2 invalid flags, 3 integrator failure (step-size collapse without
blow-up, simulate only), 4 precondition violation.

Every manifest echoes the full numeric configuration including defaulted
values, so a run can be reproduced without reading source.  The
``EFL_THREADS`` environment variable (positive integer) caps sweep
parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

from . import __version__
from .background import (
    BackgroundModel,
    CurvatureSign,
    GaugeDomainError,
    homogeneous_lapse,
    mean_curvature,
    scale_factor,
)
from .experiments import (
    BracketError,
    GaugeRangeError,
    PreconditionError,
    bisect_critical,
    classify,
    hamiltonian_audit,
    sweep,
)
from .integrate import (
    STEP_SIZE_COLLAPSE,
    EventSpec,
    IntegratorSettings,
    Termination,
    integrate,
)
from .products import FlowConfig

CSV_HEADER = (
    "t,x,y,xp,yp,tau,sigma_sq,scalar_curv,ham_residual,"
    "first_integral_residual,h_red"
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTEGRATOR = 3
EXIT_PRECONDITION = 4


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record attached to every output."""

    command: str
    config: dict
    tool_version: str
    wall_time_ms: int

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "tool_version": self.tool_version,
            "wall_time_ms": self.wall_time_ms,
        }


def _format_float(x: float) -> str:
    # Strict JSON has no NaN/Infinity tokens.
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _dumps17(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and stable key order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {_dumps17(v, indent + 1)}"
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{_dumps17(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# option name -> (python type, builtin default); None default means required.
_FLOW_OPTS = {
    "n": (int, None),
    "s": (float, None),
    "curvature": (str, None),
    "vol_m": (float, 1.0),
    "vol_n": (float, 1.0),
}
_SETTINGS_OPTS = {
    "rel_tol": (float, 1e-10),
    "abs_tol": (float, 1e-12),
    "max_step": (float, 0.03),
    "min_step": (float, 1e-13),
    "output_dt": (float, 0.1),
}
_EVENT_OPTS = {
    "y_floor": (float, -20.0),
    "velocity_floor": (float, -100.0),
}


def _add_options(parser: argparse.ArgumentParser, names) -> None:
    merged = {**_FLOW_OPTS, **_SETTINGS_OPTS, **_EVENT_OPTS}
    for name in names:
        typ, _ = merged[name]
        flag = "--" + name.replace("_", "-")
        if name == "curvature":
            parser.add_argument(flag, choices=["positive", "negative"])
        else:
            parser.add_argument(flag, type=typ)
    parser.add_argument("--config", help="JSON file mirroring the flags")


def _merge_config(args: argparse.Namespace, names) -> dict | None:
    """Resolve each option as: explicit flag > --config entry > default.

    Returns None (after printing a message) on an unusable config file.
    """
    merged = {**_FLOW_OPTS, **_SETTINGS_OPTS, **_EVENT_OPTS}
    file_values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read --config: {exc}", file=sys.stderr)
            return None
        if not isinstance(raw, dict):
            print("error: --config must hold a JSON object", file=sys.stderr)
            return None
        file_values = {str(k).replace("-", "_"): v for k, v in raw.items()}

    resolved = {}
    for name in names:
        typ, default = merged[name]
        value = getattr(args, name, None)
        if value is None and name in file_values:
            try:
                value = typ(file_values[name])
            except (TypeError, ValueError):
                print(
                    f"error: bad value for {name!r} in --config", file=sys.stderr
                )
                return None
        if value is None:
            value = default
        resolved[name] = value
    unknown = set(file_values) - set(names)
    if unknown:
        print(
            f"error: unknown keys in --config: {sorted(unknown)}",
            file=sys.stderr,
        )
        return None
    return resolved


def _build_flow(vals: dict) -> FlowConfig | None:
    n = vals["n"]
    if n is None or vals["s"] is None or vals["curvature"] is None:
        print("error: --n, --s and --curvature are required", file=sys.stderr)
        return None
    if n < 2 or n % 2 != 0:
        print(f"error: --n must be an even integer >= 2, got {n}", file=sys.stderr)
        return None
    try:
        return FlowConfig(
            m=n // 2,
            sign=CurvatureSign(vals["curvature"]),
            s=vals["s"],
            vol_m=vals["vol_m"],
            vol_n=vals["vol_n"],
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _build_settings(vals: dict, t_max: float) -> IntegratorSettings | None:
    try:
        return IntegratorSettings(
            rel_tol=vals["rel_tol"],
            abs_tol=vals["abs_tol"],
            max_step=vals["max_step"],
            min_step=vals["min_step"],
            t_max=t_max,
            output_dt=vals["output_dt"],
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _build_events(vals: dict) -> EventSpec | None:
    try:
        return EventSpec(
            y_floor=vals["y_floor"], velocity_floor=vals["velocity_floor"]
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _config_echo(
    config: FlowConfig | None,
    settings: IntegratorSettings | None,
    events: EventSpec | None,
    parameters: dict,
) -> dict:
    echo: dict = {}
    if config is not None:
        echo["flow"] = {
            "n": config.n,
            "m": config.m,
            "curvature": config.sign.value,
            "s": config.s,
            "vol_m": config.vol_m,
            "vol_n": config.vol_n,
        }
    if settings is not None:
        echo["settings"] = {
            "rel_tol": settings.rel_tol,
            "abs_tol": settings.abs_tol,
            "max_step": settings.max_step,
            "min_step": settings.min_step,
            "t_max": settings.t_max,
            "output_dt": settings.output_dt,
        }
    if events is not None:
        echo["events"] = {
            "y_floor": events.y_floor,
            "velocity_floor": events.velocity_floor,
        }
    echo["parameters"] = parameters
    return echo


def _termination_dict(term: Termination) -> dict:
    return {
        "kind": term.kind,
        "t_event": term.t_event,
        "trigger": term.trigger,
        "t_last": term.t_last,
    }


def _classification_dict(cls) -> dict:
    return {
        "verdict": cls.verdict,
        "t_blowup": cls.t_blowup,
        "horizon": cls.horizon,
        "low_confidence": cls.low_confidence,
    }


def _classification_diag(cls) -> dict:
    return {
        "max_constraint_residual": cls.max_constraint_residual,
        "max_first_integral_residual": cls.max_first_integral_residual,
        "termination": _termination_dict(cls.termination),
    }


def _limit_dict(limit) -> dict | None:
    if limit is None:
        return None
    return {
        "value": limit.value,
        "tail_variation": limit.tail_variation,
        "decay_rate": limit.decay_rate,
        "cross_check_delta": limit.cross_check_delta,
    }


def _emit_json(result, diagnostics, manifest: RunManifest) -> None:
    doc = {
        "result": result,
        "diagnostics": diagnostics,
        "manifest": manifest.as_dict(),
    }
    sys.stdout.write(_dumps17(doc) + "\n")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    return repr(value)


def _cmd_simulate(args) -> int:
    start = time.perf_counter()
    names = list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS)
    vals = _merge_config(args, names)
    if vals is None:
        return EXIT_USAGE
    if args.t_max is None or not args.t_max > 0.0:
        return _fail(EXIT_USAGE, "--t-max must be a positive number")
    config = _build_flow(vals)
    if config is None:
        return EXIT_USAGE
    settings = _build_settings(vals, args.t_max)
    events = _build_events(vals)
    if settings is None or events is None:
        return EXIT_USAGE

    traj = integrate(config, settings, events)

    lines = [CSV_HEADER]
    for state, obs in traj.samples:
        lines.append(
            ",".join(
                (
                    _csv_cell(state.t),
                    _csv_cell(state.x),
                    _csv_cell(state.y),
                    _csv_cell(state.xp),
                    _csv_cell(state.yp),
                    _csv_cell(obs.tau),
                    _csv_cell(obs.sigma_sq),
                    _csv_cell(obs.scalar_curv),
                    _csv_cell(obs.ham_residual),
                    _csv_cell(obs.first_integral_residual),
                    _csv_cell(obs.h_red),
                )
            )
        )
    csv_text = "\n".join(lines) + "\n"

    manifest = RunManifest(
        command="simulate",
        config=_config_echo(config, settings, events, {"t_max": args.t_max}),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    manifest_doc = manifest.as_dict()
    manifest_doc["result"] = {
        "termination": _termination_dict(traj.termination),
        "n_samples": len(traj.samples),
        "max_constraint_residual": traj.max_ham_residual,
        "max_first_integral_residual": traj.max_first_integral_residual,
    }

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        with open(
            args.out + ".manifest.json", "w", encoding="utf-8", newline=""
        ) as fh:
            fh.write(_dumps17(manifest_doc) + "\n")
    else:
        sys.stdout.write(csv_text)

    if traj.termination.kind == STEP_SIZE_COLLAPSE:
        return EXIT_INTEGRATOR
    return EXIT_OK


def _cmd_classify(args) -> int:
    start = time.perf_counter()
    names = list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS)
    vals = _merge_config(args, names)
    if vals is None:
        return EXIT_USAGE
    if args.horizon is None or not args.horizon > 0.0:
        return _fail(EXIT_USAGE, "--horizon must be a positive number")
    config = _build_flow(vals)
    if config is None:
        return EXIT_USAGE
    settings = _build_settings(vals, args.horizon)
    events = _build_events(vals)
    if settings is None or events is None:
        return EXIT_USAGE

    cls = classify(config, args.horizon, settings, events)
    manifest = RunManifest(
        command="classify",
        config=_config_echo(config, settings, events, {"horizon": args.horizon}),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    _emit_json(_classification_dict(cls), _classification_diag(cls), manifest)
    return EXIT_OK


def _cmd_bisect(args) -> int:
    start = time.perf_counter()
    names = ["n", "curvature", "vol_m", "vol_n"] + list(_SETTINGS_OPTS) + list(
        _EVENT_OPTS
    )
    vals = _merge_config(args, names)
    if vals is None:
        return EXIT_USAGE
    n = vals["n"]
    if n is None or vals["curvature"] is None:
        return _fail(EXIT_USAGE, "--n and --curvature are required")
    if n < 2 or n % 2 != 0:
        return _fail(EXIT_USAGE, f"--n must be an even integer >= 2, got {n}")
    for flag, value in (("--lo", args.lo), ("--hi", args.hi), ("--tol", args.tol),
                        ("--horizon", args.horizon)):
        if value is None:
            return _fail(EXIT_USAGE, f"{flag} is required")
    if not (args.lo < args.hi and args.tol > 0.0 and args.horizon > 0.0):
        return _fail(EXIT_USAGE, "need --lo < --hi, --tol > 0, --horizon > 0")
    settings = _build_settings(vals, args.horizon)
    events = _build_events(vals)
    if settings is None or events is None:
        return EXIT_USAGE

    sign = CurvatureSign(vals["curvature"])
    try:
        res = bisect_critical(
            n, sign, args.lo, args.hi, args.tol, args.horizon, settings, events
        )
    except (BracketError, PreconditionError, ValueError) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))

    manifest = RunManifest(
        command="bisect",
        config=_config_echo(
            None,
            settings,
            events,
            {
                "n": n,
                "curvature": sign.value,
                "lo": args.lo,
                "hi": args.hi,
                "tol": args.tol,
                "horizon": args.horizon,
            },
        ),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    result = {
        "bracket_lo": res.bracket[0],
        "bracket_hi": res.bracket[1],
        "iterations": res.iterations,
        "horizon_used": res.horizon_used,
        "verdict_lo": res.verdict_lo,
        "verdict_hi": res.verdict_hi,
    }
    diagnostics = {"bracket_width": res.bracket[1] - res.bracket[0]}
    _emit_json(result, diagnostics, manifest)
    return EXIT_OK


def _threads_from_env() -> int | None:
    raw = os.environ.get("EFL_THREADS")
    if raw is None:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        return None
    if threads < 1:
        return None
    return threads


def _cmd_sweep(args) -> int:
    start = time.perf_counter()
    names = ["n", "curvature", "vol_m", "vol_n"] + list(_SETTINGS_OPTS) + list(
        _EVENT_OPTS
    )
    vals = _merge_config(args, names)
    if vals is None:
        return EXIT_USAGE
    n = vals["n"]
    if n is None or vals["curvature"] is None:
        return _fail(EXIT_USAGE, "--n and --curvature are required")
    if n < 2 or n % 2 != 0:
        return _fail(EXIT_USAGE, f"--n must be an even integer >= 2, got {n}")
    for flag, value in (("--s-min", args.s_min), ("--s-max", args.s_max),
                        ("--steps", args.steps), ("--horizon", args.horizon)):
        if value is None:
            return _fail(EXIT_USAGE, f"{flag} is required")
    if args.steps < 1 or not args.horizon > 0.0 or args.s_min > args.s_max:
        return _fail(
            EXIT_USAGE, "need --steps >= 1, --horizon > 0, --s-min <= --s-max"
        )
    threads = _threads_from_env()
    if threads is None:
        return _fail(EXIT_USAGE, "EFL_THREADS must be a positive integer")
    settings = _build_settings(vals, args.horizon)
    events = _build_events(vals)
    if settings is None or events is None:
        return EXIT_USAGE

    sign = CurvatureSign(vals["curvature"])
    if args.steps == 1:
        grid = [args.s_min]
    else:
        span = args.s_max - args.s_min
        grid = [
            args.s_min + span * (i / (args.steps - 1)) for i in range(args.steps)
        ]
    rows = sweep(
        n,
        sign,
        grid,
        args.horizon,
        with_limits=not args.no_limits,
        threads=threads,
        settings=settings,
        events=events,
    )

    manifest = RunManifest(
        command="sweep",
        config=_config_echo(
            None,
            settings,
            events,
            {
                "n": n,
                "curvature": sign.value,
                "s_min": args.s_min,
                "s_max": args.s_max,
                "steps": args.steps,
                "horizon": args.horizon,
                "limits": not args.no_limits,
                "threads": threads,
            },
        ),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    result_rows = []
    diag_rows = []
    for row in rows:
        result_rows.append(
            {
                "s": row.s,
                "classification": (
                    _classification_dict(row.classification)
                    if row.classification is not None
                    else None
                ),
                "limit": _limit_dict(row.limit),
                "error": row.error,
            }
        )
        diag_rows.append(
            {
                "s": row.s,
                "diagnostics": (
                    _classification_diag(row.classification)
                    if row.classification is not None
                    else None
                ),
            }
        )
    _emit_json({"rows": result_rows}, {"rows": diag_rows}, manifest)
    return EXIT_OK


def _cmd_hamiltonian(args) -> int:
    start = time.perf_counter()
    names = list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS)
    vals = _merge_config(args, names)
    if vals is None:
        return EXIT_USAGE
    if args.horizon is None or not args.horizon > 0.0:
        return _fail(EXIT_USAGE, "--horizon must be a positive number")
    config = _build_flow(vals)
    if config is None:
        return EXIT_USAGE
    settings = _build_settings(vals, args.horizon)
    events = _build_events(vals)
    if settings is None or events is None:
        return EXIT_USAGE

    try:
        audit = hamiltonian_audit(config, args.horizon, settings, events)
    except GaugeRangeError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))

    manifest = RunManifest(
        command="hamiltonian",
        config=_config_echo(config, settings, events, {"horizon": args.horizon}),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    result = {
        "branch": audit.branch,
        "verdict": audit.verdict,
        "delta_total": audit.delta_total,
        "series": [[t, h] for t, h in audit.series],
    }
    diagnostics = {"n_samples": len(audit.series)}
    _emit_json(result, diagnostics, manifest)
    return EXIT_OK


def _cmd_background(args) -> int:
    start = time.perf_counter()
    if args.n is None or args.curvature is None or args.t is None:
        return _fail(EXIT_USAGE, "--n, --curvature and --t are required")
    if args.n < 2:
        return _fail(EXIT_USAGE, f"--n must be >= 2, got {args.n}")
    sign = CurvatureSign(args.curvature)
    model = BackgroundModel(n=args.n, sign=sign)
    try:
        a = scale_factor(model, args.t)
        tau = mean_curvature(model, args.t)
        lapse = homogeneous_lapse(args.n, tau, sign)
    except GaugeDomainError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))

    manifest = RunManifest(
        command="background",
        config=_config_echo(
            None, None, None,
            {"n": args.n, "curvature": sign.value, "t": args.t},
        ),
        tool_version=__version__,
        wall_time_ms=int(round((time.perf_counter() - start) * 1000.0)),
    )
    result = {
        "t": args.t,
        "scale_factor": a,
        "tau": tau,
        "lapse": lapse,
        "scale_sq": args.n * lapse,
    }
    _emit_json(result, {}, manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmcflow",
        description=(
            "Simulate warped-product vacuum cosmologies with positive "
            "cosmological constant, classify recollapse versus expansion, "
            "and monitor their conserved quantities."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    _add_options(p, list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS))
    p.add_argument("--t-max", type=float)
    p.add_argument("--out", help="CSV path; manifest goes to <out>.manifest.json")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("classify", help="recollapse vs completeness verdict")
    _add_options(p, list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS))
    p.add_argument("--horizon", type=float)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("bisect", help="bisect the critical coupling")
    _add_options(
        p, ["n", "curvature", "vol_m", "vol_n"] + list(_SETTINGS_OPTS)
        + list(_EVENT_OPTS)
    )
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--horizon", type=float)
    p.set_defaults(func=_cmd_bisect)

    p = sub.add_parser("sweep", help="classification table over a coupling grid")
    _add_options(
        p, ["n", "curvature", "vol_m", "vol_n"] + list(_SETTINGS_OPTS)
        + list(_EVENT_OPTS)
    )
    p.add_argument("--s-min", type=float)
    p.add_argument("--s-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--no-limits", action="store_true",
                   help="skip limit extraction on complete rows")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("hamiltonian", help="reduced-Hamiltonian audit")
    _add_options(p, list(_FLOW_OPTS) + list(_SETTINGS_OPTS) + list(_EVENT_OPTS))
    p.add_argument("--horizon", type=float)
    p.set_defaults(func=_cmd_hamiltonian)

    p = sub.add_parser("background", help="closed-form background quantities")
    p.add_argument("--n", type=int)
    p.add_argument("--curvature", choices=["positive", "negative"])
    p.add_argument("--t", type=float)
    p.set_defaults(func=_cmd_background)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
