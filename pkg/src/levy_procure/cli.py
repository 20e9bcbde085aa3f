"""Command-line front end: ``levy-procure <command> [options]``.

Configuration is a JSON file with four optional sections::

    {
      "market": {"r": 0.05, "lam": 5, "epsilon": 0, "gamma": 0.05, "c": 1,
                 "alpha": 1.2, "alpha_p": 0.8, "alpha_s": 0.7, "y0": 0},
      "model":  {"kind": "gbm", "mu": 0.7, "sigma": 0.2},
      "mc":     {"n_paths": 20000, "horizon": null, "dt": 0.001, "seed": 12345, "threads": 1},
      "output": {"format": "json", "path": "-"}
    }

``model.kind`` is ``gbm``, ``jump_diffusion`` (also needs ``psi`` and ``ell``)
or ``deterministic``. A ``null`` horizon means "long enough that
``exp(-(beta - delta) T) <= 1e-6``". Without ``output.format`` the table
commands (simulate, sweep) write CSV and the others JSON.

Command-line flags override the file; ``LEVY_PROCURE_SEED`` overrides the
file's seed but not ``--seed``.

Exit codes: 0 ok, 1 bad configuration, 2 assumption violated, 3 I/O error,
4 root solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .estimators import (
    METHODS,
    backward_residual,
    check_identities,
    default_horizon,
    estimate_values,
    estimate_value_representation,
    mc_kappa,
    newsvendor,
    sweep_sigma,
)
from .levy_price import (
    Deterministic,
    GeometricBrownian,
    JumpDiffusion,
    PriceModel,
    effective_delta,
    simulate_path,
)
from .payoff import AssumptionError, MarketParams, validate
from .policy import RootFindingError, coefficients, optimal_control_path

SCHEMA_VERSION = 1
SEED_ENV = "LEVY_PROCURE_SEED"
CSV_HEADER = ("path_id", "t", "P_t", "ell_star", "nu_star", "Y_t")
SWEEP_HEADER = ("sigma", "V0", "L_star", "difference", "std_error", "status")
DEFAULT_SIGMAS = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0)

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MCSettings:
    n_paths: int = 20000
    horizon: float | None = None
    dt: float = 1e-3
    seed: int = 12345
    threads: int = 1


@dataclass(frozen=True)
class OutputSettings:
    format: str | None = None
    path: str = "-"


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams
    model: PriceModel
    mc: MCSettings
    output: OutputSettings

    def horizon(self) -> float:
        if self.mc.horizon is not None:
            return self.mc.horizon
        return default_horizon(self.market, self.model)

    def to_dict(self) -> dict:
        return {
            "market": self.market.to_dict(),
            "model": model_to_dict(self.model),
            "mc": {f.name: getattr(self.mc, f.name) for f in fields(MCSettings)},
            "output": {"format": self.output.format, "path": self.output.path},
        }


_MODEL_KEYS = {
    "gbm": (GeometricBrownian, ("mu", "sigma")),
    "jump_diffusion": (JumpDiffusion, ("mu", "sigma", "psi", "ell")),
    "deterministic": (Deterministic, ("mu",)),
}
_MODEL_DEFAULTS = {"mu": 0.7, "sigma": 0.2}


def model_to_dict(model: PriceModel) -> dict:
    for kind, (cls, keys) in _MODEL_KEYS.items():
        if isinstance(model, cls):
            return {"kind": kind, **{k: getattr(model, k) for k in keys}}
    raise TypeError(f"unknown model {model!r}")


def _number(value, where: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite, got {value!r}")
    return float(value)


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected an object")
    return dict(sec)


def parse_config(raw: dict) -> RunConfig:
    """Build a validated :class:`RunConfig` from a decoded JSON object."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - {"market", "model", "mc", "output"}
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")

    market_raw = _section(raw, "market")
    names = {f.name for f in fields(MarketParams)}
    for key in market_raw:
        if key not in names:
            raise ConfigError(f"market.{key}: unknown field")
    market_kw = {k: _number(v, f"market.{k}") for k, v in market_raw.items()}
    try:
        market = MarketParams(**market_kw)
    except ValueError as exc:
        raise ConfigError(f"market: {exc}") from None

    model_raw = _section(raw, "model")
    kind = model_raw.pop("kind", "gbm")
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"model.kind: expected one of {sorted(_MODEL_KEYS)}, got {kind!r}")
    cls, keys = _MODEL_KEYS[kind]
    for key in model_raw:
        if key not in keys:
            raise ConfigError(f"model.{key}: not a parameter of {kind}")
    model_kw = {}
    for key in keys:
        if key in model_raw:
            model_kw[key] = _number(model_raw[key], f"model.{key}")
        elif key in _MODEL_DEFAULTS:
            model_kw[key] = _MODEL_DEFAULTS[key]
        else:
            raise ConfigError(f"model.{key}: required for {kind}")
    try:
        model = cls(**model_kw)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None

    mc_raw = _section(raw, "mc")
    mc_names = {f.name for f in fields(MCSettings)}
    for key in mc_raw:
        if key not in mc_names:
            raise ConfigError(f"mc.{key}: unknown field")
    mc_kw = {}
    for key, value in mc_raw.items():
        if key == "horizon" and value is None:
            mc_kw[key] = None
        else:
            mc_kw[key] = _number(value, f"mc.{key}", integer=key in ("n_paths", "seed", "threads"))
    mc = MCSettings(**mc_kw)
    if mc.n_paths < 2:
        raise ConfigError("mc.n_paths: must be >= 2")
    if mc.threads < 1:
        raise ConfigError("mc.threads: must be >= 1")
    if mc.seed < 0:
        raise ConfigError("mc.seed: must be >= 0")
    if not mc.dt > 0.0:
        raise ConfigError("mc.dt: must be > 0")
    if mc.horizon is not None and not mc.horizon >= mc.dt:
        raise ConfigError("mc.horizon: must be at least one step dt")

    out_raw = _section(raw, "output")
    for key in out_raw:
        if key not in ("format", "path"):
            raise ConfigError(f"output.{key}: unknown field")
    out = OutputSettings(**out_raw)
    if out.format not in (None, "json", "csv"):
        raise ConfigError(f"output.format: expected json or csv, got {out.format!r}")
    if not isinstance(out.path, str) or not out.path:
        raise ConfigError("output.path: expected a non-empty string")
    return RunConfig(market, model, mc, out)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


_MARKET_FLAGS = ("r", "lam", "epsilon", "gamma", "c", "alpha", "alpha_p", "alpha_s", "y0")
_MODEL_FLAGS = ("mu", "sigma", "psi", "ell")
_MC_FLAGS = ("n_paths", "horizon", "dt", "seed", "threads")


def resolve(args: argparse.Namespace, env=None) -> RunConfig:
    """Merge config file, environment and flags (flag wins)."""
    env = os.environ if env is None else env
    raw = load_config(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}

    if env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: expected an integer, got {env[SEED_ENV]!r}") from None
        raw.setdefault("mc", {})["seed"] = seed

    for name in _MARKET_FLAGS:
        if getattr(args, name, None) is not None:
            raw.setdefault("market", {})[name] = getattr(args, name)
    if args.model is not None:
        old = raw.get("model", {}) if isinstance(raw.get("model"), dict) else {}
        if old.get("kind", "gbm") != args.model:
            # parameters of another family do not carry over, except mu/sigma
            keep = _MODEL_KEYS[args.model][1]
            old = {k: v for k, v in old.items() if k in keep}
        raw["model"] = {**old, "kind": args.model}
    for name in _MODEL_FLAGS:
        if getattr(args, name, None) is not None:
            raw.setdefault("model", {})[name] = getattr(args, name)
    for name in _MC_FLAGS:
        if getattr(args, name, None) is not None:
            raw.setdefault("mc", {})[name] = getattr(args, name)
    if args.format is not None:
        raw.setdefault("output", {})["format"] = args.format
    if args.output is not None:
        raw.setdefault("output", {})["path"] = args.output
    return parse_config(raw)


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to floats, inf as string."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _write(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _fmt(x) -> str:
    return "%.12g" % x


def _constants(cfg: RunConfig, coeffs=None) -> dict:
    p = cfg.market
    out = {"beta": p.beta, "delta": effective_delta(cfg.model)}
    if coeffs is not None:
        out.update(xi=coeffs.xi, kappa=coeffs.kappa, a=coeffs.a, b=coeffs.b,
                   ell_cap=coeffs.ell_cap)
    try:
        nv = newsvendor(p, cfg.model)
        out.update(eta=nv.eta, y_star=nv.y_star)
    except (AssumptionError, ValueError):
        pass
    return out


_COMMAND_ARGS = ("paths", "y", "method", "y_probe", "with_value", "sigmas")


def _emit_json(cfg: RunConfig, command: str, result, constants=None, args=None):
    arguments = {}
    if args is not None:
        arguments = {k: getattr(args, k) for k in _COMMAND_ARGS if hasattr(args, k)}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "arguments": arguments,
        "config": cfg.to_dict(),
        "horizon_used": cfg.horizon(),
        "constants": constants or {},
        "result": result,
    }
    _write(json.dumps(_clean(doc), indent=2) + "\n", cfg.output.path)


def _emit_csv(cfg: RunConfig, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    _write(buf.getvalue(), cfg.output.path)


def _need_json(cfg: RunConfig, command: str):
    if cfg.output.format != "json":
        raise ConfigError(f"{command}: only json output is supported")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: RunConfig, args) -> int:
    _need_json(cfg, "validate")
    results = validate(cfg.market, cfg.model)
    ok = all(r.holds for r in results if r.hard)
    _emit_json(cfg, "validate", {"ok": ok, "assumptions": [r.to_dict() for r in results]},
               _constants(cfg), args=args)
    for r in results:
        if r.hard and not r.holds:
            print(f"violated: {r.name} ({r.description}); value {r.value:.6g}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ASSUMPTION


def cmd_simulate(cfg: RunConfig, args) -> int:
    coeffs = coefficients(cfg.market, cfg.model)
    horizon = cfg.horizon()
    rows = []
    paths = []
    for i in range(args.paths):
        path = simulate_path(cfg.model, horizon, cfg.mc.dt, cfg.mc.seed, index=i)
        proc = optimal_control_path(path, coeffs, cfg.market)
        paths.append((path, proc))
        for k in range(path.grid.size):
            rows.append((i, float(path.grid[k]), float(path.values[k]),
                         float(proc.base_inventory[k]), float(proc.control[k]),
                         float(proc.inventory[k])))
    if cfg.output.format == "csv":
        _emit_csv(cfg, CSV_HEADER, rows)
    else:
        result = [{"path_id": i, "t": path.grid, "P_t": path.values,
                   "ell_star": proc.base_inventory, "nu_star": proc.control,
                   "Y_t": proc.inventory}
                  for i, (path, proc) in enumerate(paths)]
        result = [{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in r.items()}
                  for r in result]
        _emit_json(cfg, "simulate", result, _constants(cfg, coeffs), args=args)
    return EXIT_OK


def cmd_value(cfg: RunConfig, args) -> int:
    _need_json(cfg, "value")
    coeffs = coefficients(cfg.market, cfg.model)
    y = cfg.market.y0 if args.y is None else args.y
    methods = tuple(args.method) if args.method else METHODS
    cmp = estimate_values(cfg.market, cfg.model, coeffs, y, cfg.mc.n_paths, cfg.horizon(),
                          cfg.mc.dt, cfg.mc.seed, methods=methods, threads=cfg.mc.threads)
    _emit_json(cfg, "value", cmp.to_dict(), _constants(cfg, coeffs), args=args)
    return EXIT_OK


def cmd_foc(cfg: RunConfig, args) -> int:
    _need_json(cfg, "foc")
    coeffs = coefficients(cfg.market, cfg.model)
    ys = args.y_probe if args.y_probe else [cfg.market.y0]
    ests = backward_residual(cfg.market, cfg.model, coeffs, ys, cfg.mc.n_paths, cfg.horizon(),
                             cfg.mc.dt, cfg.mc.seed, threads=cfg.mc.threads)
    result = [{"y_probe": y, "z": e.z_score(0.0), **e.to_dict()} for y, e in zip(ys, ests)]
    _emit_json(cfg, "foc", result, _constants(cfg, coeffs), args=args)
    return EXIT_OK


def cmd_kappa(cfg: RunConfig, args) -> int:
    _need_json(cfg, "kappa")
    coeffs = coefficients(cfg.market, cfg.model)
    est = mc_kappa(cfg.model, cfg.market.beta, cfg.mc.n_paths, cfg.mc.dt, cfg.mc.seed,
                   threads=cfg.mc.threads)
    result = {"formula": coeffs.kappa, "monte_carlo": est.to_dict(),
              "gap_se": est.z_score(coeffs.kappa)}
    _emit_json(cfg, "kappa", result, _constants(cfg, coeffs), args=args)
    return EXIT_OK


def cmd_newsvendor(cfg: RunConfig, args) -> int:
    _need_json(cfg, "newsvendor")
    value0 = None
    extra = {}
    coeffs = None
    if args.with_value:
        coeffs = coefficients(cfg.market, cfg.model)
        rep = estimate_value_representation(cfg.market, cfg.model, coeffs, 0.0, cfg.mc.n_paths,
                                            cfg.horizon(), cfg.mc.dt, cfg.mc.seed,
                                            threads=cfg.mc.threads)
        value0 = rep.V_hat.mean
        extra["V0"] = rep.V_hat.to_dict()
    nv = newsvendor(cfg.market, cfg.model, value0)
    _emit_json(cfg, "newsvendor", {**nv.to_dict(), **extra}, _constants(cfg, coeffs), args=args)
    return EXIT_OK


def cmd_identities(cfg: RunConfig, args) -> int:
    _need_json(cfg, "identities")
    checks = check_identities(cfg.model, cfg.market, cfg.mc.n_paths, cfg.horizon(), cfg.mc.dt,
                              cfg.mc.seed, threads=cfg.mc.threads)
    _emit_json(cfg, "identities", [c.to_dict() for c in checks], _constants(cfg), args=args)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    if not isinstance(cfg.model, GeometricBrownian):
        raise ConfigError("sweep: requires model.kind = gbm")
    sigmas = args.sigmas if args.sigmas else list(DEFAULT_SIGMAS)
    rows = sweep_sigma(cfg.market, cfg.model.mu, sigmas, cfg.mc.n_paths, cfg.horizon(),
                       cfg.mc.dt, cfg.mc.seed, threads=cfg.mc.threads)
    if cfg.output.format == "csv":
        _emit_csv(cfg, SWEEP_HEADER, [(r.sigma, r.V0, r.L_star, r.difference, r.std_error,
                                       r.status) for r in rows])
    else:
        _emit_json(cfg, "sweep", [r.to_dict() for r in rows], _constants(cfg), args=args)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "value": cmd_value,
    "foc": cmd_foc,
    "kappa": cmd_kappa,
    "newsvendor": cmd_newsvendor,
    "identities": cmd_identities,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    g = common.add_argument_group("market")
    for name in _MARKET_FLAGS:
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    g = common.add_argument_group("price model")
    g.add_argument("--model", choices=sorted(_MODEL_KEYS))
    for name in _MODEL_FLAGS:
        g.add_argument(f"--{name}", dest=name, type=float)
    g = common.add_argument_group("simulation")
    g.add_argument("--n-paths", dest="n_paths", type=int)
    g.add_argument("--horizon", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g = common.add_argument_group("output")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--output", "-o", help="output file, '-' for stdout")

    parser = argparse.ArgumentParser(prog="levy-procure",
                                     description="Optimal procurement under exponential Levy prices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the model assumptions")
    sp = sub.add_parser("simulate", parents=[common], help="price paths with the optimal policy")
    sp.add_argument("--paths", type=int, default=1, help="number of paths (default 1)")
    sp = sub.add_parser("value", parents=[common], help="estimate the optimal value")
    sp.add_argument("--y", type=float, help="initial inventory (default market.y0)")
    sp.add_argument("--method", action="append", choices=METHODS,
                    help="estimator; repeat for several (default all)")
    sp = sub.add_parser("foc", parents=[common], help="first-order condition residual at time 0")
    sp.add_argument("--y-probe", dest="y_probe", type=float, action="append")
    sub.add_parser("kappa", parents=[common], help="kappa by formula and by simulation")
    sp = sub.add_parser("newsvendor", parents=[common], help="one-shot order benchmark")
    sp.add_argument("--with-value", action="store_true",
                    help="also estimate V(0) and report the difference")
    sub.add_parser("identities", parents=[common], help="simulation checks of price identities")
    sp = sub.add_parser("sweep", parents=[common], help="V(0) minus newsvendor value across sigma")
    sp.add_argument("--sigmas", type=float, nargs="+", help="volatility grid")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.paths < 1:
        print("error: --paths must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve(args)
        if cfg.output.format is None:
            fmt = "csv" if args.command in ("simulate", "sweep") else "json"
            cfg = replace(cfg, output=replace(cfg.output, format=fmt))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionError as exc:
        for f in exc.failures:
            print(f"violated: {f.name} ({f.description}); value {f.value:.6g}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except RootFindingError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
