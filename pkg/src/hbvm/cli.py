"""Command-line interface.

Subcommands ``tableau``, ``integrate``, ``order-study`` and ``energy-drift``.
Exit status is 0 on success, 2 for usage or configuration errors and 3 for
numerical failures.  Settings come from flags and an optional JSON file
(``--config``); flags win.  ``--dump-config`` writes the resolved settings
in the same JSON form.
"""
import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from .integrator import IntegrationError, IntegrationPlan, energy_drift, integrate, order_study
from .problems import UnknownProblemError, builtin, registry_names
from .solver import SCHEMES, SolverConfig
from .tableau import build_operators, operator_residuals, tableau_to_csv, tableau_to_json

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    problem: Optional[str] = None
    params: dict = field(default_factory=dict)
    k: Optional[int] = None
    s: int = 2
    t0: Optional[float] = None
    tf: float = 10.0
    n_steps: int = 100
    h: list = field(default_factory=list)
    compare_k: Optional[int] = None
    form: str = "rk"
    tol: float = 1e-13
    max_iters: int = 100
    scheme: str = "fixed-point"
    jacobian_reuse: bool = False
    warm_start: bool = True
    dense_samples: int = 0
    out: Optional[str] = None
    format: str = "csv"

    @property
    def method_k(self):
        return self.s if self.k is None else self.k

    def solver_config(self):
        return SolverConfig(
            tol=self.tol, max_iters=self.max_iters, scheme=self.scheme, jacobian_reuse=self.jacobian_reuse
        )

    def plan(self):
        return IntegrationPlan(
            tf=self.tf,
            n_steps=self.n_steps,
            k=self.method_k,
            s=self.s,
            t0=self.t0,
            config=self.solver_config(),
            dense_samples=self.dense_samples,
            warm_start=self.warm_start,
        )


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _parse_params(items):
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        params[key] = float(value)
    return params


def _parse_ladder(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _build_parser():
    parser = argparse.ArgumentParser(prog="hbvm", description="HBVM(k, s) integrators: tableaux, trajectories, order and energy studies.")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def method_opts(p):
        p.add_argument("--k", type=int, default=S, help="number of Gauss nodes (default: s)")
        p.add_argument("--s", type=int, default=S, help="polynomial degree / Fourier blocks")
        p.add_argument("--out", default=S, help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default=S)

    def run_opts(p):
        p.add_argument("--config", help="JSON settings file")
        p.add_argument("--dump-config", metavar="PATH", help="write resolved settings as JSON")
        p.add_argument("--problem", default=S, help=f"one of: {', '.join(registry_names())}")
        p.add_argument("--param", action="append", default=S, metavar="KEY=VALUE")
        p.add_argument("--t0", type=float, default=S)
        p.add_argument("--tf", type=float, default=S)
        p.add_argument("--n-steps", dest="n_steps", type=int, default=S)
        p.add_argument("--tol", type=float, default=S)
        p.add_argument("--max-iters", dest="max_iters", type=int, default=S)
        p.add_argument("--scheme", choices=SCHEMES, default=S)
        p.add_argument("--jacobian-reuse", dest="jacobian_reuse", action="store_true", default=S)
        p.add_argument("--no-warm-start", dest="warm_start", action="store_false", default=S)
        p.add_argument("--dense-samples", dest="dense_samples", type=int, default=S)

    p = sub.add_parser("tableau", help="export an HBVM(k, s) Butcher tableau")
    method_opts(p)
    p.add_argument("--form", choices=("rk", "rkn"), default=S)
    p.set_defaults(config=None, dump_config=None)

    p = sub.add_parser("integrate", help="integrate a built-in problem")
    method_opts(p)
    run_opts(p)

    p = sub.add_parser("order-study", help="convergence order on a step-size ladder")
    method_opts(p)
    run_opts(p)
    p.add_argument("--h", type=_parse_ladder, default=S, help="comma-separated step sizes")

    p = sub.add_parser("energy-drift", help="energy error along a trajectory")
    method_opts(p)
    run_opts(p)
    p.add_argument("--compare-k", dest="compare_k", type=int, default=S, help="control run with this k")
    return parser


def resolve_config(args):
    """Merge defaults, the optional JSON file and explicit flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - _FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if loaded.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {loaded['command']!r}, not {args.command!r}")
        values.update(loaded)
    flags = {k: v for k, v in vars(args).items() if k in _FIELDS}
    if "params" not in flags and "param" in vars(args):
        flags["params"] = {**values.get("params", {}), **_parse_params(args.param)}
    values.update(flags)
    values["command"] = args.command
    cfg = RunConfig(**values)
    if cfg.s < 1 or cfg.method_k < 1:
        raise ConfigError("k and s must be positive")
    if cfg.method_k < cfg.s:
        raise ConfigError("k must be ≥ s")
    return cfg


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _summary(line, cfg):
    # keep machine-readable output on stdout clean
    print(line, file=sys.stdout if cfg.out is not None else sys.stderr)


def cmd_tableau(cfg):
    ops = build_operators(cfg.s, cfg.method_k)
    res = operator_residuals(ops)
    print(
        f"HBVM({ops.k},{ops.s}) identity residuals: "
        f"|P^T Omega P - I| = {res['orthonormality']:.3e}, "
        f"|P^T Omega I_s - X_s| = {res['integration']:.3e}",
        file=sys.stderr,
    )
    text = tableau_to_json(ops) + "\n" if cfg.format == "json" else tableau_to_csv(ops, cfg.form)
    _emit(text, cfg.out)
    return EXIT_OK


def _problem(cfg):
    if cfg.problem is None:
        raise ConfigError(f"--problem is required; available: {', '.join(registry_names())}")
    return builtin(cfg.problem, **cfg.params)


def _write_trajectory(traj, cfg):
    _emit(traj.to_json() + "\n" if cfg.format == "json" else traj.to_csv(), cfg.out)


def cmd_integrate(cfg):
    problem = _problem(cfg)
    try:
        traj = integrate(problem, plan=cfg.plan())
    except IntegrationError as exc:
        _write_trajectory(exc.partial, cfg)
        print(f"error: {exc}; partial trajectory written ({exc.partial.n_steps} steps)", file=sys.stderr)
        return EXIT_NUMERIC
    _write_trajectory(traj, cfg)
    line = f"steps={traj.n_steps} max_iters={int(traj.iterations.max())}"
    drift = traj.max_energy_drift()
    if drift is not None:
        line += f" max|dH|={drift:.3e}"
    _summary(line, cfg)
    return EXIT_OK


def cmd_order_study(cfg):
    if not cfg.h:
        raise ConfigError("order-study needs a non-empty --h ladder")
    problem = _problem(cfg)
    study = order_study(problem, cfg.s, cfg.method_k, cfg.h, cfg.tf, config=cfg.solver_config())
    _emit(study.to_csv(), cfg.out)
    final = study.slopes[-1] if study.reliable[-1] else float("nan")
    _summary(f"final slope={final:.4f} (expected {2 * cfg.s})", cfg)
    return EXIT_OK


def cmd_energy_drift(cfg):
    problem = _problem(cfg)
    run = energy_drift(problem, cfg.plan())
    _emit(run.to_csv(), cfg.out)
    line = f"k={cfg.method_k} s={cfg.s} max|dH|={run.max_drift:.3e}"
    if cfg.compare_k is not None:
        control = energy_drift(problem, dataclasses.replace(cfg.plan(), k=cfg.compare_k))
        ratio = control.max_drift / run.max_drift if run.max_drift > 0 else float("inf")
        line += f" control k={cfg.compare_k} max|dH|={control.max_drift:.3e} ratio={ratio:.3e}"
    _summary(line, cfg)
    return EXIT_OK


_COMMANDS = {
    "tableau": cmd_tableau,
    "integrate": cmd_integrate,
    "order-study": cmd_order_study,
    "energy-drift": cmd_energy_drift,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if getattr(args, "dump_config", None):
            with open(args.dump_config, "w") as fh:
                json.dump(dataclasses.asdict(cfg), fh, indent=2)
        return _COMMANDS[cfg.command](cfg)
    except (ConfigError, UnknownProblemError, ValueError, TypeError, OSError) as exc:
        print(f"hbvm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"hbvm {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
