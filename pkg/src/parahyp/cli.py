"""Command-line front door: ``parahyp {solve,experiment,suite,envelope}``.

Config files hold one ``key = value`` per line (``#`` starts a comment); keys
are the long flag names with dashes or underscores.  Flags override the file,
the file overrides per-experiment defaults.  The resolved configuration is
echoed to ``<out>/<command>_config.txt`` in the same format and re-runs identically with
``--config``.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import harness, storage
from .envelope import envelope_rows, sharp_envelope
from .model import get_system, system_names
from .paraproduct import QUANTIZATIONS, ParaConfig
from .solver import SCHEMES, GridTooCoarse, SolveConfig, solve
from .spectral import PROFILES, BlowupDetected, GridSpec

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DATA = ("sine", "three_mode")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "solve"
    experiment: str = ""
    system: str = "burgers"
    dim: int = 1
    n: int = 256
    datum: str = "sine"
    scheme: str = "euler_reg"
    epsilon: float = 2.0**-10
    T: float = 0.5
    s: float = 3.0
    nu: float = 1e-3
    inner_dt: float | None = None
    h_cut: int | None = None
    gradient_fraction: float | None = None
    delta: float = 0.25
    gap: int = 8
    profile: str = "sharp"
    quantization: str = "arg-lowpass"
    seed: int = 0
    out: str = "out"
    input: str = ""
    emit_plotscript: bool = False

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            scheme=self.scheme,
            epsilon=self.epsilon,
            T=self.T,
            s=self.s,
            nu=self.nu,
            inner_dt=self.inner_dt,
            h_cut=self.h_cut,
            gradient_fraction=self.gradient_fraction,
            para=ParaConfig(gap=self.gap, quantization=self.quantization, profile=self.profile),
        )

    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.n)

    def echo(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(RunConfig)}
_OPTIONAL = {"inner_dt": float, "h_cut": int, "gradient_fraction": float}
_TYPES = {"dim": int, "n": int, "gap": int, "seed": int, "epsilon": float, "T": float, "s": float, "nu": float, "delta": float}


def _coerce(key: str, raw: str):
    if key == "emit_plotscript":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if key in _OPTIONAL:
        return None if raw.lower() in ("", "none") else _OPTIONAL[key](raw)
    if key == "seed":
        v = int(raw, 0)
        if not 0 <= v < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v
    return _TYPES.get(key, str)(raw)


def parse_config_file(path: str) -> dict:
    """Parse key = value lines; raises ConfigError naming the line and field."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in body.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown field {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: field {key!r}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--system", choices=system_names())
    common.add_argument("--dim", type=int, choices=(1, 2))
    common.add_argument("--n", type=int)
    common.add_argument("--datum", choices=DATA)
    common.add_argument("--scheme", choices=SCHEMES)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--T", type=float)
    common.add_argument("--s", type=float)
    common.add_argument("--nu", type=float)
    common.add_argument("--inner-dt", dest="inner_dt", type=float)
    common.add_argument("--h-cut", dest="h_cut", type=int)
    common.add_argument("--gradient-fraction", dest="gradient_fraction", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--gap", type=int)
    common.add_argument("--profile", choices=PROFILES)
    common.add_argument("--quantization", choices=QUANTIZATIONS)
    common.add_argument("--seed", type=lambda v: _coerce("seed", v))
    common.add_argument("--out")
    common.add_argument("--emit-plotscript", dest="emit_plotscript", action="store_const", const=True)

    p = argparse.ArgumentParser(prog="parahyp", description="Paradifferential solvers and experiments for symmetric hyperbolic systems.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="advance a datum and write the trajectory")
    ex = sub.add_parser("experiment", parents=[common], help="run one experiment")
    ex.add_argument("experiment", choices=harness.EXPERIMENT_NAMES)
    su = sub.add_parser("suite", parents=[common], help="run every experiment")
    su.add_argument("--all", action="store_true", help="accepted for clarity; the suite always runs everything")
    en = sub.add_parser("envelope", parents=[common], help="sharp envelope of a dumped state")
    en.add_argument("--input", required=True)
    return p


def explicit_values(args: argparse.Namespace) -> dict:
    """Config-file values overlaid with the flags actually given."""
    values = parse_config_file(args.config) if args.config else {}
    values.update({k: v for k, v in vars(args).items() if k in _FIELDS and v is not None and k != "command"})
    return values


def build_config(command: str, explicit: dict) -> RunConfig:
    """defaults < experiment defaults < config file < flags."""
    cfg = RunConfig(command=command)
    if command == "experiment":
        _apply(cfg, _experiment_defaults(explicit.get("experiment", "")))
    _apply(cfg, {k: v for k, v in explicit.items() if k != "command"})
    _validate(cfg)
    return cfg


def _experiment_defaults(name: str) -> dict:
    return dict(harness.DEFAULTS.get(name, {}))


def _apply(cfg: RunConfig, values: dict):
    for k, v in values.items():
        setattr(cfg, k, v)


def _validate(cfg: RunConfig):
    if cfg.system not in system_names():
        raise ConfigError(f"field 'system': unknown system {cfg.system!r}")
    if get_system(cfg.system).dim != cfg.dim:
        raise ConfigError(f"field 'dim': system {cfg.system} is {get_system(cfg.system).dim}-dimensional")
    if cfg.datum not in DATA:
        raise ConfigError(f"field 'datum': choose from {DATA}")
    try:
        cfg.grid()
        cfg.solve_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not 0 < cfg.delta < 1:
        raise ConfigError("field 'delta': must lie in (0, 1)")


PLOTSCRIPT = """# plotting helper, not used by the package
import csv, sys
import matplotlib.pyplot as plt

path = {path!r}
with open(path) as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
x, ys = {x!r}, {ys!r}
for y in ys:
    plt.plot([float(r[x]) for r in rows], [float(r[y]) for r in rows], label=y)
plt.xlabel(x)
plt.legend()
plt.savefig(path + ".png")
"""


def _write_table(cfg: RunConfig, path: Path, rows: list[dict], comments=()):
    storage.write_csv(path, rows, comments)
    if cfg.emit_plotscript and rows:
        cols = list(rows[0])
        numeric = [c for c in cols[1:] if isinstance(rows[0][c], (int, float))]
        storage.atomic_write(path.with_suffix(".plot.py"), PLOTSCRIPT.format(path=path.name, x=cols[0], ys=numeric))


def _datum(cfg: RunConfig):
    grid = cfg.grid()
    sys_ = get_system(cfg.system)
    u0 = harness.three_mode_datum(grid) if cfg.datum == "three_mode" else harness.sine_datum(grid)
    return sys_, harness.stack_components(u0, sys_.components)


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    sys_, u0 = _datum(cfg)
    code = EXIT_OK
    try:
        traj = solve(sys_, u0, cfg.solve_config())
    except BlowupDetected as exc:
        print(f"blow-up detected: {exc}", file=sys.stderr)
        if exc.trajectory is None:
            return EXIT_FAIL
        traj, code = exc.trajectory, EXIT_FAIL
    comments = [f"system={cfg.system} scheme={cfg.scheme} n={cfg.n} s={cfg.s}", "columns: t, per-component L2, hs = H^s norm, l2, A = sup|u|, B = sup|grad u|, intB = int_0^t B"]
    _write_table(cfg, out / "trajectory.csv", traj.rows(), comments)
    storage.dump_states(out / "states.bin", traj.times, traj.states)
    print(f"wrote {len(traj.times)} samples to {out}")
    return code


def _write_result(cfg: RunConfig, out: Path, res: harness.ExperimentResult):
    for table, rows in res.tables.items():
        suffix = "" if table == "series" else f"_{table}"
        _write_table(cfg, out / f"{res.name}{suffix}.csv", rows, [f"experiment={res.name} table={table}"])
    storage.write_json(out / f"{res.name}.json", res.summary())


def _run_experiment(cfg: RunConfig, name: str) -> harness.ExperimentResult:
    return harness.run_named(name, get_system(cfg.system), cfg.grid(), cfg.solve_config(), cfg.seed)


def cmd_experiment(cfg: RunConfig, out: Path) -> int:
    res = _run_experiment(cfg, cfg.experiment)
    _write_result(cfg, out, res)
    print(f"{res.name}: {'PASS' if res.passed else 'FAIL'}")
    return EXIT_OK if res.passed else EXIT_FAIL


def _suite_job(args: tuple[dict, str]) -> harness.ExperimentResult:
    explicit, name = args
    return _run_experiment(build_config("experiment", {**explicit, "experiment": name}), name)


def worker_count() -> int:
    raw = os.environ.get("PARAHYP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"PARAHYP_THREADS must be an integer, got {raw!r}") from None


def cmd_suite(cfg: RunConfig, out: Path, explicit: dict) -> int:
    jobs = [(explicit, name) for name in harness.EXPERIMENT_NAMES]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    for res in results:
        _write_result(cfg, out, res)
        print(f"{res.name}: {'PASS' if res.passed else 'FAIL'}")
    storage.write_json(out / "suite.json", {r.name: r.passed for r in results})
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_envelope(cfg: RunConfig, out: Path) -> int:
    try:
        times, states = storage.load_states(cfg.input)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"field 'input': {exc}") from None
    env = sharp_envelope(states[-1], cfg.s, cfg.delta)
    ok = env.dominates(env.shell_norms) and env.slowly_varying()
    comments = [f"input={cfg.input} t={times[-1]!r} s={cfg.s} delta={cfg.delta}", "columns: k, a_k = |P_k u|_{H^s}, c_k"]
    _write_table(cfg, out / "envelope.csv", envelope_rows(env), comments)
    print(f"envelope of {len(env.c)} shells; invariants {'hold' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "experiment": cmd_experiment, "envelope": cmd_envelope}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        explicit = explicit_values(args)
        cfg = build_config(args.command, explicit)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        if cfg.command == "suite":
            # per-experiment defaults still apply beneath these values
            echo = "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n" for k, v in sorted(explicit.items()))
            storage.atomic_write(out / "suite_config.txt", "# suite: explicit values only\n" + echo)
            return cmd_suite(cfg, out, explicit)
        storage.atomic_write(out / f"{cfg.command}_config.txt", cfg.echo())
        return COMMANDS[cfg.command](cfg, out)
    except (ConfigError, GridTooCoarse) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
