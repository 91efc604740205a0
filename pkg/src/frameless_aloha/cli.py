"""Command-line front end.

Commands read a line-oriented key=value config (with '#' comments), apply
key=value overrides from the command line, and write delimited results plus
rendered figures and a run manifest into the output directory.  The manifest
is itself a valid config: re-feeding it reproduces the CSV files byte for
byte, since every random quantity derives from the recorded seed.

Exit codes: 0 success, 2 usage error, 3 config or parameter error.
"""

from __future__ import annotations

import sys
from pathlib import Path

from .asymptotic import sweep_curve
from .errors import ConfigError, ParameterError
from .experiments import beacon_experiment, monte_carlo, sensitivity_alpha, sweep_optimize
from .simulator import RunConfig, derive_seed, genie_run, run_contention
from .termination import DualThreshold, FixedLength, FractionOnly, GenieAided
from . import reports

USAGE = """\
usage: frameless-aloha COMMAND [-c CONFIG] [-o DIR] [--jobs N] [key=value ...]

commands:
  simulate     average many contention periods at one operating point
  sweep        grid-search degree and thresholds for mean throughput
  asymptotic   large-population fixed-point curve over slots per user
  sensitivity  tolerated population-estimate error under a loss budget
  beacon       grid-search the fraction-only rule under an L-slot beacon

options:
  -c, --config PATH      line-oriented key=value config file
  -o, --output-dir DIR   where CSV, figures, and manifest go (default: out)
  -j, --jobs N           parallel worker processes (default: 1)

overrides are key=value pairs (a leading -- is accepted); keys match the
config file.  Grids are comma-separated, e.g. g_grid=2.78,2.83,2.88.
"""


def _parse_bool(text: str) -> bool:
    if text in ("1", "true", "yes"):
        return True
    if text in ("0", "false", "no"):
        return False
    raise ValueError("expected a boolean (1/0)")


def _parse_grid(text: str) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(p) for p in parts)


_POLICIES = ("dual", "fraction", "genie", "fixed")


def _parse_policy(text: str) -> str:
    if text not in _POLICIES:
        raise ValueError(f"expected one of {', '.join(_POLICIES)}")
    return text


_SCHEMA = {
    "n_users": int,
    "target_degree": float,
    "policy": _parse_policy,
    "threshold_s": float,
    "threshold_v": float,
    "fixed_slots": int,
    "erasure_prob": float,
    "alpha": float,
    "beacon_len": int,
    "horizon_factor": float,
    "runs": int,
    "seed": int,
    "evaluate_each_cycle": _parse_bool,
    "g_grid": _parse_grid,
    "s_grid": _parse_grid,
    "v_grid": _parse_grid,
    "refine_step": float,
    "loss_budget": float,
    "alpha_step": float,
    "alpha_max": float,
    "genie_runs": int,
    "ratio_min": float,
    "ratio_max": float,
    "ratio_step": float,
    "tol": float,
    "max_iter": int,
}

_COMMON = {
    "erasure_prob": 0.0,
    "alpha": 0.0,
    "beacon_len": 1,
    "horizon_factor": 10.0,
    "runs": 1000,
    "seed": 1,
}

# per command: required keys and optional keys with defaults (None = no default)
_COMMANDS: dict[str, tuple[set[str], dict[str, object]]] = {
    "simulate": (
        {"n_users", "target_degree"},
        dict(_COMMON, policy="dual", threshold_s=1.0, threshold_v=0.87,
             fixed_slots=None, evaluate_each_cycle=False),
    ),
    "sweep": (
        {"n_users", "g_grid", "v_grid"},
        dict(_COMMON, s_grid=(1.0,), refine_step=None),
    ),
    "asymptotic": (
        {"target_degree"},
        {"ratio_min": 0.5, "ratio_max": 1.5, "ratio_step": 0.005,
         "tol": 1e-12, "max_iter": 100000},
    ),
    "sensitivity": (
        {"n_users", "g_grid", "v_grid"},
        dict(_COMMON, loss_budget=0.05, alpha_step=0.05, alpha_max=0.2,
             genie_runs=None),
    ),
    "beacon": (
        {"n_users", "g_grid", "v_grid"},
        dict(_COMMON, beacon_len=3),
    ),
}


def _convert(key: str, raw: str, where: str) -> object:
    if key not in _SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return _SCHEMA[key](raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def _parse_config_file(path: Path, allowed: set[str]) -> dict[str, object]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg: dict[str, object] = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, _, raw = text.partition("=")
        key, raw = key.strip(), raw.strip()
        where = f"{path}:{lineno}"
        if key not in _SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key not in allowed:
            raise ConfigError(f"{where}: key {key!r} is not used by this command")
        cfg[key] = _convert(key, raw, where)
    return cfg


def _manifest_value(value: object) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_manifest(outdir: Path, command: str, cfg: dict[str, object]) -> None:
    lines = [f"# command: {command}"]
    for key in sorted(cfg):
        if cfg[key] is None:
            continue
        lines.append(f"{key}={_manifest_value(cfg[key])}")
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n")


def _build_policy(cfg: dict[str, object]) -> object:
    name = cfg["policy"]
    if name == "dual":
        return DualThreshold(cfg["threshold_s"], cfg["threshold_v"])
    if name == "fraction":
        return FractionOnly(cfg["threshold_v"])
    if name == "genie":
        return GenieAided(cfg["horizon_factor"])
    if cfg.get("fixed_slots") is None:
        raise ConfigError("policy 'fixed' needs fixed_slots")
    return FixedLength(cfg["fixed_slots"])


def _cmd_simulate(cfg: dict[str, object], outdir: Path, jobs: int) -> None:
    policy = _build_policy(cfg)
    config = RunConfig(
        n_users=cfg["n_users"], target_degree=cfg["target_degree"], policy=policy,
        erasure_prob=cfg["erasure_prob"], alpha=cfg["alpha"], beacon_len=cfg["beacon_len"],
        horizon_factor=cfg["horizon_factor"], seed=cfg["seed"],
        evaluate_each_cycle=cfg["evaluate_each_cycle"],
    )
    agg = monte_carlo(config, cfg["runs"], jobs=jobs)
    config_cols = ["n_users", "target_degree", "policy", "threshold_s", "threshold_v",
                   "erasure_prob", "alpha", "beacon_len", "runs"]
    reports.write_aggregate_csv(
        outdir / "simulate.csv", config_cols,
        [([cfg["n_users"], cfg["target_degree"], cfg["policy"], cfg["threshold_s"],
           cfg["threshold_v"], cfg["erasure_prob"], cfg["alpha"], cfg["beacon_len"],
           cfg["runs"]], agg)],
    )
    runner = genie_run if isinstance(policy, GenieAided) else run_contention
    sample = runner(config, derive_seed(cfg["seed"], 0), record_trajectory=True)
    reports.render_trajectory(outdir / "trajectory.png", sample, cfg["n_users"],
                              cfg["beacon_len"])
    print(f"simulate: mean throughput {agg.mean_throughput:.4f} "
          f"(se {agg.se_throughput:.4f}) over {agg.run_count} runs")


def _cmd_sweep(cfg: dict[str, object], outdir: Path, jobs: int) -> None:
    result = sweep_optimize(
        cfg["n_users"], cfg["g_grid"], cfg["s_grid"], cfg["v_grid"], cfg["runs"],
        erasure_prob=cfg["erasure_prob"], alpha=cfg["alpha"], beacon_len=cfg["beacon_len"],
        horizon_factor=cfg["horizon_factor"], seed=cfg["seed"], jobs=jobs,
        refine_step=cfg["refine_step"],
    )
    reports.write_sweep_csv(outdir / "sweep.csv", result)
    reports.render_sweep(outdir / "sweep.png", result)
    b = result.best
    print(f"sweep: best degree {b.target_degree:g}, thresholds "
          f"({b.throughput_threshold:g}, {b.fraction_threshold:g}), "
          f"mean throughput {b.stats.mean_throughput:.4f}")


def _cmd_asymptotic(cfg: dict[str, object], outdir: Path, jobs: int) -> None:
    lo, hi, step = cfg["ratio_min"], cfg["ratio_max"], cfg["ratio_step"]
    if not 0 < lo < hi:
        raise ConfigError("need 0 < ratio_min < ratio_max")
    if not step > 0:
        raise ConfigError("ratio_step must be positive")
    n = int(round((hi - lo) / step))
    grid = [lo + k * step for k in range(n + 1)]
    curve = sweep_curve(cfg["target_degree"], grid, tol=cfg["tol"], max_iter=cfg["max_iter"])
    reports.write_curve_csv(outdir / "curve.csv", curve)
    reports.render_curve(outdir / "curve.png", curve)
    onset = (f", avalanche in ({curve.avalanche_interval[0]:g}, "
             f"{curve.avalanche_interval[1]:g})") if curve.avalanche_interval else ""
    print(f"asymptotic: max throughput {curve.best_throughput:.4f} "
          f"at ratio {curve.best_ratio:g}{onset}")


def _cmd_sensitivity(cfg: dict[str, object], outdir: Path, jobs: int) -> None:
    result = sensitivity_alpha(
        cfg["n_users"], cfg["loss_budget"], cfg["g_grid"], cfg["v_grid"],
        cfg["alpha_step"], cfg["runs"], alpha_max=cfg["alpha_max"],
        genie_runs=cfg["genie_runs"], beacon_len=cfg["beacon_len"],
        horizon_factor=cfg["horizon_factor"], seed=cfg["seed"], jobs=jobs,
    )
    reports.write_sensitivity_csv(outdir / "sensitivity.csv", cfg["n_users"], result)
    reports.write_sensitivity_ladder_csv(outdir / "ladder.csv", result)
    reports.render_sensitivity(outdir / "sensitivity.png", result)
    print(f"sensitivity: alpha_ub {result.alpha_ub:g} at degree {result.g_at_ub:g}, "
          f"threshold {result.v_at_ub:g}")


def _cmd_beacon(cfg: dict[str, object], outdir: Path, jobs: int) -> None:
    result = beacon_experiment(
        cfg["n_users"], cfg["beacon_len"], cfg["g_grid"], cfg["v_grid"], cfg["runs"],
        erasure_prob=cfg["erasure_prob"], alpha=cfg["alpha"],
        horizon_factor=cfg["horizon_factor"], seed=cfg["seed"], jobs=jobs,
    )
    reports.write_sweep_csv(outdir / "beacon.csv", result)
    reports.render_sweep(outdir / "beacon.png", result)
    b = result.best
    print(f"beacon: best degree {b.target_degree:g}, threshold {b.fraction_threshold:g}, "
          f"mean throughput {b.stats.mean_throughput:.4f}")


_HANDLERS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "asymptotic": _cmd_asymptotic,
    "sensitivity": _cmd_sensitivity,
    "beacon": _cmd_beacon,
}


def parse_and_dispatch(argv: list[str]) -> int:
    if not argv:
        sys.stderr.write(USAGE)
        return 2
    if argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0
    command = argv[0]
    if command not in _COMMANDS:
        sys.stderr.write(f"unknown command {command!r}\n\n{USAGE}")
        return 2
    required, defaults = _COMMANDS[command]
    allowed = required | set(defaults)
    config_path: Path | None = None
    outdir = Path("out")
    jobs = 1
    overrides: dict[str, object] = {}
    tokens = argv[1:]
    i = 0
    try:
        while i < len(tokens):
            tok = tokens[i]
            if tok in ("-c", "--config", "-o", "--output-dir", "-j", "--jobs"):
                if i + 1 >= len(tokens):
                    sys.stderr.write(f"option {tok} needs a value\n")
                    return 2
                val = tokens[i + 1]
                i += 2
                if tok in ("-c", "--config"):
                    config_path = Path(val)
                elif tok in ("-o", "--output-dir"):
                    outdir = Path(val)
                else:
                    try:
                        jobs = int(val)
                    except ValueError:
                        sys.stderr.write(f"--jobs needs an integer, got {val!r}\n")
                        return 2
                    if jobs < 1:
                        sys.stderr.write("--jobs must be at least 1\n")
                        return 2
                continue
            body = tok[2:] if tok.startswith("--") else tok
            if "=" not in body:
                sys.stderr.write(f"unexpected argument {tok!r}\n\n{USAGE}")
                return 2
            key, _, raw = body.partition("=")
            where = f"override {tok!r}"
            if key not in _SCHEMA:
                raise ConfigError(f"{where}: unknown key {key!r}")
            if key not in allowed:
                raise ConfigError(f"{where}: key {key!r} is not used by command {command!r}")
            overrides[key] = _convert(key, raw, where)
            i += 1
        cfg = dict(defaults)
        if config_path is not None:
            cfg.update(_parse_config_file(config_path, allowed))
        cfg.update(overrides)
        missing = sorted(k for k in required if cfg.get(k) is None)
        if missing:
            raise ConfigError(f"command {command!r} needs keys: {', '.join(missing)}")
        outdir.mkdir(parents=True, exist_ok=True)
        _HANDLERS[command](cfg, outdir, jobs)
        _write_manifest(outdir, command, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 3
    except ParameterError as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return 3
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
