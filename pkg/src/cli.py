"""
Command-line interface for ccrobust.

This module provides the `ccrobust` command with four subcommands: fit a
composite-loss model to a CSV file, reproduce the simulation tables, run
numerical diagnostics and export weight curves.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

# Load .env file if present (before any config is read)
from dotenv import load_dotenv

load_dotenv()

from src import __version__  # noqa: E402
from src.config import DEFAULT_CONFIG_PATH, ConfigManager  # noqa: E402
from src.diagnostics import (  # noqa: E402
    CurveRow,
    ara_curve,
    check_concavity,
    check_fisher,
    check_majorization,
    check_tcave_biconjugate,
    loss_curve,
    weight_curve,
    write_curve,
)
from src.engine import fit  # noqa: E402
from src.exceptions import (  # noqa: E402
    CCError,
    ConfigError,
    ConvergenceError,
    DataFormatError,
    SimulationError,
    ValidationError,
)
from src.models import (  # noqa: E402
    CompositeLoss,
    ConcaveKind,
    ConcaveSpec,
    Contamination,
    ConvexKind,
    ConvexSpec,
    Example,
    FitConfig,
    FitResult,
    ScenarioSpec,
    TaskKind,
    coerce_enum,
)
from src.simulation import (  # noqa: E402
    SimulationSettings,
    default_estimators,
    generate,
    run_mc,
    select_estimators,
    tune_lambda,
    write_summary,
    wide_table,
    write_wide_table,
)
from src.utils import derive_seed, read_dataset, write_dataset, write_rows  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_CONVERGENCE = 3
EXIT_INTERRUPTED = 130

COMMANDS = ("fit", "simulate", "diagnose", "weights")
CHECKS = ("concavity", "fisher", "conjugate", "majorization", "ara", "loss")
DEFAULT_OUTPUT = "ccrobust-output"

# sigma used by diagnose and weights when none is given
DIAGNOSTIC_SIGMA = 1.0

# Convex component implied by a task, and the task implied by a convex component
TASK_DEFAULT_CONVEX = {
    TaskKind.REGRESSION: ConvexKind.GAUSSIAN,
    TaskKind.CLASSIFICATION: ConvexKind.GAUSSIAN_C,
    TaskKind.BINOMIAL: ConvexKind.BINOMIAL,
    TaskKind.POISSON: ConvexKind.POISSON,
}
CONVEX_DEFAULT_TASK = {
    ConvexKind.GAUSSIAN: TaskKind.REGRESSION,
    ConvexKind.EPS_INSENSITIVE: TaskKind.REGRESSION,
    ConvexKind.GAUSSIAN_C: TaskKind.CLASSIFICATION,
    ConvexKind.HINGE: TaskKind.CLASSIFICATION,
    ConvexKind.BINOMIAL: TaskKind.BINOMIAL,
    ConvexKind.POISSON: TaskKind.POISSON,
}

FISHER_P_GRID = np.round(np.linspace(0.05, 0.95, 19), 10)
MAJORIZATION_ANCHORS = 25


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one CLI invocation needs besides the configuration file.

    Values come from the `run` section of a user config file, overridden by
    command-line flags. Sequences are stored as tuples.

    Attributes:
        command: fit, simulate, diagnose or weights
        input: Training CSV (fit)
        output: Output directory
        response: Response column name
        task: regression, classification, binomial or poisson
        intercept: Add an intercept column
        columns: Predictor columns (default: all but the response)
        concave: Concave component (may be written 'kind-convex')
        sigma: Concave scale
        delta: ecave/gcave smoothing parameter
        convex: Convex component
        epsilon: epsInsensitive tube width
        penalty: lasso or scad
        lam: Penalty level or 'tune'
        alpha: Mixing weight of the sparsity penalty
        scad_a: SCAD shape parameter
        algorithm: coco, cocots or cocotv
        trim_h: Kept observations for cocotv
        init: Outer-loop starting point
        tune_input: Tuning CSV for lam = 'tune'
        seed: Seed
        runs: Monte-Carlo runs
        scenario: ex1, ex2 or ex3
        contamination: Schemes for ex1/ex2
        flip: Label-flip rates for ex3
        estimators: Estimator names to keep
        export_data: Directory for the generated CSVs of run 0
        check: Diagnostic to run
        normalize: Normalize loss curves by g(s(0))
        workers: Worker processes for simulate
    """

    command: str = "fit"
    input: Optional[str] = None
    output: Optional[str] = None
    response: str = "y"
    task: Optional[str] = None
    intercept: bool = True
    columns: Optional[Tuple[str, ...]] = None
    concave: Optional[str] = None
    sigma: Optional[float] = None
    delta: Optional[float] = None
    convex: Optional[str] = None
    epsilon: Optional[float] = None
    penalty: Optional[str] = None
    lam: Union[float, str] = 0.0
    alpha: Optional[float] = None
    scad_a: Optional[float] = None
    algorithm: Optional[str] = None
    trim_h: Optional[int] = None
    init: Optional[str] = None
    tune_input: Optional[str] = None
    seed: int = 0
    runs: Optional[int] = None
    scenario: Optional[str] = None
    contamination: Optional[Tuple[str, ...]] = None
    flip: Optional[Tuple[float, ...]] = None
    estimators: Optional[Tuple[str, ...]] = None
    export_data: Optional[str] = None
    check: Optional[str] = None
    normalize: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        """Validate the command and the penalty level."""
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command!r}. Must be one of {list(COMMANDS)}")
        if self.check is not None and self.check not in CHECKS:
            raise ConfigError(f"Unknown check {self.check!r}. Must be one of {list(CHECKS)}")
        if isinstance(self.lam, str) and self.lam != "tune":
            try:
                object.__setattr__(self, "lam", float(self.lam))
            except ValueError:
                raise ConfigError(f"lambda must be a number or 'tune', got {self.lam!r}") from None
        for name in ("columns", "contamination", "flip", "estimators"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))

    @property
    def tuned(self) -> bool:
        return self.lam == "tune"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a dictionary (the key 'lambda' holds lam)."""
        values = asdict(self)
        values["lambda"] = values.pop("lam")
        for key, value in values.items():
            if isinstance(value, tuple):
                values[key] = list(value)
        return values

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        """
        Build from a dictionary such as the `run` section of a config file.

        Raises:
            ConfigError: Naming the first unknown key
        """
        values = dict(values)
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        known = {f.name for f in fields(cls)}
        for key in values:
            if key not in known:
                raise ConfigError(f"Unknown run configuration key: {key}")
        return cls(**values)


def setup_logging(config: dict) -> None:
    """
    Setup logging configuration.

    Args:
        config: Logging configuration dictionary
    """
    log_level = config.get("level") or "WARNING"
    log_format = config.get("format") or "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    log_file = config.get("file")

    logging.basicConfig(
        level=getattr(logging, str(log_level).upper(), logging.WARNING),
        format=log_format,
        filename=log_file,
        force=True,
    )


def _add_loss_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--loss",
        dest="concave",
        help="Concave component, optionally with its convex partner (e.g. ccave or ccave-gaussian)",
    )
    parser.add_argument("--sigma", type=float, help="Concave scale sigma")
    parser.add_argument("--delta", type=float, help="Smoothing parameter of ecave/gcave")
    parser.add_argument(
        "--convex",
        help="Convex component: gaussian, gaussianC, binomial, poisson, hinge, epsInsensitive",
    )
    parser.add_argument("--epsilon", type=float, help="Tube width of epsInsensitive")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser.

    Returns:
        Configured ArgumentParser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="Path to a configuration file (YAML or JSON)")
    common.add_argument("-o", "--output", help=f"Output directory (default: {DEFAULT_OUTPUT})")
    common.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        prog="ccrobust",
        description="Robust estimation with composite (concave o convex) losses",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Robust regression with a bounded loss
  ccrobust fit data.csv --loss ccave --sigma 1.5 --convex gaussian

  # Trim the 10 worst of 100 observations
  ccrobust fit data.csv --loss tcave --sigma 1 --algorithm cocotv --h 90

  # Penalized logistic regression, lambda picked on a tuning set
  ccrobust fit train.csv --task binomial --loss dcave --sigma 4 --penalty scad \\
      --lambda tune --tune-input tune.csv

  # Reproduce the regression simulation with 25 runs on 4 workers
  ccrobust simulate --scenario ex1 --runs 25 --workers 4

  # Check a loss numerically
  ccrobust diagnose --check fisher --loss dcave-binomial --sigma 4
        """,
    )
    parser.add_argument("--version", action="version", version=f"ccrobust v{__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit_parser = sub.add_parser("fit", parents=[common], help="Fit a model to a CSV file")
    fit_parser.add_argument("input", help="Training CSV with a header row")
    fit_parser.add_argument("--response", help="Response column (default: y)")
    fit_parser.add_argument("--task", choices=[t.value for t in TaskKind], help="Task kind")
    fit_parser.add_argument(
        "--no-intercept",
        dest="intercept",
        action="store_false",
        default=None,
        help="Fit without intercept",
    )
    fit_parser.add_argument(
        "--columns", nargs="+", help="Predictor columns (default: all but the response)"
    )
    _add_loss_arguments(fit_parser)
    fit_parser.add_argument("--penalty", choices=["lasso", "scad"], help="Sparsity penalty family")
    fit_parser.add_argument(
        "--lambda", dest="lam", help="Penalty level, or 'tune' (needs --tune-input)"
    )
    fit_parser.add_argument("--alpha", type=float, help="Mixing weight of the sparsity penalty")
    fit_parser.add_argument("--scad-a", dest="scad_a", type=float, help="SCAD shape parameter")
    fit_parser.add_argument("--algorithm", choices=["coco", "cocots", "cocotv"], help="Outer loop")
    fit_parser.add_argument("--h", dest="trim_h", type=int, help="Kept observations (cocotv)")
    fit_parser.add_argument(
        "--init", choices=["zeros", "leastSquaresFit", "trimmedStart"], help="Starting point"
    )
    fit_parser.add_argument("--tune-input", dest="tune_input", help="Tuning CSV for --lambda tune")
    fit_parser.add_argument("--seed", type=int, help="Seed of the trimmed start")

    sim_parser = sub.add_parser("simulate", parents=[common], help="Run a Monte-Carlo simulation")
    sim_parser.add_argument(
        "--scenario", choices=[e.value for e in Example], help="Simulation design"
    )
    sim_parser.add_argument(
        "--contamination",
        nargs="+",
        choices=[c.value for c in Contamination],
        help="Schemes for ex1/ex2 (default: all)",
    )
    sim_parser.add_argument(
        "--flip", nargs="+", type=float, help="Label-flip rates for ex3 (default: 0 0.1 0.2)"
    )
    sim_parser.add_argument("--runs", type=int, help="Monte-Carlo runs")
    sim_parser.add_argument("--seed", type=int, help="Scenario seed")
    sim_parser.add_argument(
        "--estimators", nargs="+", help="Estimator names to keep (e.g. LS ccave tcave)"
    )
    sim_parser.add_argument("--workers", type=int, help="Worker processes (default: CPU count)")
    sim_parser.add_argument(
        "--single-threaded", action="store_true", help="Run without worker processes"
    )
    sim_parser.add_argument("--no-progress", action="store_true", help="Disable progress bar")
    sim_parser.add_argument(
        "--export-data", dest="export_data", help="Write the CSVs of run 0 to this directory"
    )

    diag_parser = sub.add_parser(
        "diagnose", parents=[common], help="Run a numerical check on a loss"
    )
    diag_parser.add_argument("--check", choices=CHECKS, required=True, help="Diagnostic to run")
    _add_loss_arguments(diag_parser)
    diag_parser.add_argument(
        "--normalize", action="store_true", default=None, help="Scale loss curves so Gamma(0) = 1"
    )

    weights_parser = sub.add_parser(
        "weights", parents=[common], help="Tabulate the weight function"
    )
    weights_parser.add_argument("--concave", help="Concave component")
    weights_parser.add_argument("--sigma", type=float, help="Concave scale sigma")
    weights_parser.add_argument("--delta", type=float, help="Smoothing parameter of ecave/gcave")

    return parser


def parse_args(argv=None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns:
        Parsed arguments namespace
    """
    return build_parser().parse_args(argv)


def build_cli_overrides(args: argparse.Namespace) -> dict:
    """
    Build configuration overrides from CLI arguments.

    Args:
        args: Parsed command-line arguments

    Returns:
        Dictionary of configuration overrides
    """
    overrides: Dict[str, Any] = {}

    simulation = {}
    if getattr(args, "single_threaded", False):
        simulation["workers"] = 1
    elif getattr(args, "workers", None) is not None:
        simulation["workers"] = args.workers
    if getattr(args, "runs", None) is not None:
        simulation["runs"] = args.runs
    if getattr(args, "no_progress", False):
        simulation["progress"] = False
    if simulation:
        overrides["simulation"] = simulation

    if args.verbose:
        overrides["logging"] = {"level": "DEBUG"}

    return overrides


def build_run_config(args: argparse.Namespace, config_manager: ConfigManager) -> RunConfig:
    """
    Merge the config file's `run` section with the command-line flags.

    Flags given on the command line win over the file.

    Returns:
        RunConfig
    """
    values = config_manager.section("run")
    values["command"] = args.command
    known = {f.name for f in fields(RunConfig)}
    for key, value in vars(args).items():
        if key in known and value is not None:
            values[key] = value
    if args.command == "simulate" and args.single_threaded:
        values["workers"] = 1
    return RunConfig.from_dict(values)


def _convex_name(run: RunConfig) -> Optional[str]:
    """Convex name from '--loss kind-convex' or --convex (they must agree)."""
    from_loss = run.concave.partition("-")[2] if run.concave else ""
    if from_loss and run.convex and from_loss != run.convex:
        raise ValidationError(f"--loss names convex {from_loss!r} but --convex is {run.convex!r}")
    return from_loss or run.convex


def resolve_loss(
    run: RunConfig, task: Optional[TaskKind] = None, sigma_default: Optional[float] = None
) -> CompositeLoss:
    """
    Build the composite loss named by a run configuration.

    Args:
        run: Run configuration
        task: Task used to choose a default convex component
        sigma_default: sigma used when the run gives none

    Returns:
        CompositeLoss

    Raises:
        ValidationError: If a component name is unknown or sigma is missing
    """
    if not run.concave:
        raise ValidationError(f"--loss is required; valid names: {[k.value for k in ConcaveKind]}")
    convex_name = _convex_name(run)
    if convex_name:
        convex_kind = coerce_enum(ConvexKind, convex_name)
    else:
        convex_kind = TASK_DEFAULT_CONVEX[task or TaskKind.REGRESSION]

    sigma = run.sigma if run.sigma is not None else sigma_default
    if sigma is None:
        raise ValidationError("--sigma is required")
    concave = ConcaveSpec(coerce_enum(ConcaveKind, run.concave.partition("-")[0]), sigma, run.delta)
    return CompositeLoss(concave, ConvexSpec(convex_kind, run.epsilon))


def resolve_task(run: RunConfig) -> TaskKind:
    """Task from --task, else implied by the convex component, else regression."""
    if run.task:
        return coerce_enum(TaskKind, run.task)
    convex_name = _convex_name(run)
    if convex_name:
        return CONVEX_DEFAULT_TASK[coerce_enum(ConvexKind, convex_name)]
    return TaskKind.REGRESSION


def _json_default(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, payload: Dict[str, Any]) -> None:
    """Write a JSON document with sorted keys."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _output_dir(run: RunConfig) -> Path:
    return Path(run.output or DEFAULT_OUTPUT)


def write_fit_artifacts(
    out: Path,
    result: FitResult,
    names,
    report: Dict[str, Any],
    float_format: str,
) -> None:
    """
    Write coefficients.csv, weights.csv and report.json.

    Args:
        out: Output directory
        result: Fit result
        names: Coefficient names
        report: Run report (effective configuration and data summary)
        float_format: printf-style format for floats
    """
    write_rows(
        str(out / "coefficients.csv"),
        ("name", "estimate"),
        ({"name": name, "estimate": float(b)} for name, b in zip(names, result.beta)),
        float_format,
    )
    write_rows(
        str(out / "weights.csv"),
        ("row_id", "z", "v", "weight"),
        (
            {"row_id": i + 1, "z": float(z), "v": float(v) + 0.0, "weight": float(-v) + 0.0}
            for i, (z, v) in enumerate(zip(result.z, result.dual_v))
        ),
        float_format,
    )
    write_json(out / "report.json", {**report, "result": result.to_dict()})


def cmd_fit(run: RunConfig, config_manager: ConfigManager) -> int:
    """
    Fit a model to a CSV file and write its artifacts.

    Returns:
        EXIT_OK, or EXIT_CONVERGENCE when the outer loop stopped at max_outer
    """
    if not run.input:
        raise ValidationError("fit needs an input CSV")
    task = resolve_task(run)
    loss = resolve_loss(run, task)
    data = read_dataset(run.input, run.response, task, run.intercept, run.columns)
    fit_config = config_manager.fit_config(
        algorithm=run.algorithm, trim_h=run.trim_h, init=run.init, seed=run.seed
    )
    penalty_overrides = {"family": run.penalty, "alpha": run.alpha, "scad_a": run.scad_a}

    print(f"Fitting {loss.label} to {data.n} rows x {data.p} predictors ({task.value})...")
    if run.tuned:
        if not run.tune_input:
            raise ValidationError("--lambda tune requires --tune-input")
        predictors = [data.feature_names[j] for j in data.slope_index]
        tune = read_dataset(run.tune_input, run.response, task, run.intercept, predictors)
        template = config_manager.penalty_spec(0.0, **penalty_overrides)
        result, lam = tune_lambda(
            data,
            tune,
            loss,
            template,
            fit_config,
            config_manager.get("simulation.n_lambda", 50),
            config_manager.get("simulation.lambda_min_ratio", 1e-4),
        )
        penalty = replace(template, lam=lam)
    else:
        penalty = config_manager.penalty_spec(float(run.lam), **penalty_overrides)
        result = fit(data, loss, penalty, fit_config)

    out = _output_dir(run)
    report = {
        "run": run.to_dict(),
        "fit_config": _fit_config_dict(fit_config),
        "loss": loss.to_dict(),
        "penalty": penalty.to_dict(),
        "data": {"path": run.input, "n": data.n, "p": data.p, "task": task.value},
    }
    write_fit_artifacts(
        out, result, data.feature_names, report, config_manager.get("output.float_format", "%.10g")
    )
    print_fit_result(result, data.feature_names, loss, penalty, out)
    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def _fit_config_dict(config: FitConfig) -> Dict[str, Any]:
    values = asdict(config)
    values["init_beta"] = list(config.init_beta) if config.init_beta is not None else None
    return values


def print_fit_result(result: FitResult, names, loss: CompositeLoss, penalty, out: Path) -> None:
    """Print a fit summary."""
    print("\n" + "=" * 70)
    print("FIT RESULT")
    print("=" * 70)
    print(f"Loss: {loss.label}")
    print(f"Algorithm: {result.algorithm.value}")
    print(f"Penalty: {penalty.family.value} (lambda={penalty.lam:.6g}, alpha={penalty.alpha:g})")
    print(f"Status: {'CONVERGED' if result.converged else 'NOT CONVERGED'}")
    print(f"Outer iterations: {result.outer_iters}")
    print(f"Objective: {result.objective:.8g}")
    down = int(np.sum(result.weights < 1.0 - 1e-12))
    print(f"Downweighted rows: {down} of {len(result.weights)}")
    if result.inner_warnings:
        print(f"Inner solver hit its cap at iterations: {result.inner_warnings}")
    print("\nCoefficients:")
    for name, b in zip(names, result.beta):
        print(f"  {name:<20} {b: .6f}")
    print(f"\nArtifacts: {out}/coefficients.csv, weights.csv, report.json")
    print("=" * 70)


def _scenarios(run: RunConfig) -> Tuple[ScenarioSpec, ...]:
    if not run.scenario:
        raise ValidationError(f"--scenario is required; valid names: {[e.value for e in Example]}")
    example = coerce_enum(Example, run.scenario)
    if example is Example.EX3:
        if run.contamination:
            raise ValidationError("ex3 is contaminated with --flip, not --contamination")
        flips = run.flip or (0.0, 0.1, 0.2)
        return tuple(ScenarioSpec(example, flip_pct=f, seed=run.seed) for f in flips)
    if run.flip:
        raise ValidationError("--flip only applies to ex3")
    schemes = run.contamination or tuple(c.value for c in Contamination)
    return tuple(ScenarioSpec(example, contamination=c, seed=run.seed) for c in schemes)


def export_scenario_data(directory: Path, scenario: ScenarioSpec, float_format: str) -> None:
    """Write the train/tune/test CSVs of run 0 of a scenario."""
    data = generate(replace(scenario, seed=derive_seed(scenario.seed, 0)))
    target = directory / scenario.label
    write_dataset(str(target / "train.csv"), data.train, float_format=float_format)
    if data.tune is not None:
        write_dataset(str(target / "tune.csv"), data.tune, float_format=float_format)
    write_dataset(str(target / "test.csv"), data.test, float_format=float_format)
    logger.info("exported %s data to %s", scenario.label, target)


def cmd_simulate(run: RunConfig, config_manager: ConfigManager) -> int:
    """
    Run the Monte-Carlo comparison of each requested scenario and write the tables.

    Returns:
        EXIT_OK
    """
    scenarios = _scenarios(run)
    example = scenarios[0].example
    estimators = select_estimators(default_estimators(example), run.estimators)
    settings = SimulationSettings.from_dict(config_manager.section("simulation"))
    fit_config = config_manager.fit_config()
    float_format = config_manager.get("output.float_format", "%.10g")
    out = _output_dir(run)

    if run.export_data:
        for scenario in scenarios:
            export_scenario_data(Path(run.export_data), scenario, float_format)

    results = []
    for scenario in scenarios:
        print(
            f"Simulating {scenario.label}: {len(estimators)} estimators x {settings.runs} runs..."
        )
        results.append(run_mc(scenario, estimators, config=fit_config, settings=settings))

    write_summary(results, str(out / "summary.csv"), str(out / "summary.json"), float_format)
    write_wide_table(results, str(out / "table.csv"))
    print_simulation_results(results, out)
    return EXIT_OK


def print_simulation_results(results, out: Path) -> None:
    """Print the mean of each table metric per estimator and scenario."""
    columns, rows = wide_table(results)
    print("\n" + "=" * 70)
    print("SIMULATION RESULT")
    print("=" * 70)
    for result in results:
        failed = {
            name: result.failures(name) for name in result.estimators if result.failures(name)
        }
        line = f"{result.scenario.label}: {len(result.records)} runs"
        if failed:
            line += f", failed fits {failed}"
        print(line)
    print()
    for column in columns[1:]:
        print(f"{column}")
        for row in rows:
            value = row.get(column)
            shown = "-" if value is None else f"{value:.3f}"
            print(f"  {row['estimator']:<20} {shown}")
    print(f"\nArtifacts: {out}/summary.csv, summary.json, table.csv")
    print("=" * 70)


def _grid(config_manager: ConfigManager, low: Optional[float] = None) -> np.ndarray:
    lo = config_manager.get("diagnostics.curve_grid_min", -5.0) if low is None else low
    hi = config_manager.get("diagnostics.curve_grid_max", 5.0)
    size = config_manager.get("diagnostics.curve_grid_size", 1001)
    return np.linspace(lo, hi, size)


def cmd_diagnose(run: RunConfig, config_manager: ConfigManager) -> int:
    """
    Run one diagnostic and write its CSV and JSON outputs.

    Returns:
        EXIT_OK
    """
    cfg = config_manager.section("diagnostics")
    out = _output_dir(run)
    float_format = config_manager.get("output.float_format", "%.10g")
    check = run.check or "concavity"
    report: Dict[str, Any]
    rows: Optional[list] = None

    if check == "conjugate":
        sigma = run.sigma if run.sigma is not None else DIAGNOSTIC_SIGMA
        report = check_tcave_biconjugate(sigma, _grid(config_manager, 0.0)).to_dict()
    elif check == "ara":
        convex = coerce_enum(ConvexKind, _convex_name(run) or "gaussian")
        grid = _grid(config_manager)
        rows = ara_curve(ConvexSpec(convex, run.epsilon), grid, cfg.get("fd_step", 1e-5))
        report = {"check": "ara", "convex": convex.value, "points": len(rows)}
    else:
        loss = resolve_loss(run, resolve_task(run), DIAGNOSTIC_SIGMA)
        if check == "concavity":
            result = check_concavity(
                loss, _grid(config_manager), cfg.get("fd_step", 1e-5), cfg.get("knot_margin", 1e-4)
            )
            rows = [
                CurveRow(float(u), float(v), "violation", loss.concave.sigma)
                for u, v in zip(result.u, result.violation)
            ]
            report = result.to_dict()
        elif check == "fisher":
            report = check_fisher(
                loss,
                FISHER_P_GRID,
                cfg.get("fisher_grid_min", -10.0),
                cfg.get("fisher_grid_max", 10.0),
                cfg.get("fisher_grid_size", 20001),
            ).to_dict()
        elif check == "majorization":
            z_grid = _grid(config_manager, 0.0)
            anchors = np.linspace(0.0, z_grid[-1], MAJORIZATION_ANCHORS)
            checks = [check_majorization(loss.concave, float(z), z_grid) for z in anchors]
            report = {
                "check": "majorization",
                "anchors": len(anchors),
                "max_gap": max(c.max_gap for c in checks),
                "max_touch_gap": max(c.touch_gap for c in checks),
            }
        else:
            rows = loss_curve(loss, _grid(config_manager), bool(run.normalize), include_convex=True)
            report = {"check": "loss", "normalized": bool(run.normalize), "points": len(rows)}
        report["loss"] = loss.label

    if rows is not None:
        write_curve(str(out / f"{check}.csv"), rows, float_format)
    write_json(out / f"{check}.json", report)

    print("\n" + "=" * 70)
    print(f"DIAGNOSTIC: {check}")
    print("=" * 70)
    for key, value in report.items():
        if isinstance(value, list):
            continue
        print(f"{key}: {value}")
    print("=" * 70)
    return EXIT_OK


def cmd_weights(run: RunConfig, config_manager: ConfigManager) -> int:
    """
    Tabulate the weight function of a concave component.

    Returns:
        EXIT_OK
    """
    if not run.concave:
        valid = [k.value for k in ConcaveKind]
        raise ValidationError(f"--concave is required; valid names: {valid}")
    sigma = run.sigma if run.sigma is not None else DIAGNOSTIC_SIGMA
    concave = ConcaveSpec(coerce_enum(ConcaveKind, run.concave), sigma, run.delta)
    rows = weight_curve(concave, _grid(config_manager, 0.0))
    path = _output_dir(run) / "weight_curve.csv"
    write_curve(str(path), rows, config_manager.get("output.float_format", "%.10g"))
    print(f"Wrote {len(rows)} points of the {concave.label} weight function to {path}")
    return EXIT_OK


HANDLERS: Dict[str, Callable[[RunConfig, ConfigManager], int]] = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "weights": cmd_weights,
}


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the exit-code contract."""
    if isinstance(error, (DataFormatError, OSError)):
        return EXIT_IO
    if isinstance(error, (ConvergenceError, SimulationError)):
        return EXIT_CONVERGENCE
    return EXIT_VALIDATION


def main(argv=None):
    """Main entry point for CLI."""
    args = parse_args(argv)

    try:
        config_manager = ConfigManager.load(
            default_path=DEFAULT_CONFIG_PATH,
            user_path=args.config,
            cli_overrides=build_cli_overrides(args),
        )
        setup_logging(config_manager.section("logging"))
        run = build_run_config(args, config_manager)
        code = HANDLERS[run.command](run, config_manager)

    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        sys.exit(EXIT_INTERRUPTED)

    except (CCError, OSError) as e:
        print(f"\nError: {e}", file=sys.stderr)
        if args.verbose:
            import traceback

            traceback.print_exc()
        sys.exit(exit_code_for(e))

    sys.exit(code)


if __name__ == "__main__":
    main()
