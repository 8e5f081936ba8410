import datetime
import json
import math
import os
import sys
import time
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Tuple

import click
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, model_validator

from data_processing.fetch_spectrum import read_spectrum_file
from data_processing.save_results import save_csv, save_json
from qmicro import dos as dos_module
from qmicro import mc_oracle, thermo
from qmicro.config import get_settings
from qmicro.dos import SCHEMA_VERSION, DensityOfStates, density_of_states
from qmicro.errors import (
    FrozenSpectrumError,
    InfiniteTemperatureError,
    InsufficientStatisticsError,
    QMicroError,
)
from qmicro.logging_utils import configure_logging, get_logger
from qmicro.spectrum import (
    Spectrum,
    build_ising_chain,
    build_uniform_ladder,
    from_eigenvalues,
    mean_energy,
)

# Load environment variables from .env file
load_dotenv()

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2
EXIT_ORACLE = 3


class RunConfig(BaseModel):
    """
    Validated options of one CLI run.

    Exactly one spectrum source must be given.
    """

    ladder: Optional[int] = Field(None, ge=1)
    ising: Optional[str] = None
    levels: Optional[str] = None
    file: Optional[str] = None
    grid: int = Field(default_factory=lambda: get_settings().grid_points, ge=2)
    backing: Literal["auto", "rational", "float"] = "auto"
    negative_branch: bool = False
    samples: int = Field(default_factory=lambda: get_settings().oracle_samples, ge=1)
    seed: int = Field(default_factory=lambda: get_settings().seed)
    out: Optional[str] = None
    energy_unit: float = Field(1.0, gt=0.0)

    @model_validator(mode="after")
    def _one_source(self) -> "RunConfig":
        given = [
            name
            for name in ("ladder", "ising", "levels", "file")
            if getattr(self, name) is not None
        ]
        if len(given) != 1:
            raise ValueError(
                f"exactly one of --ladder/--ising/--levels/--file is required, got {given or 'none'}"
            )
        return self


def initialize_run_metrics(command: str, backing: Optional[str] = None) -> Dict:
    """
    Initialize tracking metrics for one command run.

    Returns:
        Dict: Metrics embedded under ``"run"`` in every JSON output.
    """
    return {
        "command": command,
        "status": "initialized",
        "started_at": datetime.datetime.now().isoformat(timespec="seconds"),
        "elapsed_seconds": None,
        "backing": backing,
        "schema_version": SCHEMA_VERSION,
        "_t0": time.perf_counter(),
    }


def finish_run_metrics(metrics: Dict, status: str) -> Dict:
    """Stamp the status and elapsed time; returns the JSON-ready dict."""
    metrics["status"] = status
    metrics["elapsed_seconds"] = time.perf_counter() - metrics.get("_t0", time.perf_counter())
    result = {k: v for k, v in metrics.items() if not k.startswith("_")}
    metrics_dir = get_settings().metrics_dir
    if metrics_dir:
        try:
            os.makedirs(metrics_dir, exist_ok=True)
            timestamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
            metrics_file = os.path.join(metrics_dir, f"run_metrics_{timestamp}.json")
            with open(metrics_file, "w") as f:
                json.dump(result, f, indent=2)
        except OSError as e:
            logger.warning("Error saving metrics: %s", e)
    return result


def _exact_number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"not a number: {text!r}")


def parse_ising(text: str) -> Tuple[Fraction, Fraction]:
    """Parse ``J=..,B=..`` into exact couplings."""
    params = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or key.strip() not in ("J", "B"):
            raise click.BadParameter(f"expected J=..,B=.., got {text!r}")
        params[key.strip()] = _exact_number(value)
    if set(params) != {"J", "B"}:
        raise click.BadParameter(f"both J and B are required, got {text!r}")
    return params["J"], params["B"]


def parse_levels(text: str) -> Spectrum:
    values = [_exact_number(v) for v in text.split(",") if v.strip()]
    return from_eigenvalues(values, multiplicity_tolerance=0)


def load_density(config: RunConfig) -> DensityOfStates:
    """
    Resolve the spectrum source of a run into a density of states.

    A saved density of states is reused as is, converted to floating point
    only when ``--float`` is given.
    """
    backing = None if config.backing == "auto" else config.backing
    if config.file is not None:
        loaded = read_spectrum_file(config.file)
        if isinstance(loaded, DensityOfStates):
            return loaded.to_float() if backing == "float" else loaded
        spectrum = loaded
    elif config.ladder is not None:
        spectrum = build_uniform_ladder(config.ladder)
    elif config.ising is not None:
        spectrum = build_ising_chain(*parse_ising(config.ising))
    else:
        spectrum = parse_levels(config.levels)
    return density_of_states(spectrum, backing)


def parse_spectrum_spec(text: str, backing: Optional[str] = None) -> DensityOfStates:
    """
    Density of states from a positional argument such as ``ladder:3``.

    Accepts ``ladder:N``, ``ising:J=..,B=..``, ``levels:a,b,c`` and
    ``file:PATH``.
    """
    kind, sep, value = text.partition(":")
    if not sep or kind not in ("ladder", "ising", "levels", "file"):
        raise click.BadParameter(
            f"spectrum argument must be ladder:N, ising:J=..,B=.., levels:a,b,c or file:PATH, got {text!r}"
        )
    if kind == "ladder":
        try:
            value = int(value)
        except ValueError:
            raise click.BadParameter(f"ladder size must be an integer, got {value!r}")
    return load_density(RunConfig(**{kind: value, "backing": backing or "auto"}))


def _count(ctx, param, value):
    if value is None:
        return None
    try:
        number = float(value)
    except ValueError:
        raise click.BadParameter(f"not a count: {value!r}")
    if not math.isfinite(number) or number != int(number):
        raise click.BadParameter(f"not a whole count: {value!r}")
    return int(number)


def _windows(text: str) -> List[Tuple[float, float]]:
    windows = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise click.BadParameter(f"windows look like 0.2:0.4,0.6:1.0, got {text!r}")
        windows.append((float(lo), float(hi)))
    return windows


def _sidecar(path: str, suffix: str, ext: str = ".json") -> str:
    stem, _ = os.path.splitext(path)
    return f"{stem}.{suffix}{ext}"


def spectrum_options(f):
    """Options shared by the single-spectrum commands."""
    options = [
        click.option("--ladder", type=int, help="Uniform ladder 0..N."),
        click.option("--ising", help="Three-spin Ising chain, e.g. J=0.25,B=1."),
        click.option("--levels", help="Comma-separated eigenvalues, repeats allowed."),
        click.option("--file", "file_", type=click.Path(dir_okay=False), help="Spectrum or saved DOS file."),
        click.option("--rational/--float", "rational", default=None, help="Force the coefficient backing."),
        click.option("--out", help="Output path."),
        click.option("--energy-unit", type=float, default=1.0, show_default=True, help="Display scale for energies."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _config(ladder, ising, levels, file_, rational, out, energy_unit, **extra) -> RunConfig:
    backing = "auto" if rational is None else ("rational" if rational else "float")
    fields = dict(
        ladder=ladder,
        ising=ising,
        levels=levels,
        file=file_,
        backing=backing,
        out=out,
        energy_unit=energy_unit,
    )
    fields.update({k: v for k, v in extra.items() if v is not None})
    return RunConfig(**fields)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="Log INFO (-v) or DEBUG (-vv).")
def cli(verbose: int):
    """Exact microcanonical thermodynamics of finite quantum spectra."""
    level = {0: get_settings().log_level, 1: "INFO"}.get(verbose, "DEBUG")
    configure_logging(level)


@cli.command("dos")
@spectrum_options
@click.option("--grid", type=int, help="Number of sample points.")
def cmd_dos(grid, **kwargs) -> int:
    """Write Omega and its first two derivatives, plus a smoothness report."""
    config = _config(grid=grid, **kwargs)
    d = load_density(config)
    metrics = initialize_run_metrics("dos", d.backing)
    out = config.out or "dos.csv"

    if out.endswith(".json"):
        save_json({**d.to_dict(), "run": finish_run_metrics(metrics, "completed")}, out)
        return EXIT_OK

    rng = thermo.accessible_range(d)
    points = thermo.EnergyGrid(config.grid, d.e_min, d.e_max, allow_negative=True).points(d, rng)
    rows = []
    for E in points:
        values = [
            dos_module.evaluate(d, float(E), k) if k <= d.n - 1 else math.nan for k in range(3)
        ]
        rows.append([float(E) * config.energy_unit, *values])
    save_csv(pd.DataFrame(rows, columns=["E", "Omega", "dOmega", "d2Omega"]), out)

    report = [
        {
            "knot": float(entry.knot),
            "multiplicity": entry.multiplicity,
            "continuity_order": entry.continuity_order,
            "jump": entry.jump,
        }
        for entry in dos_module.smoothness_report(d)
    ]
    save_json(
        {
            "degree": d.n - 1,
            "knots": report,
            "run": finish_run_metrics(metrics, "completed"),
        },
        _sidecar(out, "smoothness"),
    )
    return EXIT_OK


@cli.command("thermo")
@spectrum_options
@click.option("--grid", type=int, help="Number of grid points.")
@click.option("--negative-branch", is_flag=True, help="Extend the curve to E_max.")
@click.option("--fit-exponents", "fit_windows", help="T windows lo:hi,lo:hi for log-log fits of C.")
def cmd_thermo(grid, negative_branch, fit_windows, **kwargs) -> int:
    """Write the (E, S, T, C, dH) curve and the critical-point report."""
    config = _config(grid=grid, negative_branch=negative_branch, **kwargs)
    d = load_density(config)
    metrics = initialize_run_metrics("thermo", d.backing)
    out = config.out or "thermo.csv"

    rng = thermo.accessible_range(d)
    if rng.frozen and not config.negative_branch:
        raise FrozenSpectrumError("no finite-temperature branch: Omega is maximal at E_min")
    curve = thermo.thermo_curve(
        d, thermo.EnergyGrid(config.grid, allow_negative=config.negative_branch)
    )
    frame = curve.to_frame()
    for column in ("E", "T", "dH"):
        frame[column] = frame[column] * config.energy_unit
    save_csv(frame, out)

    points = thermo.critical_points(d)
    report = {
        "accessible_range": {
            "e_min": float(rng.e_min),
            "e_star": float(rng.e_star),
            "frozen": rng.frozen,
        },
        "critical_points": [p.to_dict() for p in points],
        "grid": curve.grid,
    }
    if fit_windows:
        T_c = float(points[0].T_c) if points else None
        report["exponent_fits"] = thermo.fit_exponents(curve, _windows(fit_windows), T_c)
    report["run"] = finish_run_metrics(metrics, "completed")
    save_json(report, _sidecar(out, "critical"))
    for p in points:
        logger.info("critical point E_c=%.6g T_c=%.6g", float(p.E_c), float(p.T_c))
    return EXIT_OK


@cli.command("compare")
@spectrum_options
@click.option("--samples", callback=_count, help="Monte Carlo samples, e.g. 1e6.")
@click.option("--seed", type=int, help="Root seed.")
@click.option("--bins", type=int, help="Histogram bins.")
@click.option("--window", type=float, help="Energy window for conditioning.")
@click.option("--energy", help="Target energy for the weights (default: mean eigenvalue).")
@click.option("--alpha", type=float, help="Significance level.")
def cmd_compare(samples, seed, bins, window, energy, alpha, **kwargs) -> int:
    """Check the analytic results against the Monte Carlo oracle."""
    config = _config(samples=samples, seed=seed, **kwargs)
    settings = get_settings()
    alpha = alpha or settings.oracle_alpha
    d = load_density(config)
    s = d.spectrum
    metrics = initialize_run_metrics("compare", d.backing)
    out = config.out or "compare.json"

    E = _exact_number(energy) if energy else mean_energy(s)
    estimate = mc_oracle.empirical_microcanonical(
        s, E, window=window, count=config.samples, seed=config.seed
    )
    analytic = thermo.microcanonical_weights(d, E)
    weights = mc_oracle.weight_agreement(analytic, estimate, alpha)
    exact_dH = thermo.energy_uncertainty(d, E)

    histogram = mc_oracle.empirical_dos(s, count=config.samples, bins=bins, seed=config.seed)
    save_csv(histogram.to_frame(), _sidecar(out, "histogram", ".csv"))

    passed = histogram.p_value > alpha and weights["passed"]
    report = {
        "alpha": alpha,
        "passed": passed,
        "dos": histogram.metadata(),
        "weights": {
            "energy": float(E),
            "analytic": [float(w) for w in analytic],
            **estimate.to_dict(),
            **weights,
        },
        "dH": {
            "analytic": exact_dH,
            "estimate": estimate.dH,
            "standard_error": estimate.dH_standard_error,
        },
        "run": finish_run_metrics(metrics, "passed" if passed else "failed"),
    }
    save_json(report, out)
    if not passed:
        click.echo(f"oracle disagreement at alpha={alpha}; see {out}", err=True)
        return EXIT_ORACLE
    return EXIT_OK


@cli.command("equilibrate")
@click.argument("spec_a")
@click.argument("e1")
@click.argument("spec_b")
@click.argument("e2")
@click.option("--rational/--float", "rational", default=None)
@click.option("--check", is_flag=True, help="Also run the dense grid-search oracle.")
@click.option("--out", help="Output JSON (default: stdout).")
def cmd_equilibrate(spec_a, e1, spec_b, e2, rational, check, out) -> int:
    """Exchange energy between two systems until their temperatures agree."""
    backing = None if rational is None else ("rational" if rational else "float")
    d1 = parse_spectrum_spec(spec_a, backing)
    d2 = parse_spectrum_spec(spec_b, backing)
    E1, E2 = _exact_number(e1), _exact_number(e2)
    metrics = initialize_run_metrics("equilibrate", d1.backing)

    result = thermo.equilibrate(d1, E1, d2, E2)
    payload = {
        "epsilon_star": result.epsilon_star,
        "T_common": result.T_common,
        "T1": result.T1,
        "T2": result.T2,
        "boundary": result.boundary,
    }
    if check:
        payload["grid_search_epsilon"] = mc_oracle.grid_search_equilibrium(d1, E1, d2, E2)
    payload["run"] = finish_run_metrics(metrics, "completed")
    if out:
        save_json(payload, out)
    else:
        click.echo(json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line and map failures to exit codes.

    Returns:
        int: 0 success, 1 usage or configuration error, 2 physically empty
        result, 3 oracle failure.
    """
    try:
        code = cli.main(args=argv, prog_name="qmicro", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ValidationError as e:
        click.echo(f"error: invalid configuration: {e}", err=True)
        return EXIT_USAGE
    except (FrozenSpectrumError, InfiniteTemperatureError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_EMPTY
    except InsufficientStatisticsError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_ORACLE
    except (QMicroError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
