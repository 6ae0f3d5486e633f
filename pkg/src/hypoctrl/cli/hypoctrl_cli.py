"""Hypoctrl CLI Tool.

Command-line interface for simulating partially observed hypoelliptic
diffusions and estimating their parameters by optimal-control tracking.

This CLI provides four commands:

1. simulate: Simulate a model and write the trajectory CSV (plus a JSON sidecar)
2. estimate: Estimate parameters and the balance weight from an observation CSV
3. mc: Monte Carlo benchmark (empirical mean and variance of the estimates)
4. check-hypo: Connexity lags and rank check of the propagated noise

Usage Examples:
    # Simulate the FitzHugh-Nagumo model with its benchmark parameters
    hypoctrl simulate --model fhn --T 10 --n 1000 --seed 1 --out fhn.csv

    # Estimate from the simulated observations, profiling the initial state
    hypoctrl estimate fhn.csv --model fhn --init epsilon=0.2,gamma=1,beta=1,sigma=0.5 --profile-z0

    # Reproduce one table row with 100 trials
    hypoctrl mc --model cyclic --trials 100 --T 10 --n 1000 --out cyclic_mc.csv

    # Check the hypoellipticity structure of a model
    hypoctrl check-hypo --model cyclic

Exit codes:
    0 success, 1 numerical or estimation failure, 2 usage or input error,
    130 cancelled by the user.

Environment:
    HYPOCTRL_THREADS bounds the worker pool, HYPOCTRL_LOG_LEVEL sets the log
    level; both may be placed in ~/.hypoctrl.env.
"""

import json
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Annotated

import pandas as pd
import typer

from hypoctrl._config import H1_THRESHOLD, get_log_level
from hypoctrl.analysis import connexity_lags, h1_rank_check
from hypoctrl.estimation import MonteCarloReport, monte_carlo, select_weight
from hypoctrl.exceptions import DimensionError, HypoCtrlError, ModelError
from hypoctrl.simulation import simulate as simulate_trajectory
from hypoctrl.utils import format_duration, setup_logger

from ._experiment_config import resolve_config
from ._io import read_observations, sidecar_path, write_json, write_trajectory_csv

# Initialize Typer app with enhanced configuration
app = typer.Typer(
    name="hypoctrl",
    help="Hypoctrl - Parameter estimation of hypoelliptic diffusions by optimal-control tracking.",
    add_completion=False,
)

DEFAULT_TRAJECTORY_FILE = "trajectory.csv"

ConfigOption = Annotated[
    str | None,
    typer.Option("--config", help="Experiment file with [common] and per-command sections."),
]
ModelOption = Annotated[
    str | None,
    typer.Option("--model", help="Model identifier (cyclic, fhn, synaptic or a registered one)."),
]
ParamsOption = Annotated[
    str | None,
    typer.Option("--params", help="Parameter values as name=value pairs, comma separated."),
]
TOption = Annotated[float | None, typer.Option("--T", help="Time horizon T > 0.")]
NOption = Annotated[int | None, typer.Option("--n", help="Number of Euler steps (grid of n+1 points).")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Seed of the noise generator.")]
Z0Option = Annotated[
    str | None, typer.Option("--z0", help="Initial state as comma separated values.")
]
WGridOption = Annotated[
    str | None, typer.Option("--w-grid", help="Weight grid W, comma separated (e.g. 1e15,1e20).")
]
ProfileOption = Annotated[
    bool, typer.Option("--profile-z0", help="Estimate the initial state instead of using --z0.")
]
FixedOption = Annotated[
    bool, typer.Option("--fixed-z0", help="Use the known initial state even if the preset profiles it.")
]
EpsilonOption = Annotated[
    float | None, typer.Option("--epsilon", help="Tracking stopping threshold (default 1e-6 n).")
]
MaxIterOption = Annotated[
    int | None, typer.Option("--max-iter", help="Tracking iteration cap (default 30).")
]
MBOption = Annotated[
    int | None, typer.Option("--m-b", help="Override the contrast lag computed from the drift.")
]
KDirectionOption = Annotated[
    str | None,
    typer.Option("--k-direction", help="Select the weight by 'max' (default) or 'min' of log K."),
]


def _z0_policy(profile_z0: bool, fixed_z0: bool) -> bool | None:
    if profile_z0 and fixed_z0:
        raise ValueError("--profile-z0 and --fixed-z0 are mutually exclusive")
    if profile_z0:
        return True
    if fixed_z0:
        return False
    return None


@contextmanager
def _cli_errors():
    """Translate library errors into messages and exit codes."""
    try:
        yield
    except FileNotFoundError as e:
        typer.echo(f"❌ File Error: {e}", err=True)
        raise typer.Exit(code=2)
    except (ModelError, DimensionError) as e:
        typer.echo(f"❌ Input Error: {e}", err=True)
        raise typer.Exit(code=2)
    except HypoCtrlError as e:
        typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
        raise typer.Exit(code=1)
    except ValueError as e:
        typer.echo(f"❌ Input Error: {e}", err=True)
        raise typer.Exit(code=2)


@app.callback()
def configure(
    log_file: Annotated[
        str | None, typer.Option("--log-file", help="Also write the log to this file.")
    ] = None,
) -> None:
    """Configure logging for every command."""
    setup_logger(log_file, get_log_level())


@app.command(name="simulate")
def simulate(
    model: ModelOption = None,
    params: ParamsOption = None,
    T: TOption = None,
    n: NOption = None,
    seed: SeedOption = None,
    z0: Z0Option = None,
    out: Annotated[
        str | None,
        typer.Option("--out", help="Output CSV path (default trajectory.csv) with a JSON sidecar."),
    ] = None,
    config: ConfigOption = None,
) -> None:
    """Simulate a model with the Euler-Maruyama scheme.

    The CSV has the header t,z1..zd,y1..ydo with one row per grid point; the
    sidecar JSON holds the resolved configuration and the seed.

    Examples:
        $ hypoctrl simulate --model cyclic --T 10 --n 1000 --seed 3 --out cyclic.csv
        $ hypoctrl simulate --model fhn --params epsilon=0.1,gamma=1.5,beta=0.8,sigma=0.3
    """
    with _cli_errors():
        cfg = resolve_config(
            "simulate",
            {"model": model, "params": params, "T": T, "n": n, "seed": seed, "z0": z0, "out": out},
            config,
        )
        spec = cfg.build_model()
        trajectory = simulate_trajectory(
            spec, cfg.true_psi(spec), cfg.z0, cfg.T, cfg.n, cfg.seed
        )
        csv_path = write_trajectory_csv(trajectory, cfg.out or DEFAULT_TRAJECTORY_FILE)
        write_json(cfg.to_dict(), sidecar_path(csv_path))
    typer.echo(f"✅ Simulated {spec.name} (T={cfg.T:g}, n={cfg.n}, seed={cfg.seed}): {csv_path}")


@app.command(name="estimate")
def estimate(
    data: Annotated[
        str,
        typer.Argument(help="Observation CSV (e.g. produced by 'simulate').", metavar="DATA"),
    ],
    model: ModelOption = None,
    init: Annotated[
        str | None, typer.Option("--init", help="Starting parameter values, name=value pairs.")
    ] = None,
    params: ParamsOption = None,
    T: Annotated[
        float | None, typer.Option("--T", help="Horizon, used when the CSV has no 't' column.")
    ] = None,
    w_grid: WGridOption = None,
    z0: Z0Option = None,
    profile_z0: ProfileOption = False,
    fixed_z0: FixedOption = False,
    obs_cols: Annotated[
        str | None,
        typer.Option("--obs-cols", help="Observation columns (names or 0-based indices)."),
    ] = None,
    epsilon: EpsilonOption = None,
    max_iter: MaxIterOption = None,
    m_b: MBOption = None,
    k_direction: KDirectionOption = None,
    out: Annotated[
        str | None, typer.Option("--out", help="JSON report path (printed when omitted).")
    ] = None,
    config: ConfigOption = None,
) -> None:
    """Estimate the parameters and the balance weight from observations.

    Runs the nested procedure (tracking, contrast minimization, weight
    selection) and reports {model, psi_hat, w_hat, z0_hat, k_table,
    diagnostics, wall_time_s}.

    Examples:
        $ hypoctrl estimate cyclic.csv --model cyclic --init nu=0.3,c=0.1 --z0 0,0,0
        $ hypoctrl estimate fhn.csv --model fhn --init epsilon=0.2,gamma=1,beta=1,sigma=0.5 --profile-z0
    """
    with _cli_errors():
        flags = {
            "model": model,
            "init": init,
            "params": params,
            "T": T,
            "w_grid": w_grid,
            "z0": z0,
            "profile_z0": _z0_policy(profile_z0, fixed_z0),
            "obs_cols": obs_cols,
            "epsilon": epsilon,
            "max_iter": max_iter,
            "m_b": m_b,
            "k_direction": k_direction,
            "out": out,
        }
        cfg = resolve_config("estimate", flags, config)
        spec = cfg.build_model()
        psi_init = cfg.initial_psi(spec)
        times, Y = read_observations(data, spec.d_o, cfg.obs_cols)
        if times is not None:
            delta = float(times[1] - times[0])
        elif cfg.T is not None:
            delta = cfg.T / (Y.shape[0] - 1)
        else:
            raise ValueError(f"{data} has no 't' column: pass --T")

        m_B = cfg.m_b if cfg.m_b is not None else connexity_lags(spec, psi_init).m_B
        if Y.shape[0] - 1 < m_B + 2:
            raise ValueError(f"Need n >= m_B + 2 = {m_B + 2} steps, got n={Y.shape[0] - 1}")
        if not cfg.profile_z0 and cfg.z0 is None:
            raise ValueError("Initial state unknown: pass --z0 or --profile-z0")

        result = select_weight(
            Y,
            delta,
            spec,
            cfg.w_grid,
            psi_init,
            opts=cfg.iteration_options(),
            Z0=None if cfg.profile_z0 else cfg.z0,
            m_B=m_B,
            k_direction=cfg.k_direction,
        )
        report = result.to_dict()
        if cfg.out:
            write_json(report, cfg.out)
            typer.echo(f"✅ Report written to {cfg.out}")
        else:
            typer.echo(json.dumps(report, indent=2))
    typer.echo(
        f"✅ {spec.name}: w_hat={result.w_hat:g} | {result.psi_hat} "
        f"| {format_duration(result.wall_time)}"
    )


def _mc_row(report: MonteCarloReport) -> dict:
    row = {"T": report.T, "n": report.n, "trials": report.trials, "failures": report.failures}
    for name in report.mean:
        row[f"{name}_mean"] = report.mean[name]
        row[f"{name}_var"] = report.variance[name]
    return row


@app.command(name="mc")
def mc(
    model: ModelOption = None,
    params: ParamsOption = None,
    init: Annotated[
        str | None,
        typer.Option("--init", help="Common starting values (default: truth perturbed per trial)."),
    ] = None,
    T: TOption = None,
    n: NOption = None,
    settings: Annotated[
        str | None,
        typer.Option("--settings", help="Several T:n settings, comma separated (e.g. 10:1000,100:1000)."),
    ] = None,
    trials: Annotated[int | None, typer.Option("--trials", help="Trials per setting.")] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Seed of the first trial.")] = None,
    w_grid: WGridOption = None,
    z0: Z0Option = None,
    profile_z0: ProfileOption = False,
    fixed_z0: FixedOption = False,
    epsilon: EpsilonOption = None,
    max_iter: MaxIterOption = None,
    m_b: MBOption = None,
    k_direction: KDirectionOption = None,
    out: Annotated[
        str | None,
        typer.Option(
            "--out",
            help=(
                "Table CSV path. The JSON report written next to it holds the "
                "per-trial estimates and the mean wall time per weight (mean_wall_time), "
                "which the CSV leaves out."
            ),
        ),
    ] = None,
    config: ConfigOption = None,
) -> None:
    """Monte Carlo benchmark: empirical mean and variance of the estimates.

    One table row per (T, n) setting with the mean and variance of every free
    parameter. The CSV has no timing columns, so two runs with the same seed
    write identical tables. The mean wall time per weight is printed after
    each setting and stored under "mean_wall_time" in each entry of
    "reports" in the JSON file written next to the CSV.

    Examples:
        $ hypoctrl mc --model cyclic --trials 100 --T 10 --n 1000 --out cyclic.csv
        $ hypoctrl mc --model fhn --trials 50 --settings 1:1000,10:1000
    """
    with _cli_errors():
        flags = {
            "model": model,
            "params": params,
            "init": init,
            "T": T,
            "n": n,
            "settings": settings,
            "trials": trials,
            "seed": seed,
            "w_grid": w_grid,
            "z0": z0,
            "profile_z0": _z0_policy(profile_z0, fixed_z0),
            "epsilon": epsilon,
            "max_iter": max_iter,
            "m_b": m_b,
            "k_direction": k_direction,
            "out": out,
        }
        cfg = resolve_config("mc", flags, config)
        spec = cfg.build_model()
        psi_true = spec.param_layout.make(cfg.params)
        psi_init = cfg.initial_psi(spec) if cfg.init is not None else None

        reports = []
        for setting_T, setting_n in cfg.settings:
            report = monte_carlo(
                spec,
                psi_true,
                cfg.z0,
                setting_T,
                setting_n,
                cfg.w_grid,
                cfg.trials,
                seed0=cfg.seed,
                profile_z0=cfg.profile_z0,
                psi_init=psi_init,
                opts=cfg.iteration_options(),
                m_B=cfg.m_b,
                k_direction=cfg.k_direction,
            )
            reports.append(report)
            timings = ", ".join(
                f"w={w:g}: {format_duration(s)}" for w, s in report.mean_wall_time.items()
            )
            typer.echo(f"⏱️  T={setting_T:g}, n={setting_n}: mean time per weight {timings}")

        table = pd.DataFrame([_mc_row(r) for r in reports])
        typer.echo(table.to_string(index=False))
        if cfg.out:
            out_path = Path(cfg.out)
            out_path.parent.mkdir(parents=True, exist_ok=True)
            table.to_csv(out_path, index=False, float_format="%.10g")
            write_json(
                {"config": cfg.to_dict(), "reports": [r.to_dict() for r in reports]},
                sidecar_path(out_path),
            )
            typer.echo(f"✅ Table written to {out_path}")


@app.command(name="check-hypo")
def check_hypo(
    model: ModelOption = None,
    params: ParamsOption = None,
    T: TOption = None,
    n: NOption = None,
    seed: SeedOption = None,
    z0: Z0Option = None,
    out: Annotated[
        str | None, typer.Option("--out", help="JSON report path (printed when omitted).")
    ] = None,
    config: ConfigOption = None,
) -> None:
    """Report connexity lags and the rank condition of the propagated noise.

    Exits with code 1 when a smooth coordinate is not reached by the noise or
    when the minimum singular value of C (prod A_bar) Gamma along a simulated
    trajectory falls below the threshold.

    Examples:
        $ hypoctrl check-hypo --model cyclic
        $ hypoctrl check-hypo --model cyclic --params nu=0.2,c=0
    """
    with _cli_errors():
        cfg = resolve_config(
            "check-hypo",
            {"model": model, "params": params, "T": T, "n": n, "seed": seed, "z0": z0, "out": out},
            config,
        )
        spec = cfg.build_model()
        psi = cfg.true_psi(spec)
        lags = connexity_lags(spec, psi, seed=cfg.seed, strict=False)
        if lags.connected:
            trajectory = simulate_trajectory(spec, psi, cfg.z0, cfg.T, cfg.n, cfg.seed)
            smallest = h1_rank_check(spec, psi, trajectory, lags.m_B)
            lags = replace(lags, h1_min_singular_value=smallest)
        report = {"model": spec.name, **lags.to_dict()}
        if cfg.out:
            write_json(report, cfg.out)
        typer.echo(json.dumps(report, indent=2))

    if not lags.connected:
        typer.echo("❌ Connexity Error: some smooth coordinates receive no noise", err=True)
        raise typer.Exit(code=1)
    if lags.h1_min_singular_value < H1_THRESHOLD:
        typer.echo(
            f"❌ Rank Error: min singular value {lags.h1_min_singular_value:.3e} "
            f"below {H1_THRESHOLD:.0e}",
            err=True,
        )
        raise typer.Exit(code=1)
    typer.echo(f"✅ {spec.name}: m_B={lags.m_B}, min singular value {lags.h1_min_singular_value:.3e}")


def main() -> None:
    """Main entry point for the CLI application.

    Handles global error catching and provides user-friendly error messages
    for missing dependencies and unexpected failures.
    """
    try:
        app()
    except KeyboardInterrupt:
        typer.echo("\n⚠️  Operation cancelled by user.")
        sys.exit(130)  # Standard exit code for SIGINT
    except ImportError as e:
        typer.echo(
            f"❌ Import Error: Missing required dependency: {e}",
            err=True,
        )
        typer.echo("💡 Hint: Install missing packages with: uv sync")
        sys.exit(1)
    except Exception as e:
        typer.echo(
            f"❌ Unexpected Error: {e}",
            err=True,
        )
        sys.exit(1)


if __name__ == "__main__":
    main()
