"""Command-line front end.

Subcommands emit CSV (curves/surfaces) or JSON (matrices/reports) with full
round-trip float formatting, so repeated runs with the same flags and seed
produce byte-identical output.  A JSON config file (sections named after
subcommands, keys named after flags with underscores) can supply defaults;
explicit flags win over the config, the config wins over built-ins.  The
``QWROUTER_CONFIG`` environment variable names a default config path.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import replace

import click
import numpy as np

from .dynamics import PureState, evolve
from .hamiltonian import (
    TWO_PI,
    FullGraphLayout,
    RouterParams,
    build_full_hamiltonian,
    build_reduced_hamiltonian,
    reduction_isometry,
)
from .noise import (
    OUSpec,
    VonMisesSpec,
    ou_fidelity_curve,
    static_noise_fidelity,
)
from .routing import (
    SuperpositionGrid,
    SuperpositionParams,
    average_fidelity,
    input_state,
    min_fidelity,
    routing_fidelity,
    target_state,
    transition_probability,
    u_element_curve,
)
from .search import ScanGrid, refine, scan

# The five tabulated high-fidelity configurations (n, t, phi, statistic, reference).
TABLE1_ROWS = (
    (20, 18.550, 4.712, "average", 0.993),
    (20, 18.523, 4.708, "minimum", 0.984),
    (70, 18.397, 4.758, "average", 0.987),
    (70, 18.484, 4.765, "minimum", 0.976),
    (1000000, 40.068, 4.716, "minimum", 0.995),
)

_CHI_DEFAULT = 3.0 * math.pi / 2.0


def _fmt(x) -> str:
    return repr(float(x))


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _matrix_pairs(arr: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def _router(n: int, beta: float, phi: float) -> RouterParams:
    try:
        return RouterParams(n_outputs=n, beta=beta, phi=phi)
    except (ValueError, TypeError) as exc:
        raise click.UsageError(str(exc))


def _load_config(ctx: click.Context, path: str) -> None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise click.UsageError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError("config file must hold a JSON object")
    for section, values in data.items():
        command = main.commands.get(section)
        if command is None:
            raise click.UsageError(
                f"unknown config section {section!r}; valid sections: "
                + ", ".join(sorted(main.commands))
            )
        if not isinstance(values, dict):
            raise click.UsageError(f"config section {section!r} must be an object")
        known = {p.name for p in command.params}
        for key in values:
            if key not in known:
                raise click.UsageError(
                    f"unknown key {key!r} in config section {section!r}; "
                    f"valid keys: {', '.join(sorted(known))}"
                )
    ctx.default_map = data


@click.group()
@click.option(
    "--config",
    type=click.Path(dir_okay=False),
    envvar="QWROUTER_CONFIG",
    default=None,
    help="JSON config file; sections per subcommand, keys per flag.",
)
@click.pass_context
def main(ctx: click.Context, config: str | None) -> None:
    """Chiral quantum-walk router toolkit."""
    if config is not None:
        _load_config(ctx, config)


@main.command("hamiltonian")
@click.option("--n", type=int, required=True, help="Number of outputs (>= 2).")
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--phi", type=float, default=0.0, show_default=True)
@click.option(
    "--full/--reduced",
    "full",
    default=False,
    help="Emit the full 2(n+1)-dim matrix instead of the 6-dim one.",
)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def hamiltonian_cmd(n: int, beta: float, phi: float, full: bool, output: str | None):
    """Dump a router Hamiltonian as JSON ([re, im] pairs, row-major)."""
    params = _router(n, beta, phi)
    if full:
        matrix = build_full_hamiltonian(params).entries
        kind = "full"
    else:
        matrix = build_reduced_hamiltonian(params).entries
        kind = "reduced"
    payload = {
        "kind": kind,
        "n": params.n_outputs,
        "beta": params.beta,
        "phi": params.phi,
        "dim": matrix.shape[0],
        "matrix": _matrix_pairs(matrix),
    }
    _emit(json.dumps(payload, indent=2) + "\n", output)


@main.command("scan")
@click.argument("kind", type=click.Choice(["phase", "weight"]))
@click.option("--n", type=int, required=True)
@click.option("--beta", type=float, default=1.0, show_default=True,
              help="Fixed weight (used when scanning the phase).")
@click.option("--phi", type=float, default=0.0, show_default=True,
              help="Fixed phase (used when scanning the weight).")
@click.option("--t-min", type=float, default=0.0, show_default=True)
@click.option("--t-max", type=float, default=50.0, show_default=True)
@click.option("--t-steps", type=int, default=501, show_default=True)
@click.option("--param-min", type=float, default=None,
              help="Default: 0 for either kind.")
@click.option("--param-max", type=float, default=None,
              help="Default: 2*pi*255/256 (phase) or 40 (weight).")
@click.option("--param-steps", type=int, default=None,
              help="Default: 256 (phase) or 401 (weight).")
@click.option("--objective", type=click.Choice(["localized", "average", "worst_case"]),
              default="localized", show_default=True)
@click.option("--alpha-points", type=int, default=41, show_default=True)
@click.option("--chi-points", type=int, default=64, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def scan_cmd(kind, n, beta, phi, t_min, t_max, t_steps, param_min, param_max,
             param_steps, objective, alpha_points, chi_points, output):
    """Fidelity surface as CSV rows ``t,param,fidelity,p_wrong``.

    ``p_wrong`` is the total wrong-output probability for a localized input
    at the same grid point.
    """
    params = _router(n, beta, phi)
    if param_min is None:
        param_min = 0.0
    if param_max is None:
        param_max = TWO_PI * 255.0 / 256.0 if kind == "phase" else 40.0
    if param_steps is None:
        param_steps = 256 if kind == "phase" else 401
    try:
        grid = ScanGrid((t_min, t_max, t_steps), (param_min, param_max, param_steps), kind)
        sp_grid = SuperpositionGrid(alpha_points, chi_points)
        surface = scan(params, grid, objective=objective, sp_grid=sp_grid)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    ts = surface.t_values
    ps = surface.param_values
    wrong = np.empty_like(surface.values)
    for j, p in enumerate(ps):
        pp = replace(params, phi=float(p)) if kind == "phase" else replace(params, beta=float(p))
        wrong[:, j] = np.clip(np.abs(u_element_curve(pp, ts, 5, 0)) ** 2, 0.0, 1.0)
    lines = ["t,param,fidelity,p_wrong"]
    for i, t in enumerate(ts):
        for j, p in enumerate(ps):
            lines.append(
                f"{_fmt(t)},{_fmt(p)},{_fmt(surface.values[i, j])},{_fmt(wrong[i, j])}"
            )
    _emit("\n".join(lines) + "\n", output)


@main.command("table1")
@click.option("--row", type=click.Choice(["all", "20", "70", "1000000"]),
              default="all", show_default=True,
              help="Restrict to the rows with this output count.")
@click.option("--alpha-points", type=int, default=41, show_default=True)
@click.option("--chi-points", type=int, default=64, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def table1_cmd(row, alpha_points, chi_points, output):
    """Recompute the tabulated high-fidelity configurations and compare."""
    try:
        grid = SuperpositionGrid(alpha_points, chi_points)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report = []
    for n, t, phi, statistic, reference in TABLE1_ROWS:
        if row != "all" and str(n) != row:
            continue
        params = RouterParams(n_outputs=n, beta=1.0, phi=phi)
        if statistic == "average":
            computed = average_fidelity(params, t, grid)
        else:
            computed = min_fidelity(params, t, grid)
        report.append(
            {
                "n": n,
                "t": t,
                "phi": phi,
                "statistic": statistic,
                "computed": computed,
                "reference": reference,
                "abs_diff": abs(computed - reference),
            }
        )
    _emit(json.dumps(report, indent=2) + "\n", output)


@main.command("noise")
@click.argument("model", type=click.Choice(["vonmises", "ou"]))
@click.option("--n", type=int, required=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--phi", type=float, default=0.0, show_default=True)
@click.option("--alpha", type=float, default=0.7, show_default=True)
@click.option("--chi", type=float, default=_CHI_DEFAULT,
              help="Default 3*pi/2 (input 0.7|1> - i sqrt(0.51)|2>).")
@click.option("--t-max", type=float, default=10.0, show_default=True)
@click.option("--t-steps", type=int, default=101, show_default=True)
@click.option("--k", type=float, default=None, help="von Mises concentration (required for vonmises).")
@click.option("--quad-points", type=int, default=129, show_default=True)
@click.option("--theta", type=float, default=1.0, show_default=True)
@click.option("--sigma", type=float, default=0.4, show_default=True)
@click.option("--mu", type=float, default=None, help="OU mean; defaults to --phi.")
@click.option("--dt", type=float, default=0.01, show_default=True)
@click.option("--trajectories", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=777, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def noise_cmd(model, n, beta, phi, alpha, chi, t_max, t_steps, k, quad_points,
              theta, sigma, mu, dt, trajectories, seed, output):
    """Noisy fidelity curve as CSV rows ``t,fidelity,stderr``.

    The stderr column is filled for the trajectory-averaged (ou) model and
    empty for the quadrature-averaged (vonmises) model.
    """
    params = _router(n, beta, phi)
    if t_steps < 2:
        raise click.UsageError("t-steps must be >= 2")
    if not (math.isfinite(t_max) and t_max > 0):
        raise click.UsageError("t-max must be positive")
    try:
        sp = SuperpositionParams(alpha=alpha, chi=chi)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    lines = ["t,fidelity,stderr"]
    if model == "vonmises":
        if k is None:
            raise click.UsageError("--k is required for the vonmises model")
        try:
            vm = VonMisesSpec(k=k, quadrature_points=quad_points)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        for j in range(t_steps):
            t = j * t_max / (t_steps - 1)
            value = static_noise_fidelity(params, t, sp, vm)
            lines.append(f"{_fmt(t)},{_fmt(value)},")
    else:
        try:
            spec = OUSpec(theta=theta, mu=mu, sigma_vol=sigma, dt=dt,
                          trajectories=trajectories, seed=seed)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        times, values, errors = ou_fidelity_curve(
            params, input_state(sp), target_state(sp), spec, t_max, snapshots=t_steps
        )
        for t, v, e in zip(times, values, errors):
            lines.append(f"{_fmt(t)},{_fmt(v)},{_fmt(e)}")
    _emit("\n".join(lines) + "\n", output)


@main.command("verify-reduction")
@click.option("--n-max", type=int, default=8, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=1234, show_default=True)
@click.option("--tolerance", type=float, default=1e-9, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify_reduction_cmd(ctx, n_max, trials, seed, tolerance, output):
    """Check the six-state model against the full graph at random parameters.

    Exits 1 if any projected full-graph evolution deviates from the reduced
    evolution by more than the tolerance.
    """
    if n_max < 2:
        raise click.UsageError("n-max must be >= 2")
    if trials < 1:
        raise click.UsageError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    corrupt = bool(os.environ.get("QWROUTER_CORRUPT_ISOMETRY"))
    lines = []
    overall = 0.0
    for n in range(2, n_max + 1):
        layout = FullGraphLayout(n)
        isometry = reduction_isometry(layout)
        if corrupt:
            isometry = isometry.copy()
            isometry[0, 0] += 1e-3
        worst = 0.0
        for _ in range(trials):
            beta = rng.uniform(-2.0, 2.0)
            phi = rng.uniform(0.0, TWO_PI)
            t = rng.uniform(0.0, 30.0)
            params = RouterParams(n_outputs=n, beta=beta, phi=phi)
            raw = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            psi_red = PureState(raw / np.linalg.norm(raw))
            full0 = isometry @ psi_red.amplitudes
            full0 = PureState(full0 / np.linalg.norm(full0))
            evolved_full = evolve(build_full_hamiltonian(params, layout), t, full0)
            projected = isometry.conj().T @ evolved_full.amplitudes
            evolved_red = evolve(
                build_reduced_hamiltonian(params).entries, t, psi_red
            )
            worst = max(
                worst, float(np.max(np.abs(projected - evolved_red.amplitudes)))
            )
        overall = max(overall, worst)
        lines.append(f"n={n}: max deviation {worst:.3e}")
    ok = overall <= tolerance
    lines.append(f"overall max deviation {overall:.3e} (tolerance {tolerance:.1e})")
    lines.append("PASS" if ok else "FAIL")
    _emit("\n".join(lines) + "\n", output)
    if not ok:
        ctx.exit(1)


@main.command("optimize")
@click.option("--objective", type=click.Choice(["localized", "average", "worst_case"]),
              default="localized", show_default=True)
@click.option("--kind", type=click.Choice(["phase", "weight"]), default="phase",
              show_default=True)
@click.option("--n", type=int, required=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--phi", type=float, default=0.0, show_default=True)
@click.option("--t0", type=float, required=True, help="Starting time.")
@click.option("--param0", type=float, required=True, help="Starting phase/weight.")
@click.option("--t-min", type=float, default=0.0, show_default=True)
@click.option("--t-max", type=float, default=50.0, show_default=True)
@click.option("--param-min", type=float, default=None,
              help="Default: 0 for either kind.")
@click.option("--param-max", type=float, default=None,
              help="Default: 2*pi (phase) or 40 (weight).")
@click.option("--alpha-points", type=int, default=41, show_default=True)
@click.option("--chi-points", type=int, default=64, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def optimize_cmd(objective, kind, n, beta, phi, t0, param0, t_min, t_max,
                 param_min, param_max, alpha_points, chi_points, output):
    """Locally refine (t, phase) or (t, weight) for the chosen objective."""
    params = _router(n, beta, phi)
    if param_min is None:
        param_min = 0.0
    if param_max is None:
        param_max = TWO_PI if kind == "phase" else 40.0
    try:
        sp_grid = SuperpositionGrid(alpha_points, chi_points)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    def with_param(value: float) -> RouterParams:
        if kind == "phase":
            return replace(params, phi=float(value))
        return replace(params, beta=float(value))

    if objective == "localized":
        fn = lambda t, p: transition_probability(with_param(p), t, 1, 4)
    elif objective == "average":
        fn = lambda t, p: average_fidelity(with_param(p), t, sp_grid)
    else:
        fn = lambda t, p: min_fidelity(with_param(p), t, sp_grid)

    try:
        result = refine(fn, (t0, param0), ((t_min, t_max), (param_min, param_max)))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    payload = {
        "objective": objective,
        "kind": kind,
        "t": result.point[0],
        "param": result.point[1],
        "value": result.value,
        "converged": result.converged,
        "evaluations": result.evaluations,
    }
    _emit(json.dumps(payload, indent=2) + "\n", output)


if __name__ == "__main__":
    main()
