"""Command-line front end: every experiment as a subcommand.

Each subcommand validates its flags against the library preconditions,
runs the corresponding operation, and writes one machine-readable
table.  Output is CSV by default (RFC-4180, LF line endings, floats in
full-precision scientific notation) or JSON (``--format json``); every
row embeds full provenance — command, tool version, all parameters and
the seed — so a table is reproducible from its own content.  Files are
written atomically (write-then-rename), so no partial output is ever
left behind.

Exit status: 0 on success, 2 on a precondition violation (the violated
invariant is printed verbatim), 3 on a quadrature/convergence failure
or a weight overflow.

Determinism: identical invocations (including seed) produce
byte-identical CSV output whatever the worker count (``SILT_THREADS``).
JSON output additionally records the wall time in its ``meta`` block,
which is the one field that varies between runs.
"""

from __future__ import annotations

import json
import math
import os
import sys
import tempfile
import time
from typing import Callable

import click

import silt
from silt.core import KernelPoint, ModelParams, MultiIndex
from silt.errors import (
    PreconditionError,
    QuadratureError,
    WeightOverflowError,
)
from silt.expectations import (
    RegularizationSpec,
    divergence_constant_k,
    expected_combined_lt,
    expected_gap_lt,
    expected_gaussian_lt,
)
from silt.kernels import (
    TimeRectangle,
    cut_kernel,
    gap_kernel,
    kernel_quadrature_oracle,
    phi_eps_kernel,
    phi_kernel,
    rho_kernel,
)
from silt.montecarlo import (
    TailExperiment,
    chebyshev_tail_bound,
    chebyshev_tail_intermediate,
    empirical_tail,
    mc_gaussian_lt,
    partition_estimate,
)
from silt.norms import (
    chaos_distance_sq,
    phi_centered_variance_breakdown,
    rate_verification,
)

# ---------------------------------------------------------------------------
# Output plumbing


def _fmt(value: object) -> str:
    """One CSV cell: floats in full-precision scientific notation."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17e}"
    return str(value)


def _provenance(command: str, params: dict) -> dict:
    out = {"command": command, "version": silt.__version__}
    out.update(params)
    return out


def _render_csv(columns: list[str], rows: list[dict]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    return "\n".join(lines) + "\n"


def _render_json(
    command: str,
    params: dict,
    columns: list[str],
    rows: list[dict],
    seed: int,
    wall_time_s: float,
) -> str:
    errors: list[str] = []
    clean_rows = []
    for i, row in enumerate(rows):
        clean: dict = {}
        for c in columns:
            v = row.get(c)
            if isinstance(v, float) and not math.isfinite(v):
                errors.append(f"row {i} column {c}: non-finite value")
                v = None
            clean[c] = v
        clean_rows.append(clean)
    doc = {
        "command": command,
        "params": params,
        "rows": clean_rows,
        "meta": {
            "seed": seed,
            "version": silt.__version__,
            "wall_time_s": wall_time_s,
        },
    }
    if errors:
        doc["errors"] = errors
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _write_output(text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    path = os.path.abspath(output)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".silt-tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(
    command: str,
    params: dict,
    columns: list[str],
    rows: list[dict],
    seed: int,
    fmt: str,
    output: str | None,
    t_start: float,
) -> None:
    prov = _provenance(command, params)
    full_cols = list(prov.keys()) + [c for c in columns if c not in prov]
    full_rows = [dict(prov, **row) for row in rows]
    if fmt == "csv":
        text = _render_csv(full_cols, full_rows)
    else:
        text = _render_json(
            command,
            params,
            full_cols,
            full_rows,
            seed,
            time.perf_counter() - t_start,
        )
    _write_output(text, output)


# ---------------------------------------------------------------------------
# Shared options


def _common_output(fn: Callable) -> Callable:
    fn = click.option(
        "--output",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Write the table to this file (default: stdout).",
    )(fn)
    fn = click.option(
        "--format",
        "fmt",
        type=click.Choice(["csv", "json"]),
        default="csv",
        show_default=True,
        help="Output format.",
    )(fn)
    return fn


_dim = click.option("--dim", type=int, default=2, show_default=True,
                    help="Spatial dimension d.")
_T = click.option("--T", "T", type=float, default=1.0, show_default=True,
                  help="Time horizon T.")
_seed = click.option("--seed", type=int, default=0, show_default=True,
                     help="Base seed of the path stream.")


@click.group()
@click.version_option(version=silt.__version__, prog_name="silt")
def cli() -> None:
    """Chaos-expansion kernels and regularized self-intersection local
    times of Brownian motion: closed forms, norms, rates, and Monte
    Carlo experiments."""


# ---------------------------------------------------------------------------
# expectation


@cli.command()
@_dim
@_T
@click.option("--eps", type=float, default=0.0, show_default=True,
              help="Gaussian mollifier variance (0 = none).")
@click.option("--gap", type=float, default=0.0, show_default=True,
              help="Gap width Lambda (0 = none).")
@_common_output
def expectation(dim: int, T: float, eps: float, gap: float, fmt: str,
                output: str | None) -> None:
    """Closed-form expectation of the regularized local time."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    if gap > 0 and eps > 0:
        variant = "combined"
        value = expected_combined_lt(params, eps, gap)
    elif gap > 0:
        variant = "gap"
        value = expected_gap_lt(params, gap)
    else:
        variant = "gaussian"
        value = expected_gaussian_lt(params, eps)
    _emit(
        "expectation",
        {"d": dim, "T": T, "eps": eps, "lambda": gap, "seed": 0},
        ["variant", "value"],
        [{"variant": variant, "value": value}],
        0,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# kernel


@cli.command()
@_dim
@_T
@click.option("--N", "order", type=int, default=1, show_default=True,
              help="Chaos order n; evaluated at the concentrated "
                   "multi-index (n, 0, ..., 0).")
@click.option("--eps", type=float, default=0.0, show_default=True,
              help="Mollifier variance for the eps-shifted kernel "
                   "(0 = omit that column).")
@click.option("--gap", type=float, default=0.0, show_default=True,
              help="Gap width Lambda for the strip kernels "
                   "(0 = omit those columns).")
@_common_output
def kernel(dim: int, T: float, order: int, eps: float, gap: float,
           fmt: str, output: str | None) -> None:
    """Kernel profiles on a 9x9 grid over the time triangle."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    nidx = MultiIndex.canonical(order, dim)
    columns = ["n", "u", "v", "phi"]
    if eps > 0:
        columns.append("phi_eps")
    if gap > 0:
        columns += ["rho", "gap_kernel", "cut"]
    rows = []
    grid = [T * i / 10.0 for i in range(1, 10)]
    for u in grid:
        for v in grid:
            if not u < v:
                continue
            p = KernelPoint(u, v)
            row: dict = {
                "n": order,
                "u": u,
                "v": v,
                "phi": phi_kernel(nidx, params, p),
            }
            if eps > 0:
                row["phi_eps"] = phi_eps_kernel(nidx, params, eps, p)
            if gap > 0:
                row["rho"] = rho_kernel(nidx, params, gap, p)
                row["gap_kernel"] = gap_kernel(nidx, params, gap, p)
                row["cut"] = cut_kernel(nidx, params, gap, p)
            rows.append(row)
    _emit(
        "kernel",
        {"d": dim, "T": T, "eps": eps, "lambda": gap, "seed": 0},
        columns,
        rows,
        0,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# validate-kernels


@cli.command("validate-kernels")
@_dim
@_T
@click.option("--samples", type=int, default=20, show_default=True,
              help="Randomized configurations per kernel.")
@click.option("--tol", type=float, default=1e-7, show_default=True,
              help="Maximum allowed relative error against the "
                   "quadrature oracle.")
@_seed
@_common_output
def validate_kernels(dim: int, T: float, samples: int, tol: float,
                     seed: int, fmt: str, output: str | None) -> None:
    """Check every kernel against the quadrature oracle."""
    import numpy as np

    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    if samples < 1:
        raise PreconditionError("samples >= 1")
    if not tol > 0:
        raise PreconditionError("tol > 0")
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
    )
    qtol = min(1e-9, tol * 1e-2)

    def rel_err(a: float, b: float) -> float:
        return abs(a - b) / max(abs(b), 1e-300)

    def light_domain(u: float, v: float, lam: float = 0.0) -> TimeRectangle:
        if lam > 0:
            return TimeRectangle(0.0, u, v, T, gap=lam, gap_side="above")
        return TimeRectangle(0.0, u, v, T)

    checks: dict[str, Callable[[], float]] = {}

    def check_phi() -> float:
        n = int(rng.integers(1, 4))
        nidx = MultiIndex.canonical(n, dim)
        u = float(rng.uniform(0.05, 0.9)) * T
        v = float(rng.uniform(u + 0.05 * T, T - 0.01 * T))
        p = KernelPoint(u, v)
        got = phi_kernel(nidx, params, p)
        want = kernel_quadrature_oracle(
            nidx, params, light_domain(u, v), qtol
        )
        return rel_err(got, want)

    def check_phi_eps() -> float:
        n = int(rng.integers(1, 4))
        nidx = MultiIndex.canonical(n, dim)
        eps = float(rng.uniform(0.01, 0.2))
        u = float(rng.uniform(0.05, 0.9)) * T
        v = float(rng.uniform(u + 0.01 * T, T - 0.01 * T))
        p = KernelPoint(u, v)
        got = phi_eps_kernel(nidx, params, eps, p)
        want = kernel_quadrature_oracle(
            nidx, params, light_domain(u, v), qtol, eps=eps
        )
        return rel_err(got, want)

    def check_rho() -> float:
        n = int(rng.integers(1, 4))
        nidx = MultiIndex.canonical(n, dim)
        lam = float(rng.uniform(0.1, 0.4)) * T
        # interior configuration: v >= Lambda, u <= T - Lambda
        w = float(rng.uniform(0.05, 0.95)) * lam
        u = float(rng.uniform(max(lam - w, 0.0), T - lam - w))
        v = u + w
        p = KernelPoint(u, v)
        got = rho_kernel(nidx, params, lam, p)
        want = kernel_quadrature_oracle(
            nidx,
            params,
            TimeRectangle(v - lam, u, v, u + lam, gap=lam,
                          gap_side="below"),
            qtol,
        )
        return rel_err(got, want)

    def check_gap() -> float:
        n = int(rng.integers(1, 4))
        nidx = MultiIndex.canonical(n, dim)
        lam = float(rng.uniform(0.1, 0.4)) * T
        w = float(rng.uniform(0.05, 0.95)) * lam
        u = float(rng.uniform(max(lam - w, 0.0), T - lam - w))
        p = KernelPoint(u, u + w)
        got = gap_kernel(nidx, params, lam, p)
        want = kernel_quadrature_oracle(
            nidx, params, light_domain(u, u + w, lam), qtol
        )
        return rel_err(got, want)

    def check_cut() -> float:
        n = int(rng.integers(1, 4))
        nidx = MultiIndex.canonical(n, dim)
        lam = float(rng.uniform(0.05, 0.3)) * T
        u = float(rng.uniform(0.05, 0.5)) * T
        v = float(rng.uniform(u + lam * 1.05, T - 0.01 * T))
        p = KernelPoint(u, v)
        got = cut_kernel(nidx, params, lam, p)
        want = kernel_quadrature_oracle(
            nidx, params, light_domain(u, v), qtol
        )
        return rel_err(got, want)

    checks["phi"] = check_phi
    checks["phi_eps"] = check_phi_eps
    checks["rho"] = check_rho
    checks["gap"] = check_gap
    checks["cut"] = check_cut

    rows = []
    all_pass = True
    for name, fn in checks.items():
        worst = 0.0
        for _ in range(samples):
            worst = max(worst, fn())
        ok = worst <= tol
        all_pass = all_pass and ok
        rows.append(
            {
                "kernel": name,
                "n_checked": samples,
                "max_rel_err": worst,
                "status": "pass" if ok else "fail",
            }
        )
    _emit(
        "validate-kernels",
        {"d": dim, "T": T, "samples": samples, "tol": tol, "seed": seed},
        ["kernel", "n_checked", "max_rel_err", "status"],
        rows,
        seed,
        fmt,
        output,
        t0,
    )
    if not all_pass:
        raise QuadratureError(
            "kernel validation failed: a kernel disagrees with the "
            "quadrature oracle beyond tol"
        )


# ---------------------------------------------------------------------------
# norms


@cli.command()
@_dim
@_T
@click.option("--gap", type=float, default=0.0, show_default=True,
              help="Gap width Lambda for the distance series.")
@click.option("--eps", type=float, default=0.0, show_default=True,
              help="Mollifier variance: emit the variance series "
                   "instead of the distance series.")
@click.option("--nmax", type=int, default=10, show_default=True,
              help="Truncation order of the series.")
@_common_output
def norms(dim: int, T: float, gap: float, eps: float, nmax: int,
          fmt: str, output: str | None) -> None:
    """Per-order chaos series: gap-distance or centered variance."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    rows = []
    if eps > 0:
        reg = RegularizationSpec("gaussian", epsilon=eps)
        breakdown = phi_centered_variance_breakdown(params, reg, nmax)
        for n, contribution in breakdown.per_order:
            rows.append({"n": n, "value": contribution})
        rows.append({"n": "total", "value": breakdown.total})
        rows.append({"n": "tail_bound", "value": breakdown.tail_bound})
        series = "variance"
    else:
        if not gap > 0:
            raise PreconditionError(
                "either --eps > 0 (variance series) or --gap > 0 "
                "(distance series) is required"
            )
        dist = chaos_distance_sq(params, gap, nmax)
        for n, contribution in dist.per_order:
            rows.append({"n": n, "value": contribution})
        rows.append({"n": "total", "value": dist.total})
        rows.append({"n": "tail_bound", "value": dist.truncation_bound})
        series = "distance"
    _emit(
        "norms",
        {"d": dim, "T": T, "eps": eps, "lambda": gap, "nmax": nmax,
         "series": series, "seed": 0},
        ["n", "value"],
        rows,
        0,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# rate


@cli.command()
@_dim
@_T
@click.option("--lambdas", default="1e-1,1e-2,1e-3,1e-4,1e-5",
              show_default=True,
              help="Comma-separated decreasing gap widths.")
@click.option("--nmax", type=int, default=12, show_default=True,
              help="Truncation order of each distance series.")
@_common_output
def rate(dim: int, T: float, lambdas: str, nmax: int, fmt: str,
         output: str | None) -> None:
    """Convergence-rate table: distance and rate ratio per gap width."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    try:
        lams = tuple(float(tok) for tok in lambdas.split(",") if tok)
    except ValueError as exc:
        raise PreconditionError(
            f"--lambdas must be a comma-separated list of reals: {exc}"
        ) from None
    table = rate_verification(params, lams, nmax)
    rows = [
        {
            "lambda": row.lam,
            "distance_sq": row.distance_sq,
            "ratio": row.ratio,
            "bounded": table.bounded,
        }
        for row in table.rows
    ]
    _emit(
        "rate",
        {"d": dim, "T": T, "nmax": nmax, "seed": 0},
        ["lambda", "distance_sq", "ratio", "bounded"],
        rows,
        0,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# simulate


@cli.command()
@_dim
@_T
@click.option("--eps", type=float, required=True,
              help="Gaussian mollifier variance (> 0).")
@click.option("--gap", type=float, default=0.0, show_default=True,
              help="Gap width Lambda (rounded to the grid).")
@click.option("--paths", type=int, default=10000, show_default=True,
              help="Number of Monte Carlo paths.")
@click.option("--steps", type=int, default=0, show_default=True,
              help="Grid steps M (0 = coarsest grid with dt <= eps/10).")
@_seed
@_common_output
def simulate(dim: int, T: float, eps: float, gap: float, paths: int,
             steps: int, seed: int, fmt: str, output: str | None) -> None:
    """Monte Carlo mean of the regularized local time vs closed form."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    if steps == 0:
        steps = max(2, math.ceil(10.0 * T / eps))
    est = mc_gaussian_lt(params, eps, gap, steps, paths, seed)
    dt = T / steps
    lam_eff = round(gap / dt) * dt
    if lam_eff > 0:
        expected = expected_combined_lt(params, eps, lam_eff)
    else:
        expected = expected_gaussian_lt(params, eps)
    rows = [
        {
            "steps": steps,
            "n_paths": est.n_samples,
            "lambda_effective": lam_eff,
            "mean": est.mean,
            "std_error": est.std_error,
            "expected": expected,
        }
    ]
    _emit(
        "simulate",
        {"d": dim, "T": T, "eps": eps, "lambda": gap, "seed": seed},
        ["steps", "n_paths", "lambda_effective", "mean", "std_error",
         "expected"],
        rows,
        seed,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# tail


@cli.command()
@_dim
@_T
@click.option("--eps", type=float, required=True,
              help="Gaussian mollifier variance (> 0).")
@click.option("--threshold", type=float, required=True,
              help="Tail level N: estimates P(centered L <= -N).")
@click.option("--alpha", type=float, required=True,
              help="Rate parameter, 0 < alpha < 2 pi / T.")
@click.option("--g", type=float, default=1.0, show_default=True,
              help="Coupling recorded with the experiment.")
@click.option("--paths", type=int, default=10000, show_default=True,
              help="Number of Monte Carlo paths (>= 10^4).")
@click.option("--steps", type=int, default=0, show_default=True,
              help="Grid steps M (0 = coarsest grid with dt <= eps/10).")
@click.option("--nmax", type=int, default=8, show_default=True,
              help="Truncation order of the rate table behind the "
                   "bound constant K.")
@_seed
@_common_output
def tail(dim: int, T: float, eps: float, threshold: float, alpha: float,
         g: float, paths: int, steps: int, nmax: int, seed: int,
         fmt: str, output: str | None) -> None:
    """Empirical lower-tail frequency vs the Chebyshev bound.

    The bound constant K is the maximum rate ratio over the standard
    gap-width grid; k is the divergence constant at the induced cut
    width (computed with k = 0 in the exponent first)."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    table = rate_verification(
        params, (1e-1, 1e-2, 1e-3, 1e-4, 1e-5), nmax
    )
    K = max(row.ratio for row in table.rows)
    lam0 = math.exp(-alpha * threshold)
    k = divergence_constant_k(params, lam0)
    experiment = TailExperiment(
        threshold=threshold, g=g, alpha=alpha, k=k, K=K
    )
    bound = chebyshev_tail_bound(experiment, params)
    intermediate = chebyshev_tail_intermediate(experiment, params)
    reg = RegularizationSpec("gaussian", epsilon=eps)
    est = empirical_tail(
        params, reg, threshold, paths, seed,
        steps=steps if steps > 0 else None,
    )
    rows = [
        {
            "threshold": threshold,
            "alpha": alpha,
            "n_paths": est.n_samples,
            "frequency": est.mean,
            "std_error": est.std_error,
            "bound": bound,
            "bound_intermediate": intermediate,
            "K": K,
            "k": k,
            "lambda_induced": experiment.lam,
        }
    ]
    _emit(
        "tail",
        {"d": dim, "T": T, "eps": eps, "g": g, "nmax": nmax,
         "seed": seed},
        ["threshold", "alpha", "n_paths", "frequency", "std_error",
         "bound", "bound_intermediate", "K", "k", "lambda_induced"],
        rows,
        seed,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# partition


@cli.command()
@_dim
@_T
@click.option("--eps", type=float, required=True,
              help="Gaussian mollifier variance (> 0).")
@click.option("--gap", type=float, default=0.0, show_default=True,
              help="Gap width Lambda (rounded to the grid).")
@click.option("--g", type=float, required=True,
              help="Coupling of the partition function E(exp(-g L)).")
@click.option("--paths", type=int, default=10000, show_default=True,
              help="Number of Monte Carlo paths.")
@click.option("--steps", type=int, default=0, show_default=True,
              help="Grid steps M (0 = coarsest grid with dt <= eps/10).")
@_seed
@_common_output
def partition(dim: int, T: float, eps: float, gap: float, g: float,
              paths: int, steps: int, seed: int, fmt: str,
              output: str | None) -> None:
    """Monte Carlo estimate of the partition function E(exp(-g L))."""
    t0 = time.perf_counter()
    params = ModelParams(d=dim, T=T)
    variant = "combined" if gap > 0 else "gaussian"
    reg = RegularizationSpec(variant, epsilon=eps, lam=gap)
    est = partition_estimate(
        params, g, reg, paths, seed,
        steps=steps if steps > 0 else None,
    )
    rows = [
        {
            "g": g,
            "n_paths": est.n_samples,
            "mean": est.mean,
            "std_error": est.std_error,
        }
    ]
    _emit(
        "partition",
        {"d": dim, "T": T, "eps": eps, "lambda": gap, "g": g,
         "seed": seed},
        ["g", "n_paths", "mean", "std_error"],
        rows,
        seed,
        fmt,
        output,
        t0,
    )


# ---------------------------------------------------------------------------
# Entry point


def main() -> None:
    """Console entry point with the documented exit-code contract."""
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(130)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except PreconditionError as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(2)
    except (QuadratureError, WeightOverflowError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
