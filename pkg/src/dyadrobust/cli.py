"""Command-line frontend: fit dyadic regressions from CSV, run simulations.

Two subcommands.  ``fit`` ingests a dyadic panel, fits the requested
family, and reports coefficients with any subset of the SE estimators,
as a table and optionally as JSON with full covariance matrices.
``simulate`` drives the Monte Carlo harness across one or more sample
sizes and writes a JSON report plus a plot-ready long CSV.

Exit codes: 0 success; 2 for data problems (bad flags, malformed CSV,
schema violations); 3 for numerical failures (rank deficiency, perfect
separation, non-convergence, unit leverage).  All outputs are pure
functions of the inputs; nothing is timestamped.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .dyads import DyadDataset
from .errors import DataError, DyadRobustError
from .ingest import CsvSchemaSpec, ingest_csv
from .regression import RegressionFit, fit_logistic, fit_ols, fit_wls
from .simulation import (
    DISTRIBUTIONS,
    SimulationConfig,
    run_misspecification_study,
    run_monte_carlo,
    write_long_csv,
    write_reports_json,
)
from .variance import (
    VcovEstimate,
    psd_check,
    truncate_to_psd,
    vcov_cluster,
    vcov_dyadic_decomposed,
    vcov_hc0,
    vcov_hc2,
)

__all__ = ["main", "build_parser"]

SE_CHOICES = ("hc0", "hc2", "cluster-dyad", "dyadic")
DEFAULT_SE = "hc0,cluster-dyad,dyadic"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadrobust",
        description="dyadic cluster-robust regression and simulation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model to a dyadic CSV panel")
    fit.add_argument("csv", help="path to the input CSV file")
    fit.add_argument(
        "--family", choices=("linear", "logistic"), default="linear"
    )
    fit.add_argument(
        "--se",
        default=DEFAULT_SE,
        help=f"comma-separated subset of {{{','.join(SE_CHOICES)}}} "
        f"(default {DEFAULT_SE})",
    )
    fit.add_argument(
        "--units",
        required=True,
        metavar="COL_I,COL_J",
        help="comma-separated names of the two unit columns",
    )
    fit.add_argument("--outcome", required=True, metavar="COL")
    fit.add_argument(
        "--regressors",
        default="rest",
        metavar="COLS|rest",
        help='comma-separated regressor columns, or "rest" for all '
        "unclaimed columns (default)",
    )
    fit.add_argument("--time", metavar="COL", help="period column for repeated dyads")
    fit.add_argument("--weights", metavar="COL", help="positive weight column")
    fit.add_argument(
        "--directed",
        action="store_true",
        help="treat rows as directed sender/receiver observations; the two "
        "directions become repeated observations of one undirected dyad, "
        "which changes how they cluster",
    )
    fit.add_argument(
        "--no-intercept",
        action="store_true",
        help="do not prepend a constant column to the regressors",
    )
    fit.add_argument(
        "--psd-truncate",
        action="store_true",
        help="clip negative eigenvalues of any indefinite covariance "
        "estimate (recorded in the method tag)",
    )
    fit.add_argument("--json", metavar="PATH", help="write the full report as JSON")

    sim = sub.add_parser("simulate", help="run the Monte Carlo calibration study")
    sim.add_argument(
        "--n-units",
        default="50",
        metavar="N[,N...]",
        help="comma-separated sample sizes (default 50)",
    )
    sim.add_argument("--t", type=int, default=1, help="observations per dyad")
    sim.add_argument("--replicates", type=int, default=500)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--beta0", type=float, default=0.0)
    sim.add_argument("--beta1", type=float, default=1.0)
    sim.add_argument(
        "--beta2",
        type=float,
        default=0.0,
        help="quadratic term in the data only; nonzero values run the "
        "misspecification study",
    )
    sim.add_argument(
        "--shock-distribution", choices=DISTRIBUTIONS, default="normal"
    )
    sim.add_argument("--x-distribution", choices=DISTRIBUTIONS, default="normal")
    sim.add_argument(
        "--json",
        default="simulation_report.json",
        metavar="PATH",
        help="JSON report path (default simulation_report.json)",
    )
    sim.add_argument(
        "--csv",
        default="simulation_ses.csv",
        metavar="PATH",
        help="long-format SE CSV path (default simulation_ses.csv)",
    )
    return parser


def _parse_se_methods(raw: str) -> list[str]:
    methods = [m.strip() for m in raw.split(",") if m.strip()]
    if not methods:
        raise DataError("--se must request at least one method")
    for m in methods:
        if m not in SE_CHOICES:
            raise DataError(f"unknown SE method {m!r}; choose from {SE_CHOICES}")
    return methods


def _compute_estimate(
    method: str, fit: RegressionFit, dataset: DyadDataset
) -> VcovEstimate:
    if method == "hc0":
        return vcov_hc0(fit, dataset)
    if method == "hc2":
        return vcov_hc2(fit, dataset)
    if method == "cluster-dyad":
        return vcov_cluster(fit, dataset, dataset.dyad_code, label="dyad")
    return vcov_dyadic_decomposed(fit, dataset)


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def _format_value(v: float) -> str:
    return f"{v:.6g}"


def _print_fit_table(names, beta, methods, estimates) -> None:
    headers = ["predictor", "coef"] + [f"se({m})" for m in methods]
    rows = []
    for c, name in enumerate(names):
        row = [name, _format_value(beta[c])]
        row += [_format_value(estimates[m].se[c]) for m in methods]
        rows.append(row)
    widths = [
        max(len(headers[k]), *(len(r[k]) for r in rows)) for k in range(len(headers))
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))


def _cmd_fit(args) -> int:
    unit_cols = [c.strip() for c in args.units.split(",")]
    if len(unit_cols) != 2:
        raise DataError("--units needs exactly two comma-separated column names")
    regressors = (
        "rest"
        if args.regressors == "rest"
        else [c.strip() for c in args.regressors.split(",") if c.strip()]
    )
    schema = CsvSchemaSpec(
        unit_i=unit_cols[0],
        unit_j=unit_cols[1],
        outcome=args.outcome,
        regressors=regressors,
        time=args.time,
        weight=args.weights,
        add_intercept=not args.no_intercept,
    )
    methods = _parse_se_methods(args.se)
    result = ingest_csv(args.csv, schema, directed=args.directed)
    dataset = result.dataset
    print(
        f"ingested {args.csv}: units={dataset.n_units} "
        f"dyads={dataset.n_dyads} rows={dataset.n_rows}"
    )

    if args.family == "logistic":
        fit = fit_logistic(dataset)
    elif args.weights is not None:
        fit = fit_wls(dataset)
    else:
        fit = fit_ols(dataset)

    estimates: dict[str, VcovEstimate] = {}
    diagnostics: dict[str, dict] = {}
    for method in methods:
        estimate = _compute_estimate(method, fit, dataset)
        check = psd_check(estimate)
        truncated = False
        if args.psd_truncate and not check.psd_ok:
            estimate = truncate_to_psd(estimate)
            truncated = True
        estimates[method] = estimate
        diagnostics[method] = {
            "estimator": estimate.method,
            "psd_ok": check.psd_ok,
            "min_eigenvalue": check.min_eigenvalue,
            "negative_diagonals": list(check.negative_diagonals),
            "truncated": truncated,
        }

    names = dataset.x_names or tuple(f"x{k}" for k in range(dataset.k))
    print(f"family: {args.family}" + (f"  (converged in {fit.n_iter} iterations)" if args.family == "logistic" else ""))
    _print_fit_table(names, fit.beta, methods, estimates)
    for method, diag in diagnostics.items():
        if not diag["psd_ok"]:
            note = "truncated to PSD" if diag["truncated"] else "reported as-is"
            print(
                f"note: {method} estimate is indefinite "
                f"(min eigenvalue {diag['min_eigenvalue']:.6g}), {note}"
            )

    if args.json:
        payload = {
            "meta": {
                "package": "dyadrobust",
                "version": __version__,
                "input": args.csv,
                "family": args.family,
                "methods": methods,
                "directed": args.directed,
                "weights_column": args.weights,
                "psd_truncate": args.psd_truncate,
                "n_units": dataset.n_units,
                "n_dyads": dataset.n_dyads,
                "n_rows": dataset.n_rows,
                "n_iter": fit.n_iter,
            },
            "coefficients": [
                {"name": name, "estimate": float(fit.beta[c])}
                for c, name in enumerate(names)
            ],
            "se_by_method": {
                m: [float(v) for v in estimates[m].se] for m in methods
            },
            "vcov_by_method": {
                m: estimates[m].matrix.tolist() for m in methods
            },
            "diagnostics": diagnostics,
        }
        with open(args.json, "w") as handle:
            json.dump(_json_safe(payload), handle, indent=2)
            handle.write("\n")
        print(f"wrote {args.json}")
    return 0


def _print_simulation_summary(report) -> None:
    summary = report.summary()
    config = report.config
    print(
        f"n_units={config.n_units}  t_per_dyad={config.t_per_dyad}  "
        f"replicates={config.replicates}  "
        f"rows_per_replicate={config.n_rows}"
    )
    headers = ["coefficient", "empirical_sd", "method", "mean_se", "median_se"]
    rows = []
    for entry in summary["coefficients"]:
        for method, stats in entry["se_methods"].items():
            rows.append(
                [
                    entry["name"],
                    _format_value(entry["empirical_sd"]),
                    method,
                    _format_value(stats["mean"]),
                    _format_value(stats["median"]),
                ]
            )
    widths = [
        max(len(headers[k]), *(len(r[k]) for r in rows)) for k in range(len(headers))
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    for entry in summary["coefficients"]:
        for method, stats in entry["se_methods"].items():
            if stats["n_undefined"]:
                print(
                    f"note: {method} SE for {entry['name']} undefined "
                    f"(negative variance estimate) in {stats['n_undefined']} "
                    "replicates; summary statistics exclude them"
                )
    print()


def _cmd_simulate(args) -> int:
    try:
        n_units_list = [int(s) for s in args.n_units.split(",")]
    except ValueError:
        raise DataError(
            f"--n-units must be comma-separated integers, got {args.n_units!r}"
        ) from None
    reports = []
    for n_units in n_units_list:
        config = SimulationConfig(
            n_units=n_units,
            t_per_dyad=args.t,
            beta0=args.beta0,
            beta1=args.beta1,
            beta2=args.beta2,
            shock_distribution=args.shock_distribution,
            x_distribution=args.x_distribution,
            replicates=args.replicates,
            rng_seed=args.seed,
        )
        runner = run_misspecification_study if args.beta2 != 0 else run_monte_carlo
        report = runner(config)
        reports.append(report)
        _print_simulation_summary(report)
    write_reports_json(reports, args.json)
    write_long_csv(reports, args.csv)
    print(f"wrote {args.json} and {args.csv}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        return _cmd_simulate(args)
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(
            f"(run 'dyadrobust {args.command} --help' for usage)", file=sys.stderr
        )
        return 2
    except DyadRobustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
