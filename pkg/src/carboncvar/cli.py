"""Command-line interface.

Subcommands cover the analysis pipeline: ``ingest`` builds the canonical
dataset, ``rank-test`` runs the cointegration rank tests, ``fit``
estimates the structural or benchmark model, ``test`` runs restriction
tests on the cointegration space, ``diagnose`` prints residual
diagnostics, and ``project`` simulates scenario projections.

Exit codes: 0 on success, 2 for data or usage problems, 3 for numerical
failures including non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, cvar, dataio, diagnostics, lrtests, projection, structural
from .errors import CarbonCvarError, DataError, NumericalError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_NUMERIC = 3

_SPEC_GRID = (
    cvar.VecmSpec(k=0, include_soi=False),
    cvar.VecmSpec(k=0, include_soi=True),
    cvar.VecmSpec(k=1, include_soi=False),
    cvar.VecmSpec(k=1, include_soi=True),
)

_DIFF_LABELS = ("dS^L", "dS^O", "dE", "dC")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path}: invalid JSON ({exc})") from exc
    if not isinstance(config, dict):
        raise DataError(f"config {path}: expected a JSON object")
    return config


def _apply_config(args: argparse.Namespace, config: dict) -> None:
    """Fill in options the command line left at None; flags win."""
    for key, value in config.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolve(args, name, default):
    value = getattr(args, name, None)
    return default if value is None else value


def _window(args) -> tuple[int, int]:
    return (
        int(_resolve(args, "start_year", 1959)),
        int(_resolve(args, "end_year", 2022)),
    )


def _load_dataset(args, parser) -> dataio.AlignedDataset:
    if getattr(args, "data", None):
        return dataio.read_canonical(args.data)
    if getattr(args, "gcb", None) and getattr(args, "soi", None):
        start, end = _window(args)
        return dataio.build_dataset(args.gcb, args.soi, start_year=start, end_year=end)
    parser.error("provide --data CANONICAL.csv or both --gcb and --soi")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        json.dump(payload, sys.stdout, indent=2, default=_jsonify)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text + "\n")


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _artifact_dir(args) -> Path | None:
    if args.out_dir is None:
        return None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, default=_jsonify) + "\n")


def cmd_ingest(args, parser) -> int:
    start, end = _window(args)
    dataset = dataio.build_dataset(args.gcb, args.soi, start_year=start, end_year=end)
    sys.stderr.write(dataio.validation_report(dataset) + "\n")
    out = args.out
    if out is None:
        base = _artifact_dir(args) or Path(".")
        out = base / "dataset.csv"
    dataio.write_canonical(dataset, out)
    payload = {
        "rows": dataset.n_years,
        "years": [int(dataset.years[0]), int(dataset.years[-1])],
        "out": str(out),
    }
    _emit(args, payload, f"wrote {dataset.n_years} rows to {out}")
    return EXIT_OK


def _format_trace(result: cvar.TraceTestResult) -> str:
    lines = [
        f"trace test ({result.spec.label()}), T={result.T}",
        f"  {'r':>2s} {'eigenvalue':>10s} {'trace':>8s} {'5% cv':>8s} {'p-value':>8s}",
    ]
    for r in range(cvar.P_DIM):
        lines.append(
            f"  {r:2d} {result.eigenvalues[r]:10.4f} {result.stats[r]:8.2f}"
            f" {result.crit_5pct[r]:8.2f} {result.p_values[r]:8.3f}"
        )
    lines.append(f"  selected rank: {result.selected_rank}")
    return "\n".join(lines)


def cmd_rank_test(args, parser) -> int:
    dataset = _load_dataset(args, parser)
    results = [cvar.trace_test(cvar.concentrate(dataset, spec)) for spec in _SPEC_GRID]
    payload = {"results": [r.to_dict() for r in results]}
    text = "\n\n".join(_format_trace(r) for r in results)
    out = _artifact_dir(args)
    if out is not None:
        _write_json(out / "rank_test.json", payload)
    _emit(args, payload, text)
    return EXIT_OK


def _fit_structural(dataset, args):
    seed = _resolve(args, "seed", 0)
    n_starts = int(_resolve(args, "starts", 6))
    se_method = _resolve(args, "se", "hessian")
    return structural.fit_mle(
        dataset, n_starts=n_starts, seed=seed, se_method=se_method
    )


def _format_fit(fit: structural.StructuralFit, lr) -> str:
    lines = [
        f"structural fit: loglik {fit.loglik:.3f}, T={fit.T},"
        f" converged={fit.converged}, iterations={fit.n_iter}",
        f"  {'param':>6s} {'estimate':>10s} {'std err':>10s}",
    ]
    se = fit.se if fit.se is not None else [np.nan] * structural.N_PARAMS
    for name, est, s in zip(structural.PARAM_NAMES, fit.theta.to_array(), se):
        lines.append(f"  {name:>6s} {est:10.4f} {s:10.4f}")
    if lr is not None:
        lines.append(
            f"  LR vs benchmark: {lr.statistic:.3f} on {lr.df} df"
            f" (p={lr.p_value:.3f}; benchmark loglik {lr.loglik_unrestricted:.3f})"
        )
    return "\n".join(lines)


def cmd_fit(args, parser) -> int:
    dataset = _load_dataset(args, parser)
    model = _resolve(args, "model", "structural")
    out = _artifact_dir(args)

    if model == "benchmark":
        spec = cvar.VecmSpec(rank=3, k=1, include_soi=True)
        est = cvar.estimate(dataset, spec)
        payload = est.to_dict()
        text = (
            f"benchmark fit (rank 3, {spec.label()}): loglik {est.loglik:.3f},"
            f" T={est.T}, free params {est.n_free_params}"
        )
        if out is not None:
            _write_json(out / "benchmark.json", payload)
        _emit(args, payload, text)
        return EXIT_OK

    if model != "structural":
        parser.error(f"unknown model {model!r}")

    fit = _fit_structural(dataset, args)
    spec = cvar.VecmSpec(rank=3, k=1, include_soi=True)
    benchmark = cvar.estimate(dataset, spec)
    lr = structural.lr_restricted_vs_benchmark(fit, benchmark)
    payload = fit.to_dict()
    payload["lr_vs_benchmark"] = lr.to_dict()

    if out is not None:
        _write_json(out / "structural_fit.json", payload)
        years, actual, fitted = structural.fitted_differences(fit, dataset)
        lines = ["variable,year,series,value"]
        for j, label in enumerate(_DIFF_LABELS):
            for i, year in enumerate(years):
                lines.append(f"{label},{year:d},actual,{actual[i, j]:.6f}")
                lines.append(f"{label},{year:d},fitted,{fitted[i, j]:.6f}")
        (out / "fitted_differences.csv").write_text("\n".join(lines) + "\n")
        res_lines = ["year," + ",".join(_DIFF_LABELS)]
        for i, year in enumerate(fit.years):
            row = ",".join(f"{fit.residuals_reduced[i, j]:.6f}" for j in range(4))
            res_lines.append(f"{year:d},{row}")
        (out / "residuals.csv").write_text("\n".join(res_lines) + "\n")

    _emit(args, payload, _format_fit(fit, lr))
    if not fit.converged:
        sys.stderr.write(
            "optimizer did not converge; best point reported above\n"
        )
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_test(args, parser) -> int:
    dataset = _load_dataset(args, parser)
    spec = cvar.VecmSpec(
        rank=int(_resolve(args, "rank", 3)),
        k=int(_resolve(args, "k", 1)),
        include_soi=not args.no_soi,
    )
    grid = lrtests.all_tests(dataset, spec)
    payload = {
        kind: [r.to_dict() for r in results] for kind, results in grid.items()
    }
    lines = [
        f"LR tests on the cointegration space (rank {spec.rank}, {spec.label()})",
        f"  {'variable':>14s} {'exclusion':>18s} {'weak exog.':>18s}",
    ]
    for i, name in enumerate(lrtests.VARIABLE_NAMES):
        excl = grid["exclusion"][i]
        wexo = grid["weak_exogeneity"][i]
        lines.append(
            f"  {name:>14s} {excl.statistic:9.3f} (p={excl.p_value:.3f})"
            f" {wexo.statistic:9.3f} (p={wexo.p_value:.3f})"
        )
    lines.append(f"  df = {grid['exclusion'][0].df} for each test")
    out = _artifact_dir(args)
    if out is not None:
        _write_json(out / "lr_tests.json", payload)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_diagnose(args, parser) -> int:
    dataset = _load_dataset(args, parser)
    model = _resolve(args, "model", "structural")
    if model == "structural":
        fit = _fit_structural(dataset, args)
        residuals = fit.residuals_reduced
        var_lags = 2
        title = "structural model residual diagnostics"
    elif model == "benchmark":
        k = int(_resolve(args, "k", 1))
        spec = cvar.VecmSpec(rank=3, k=k, include_soi=not args.no_soi)
        est = cvar.estimate(dataset, spec)
        residuals = est.residuals
        var_lags = k + 1
        title = f"benchmark residual diagnostics (rank 3, {spec.label()})"
    else:
        parser.error(f"unknown model {model!r}")

    table = diagnostics.diagnostics_table(
        residuals, labels=list(_DIFF_LABELS), var_lags=var_lags
    )
    payload = {"model": model, "table": table.to_dict()}
    out = _artifact_dir(args)
    if out is not None:
        _write_json(out / "diagnostics.json", payload)
    _emit(args, payload, title + "\n" + diagnostics.format_table(table))
    return EXIT_OK


def cmd_project(args, parser) -> int:
    dataset = _load_dataset(args, parser)
    scenario = dataio.load_scenario(
        args.scenario,
        name=_resolve(args, "scenario_name", None),
        unit=_resolve(args, "unit", "pgc"),
        expected_start=int(dataset.years[-1]) + 1,
    )
    levels_arg = _resolve(args, "feedback", "all")
    level_names = (
        sorted(projection.FEEDBACK_LEVELS, key=list(projection.FEEDBACK_LEVELS).index)
        if levels_arg == "all"
        else [s.strip() for s in levels_arg.split(",") if s.strip()]
    )
    seed = int(_resolve(args, "seed", 0))
    n_paths = int(_resolve(args, "n_paths", 100_000))
    workers = int(_resolve(args, "workers", 1))

    fit = _fit_structural(dataset, args)
    out = _artifact_dir(args)
    summary = []
    payload = {"scenario": scenario.name, "n_paths": n_paths, "levels": {}}
    for level in level_names:
        feedback = projection.FeedbackSpec.from_level(level)
        ensemble = projection.simulate_paths(
            fit,
            dataset,
            scenario,
            feedback,
            n_paths=n_paths,
            seed=seed,
            soi_mode=_resolve(args, "soi_mode", "zero"),
            shock_mode=_resolve(args, "shock_mode", "structural"),
            workers=workers,
        )
        fan = projection.quantile_fan(ensemble)
        if out is not None:
            target = out / scenario.name / level
            projection.write_fan_csvs(fan, target)
        conc = fan.quantiles["concentration"]
        ppm = dataset.constants.to_ppm(conc)
        payload["levels"][level] = {
            "concentration_2100_pgc": conc[:, -1].tolist(),
            "concentration_2100_ppm": ppm[:, -1].tolist(),
            "n_negative": fan.n_negative,
        }
        summary.append(
            f"  {level:>5s}: C({int(fan.years[-1])}) median {conc[1, -1]:8.1f} PgC"
            f" = {ppm[1, -1]:6.1f} ppm"
            f"  [{ppm[0, -1]:6.1f}, {ppm[2, -1]:6.1f}] 95% band"
        )
    text = (
        f"projection under scenario {scenario.name!r}"
        f" ({n_paths} paths, seed {seed})\n" + "\n".join(summary)
    )
    _emit(args, payload, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carboncvar",
        description="Cointegrated VAR analysis of the global carbon budget.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("--out-dir", help="directory for output artifacts")
    parser.add_argument("--json", action="store_true", help="JSON output on stdout")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_window_opts(p):
        p.add_argument("--start-year", type=int, help="sample start (default 1959)")
        p.add_argument("--end-year", type=int, help="sample end (default 2022)")

    def add_data_opts(p):
        p.add_argument("--data", help="canonical dataset CSV")
        p.add_argument("--gcb", help="global budget accounting CSV")
        p.add_argument("--soi", help="annual SOI CSV")
        add_window_opts(p)

    p_ingest = sub.add_parser("ingest", help="build the canonical dataset")
    p_ingest.add_argument("--gcb", required=True)
    p_ingest.add_argument("--soi", required=True)
    p_ingest.add_argument("--out", help="output CSV path")
    add_window_opts(p_ingest)
    p_ingest.set_defaults(func=cmd_ingest)

    p_rank = sub.add_parser("rank-test", help="cointegration rank tests")
    add_data_opts(p_rank)
    p_rank.set_defaults(func=cmd_rank_test)

    p_fit = sub.add_parser("fit", help="estimate the structural or benchmark model")
    add_data_opts(p_fit)
    p_fit.add_argument("--model", choices=("structural", "benchmark"))
    p_fit.add_argument("--starts", type=int, help="multistart count (default 6)")
    p_fit.add_argument("--se", choices=("hessian", "sandwich"))
    p_fit.set_defaults(func=cmd_fit)

    p_test = sub.add_parser("test", help="LR tests on the cointegration space")
    add_data_opts(p_test)
    p_test.add_argument("--rank", type=int, help="cointegration rank (default 3)")
    p_test.add_argument("--k", type=int, help="short-run lag order (default 1)")
    p_test.add_argument("--no-soi", action="store_true")
    p_test.set_defaults(func=cmd_test)

    p_diag = sub.add_parser("diagnose", help="residual diagnostics")
    add_data_opts(p_diag)
    p_diag.add_argument("--model", choices=("structural", "benchmark"))
    p_diag.add_argument("--k", type=int, help="benchmark lag order (default 1)")
    p_diag.add_argument("--no-soi", action="store_true")
    p_diag.add_argument("--starts", type=int)
    p_diag.add_argument("--se", choices=("hessian", "sandwich"))
    p_diag.set_defaults(func=cmd_diagnose)

    p_proj = sub.add_parser("project", help="scenario projections")
    add_data_opts(p_proj)
    p_proj.add_argument("--scenario", required=True, help="scenario CSV (year, emissions)")
    p_proj.add_argument("--scenario-name")
    p_proj.add_argument("--unit", choices=("pgc", "gtco2"))
    p_proj.add_argument("--feedback", help="none, low, high, all, or a comma list")
    p_proj.add_argument("--n-paths", type=int)
    p_proj.add_argument("--soi-mode", choices=("zero", "bootstrap"))
    p_proj.add_argument("--shock-mode", choices=("structural", "diagonal", "off"))
    p_proj.add_argument("--workers", type=int)
    p_proj.add_argument("--starts", type=int)
    p_proj.add_argument("--se", choices=("hessian", "sandwich"))
    p_proj.set_defaults(func=cmd_project)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        _apply_config(args, config)
        return args.func(args, parser)
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: file not found: {exc}\n")
        return EXIT_DATA
    except DataError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERIC
    except CarbonCvarError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
