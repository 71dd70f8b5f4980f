"""Subcommand front-end: generate / ingest / analyze / fit / eval / run-all.

Every stage reads and writes plain CSV/JSON under an output directory, so
any stage can be re-run in isolation; outputs are deterministic given
inputs, flags and seed. Exit codes: 0 success, 1 analysis failure, 2 I/O or
usage error, 3 domain-range violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from mobacc import __version__
from mobacc.fitting import (
    lm_double_gaussian,
    lm_gaussian,
    ols_linear,
    ols_polynomial,
    select_sigma_model,
)
from mobacc.ingest import (
    DEFAULT_MIN_ACTIVE_DAYS,
    FieldLayout,
    build_trajectories,
    filter_active,
    parse_records,
    read_trajectory_file,
    trajectory_file_lines,
)
from mobacc.intervals import (
    DEFAULT_INTERVAL_WIDTH,
    DEFAULT_KDE_GRID_SIZE,
    DEFAULT_N_INTERVALS,
    KDE_FIT_MIN_USERS,
    EntropyBinning,
    bin_users,
    summarize_intervals,
)
from mobacc.model import GaussianAccuracyModel, ModelDocumentError, OutOfDomainError
from mobacc.pipeline import analyze_trajectories, join_by_user
from mobacc.reports import (
    atomic_write_text,
    read_accuracy_report,
    read_entropy_report,
    read_interval_report,
    write_accuracy_report,
    write_entropy_report,
    write_interval_report,
    write_json,
    write_kde_dump,
    write_lines,
)
from mobacc.synth import GeneratorConfig, generate

log = logging.getLogger("mobacc")

TRAJECTORY_FILE = "trajectories.csv"
INGEST_SUMMARY_FILE = "ingest_summary.json"
ENTROPY_FILE = "entropy.csv"
ACCURACY_FILE = "accuracy.csv"
INTERVAL_FILE = "intervals.csv"
FIT_REPORT_FILE = "fit_report.json"
MODEL_FILE = "model.json"
FIGURES_DIR = "figures"
MIN_FIT_INTERVALS = 5

# built-in nine-interval reference table for `fit --fixture paper9` and the
# solver sanity checks: (interval label, mean accuracy, accuracy sd)
NINE_INTERVAL_FIXTURE = (
    (0.05, 0.999, 0.002),
    (0.55, 0.928, 0.019),
    (1.05, 0.814, 0.070),
    (1.55, 0.689, 0.084),
    (2.05, 0.580, 0.0865),
    (2.55, 0.500, 0.081),
    (3.05, 0.449, 0.079),
    (3.55, 0.419, 0.102),
    (4.05, 0.279, 0.057),
)


class CommandError(RuntimeError):
    def __init__(self, message: str, exit_code: int = 1):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass
class PipelineConfig:
    """Tunable knobs shared by the subcommands; config-file keys match."""

    output_dir: str = "out"
    order: int = 2
    interval_width: float = DEFAULT_INTERVAL_WIDTH
    n_intervals: int = DEFAULT_N_INTERVALS
    min_bin_size: int = 10
    kde_grid_size: int = DEFAULT_KDE_GRID_SIZE
    kde_min_users: int = KDE_FIT_MIN_USERS
    alpha: float = 0.05
    min_active_days: int = DEFAULT_MIN_ACTIVE_DAYS
    seed: int = 0
    threads: int = 1
    timezone: str = "UTC"
    delimiter: str = ","
    collapse_duplicates: bool = False
    backoff: bool = True
    split: float | None = None
    skip_bad_users: bool = False
    truncated: bool = False
    extrapolate: bool = False
    figures: bool = True
    kde_dumps: bool = False
    n_users: int = 2000
    seq_length: int = 5000
    n_locations: int = 16
    tour_period: int = 8
    noise_lo: float = 0.0
    noise_hi: float = 1.0


def load_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        loaded = json.loads(text)
    else:
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        loaded = tomllib.loads(text)
    if not isinstance(loaded, dict):
        raise CommandError(f"config {path} must be a key/value table", exit_code=2)
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(loaded) - known
    if unknown:
        raise CommandError(f"config {path} has unknown keys: {', '.join(sorted(unknown))}", exit_code=2)
    return loaded


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults < config file < explicit command-line flags."""
    merged = asdict(PipelineConfig())
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in merged:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "noise", None) is not None:
        merged["noise_lo"], merged["noise_hi"] = args.noise
    return PipelineConfig(**merged)


def _require_input(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CommandError(f"input path does not exist: {p}", exit_code=2)
    return p


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _provenance(dataset: str | None) -> dict:
    stamp = None
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        stamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return {"dataset": dataset, "timestamp": stamp, "tool_version": __version__}


# ---------------------------------------------------------------- generate


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = _out_dir(cfg)
    config = GeneratorConfig(
        n_users=cfg.n_users,
        seq_length=cfg.seq_length,
        n_locations=cfg.n_locations,
        noise_range=(cfg.noise_lo, cfg.noise_hi),
        tour_period=cfg.tour_period,
        seed=cfg.seed,
    )
    trajectories = generate(config)
    write_lines(out / TRAJECTORY_FILE, trajectory_file_lines(trajectories, cfg.timezone))
    log.info("generated %d users x %d events -> %s", cfg.n_users, cfg.seq_length, out / TRAJECTORY_FILE)
    return 0


# ------------------------------------------------------------------ ingest


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = _out_dir(cfg)
    source = _require_input(args.input)

    if args.format == "trajectory":
        with source.open(encoding="utf-8") as handle:
            trajectories = read_trajectory_file(handle, cfg.timezone)
        failures = 0
    else:
        layout = FieldLayout.positional(cfg.delimiter)
        with source.open(encoding="utf-8") as handle:
            first = handle.readline()
            if args.header:
                layout = FieldLayout.from_header(first, cfg.delimiter)
            else:
                handle.seek(0)
            records = []
            failures = 0
            for item in parse_records(handle, layout, cfg.timezone):
                if hasattr(item, "line_number"):
                    failures += 1
                    log.warning("line %d: %s", item.line_number, item.reason)
                else:
                    records.append(item)
        trajectories = build_trajectories(
            records,
            collapse_duplicates=cfg.collapse_duplicates,
            tz=cfg.timezone,
            roam_city_id=args.roam_city,
        )

    kept = filter_active(trajectories, cfg.min_active_days)
    summary = {
        "users_in": len(trajectories),
        "users_kept": len(kept),
        "records_kept": sum(len(t) for t in kept),
        "spill": failures,
    }
    write_lines(out / TRAJECTORY_FILE, trajectory_file_lines(kept, cfg.timezone))
    write_json(out / INGEST_SUMMARY_FILE, summary)
    log.info("ingest: %s", summary)
    return 0


# ----------------------------------------------------------------- analyze


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = _out_dir(cfg)
    source = _require_input(args.input)
    with source.open(encoding="utf-8") as handle:
        trajectories = read_trajectory_file(handle, cfg.timezone)
    pairs, skipped = analyze_trajectories(
        trajectories,
        cfg.order,
        backoff=cfg.backoff,
        train_fraction=cfg.split,
        threads=cfg.threads,
        skip_bad_users=cfg.skip_bad_users,
    )
    for user_id, reason in skipped:
        log.warning("skipped user %s: %s", user_id, reason)
    write_entropy_report(out / ENTROPY_FILE, [p for p, _ in pairs])
    write_accuracy_report(out / ACCURACY_FILE, [r for _, r in pairs])
    log.info("analyzed %d users (%d skipped)", len(pairs), len(skipped))
    return 0


# --------------------------------------------------------------------- fit


def _fit_curves(mu_points, sigma_points) -> dict:
    mu_fit = ols_linear(mu_points)
    candidates = {
        "polynomial": ols_polynomial(sigma_points, degree=2),
        "gaussian": lm_gaussian(sigma_points),
    }
    if len(sigma_points) >= 6:
        candidates["double_gaussian"] = lm_double_gaussian(sigma_points)
    else:
        log.warning("only %d intervals: skipping the 6-parameter spread candidate", len(sigma_points))
    selected = select_sigma_model(candidates)
    return {"mu": mu_fit, "sigma_candidates": candidates, "selected_sigma": selected}


def _fit_record(tag: str, fit) -> dict:
    return {
        "tag": tag,
        "params": [float(p) for p in fit.params],
        "residual_mse": fit.residual_mse,
        "converged": getattr(fit, "converged", True),
        "iterations": getattr(fit, "iterations", 0),
    }


def _curves_report(curves: dict) -> dict:
    return {
        "mu": _fit_record("linear", curves["mu"]),
        "sigma_candidates": {
            tag: _fit_record(tag, fit) for tag, fit in curves["sigma_candidates"].items()
        },
        "selected_sigma": curves["selected_sigma"],
        "sigma_mse": {tag: fit.residual_mse for tag, fit in curves["sigma_candidates"].items()},
    }


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = _out_dir(cfg)
    figures_dir = out / FIGURES_DIR

    if args.fixture:
        if args.fixture != "paper9":
            raise CommandError(f"unknown fixture {args.fixture!r} (available: paper9)", exit_code=2)
        mu_points = [(s, mu) for s, mu, _ in NINE_INTERVAL_FIXTURE]
        sigma_points = [(s, sigma) for s, _, sigma in NINE_INTERVAL_FIXTURE]
        curves = _fit_curves(mu_points, sigma_points)
        report = {
            "fixture": args.fixture,
            "binning": {"width": cfg.interval_width, "n_intervals": cfg.n_intervals},
            **_curves_report(curves),
        }
        write_json(out / FIT_REPORT_FILE, report)
        model = GaussianAccuracyModel(
            mu_fit=curves["mu"],
            sigma_fit=curves["sigma_candidates"]["gaussian"],
            interval_width=cfg.interval_width,
            n_intervals=cfg.n_intervals,
            truncated=cfg.truncated,
            provenance=_provenance(args.fixture),
        )
        atomic_write_text(out / MODEL_FILE, model.to_json())
        _emit_curve_outputs(cfg, figures_dir, mu_points, sigma_points, curves)
        log.info("fixture fit: mu.a=%.5f mu.b=%.5f", curves["mu"].a, curves["mu"].b)
        return 0

    entropy_path = Path(args.entropy) if args.entropy else out / ENTROPY_FILE
    accuracy_path = Path(args.accuracy) if args.accuracy else out / ACCURACY_FILE
    profiles = read_entropy_report(_require_input(str(entropy_path)))
    predictions = read_accuracy_report(_require_input(str(accuracy_path)))
    pairs = join_by_user(profiles, predictions)

    binning = EntropyBinning(cfg.interval_width, cfg.n_intervals)
    binned = bin_users(pairs, binning)
    if binned.spill:
        log.warning("%d users outside [0, %.2f) excluded from binning", binned.spill, binning.upper_bound)
    rows = summarize_intervals(
        binned,
        kde_grid_size=cfg.kde_grid_size,
        kde_min_users=cfg.kde_min_users,
        alpha=cfg.alpha,
    )
    write_interval_report(out / INTERVAL_FILE, rows)
    if cfg.kde_dumps:
        for fit, _ in rows:
            if fit.kde_grid:
                write_kde_dump(out / "kde" / f"interval_{fit.s:.2f}.csv", fit.kde_grid)

    fitted = [(fit, ks) for fit, ks in rows if fit.user_count > 0]
    used = [(fit, ks) for fit, ks in fitted if fit.user_count >= cfg.min_bin_size]
    if len(used) < MIN_FIT_INTERVALS:
        raise CommandError(
            f"only {len(used)} intervals have >= {cfg.min_bin_size} users; "
            f"need {MIN_FIT_INTERVALS} for the curve fits"
        )
    mu_points = [(fit.s, fit.mu) for fit, _ in used]
    sigma_points = [(fit.s, fit.sigma) for fit, _ in used]
    curves = _fit_curves(mu_points, sigma_points)

    all_mu = [(fit.s, fit.mu) for fit, _ in fitted]
    all_sigma = [(fit.s, fit.sigma) for fit, _ in fitted]
    all_curves = _fit_curves(all_mu, all_sigma) if len(fitted) >= 6 else None

    report = {
        "binning": {"width": cfg.interval_width, "n_intervals": cfg.n_intervals},
        "min_bin_size": cfg.min_bin_size,
        "bins_nonempty": len(fitted),
        "bins_used": len(used),
        "spill": binned.spill,
        **_curves_report(curves),
        "all_bins": _curves_report(all_curves) if all_curves else None,
    }
    write_json(out / FIT_REPORT_FILE, report)

    model = GaussianAccuracyModel(
        mu_fit=curves["mu"],
        sigma_fit=curves["sigma_candidates"]["gaussian"],
        interval_width=cfg.interval_width,
        n_intervals=cfg.n_intervals,
        truncated=cfg.truncated,
        provenance=_provenance(entropy_path.name),
    )
    atomic_write_text(out / MODEL_FILE, model.to_json())

    _emit_curve_outputs(cfg, figures_dir, mu_points, sigma_points, curves)
    _emit_interval_outputs(cfg, figures_dir, rows, pairs)
    log.info(
        "fit: %d/%d bins used, mu.a=%.5f, selected sigma model: %s",
        len(used),
        len(fitted),
        curves["mu"].a,
        curves["selected_sigma"],
    )
    return 0


def _emit_curve_outputs(cfg: PipelineConfig, figures_dir: Path, mu_points, sigma_points, curves) -> None:
    mu_fit = curves["mu"]
    cands = curves["sigma_candidates"]
    selected = curves["selected_sigma"]

    lines = ["s,mu_observed,mu_fitted"]
    for s, mu in mu_points:
        lines.append(f"{s:.2f},{mu:.6f},{mu_fit.a * s + mu_fit.b:.6f}")
    write_lines(figures_dir / "mu_curve.csv", lines)

    lines = ["s,sigma_observed,polynomial,gaussian,double_gaussian"]
    for s, sigma in sigma_points:
        double = f"{float(cands['double_gaussian'](s)):.6f}" if "double_gaussian" in cands else ""
        lines.append(
            f"{s:.2f},{sigma:.6f},"
            f"{float(cands['polynomial'](s)):.6f},"
            f"{float(cands['gaussian'](s)):.6f},{double}"
        )
    write_lines(figures_dir / "sigma_curves.csv", lines)

    lines = ["model,mse,selected"]
    for tag in ("polynomial", "gaussian", "double_gaussian"):
        if tag in cands:
            lines.append(f"{tag},{cands[tag].residual_mse:.9g},{'true' if tag == selected else 'false'}")
    write_lines(figures_dir / "mse_bars.csv", lines)

    if cfg.figures:
        from mobacc import figures

        figures.mu_curve(mu_points, mu_fit, figures_dir / "mu_curve.png")
        figures.sigma_curves(sigma_points, cands, selected, figures_dir / "sigma_curves.png")
        figures.mse_bars(
            {tag: fit.residual_mse for tag, fit in cands.items()}, selected, figures_dir / "mse_bars.png"
        )


def _emit_interval_outputs(cfg: PipelineConfig, figures_dir: Path, rows, pairs) -> None:
    lines = ["s,user_count"]
    for fit, _ in rows:
        lines.append(f"{fit.s:.2f},{fit.user_count}")
    write_lines(figures_dir / "entropy_hist.csv", lines)

    lines = ["s_real,accuracy"]
    for profile, prediction in sorted(pairs, key=lambda pr: pr[0].user_id):
        lines.append(f"{profile.s_real:.6f},{prediction.accuracy:.6f}")
    write_lines(figures_dir / "accuracy_scatter.csv", lines)

    with_grids = sorted(
        (fit for fit, _ in rows if fit.kde_grid),
        key=lambda fit: (-fit.user_count, fit.s),
    )[:9]
    for fit in sorted(with_grids, key=lambda fit: fit.s):
        lines = ["x,kde_density,fitted_density"]
        for x, density in fit.kde_grid:
            fitted = math.exp(-0.5 * ((x - fit.mu) / fit.sigma) ** 2) / (
                math.sqrt(2 * math.pi) * fit.sigma
            )
            lines.append(f"{x:.6f},{density:.6f},{fitted:.6f}")
        write_lines(figures_dir / f"interval_density_s{fit.s:.2f}.csv", lines)

    if cfg.figures:
        from mobacc import figures

        labels = [fit.s for fit, _ in rows]
        counts = [fit.user_count for fit, _ in rows]
        figures.entropy_histogram(labels, counts, figures_dir / "entropy_hist.png")
        figures.accuracy_scatter(
            [p.s_real for p, _ in pairs],
            [r.accuracy for _, r in pairs],
            figures_dir / "accuracy_scatter.png",
        )
        figures.interval_density_grid([fit for fit, _ in rows], figures_dir / "interval_densities.png")


# -------------------------------------------------------------------- eval


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    model_path = _require_input(args.model)
    try:
        model = GaussianAccuracyModel.from_json(model_path.read_text(encoding="utf-8"))
    except ModelDocumentError as exc:
        raise CommandError(str(exc), exit_code=2) from exc
    if args.truncation == "on":
        model = model.with_truncation(True)
    elif args.truncation == "off":
        model = model.with_truncation(False)

    if args.x is None and args.range is None:
        raise CommandError("eval needs --x or --range", exit_code=2)
    result: dict = {"s": args.s, "truncated": model.truncated}
    if args.x is not None:
        result["x"] = args.x
        result["pdf"] = model.pdf(args.x, args.s, extrapolate=cfg.extrapolate)
        result["mu"] = model.mu_of(args.s, extrapolate=cfg.extrapolate)
        result["sigma"] = model.sigma_of(args.s, extrapolate=cfg.extrapolate)
    else:
        lo, hi = args.range
        result["range"] = [lo, hi]
        result["probability"] = model.interval_probability(args.s, lo, hi, extrapolate=cfg.extrapolate)
    print(json.dumps(result))
    return 0


# ----------------------------------------------------------------- run-all


def cmd_run_all(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = _out_dir(cfg)
    rc = cmd_generate(args)
    if rc:
        return rc
    ingest_args = argparse.Namespace(**vars(args))
    ingest_args.input = str(out / TRAJECTORY_FILE)
    ingest_args.format = "trajectory"
    ingest_args.header = False
    ingest_args.roam_city = None
    rc = cmd_ingest(ingest_args)
    if rc:
        return rc
    analyze_args = argparse.Namespace(**vars(args))
    analyze_args.input = str(out / TRAJECTORY_FILE)
    rc = cmd_analyze(analyze_args)
    if rc:
        return rc
    fit_args = argparse.Namespace(**vars(args))
    fit_args.fixture = None
    fit_args.entropy = None
    fit_args.accuracy = None
    rc = cmd_fit(fit_args)
    if rc:
        return rc

    model = GaussianAccuracyModel.from_json((out / MODEL_FILE).read_text(encoding="utf-8"))
    rows = [r for r in _read_counts(out / INTERVAL_FILE) if r[1] > 0]
    s_star = max(rows, key=lambda r: r[1])[0] if rows else model.domain()[0]
    mass = model.interval_probability(s_star, 0.0, 1.0)
    print(
        json.dumps(
            {
                "s": s_star,
                "range": [0.0, 1.0],
                "probability": mass,
                "mu": model.mu_of(s_star),
                "sigma": model.sigma_of(s_star),
            }
        )
    )
    return 0


def _read_counts(interval_path: Path) -> list[tuple[float, int]]:
    return [(row["s"], row["user_count"]) for row in read_interval_report(interval_path)]


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobacc",
        description="Model next-place prediction accuracy as a function of mobility entropy.",
    )
    parser.add_argument("--version", action="version", version=f"mobacc {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML/JSON file with PipelineConfig keys")
    common.add_argument("--threads", type=int, help="worker process cap (default 1)")
    common.add_argument("--seed", type=int, help="seed for all randomized stages")
    common.add_argument("-o", "--output-dir", dest="output_dir", help="stage output directory")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", metavar="command")

    gen_opts = argparse.ArgumentParser(add_help=False)
    gen_opts.add_argument("--n-users", dest="n_users", type=int)
    gen_opts.add_argument("--seq-length", dest="seq_length", type=int)
    gen_opts.add_argument("--n-locations", dest="n_locations", type=int)
    gen_opts.add_argument("--tour-period", dest="tour_period", type=int)
    gen_opts.add_argument("--noise", nargs=2, type=float, metavar=("LO", "HI"), help="per-user noise range")

    analyze_opts = argparse.ArgumentParser(add_help=False)
    analyze_opts.add_argument("--order", type=int, help="Markov order (default 2)")
    analyze_opts.add_argument(
        "--no-backoff", dest="backoff", action="store_false", default=None,
        help="count unseen contexts as misses instead of backing off",
    )
    analyze_opts.add_argument("--split", type=float, help="chronological train fraction instead of prequential")
    analyze_opts.add_argument("--skip-bad-users", dest="skip_bad_users", action="store_true", default=None)

    fit_opts = argparse.ArgumentParser(add_help=False)
    fit_opts.add_argument("--interval-width", dest="interval_width", type=float)
    fit_opts.add_argument("--n-intervals", dest="n_intervals", type=int)
    fit_opts.add_argument("--min-bin-size", dest="min_bin_size", type=int)
    fit_opts.add_argument("--kde-grid-size", dest="kde_grid_size", type=int)
    fit_opts.add_argument("--kde-min-users", dest="kde_min_users", type=int)
    fit_opts.add_argument("--alpha", type=float, help="KS significance level")
    fit_opts.add_argument("--truncated", action="store_true", default=None, help="renormalize the model to [0,1]")
    fit_opts.add_argument("--no-figures", dest="figures", action="store_false", default=None)
    fit_opts.add_argument("--kde-dumps", dest="kde_dumps", action="store_true", default=None)

    p = sub.add_parser("generate", parents=[common, gen_opts], help="write a synthetic trajectory corpus")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("ingest", parents=[common], help="parse records, filter by active days, write trajectories")
    p.add_argument("input", help="delimited record file or trajectory file")
    p.add_argument("--format", choices=("cdr", "trajectory"), default="cdr")
    p.add_argument("--header", action="store_true", help="first input line is a header naming the columns")
    p.add_argument("--delimiter")
    p.add_argument("--timezone", help="zone for active-day dates (default UTC)")
    p.add_argument("--min-active-days", dest="min_active_days", type=int)
    p.add_argument("--collapse-duplicates", dest="collapse_duplicates", action="store_true", default=None)
    p.add_argument("--roam-city", dest="roam_city", help="keep only records with this roam_city_id")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("analyze", parents=[common, analyze_opts], help="entropy and accuracy per user")
    p.add_argument("input", help="trajectory file")
    p.add_argument("--timezone")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("fit", parents=[common, fit_opts], help="interval stats, curve fits, model JSON")
    p.add_argument("--entropy", help="entropy report (default <out>/entropy.csv)")
    p.add_argument("--accuracy", help="accuracy report (default <out>/accuracy.csv)")
    p.add_argument("--fixture", help="fit a built-in reference table instead (paper9)")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("eval", parents=[common], help="query a fitted model")
    p.add_argument("model", help="model JSON path")
    p.add_argument("--s", type=float, required=True, help="entropy interval label")
    p.add_argument("--x", type=float, help="accuracy point: print the density")
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"), help="accuracy range: print the mass")
    p.add_argument("--extrapolate", action="store_true", default=None, help="allow s off the interval grid")
    p.add_argument("--truncation", choices=("document", "on", "off"), default="document")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("run-all", parents=[common, gen_opts, analyze_opts, fit_opts], help="generate through eval")
    p.set_defaults(handler=cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except CommandError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OutOfDomainError as exc:
        log.error("%s", exc)
        return 3
    except OSError as exc:
        log.error("%s", exc)
        return 2
    except ValueError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
