"""Delimited report files and JSON documents for the pipeline stages.

All writers are atomic (temp file + rename) and byte-deterministic for a
given input, so stage outputs can be diffed across reruns.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from mobacc.entropy import EntropyProfile
from mobacc.intervals import IntervalFit, KsResult
from mobacc.markov import PredictionResult

ENTROPY_HEADER = "user_id,n,unique_locations,s_rand,s_unc,s_real"
ACCURACY_HEADER = "user_id,order,attempts,hits,accuracy"
INTERVAL_HEADER = "s,user_count,mu,sigma,fit_method,ks_D,ks_p,ks_pass"
INTERVAL_CAVEAT = (
    "# KS tests use mu/sigma estimated from the same sample, which inflates pass rates"
)


def atomic_write_text(path: Path | str, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_lines(path: Path | str, lines: Iterable[str]) -> None:
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path | str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_entropy_report(path: Path | str, profiles: Sequence[EntropyProfile]) -> None:
    lines = [ENTROPY_HEADER]
    for p in sorted(profiles, key=lambda p: p.user_id):
        lines.append(
            f"{p.user_id},{p.sequence_length},{p.n_unique_locations},"
            f"{p.s_rand:.6f},{p.s_unc:.6f},{p.s_real:.6f}"
        )
    write_lines(path, lines)


def read_entropy_report(path: Path | str) -> list[EntropyProfile]:
    out = []
    for row in _data_rows(path, ENTROPY_HEADER):
        user_id, n, unique, s_rand, s_unc, s_real = row
        out.append(
            EntropyProfile(
                user_id=user_id,
                s_rand=float(s_rand),
                s_unc=float(s_unc),
                s_real=float(s_real),
                n_unique_locations=int(unique),
                sequence_length=int(n),
            )
        )
    return out


def write_accuracy_report(path: Path | str, results: Sequence[PredictionResult]) -> None:
    lines = [ACCURACY_HEADER]
    for r in sorted(results, key=lambda r: r.user_id):
        lines.append(f"{r.user_id},{r.order},{r.attempts},{r.hits},{r.accuracy:.6f}")
    write_lines(path, lines)


def read_accuracy_report(path: Path | str) -> list[PredictionResult]:
    out = []
    for row in _data_rows(path, ACCURACY_HEADER):
        user_id, order, attempts, hits, accuracy = row
        out.append(PredictionResult(user_id, int(order), int(attempts), int(hits), float(accuracy)))
    return out


def write_interval_report(
    path: Path | str,
    rows: Sequence[tuple[IntervalFit, KsResult | None]],
) -> None:
    lines = [INTERVAL_CAVEAT, INTERVAL_HEADER]
    for fit, ks in rows:
        if fit.user_count == 0:
            lines.append(f"{fit.s:.2f},0,,,,,,")
            continue
        ks_d = f"{ks.statistic:.6f}" if ks else ""
        ks_p = f"{ks.p_value:.6f}" if ks else ""
        ks_pass = ("true" if ks.passed else "false") if ks else ""
        lines.append(
            f"{fit.s:.2f},{fit.user_count},{fit.mu:.6f},{fit.sigma:.6f},"
            f"{fit.fit_method},{ks_d},{ks_p},{ks_pass}"
        )
    write_lines(path, lines)


def read_interval_report(path: Path | str) -> list[dict]:
    out = []
    for row in _data_rows(path, INTERVAL_HEADER):
        s, user_count, mu, sigma, fit_method, ks_d, ks_p, ks_pass = row
        out.append(
            {
                "s": float(s),
                "user_count": int(user_count),
                "mu": float(mu) if mu else math.nan,
                "sigma": float(sigma) if sigma else math.nan,
                "fit_method": fit_method,
                "ks_D": float(ks_d) if ks_d else math.nan,
                "ks_p": float(ks_p) if ks_p else math.nan,
                "ks_pass": ks_pass == "true" if ks_pass else None,
            }
        )
    return out


def write_kde_dump(path: Path | str, grid: Sequence[tuple[float, float]]) -> None:
    lines = ["x,density"]
    for x, density in grid:
        lines.append(f"{x:.6f},{density:.6f}")
    write_lines(path, lines)


def _data_rows(path: Path | str, expected_header: str):
    text = Path(path).read_text(encoding="utf-8")
    width = len(expected_header.split(","))
    seen_header = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if not seen_header:
            if line != expected_header:
                raise ValueError(f"{path}: expected header {expected_header!r}, got {line!r}")
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise ValueError(f"{path}:{line_number}: expected {width} fields, got {len(parts)}")
        yield parts
    if not seen_header:
        raise ValueError(f"{path}: missing header {expected_header!r}")
