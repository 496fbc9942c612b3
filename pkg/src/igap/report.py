"""Delimited and plot-data serialization of metric results.

All numbers print with 6 significant digits; ``percent=True`` multiplies
error/accuracy quantities by 100 at this formatting layer only (window
parameters and grid positions stay as fractions, so the CSV column always
means the same thing). Output text is byte-stable for identical inputs.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from .metrics import DecompositionReport, IGapCurve, IGapResult

DECOMPOSE_HEADER = (
    "checkpoint_id,seed,step,source,target,e_train,g_inter,g_intra,e,transfer_gap"
)
GAP_HEADER = "checkpoint_id,seed,step,source,target,transfer_gap"
IGAP_HEADER = "source,target,seed,e_prime,epsilon,igap,witness,qualifying_count"
BASELINE_HEADER = "source,target,metric,n_pairs,score,direction"
TDR_HEADER = "source,metric,tdr_accuracy,n_targets,gold_ties,predicted_ties"


def format_value(value: float | int | None, percent: bool = False) -> str:
    """Render one numeric cell; absent values render empty."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return "%.6g" % (value * 100.0 if percent else value)


def _csv(header: str, rows: Sequence[Sequence[str]]) -> str:
    lines = [header]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def decompose_csv(
    reports: Sequence[DecompositionReport], percent: bool = False
) -> str:
    rows = [
        (
            r.checkpoint_id,
            str(r.seed),
            str(r.step),
            r.source_language,
            r.target_language,
            format_value(r.e_train, percent),
            format_value(r.g_inter, percent),
            format_value(r.g_intra, percent),
            format_value(r.e, percent),
            format_value(r.transfer_gap, percent),
        )
        for r in reports
    ]
    return _csv(DECOMPOSE_HEADER, rows)


def gap_csv(reports: Sequence[DecompositionReport], percent: bool = False) -> str:
    rows = [
        (
            r.checkpoint_id,
            str(r.seed),
            str(r.step),
            r.source_language,
            r.target_language,
            format_value(r.transfer_gap, percent),
        )
        for r in reports
    ]
    return _csv(GAP_HEADER, rows)


def igap_csv(
    results: Sequence[tuple[str, str, IGapResult]], percent: bool = False
) -> str:
    """One row per (source, target, result); seed column is blank for
    results pooled across seeds."""
    rows = [
        (
            source,
            target,
            "" if r.seed is None else str(r.seed),
            format_value(r.e_prime),
            format_value(r.epsilon),
            format_value(r.value, percent),
            r.witness or "",
            str(r.qualifying_count),
        )
        for source, target, r in results
    ]
    return _csv(IGAP_HEADER, rows)


def igap_curve_csv(
    curves: Sequence[tuple[str, str, IGapCurve]], percent: bool = False
) -> str:
    flat = [
        (source, target, point)
        for source, target, curve in curves
        for point in curve.points
    ]
    return igap_csv(flat, percent)


def baseline_csv(
    rows_in: Sequence[tuple[str, str, str, int, float, str]]
) -> str:
    """Rows of (source, target, metric, n_pairs, score, direction).

    Similarity scores are not error fractions, so the percent flag never
    applies here.
    """
    rows = [
        (source, target, metric, str(n_pairs), format_value(score), direction)
        for source, target, metric, n_pairs, score, direction in rows_in
    ]
    return _csv(BASELINE_HEADER, rows)


def tdr_accuracy_csv(
    rows_in: Sequence[tuple[str, str, float, int, int, int]], percent: bool = False
) -> str:
    rows = [
        (
            source,
            metric,
            format_value(value, percent),
            str(n_targets),
            str(gold_ties),
            str(predicted_ties),
        )
        for source, metric, value, n_targets, gold_ties, predicted_ties in rows_in
    ]
    return _csv(TDR_HEADER, rows)


def accuracy_matrix_csv(
    languages: Sequence[str],
    cells: Mapping[tuple[str, str], float],
    percent: bool = False,
) -> str:
    """Square matrix of per-direction accuracies; the diagonal and missing
    directions are blank."""
    header = ",".join(["source"] + list(languages))
    rows = []
    for src in languages:
        row = [src]
        for tgt in languages:
            value = None if src == tgt else cells.get((src, tgt))
            row.append(format_value(value, percent))
        rows.append(",".join(row))
    return "\n".join([header] + rows) + "\n"


def plot_json(
    series: Sequence[tuple[str, Sequence[tuple[float, float | None]]]],
    x_label: str,
    y_label: str,
    percent: bool = False,
) -> str:
    """Serialize named point series; holes are null y values.

    The percent flag scales y only: x positions are grid coordinates
    (training error targets or step numbers), not reported metrics.
    """
    payload = {
        "series": [
            {
                "name": name,
                "points": [
                    [x, None if y is None else (y * 100.0 if percent else y)]
                    for x, y in points
                ],
            }
            for name, points in series
        ],
        "x_label": x_label,
        "y_label": y_label if not percent else f"{y_label} (%)",
    }
    return json.dumps(payload, sort_keys=True) + "\n"


def curve_plot_json(
    curves: Sequence[tuple[str, IGapCurve]], percent: bool = False
) -> str:
    series = [
        (name, [(p.e_prime, p.value) for p in curve.points])
        for name, curve in curves
    ]
    return plot_json(series, "target training error", "igap", percent)


DECOMPOSE_COMPONENTS = ("e_train", "g_inter", "g_intra", "e")


def decompose_series(
    reports: Sequence[DecompositionReport], prefix: str = ""
) -> list[tuple[str, list[tuple[float, float | None]]]]:
    """Per-(seed, component) step series from decompositions, canonically
    named and ordered for plot output."""
    by_seed: dict[int, list[DecompositionReport]] = {}
    for r in reports:
        by_seed.setdefault(r.seed, []).append(r)
    series = []
    for seed in sorted(by_seed):
        seed_reports = sorted(by_seed[seed], key=lambda r: r.step)
        for component in DECOMPOSE_COMPONENTS:
            series.append(
                (
                    f"{prefix}{component} seed={seed}",
                    [
                        (float(r.step), getattr(r, component))
                        for r in seed_reports
                    ],
                )
            )
        if all(r.transfer_gap is not None for r in seed_reports):
            series.append(
                (
                    f"{prefix}transfer_gap seed={seed}",
                    [(float(r.step), r.transfer_gap) for r in seed_reports],
                )
            )
    return series


def decompose_plot_json(
    reports_by_direction: Sequence[tuple[str, Sequence[DecompositionReport]]],
    percent: bool = False,
) -> str:
    series: list[tuple[str, list[tuple[float, float | None]]]] = []
    for name, reports in reports_by_direction:
        prefix = f"{name} " if name else ""
        series.extend(decompose_series(reports, prefix))
    return plot_json(series, "training step", "error", percent)


def gap_plot_json(
    reports_by_direction: Sequence[tuple[str, Sequence[DecompositionReport]]],
    percent: bool = False,
) -> str:
    series = []
    for name, reports in reports_by_direction:
        by_seed: dict[int, list[DecompositionReport]] = {}
        for r in reports:
            if r.transfer_gap is not None:
                by_seed.setdefault(r.seed, []).append(r)
        for seed in sorted(by_seed):
            ordered = sorted(by_seed[seed], key=lambda r: r.step)
            series.append(
                (
                    f"{name} seed={seed}",
                    [(float(r.step), r.transfer_gap) for r in ordered],
                )
            )
    return plot_json(series, "training step", "transfer gap", percent)
