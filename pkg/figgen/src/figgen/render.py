"""Plot the three normalized rate curves from a fig3 CSV, optionally
overlaying per-p simulation means from retro-sim CSV rows.

Rendering is deterministic: fixed figure geometry, a pinned SVG hash salt,
and no date metadata in the output files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import csv
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIG3_COLUMNS = ("p", "joint_rate", "erasure_alone", "retro_alone_upper")
OVERLAY_COLUMNS = ("trial", "d", "p", "joint_at_p")

CURVES = (
    ("joint_rate", "solid", "joint rate (retro + erasure)"),
    ("erasure_alone", "dashed", "erasure alone"),
    ("retro_alone_upper", "dotted", "retro alone (upper bound)"),
)


class ColumnError(ValueError):
    """A required CSV column is missing; `column` names it."""

    def __init__(self, path, column: str):
        self.column = column
        super().__init__(f"{path}: missing required column {column!r}")


@dataclass
class RenderResult:
    """Arrays actually plotted, for inspection and tests."""

    p: list[float]
    curves: dict[str, list[float]]
    overlay_points: list[tuple[float, float]]
    legend_labels: list[str]
    out_image: Path


def _read_csv(path) -> tuple[list[dict], list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return rows, reader.fieldnames or []


def _require_columns(path, fieldnames, wanted) -> None:
    for column in wanted:
        if column not in fieldnames:
            raise ColumnError(path, column)


def load_fig3(path) -> tuple[list[float], dict[str, list[float]]]:
    rows, fieldnames = _read_csv(path)
    _require_columns(path, fieldnames, FIG3_COLUMNS)
    rows.sort(key=lambda r: float(r["p"]))
    p = [float(r["p"]) for r in rows]
    curves = {
        name: [float(r[name]) for r in rows] for name, _, _ in CURVES
    }
    return p, curves


def load_overlay(path) -> list[tuple[float, float]]:
    """Mean joint rate per distinct p, normalized by log2(d)."""
    rows, fieldnames = _read_csv(path)
    _require_columns(path, fieldnames, OVERLAY_COLUMNS)
    grouped: dict[float, list[float]] = {}
    for row in rows:
        if row["trial"] == "summary":
            continue
        d = int(row["d"])
        norm = math.log2(d)
        grouped.setdefault(float(row["p"]), []).append(
            float(row["joint_at_p"]) / norm
        )
    return sorted((p, sum(v) / len(v)) for p, v in grouped.items())


def render_fig3(fig3_csv, overlay_csv=None, out_image="fig3.png") -> RenderResult:
    """Write the plot to `out_image` (.png or .svg) and return what was drawn."""
    out_image = Path(out_image)
    if out_image.suffix.lower() not in (".png", ".svg"):
        raise ValueError(f"unsupported image extension {out_image.suffix!r}")
    p, curves = load_fig3(fig3_csv)
    overlay_points = load_overlay(overlay_csv) if overlay_csv else []

    with plt.rc_context({"svg.hashsalt": "figgen"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
        try:
            for name, style, label in CURVES:
                ax.plot(p, curves[name], linestyle=style, color="black", label=label)
            if overlay_points:
                ax.scatter(
                    [q for q, _ in overlay_points],
                    [v for _, v in overlay_points],
                    marker="o",
                    color="tab:red",
                    zorder=3,
                    label="simulation mean",
                )
            ax.set_xlabel("p")
            ax.set_ylabel("rate / log2(d)")
            ax.set_xlim(0.0, 1.0)
            legend = ax.legend(loc="upper right")
            labels = [t.get_text() for t in legend.get_texts()]
            fig.savefig(out_image, metadata={"Date": None})
        finally:
            plt.close(fig)

    return RenderResult(
        p=p,
        curves=curves,
        overlay_points=overlay_points,
        legend_labels=labels,
        out_image=out_image,
    )
