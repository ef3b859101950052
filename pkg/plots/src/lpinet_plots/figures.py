"""Grouped-bar figures from sweep result CSVs.

This package is a pure consumer of the results-file contract: the CSV header
below is the whole interface, and nothing here imports the simulator. Every
row becomes one bar; bars are grouped on the x axis by power policy (fixed
PDT values ascending, then PerfBound variants) and colored by queuing scheme.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

EXPECTED_COLUMNS = [
    "run_id", "sqs", "policy", "pdt_ns", "alpha", "strategy", "seed",
    "energy_J", "energy_norm", "mean_lat_ns", "p99_lat_ns",
    "cold_mean_lat_ns", "hot_mean_lat_ns", "makespan_ns",
    "netlat_increase_pct", "runtime_increase_pct",
    "wake_delay_ns", "pause_events", "drops",
]


class PlotsError(Exception):
    pass


@dataclass(frozen=True)
class FigureSpec:
    metric: str                 # CSV column plotted on the y axis
    title: str
    filename: str               # output name without extension
    group_by: str = "sqs"       # bar color/legend column
    x_by: str = "policy"        # group label derives from policy columns


DEFAULT_SPECS = (
    FigureSpec("energy_J", "Energy consumed (J)", "energy"),
    FigureSpec("netlat_increase_pct", "Net latency increase (%)", "netlat_increase"),
    FigureSpec("runtime_increase_pct", "Runtime increase (%)", "runtime_increase"),
)


@dataclass(frozen=True)
class RenderResult:
    path: str
    metric: str
    n_bars: int
    n_groups: int


def load_rows(csv_path):
    """Rows from a results CSV, validated against the column contract."""
    try:
        with open(csv_path, "r", encoding="ascii", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in EXPECTED_COLUMNS if c not in header]
            if missing:
                raise PlotsError(
                    f"{csv_path}: missing column(s) {', '.join(missing)}; "
                    f"available: {', '.join(header)}")
            rows = list(reader)
    except OSError as exc:
        raise PlotsError(f"cannot read {csv_path}: {exc}") from None
    if not rows:
        raise PlotsError(f"{csv_path}: no data rows")
    return rows


def group_label(row):
    policy = row["policy"]
    if policy == "fixed_pdt":
        return f"pdt={row['pdt_ns']}"
    if policy == "perfbound":
        return f"pbound a={row['alpha']} {row['strategy']}"
    return policy


def _group_key(row):
    policy = row["policy"]
    if policy == "fixed_pdt":
        pdt = row["pdt_ns"]
        return (1, math.inf if pdt == "inf" else int(pdt), "")
    if policy == "perfbound":
        return (2, float(row["alpha"]), row["strategy"])
    return (0, 0, policy)


def _metric_value(row, metric):
    cell = row[metric]
    if cell in ("", "inf", "failed"):
        return 0.0
    try:
        return float(cell)
    except ValueError:
        raise PlotsError(f"non-numeric {metric} value {cell!r} in row "
                         f"{row['run_id']}") from None


def render(csv_path, out_dir, specs=DEFAULT_SPECS, fmt="png"):
    """Render one grouped-bar figure per spec; returns RenderResult per figure."""
    if fmt not in ("png", "svg"):
        raise PlotsError(f"unsupported format {fmt!r} (use png or svg)")
    rows = load_rows(csv_path)
    import os
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for spec in specs:
        if spec.metric not in EXPECTED_COLUMNS:
            raise PlotsError(
                f"unknown metric column {spec.metric!r}; available: "
                f"{', '.join(EXPECTED_COLUMNS)}")
        results.append(_render_one(rows, spec, out_dir, fmt))
    return results


def _render_one(rows, spec, out_dir, fmt):
    groups = {}
    for row in rows:
        groups.setdefault((_group_key(row), group_label(row)), []).append(row)
    ordered = sorted(groups.items(), key=lambda kv: kv[0][0])
    schemes = sorted({row[spec.group_by] for row in rows})
    colors = plt.get_cmap("tab10")

    fig, ax = plt.subplots(figsize=(1.8 + 1.3 * len(ordered), 4.0))
    width = 0.8 / max(len(schemes), 1)
    n_bars = 0
    seen_scheme = set()
    for gi, ((_, label), members) in enumerate(ordered):
        members = sorted(members, key=lambda r: r[spec.group_by])
        for row in members:
            si = schemes.index(row[spec.group_by])
            x = gi + (si - (len(schemes) - 1) / 2) * width
            ax.bar(x, _metric_value(row, spec.metric), width=width * 0.92,
                   color=colors(si % 10),
                   label=row[spec.group_by] if row[spec.group_by] not in seen_scheme
                   else None)
            seen_scheme.add(row[spec.group_by])
            n_bars += 1
    ax.set_xticks(range(len(ordered)))
    ax.set_xticklabels([label for (_, label), _ in ordered], rotation=20, ha="right")
    ax.set_ylabel(spec.title)
    ax.set_title(spec.title)
    ax.legend(title=spec.group_by, fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    path = f"{out_dir}/{spec.filename}.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    return RenderResult(path=path, metric=spec.metric, n_bars=n_bars,
                        n_groups=len(ordered))
