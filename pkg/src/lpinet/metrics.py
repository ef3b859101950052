"""Per-run measurements and baseline-relative figures of merit.

The CSV schema below is the contract consumed by downstream tooling (the
plots package reads nothing else). Rows are deterministic for a given run:
run ids derive from the config hash and seed, never from wall-clock time,
and floats are written with repr so rewrites are byte-identical.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .config import policy_tag
from .power import PDT_INF, PolicyKind

CSV_COLUMNS = [
    "run_id", "sqs", "policy", "pdt_ns", "alpha", "strategy", "seed",
    "energy_J", "energy_norm", "mean_lat_ns", "p99_lat_ns",
    "cold_mean_lat_ns", "hot_mean_lat_ns", "makespan_ns",
    "netlat_increase_pct", "runtime_increase_pct",
    "wake_delay_ns", "pause_events", "drops",
]

#: Ordered (state-duration index -> power attribute) used for the energy sum.
_STATE_POWER = ("p_active_w", "p_transition_w", "p_lpi_w", "p_transition_w")


class MetricsError(Exception):
    pass


@dataclass
class MetricsReport:
    run_id: str
    base_key: str
    sqs: str
    policy: str
    pdt_ns: float | None
    alpha: float | None
    strategy: str | None
    seed: int
    energy_j: float
    per_link_energy_j: dict
    energy_norm: float | None
    mean_lat_ns: float | None
    p50_lat_ns: int | None
    p99_lat_ns: int | None
    max_lat_ns: int | None
    cold_mean_lat_ns: float | None
    hot_mean_lat_ns: float | None
    makespan_ns: int
    netlat_increase_pct: float | None
    runtime_increase_pct: float | None
    wake_delay_ns: int
    pause_events: int
    pause_events_per_vc: list
    drops: int
    failed: bool = False
    fail_reason: str = ""


def _lat_stats(lats):
    """(mean, p50, p99, max) by nearest-rank on integer-ns samples."""
    if not lats:
        return None, None, None, None
    arr = np.sort(np.asarray(lats, dtype=np.int64))
    n = len(arr)
    p50 = int(arr[min(n - 1, math.ceil(0.50 * n) - 1)])
    p99 = int(arr[min(n - 1, math.ceil(0.99 * n) - 1)])
    return float(arr.mean()), p50, p99, int(arr[-1])


def finalize(raw):
    """Compute a MetricsReport from one finished run's raw state."""
    cfg = raw.cfg
    pol = cfg.policy
    per_link = {}
    watts = [getattr(cfg.power, name) for name in _STATE_POWER]
    for label, durations in raw.directions:
        per_link[label] = sum(d * w for d, w in zip(durations, watts)) * 1e-9
        if sum(durations) != raw.t_end:
            raise MetricsError(
                f"ledger not closed for {label}: {sum(durations)} != {raw.t_end}")
    mean_all, p50, p99, mx = _lat_stats(raw.latencies())
    mean_cold = _lat_stats(raw.lat_cold)[0]
    mean_hot = _lat_stats(raw.lat_hot)[0]
    makespan = raw.last_deliver - raw.first_inject if raw.delivered else 0
    is_baseline = pol.kind == PolicyKind.ALWAYS_ON
    return MetricsReport(
        run_id=raw.run_id,
        base_key=raw.base_key,
        sqs=cfg.sqs.scheme.value,
        policy=pol.kind.value,
        pdt_ns=pol.pdt_ns if pol.kind == PolicyKind.FIXED_PDT else None,
        alpha=pol.alpha if pol.kind == PolicyKind.PERFBOUND else None,
        strategy=pol.strategy.value if pol.kind == PolicyKind.PERFBOUND else None,
        seed=cfg.seed,
        energy_j=sum(per_link.values()),
        per_link_energy_j=per_link,
        energy_norm=1.0 if is_baseline else None,
        mean_lat_ns=mean_all,
        p50_lat_ns=p50,
        p99_lat_ns=p99,
        max_lat_ns=mx,
        cold_mean_lat_ns=mean_cold,
        hot_mean_lat_ns=mean_hot,
        makespan_ns=makespan,
        netlat_increase_pct=0.0 if is_baseline else None,
        runtime_increase_pct=0.0 if is_baseline else None,
        wake_delay_ns=raw.wake_delay_ns,
        pause_events=sum(raw.pause_counts),
        pause_events_per_vc=list(raw.pause_counts),
        drops=0,
    )


def relate_to_baseline(report, baseline):
    """Fill baseline-relative fields; both runs must share everything but policy."""
    if report.base_key != baseline.base_key:
        raise MetricsError(
            f"baseline mismatch: {report.run_id} has base {report.base_key}, "
            f"baseline {baseline.run_id} has {baseline.base_key}")
    if baseline.policy != PolicyKind.ALWAYS_ON.value:
        raise MetricsError(f"baseline {baseline.run_id} is not always_on")
    report.energy_norm = (report.energy_j / baseline.energy_j
                          if baseline.energy_j > 0 else None)
    if report.mean_lat_ns is not None and baseline.mean_lat_ns:
        report.netlat_increase_pct = 100.0 * (report.mean_lat_ns / baseline.mean_lat_ns - 1.0)
    if baseline.makespan_ns:
        report.runtime_increase_pct = 100.0 * (report.makespan_ns / baseline.makespan_ns - 1.0)
    return report


def _cell(value):
    if value is None:
        return ""
    if value == PDT_INF:
        return "inf"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_row(report):
    """One CSV row (list of strings) in CSV_COLUMNS order."""
    if report.failed:
        row = {c: "" for c in CSV_COLUMNS}
        row.update(run_id=report.run_id, sqs=report.sqs, policy=report.policy,
                   seed=str(report.seed), drops="failed")
        return [row[c] for c in CSV_COLUMNS]
    vals = {
        "run_id": report.run_id,
        "sqs": report.sqs,
        "policy": report.policy,
        "pdt_ns": _cell(report.pdt_ns if report.pdt_ns is None else (
            report.pdt_ns if report.pdt_ns == PDT_INF else int(report.pdt_ns))),
        "alpha": _cell(report.alpha),
        "strategy": _cell(report.strategy),
        "seed": str(report.seed),
        "energy_J": _cell(report.energy_j),
        "energy_norm": _cell(report.energy_norm),
        "mean_lat_ns": _cell(report.mean_lat_ns),
        "p99_lat_ns": _cell(report.p99_lat_ns),
        "cold_mean_lat_ns": _cell(report.cold_mean_lat_ns),
        "hot_mean_lat_ns": _cell(report.hot_mean_lat_ns),
        "makespan_ns": str(report.makespan_ns),
        "netlat_increase_pct": _cell(report.netlat_increase_pct),
        "runtime_increase_pct": _cell(report.runtime_increase_pct),
        "wake_delay_ns": str(report.wake_delay_ns),
        "pause_events": str(report.pause_events),
        "drops": str(report.drops),
    }
    return [vals[c] for c in CSV_COLUMNS]


def _atomic_write(path, data):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise MetricsError(f"cannot write {path}: {exc}") from None
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_csv(reports, path):
    """Reports sorted by run_id, one row each, LF line endings."""
    lines = [",".join(CSV_COLUMNS)]
    for rep in sorted(reports, key=lambda r: r.run_id):
        lines.append(",".join(report_row(rep)))
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_json(reports, path):
    """JSON mirror of the CSV rows (same fields, typed values)."""
    rows = []
    for rep in sorted(reports, key=lambda r: r.run_id):
        row = dict(zip(CSV_COLUMNS, report_row(rep)))
        rows.append({k: _untyped(v) for k, v in row.items()})
    _atomic_write(path, json.dumps(rows, indent=1, sort_keys=True) + "\n")
    return path


def _untyped(cell):
    if cell == "":
        return None
    if cell == "inf":
        return "inf"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)
