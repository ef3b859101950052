"""Synthetic traffic generation and trace ingestion.

Phased traffic alternates per-endpoint compute windows (no injection) with
bursts of messages, which is the pattern that gives link power management
something to exploit. Hotspot traffic skews destinations toward one endpoint
to provoke congestion. Messages above the MTU are segmented into MTU-sized
packets injected back to back.

Trace format: plain text, one record per line, `t_ns src dst size_bytes`,
decimal integers separated by single spaces, LF line endings, `#` comments.
Records must be sorted by injection time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fabric import COLD, HOT, MIN_PACKET, serialization_ns
from .kernel import stream


class WorkloadError(Exception):
    pass


PHASED = "phased"
HOTSPOT = "hotspot"
PHASED_HOTSPOT = "phased_hotspot"
TRACE = "trace"
KINDS = (PHASED, HOTSPOT, PHASED_HOTSPOT, TRACE)


@dataclass(frozen=True)
class Injection:
    t_ns: int
    src: int
    dst: int
    size: int
    flow: str


def segment(size, mtu):
    """Split a message into packet sizes within [MIN_PACKET, mtu]."""
    sizes = []
    left = size
    while left > mtu:
        sizes.append(mtu)
        left -= mtu
    sizes.append(max(left, MIN_PACKET))
    return sizes


def _share(total, n, i):
    return total // n + (1 if i < total % n else 0)


def _pick_dst(rng, src, n, hot_frac, hot_dst, hotspotted):
    if hotspotted and src != hot_dst and rng.random() < hot_frac:
        return hot_dst
    d = rng.randrange(n - 1)
    return d + 1 if d >= src else d


def generate(wl, n_endpoints, seed, mtu, rate_bps):
    """Expand a synthetic workload into a sorted injection list.

    Returns (injections, message_count). Injections are sorted by time with
    ties in endpoint order, so scheduling them in list order is deterministic.
    """
    budget = wl.budget_messages if wl.budget_messages > 0 else 24 * n_endpoints
    horizon = wl.horizon_ns if wl.horizon_ns > 0 else None
    hotspotted = wl.kind in (HOTSPOT, PHASED_HOTSPOT)
    out = []
    messages = 0
    for src in range(n_endpoints):
        rng = stream(seed, f"wl/{src}")
        quota = _share(budget, n_endpoints, src)
        if wl.kind in (PHASED, PHASED_HOTSPOT):
            times = _phased_times(wl, rng, quota)
        elif wl.kind == HOTSPOT:
            ser = serialization_ns(wl.message_bytes, rate_bps)
            gap = max(1, math.ceil(ser / wl.load))
            times = [k * gap for k in range(quota)]
        else:
            raise WorkloadError(f"cannot synthesize workload kind {wl.kind!r}")
        for t in times:
            if horizon is not None and t >= horizon:
                break
            dst = _pick_dst(rng, src, n_endpoints, wl.hot_fraction, wl.hot_dst, hotspotted)
            flow = HOT if (hotspotted and dst == wl.hot_dst) else COLD
            messages += 1
            for size in segment(wl.message_bytes, mtu):
                out.append(Injection(t, src, dst, size, flow))
    out.sort(key=lambda inj: inj.t_ns)  # stable: ties stay in endpoint order
    return out, messages


def _phased_times(wl, rng, quota):
    """Injection timestamps for one endpoint: compute first, then a burst."""
    times = []
    t = 0
    left = quota
    delta = wl.compute_ns * wl.jitter_pct / 100.0
    while left > 0:
        t += int(rng.uniform(wl.compute_ns - delta, wl.compute_ns + delta))
        burst = min(wl.messages_per_burst, left)
        times.extend([t] * burst)
        left -= burst
    return times


def load_trace(path, n_endpoints, mtu):
    """Parse and validate a trace file into an injection list.

    Returns (injections, message_count). Raises WorkloadError naming the
    offending line on any malformed or out-of-range record.
    """
    out = []
    messages = 0
    last_t = 0
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise WorkloadError(f"cannot read trace {path}: {exc}") from None
    for no, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 4:
            raise WorkloadError(f"{path}:{no}: expected 't_ns src dst size_bytes', got {body!r}")
        try:
            t, src, dst, size = (int(p) for p in parts)
        except ValueError:
            raise WorkloadError(f"{path}:{no}: non-integer field in {body!r}") from None
        if t < 0:
            raise WorkloadError(f"{path}:{no}: negative timestamp {t}")
        if t < last_t:
            raise WorkloadError(f"{path}:{no}: timestamps not sorted ({t} after {last_t})")
        last_t = t
        if not (0 <= src < n_endpoints) or not (0 <= dst < n_endpoints):
            raise WorkloadError(
                f"{path}:{no}: endpoint out of range (src={src}, dst={dst}, N={n_endpoints})")
        if src == dst:
            raise WorkloadError(f"{path}:{no}: src == dst == {src}")
        if size < MIN_PACKET:
            raise WorkloadError(f"{path}:{no}: size {size} below minimum {MIN_PACKET}")
        messages += 1
        for seg in segment(size, mtu):
            out.append(Injection(t, src, dst, seg, COLD))
    return out, messages
