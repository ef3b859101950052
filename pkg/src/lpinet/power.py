"""Per-link-direction power management.

Each unidirectional link direction runs an EEE-style four-state machine:

    ACTIVE -> TO_SLEEP -> LPI -> TO_WAKE -> ACTIVE

A sleep transition never aborts: traffic arriving mid TO_SLEEP waits out the
remaining Ts and then pays the full Tw wake penalty. Idle timers implement the
power-down threshold (PDT): after the last transmission leaves an empty output
queue, the direction sleeps once `pdt` nanoseconds pass without new demand.

The PerfBound policy recomputes per-direction PDT values at every epoch
boundary from a histogram of observed idle-gap lengths: it picks the smallest
candidate threshold whose predicted added wake latency stays within a
degradation budget. Every completed idle gap is recorded (not only the gaps
that actually slept); a censored histogram could never justify lowering the
threshold below its current value.

Control (pause) frames are out of band: they neither reset idle timers nor
wake links.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum, IntEnum

from .kernel import EventKind


class PowerStateError(Exception):
    """Raised on protocol violations, e.g. transmitting on a non-ACTIVE link."""


class LinkState(IntEnum):
    ACTIVE = 0
    TO_SLEEP = 1
    LPI = 2
    TO_WAKE = 3


#: Sentinel PDT meaning "never power down" (behaves exactly like ALWAYS_ON).
PDT_INF = float("inf")


@dataclass(frozen=True)
class PowerParams:
    """Transition times and per-state power draw for one link direction.

    Defaults follow published 10GBASE-T-class EEE transition times; the power
    figures are round numbers. None of these values come from measurements of
    a specific device - they are overridable stand-ins.
    """

    ts_ns: int = 2880
    tw_ns: int = 4480
    p_active_w: float = 1.0
    p_lpi_w: float = 0.1
    p_transition_w: float = 1.0

    def validate(self):
        errs = []
        if self.ts_ns <= 0 or self.tw_ns <= 0:
            errs.append(f"ts_ns and tw_ns must be > 0 (got {self.ts_ns}, {self.tw_ns})")
        if not (0 <= self.p_lpi_w < self.p_active_w):
            errs.append(f"need 0 <= p_lpi_w < p_active_w (got {self.p_lpi_w}, {self.p_active_w})")
        if self.p_transition_w < self.p_lpi_w:
            errs.append(f"p_transition_w must be >= p_lpi_w (got {self.p_transition_w})")
        return errs


class PolicyKind(str, Enum):
    ALWAYS_ON = "always_on"
    FIXED_PDT = "fixed_pdt"
    PERFBOUND = "perfbound"


class Strategy(str, Enum):
    PERSISTENT = "persistent"
    WINDOW_RESET = "window_reset"
    DECAY = "decay"


@dataclass(frozen=True)
class PolicySpec:
    kind: PolicyKind = PolicyKind.ALWAYS_ON
    pdt_ns: float = PDT_INF  # int ns, or PDT_INF
    alpha: float = 0.001
    epoch_ns: int = 1_000_000
    strategy: Strategy = Strategy.PERSISTENT
    decay_lambda: float = 0.5
    fallback_pdt_ns: float = 1_000_000
    budget_ref: str = "wall"  # "wall" or "busy"

    def validate(self):
        errs = []
        if self.pdt_ns != PDT_INF and self.pdt_ns < 0:
            errs.append(f"pdt_ns must be >= 0 or inf (got {self.pdt_ns})")
        if not (0.0 <= self.alpha <= 1.0):
            errs.append(f"alpha must be in [0, 1] (got {self.alpha})")
        if self.epoch_ns <= 0:
            errs.append(f"epoch_ns must be > 0 (got {self.epoch_ns})")
        if not (0.0 < self.decay_lambda < 1.0):
            errs.append(f"decay_lambda must be in (0, 1) (got {self.decay_lambda})")
        if self.fallback_pdt_ns != PDT_INF and self.fallback_pdt_ns < 0:
            errs.append(f"fallback_pdt_ns must be >= 0 or inf (got {self.fallback_pdt_ns})")
        if self.budget_ref not in ("wall", "busy"):
            errs.append(f"budget_ref must be wall or busy (got {self.budget_ref!r})")
        return errs


def default_bins():
    """24 geometric bin boundaries, 256 ns to ~2.1 s at ratio 2."""
    return [256 << i for i in range(24)]


class IdleGapHistogram:
    """Binned record of idle-gap durations for one link direction.

    A gap g lands in the bin of the largest boundary <= g; gaps below the
    first boundary clamp into bin 0. Counts are weighted so the decay
    strategy can age them geometrically.
    """

    __slots__ = ("boundaries", "counts")

    def __init__(self, boundaries=None):
        self.boundaries = list(boundaries) if boundaries is not None else default_bins()
        if any(b >= c for b, c in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("bin boundaries must be strictly increasing")
        self.counts = [0.0] * len(self.boundaries)

    def record(self, gap_ns, weight=1.0):
        if gap_ns < 0:
            raise ValueError(f"negative idle gap {gap_ns}")
        i = bisect_right(self.boundaries, gap_ns) - 1
        self.counts[max(i, 0)] += weight

    def total(self):
        return sum(self.counts)

    def count_above(self, threshold_ns):
        """Total weight in bins whose boundary exceeds threshold_ns."""
        i = bisect_right(self.boundaries, threshold_ns)
        return sum(self.counts[i:])

    def apply_strategy(self, strategy, decay_lambda=0.5):
        if strategy == Strategy.PERSISTENT:
            return
        if strategy == Strategy.WINDOW_RESET:
            self.counts = [0.0] * len(self.counts)
            return
        if strategy == Strategy.DECAY:
            self.counts = [c * decay_lambda for c in self.counts]
            return
        raise ValueError(f"unknown strategy {strategy!r}")


def perfbound_compute_pdt(hist, alpha, tw_ns, epoch_wall_ns, fallback_pdt_ns,
                          budget_ref="wall", epoch_busy_ns=0):
    """Smallest candidate threshold whose predicted added latency fits the budget.

    Candidates are the histogram bin boundaries plus infinity. A gap longer
    than the threshold would have slept and paid one Tw on wake, so the
    predicted penalty at threshold t is Tw times the weight above t. An empty
    histogram gives no basis for a choice and returns the fallback.
    """
    if hist.total() == 0:
        return fallback_pdt_ns
    budget = alpha * (epoch_busy_ns if budget_ref == "busy" else epoch_wall_ns)
    for b in hist.boundaries:
        if tw_ns * hist.count_above(b) <= budget:
            return b
    return PDT_INF


class LinkPower:
    """Runtime power state for one link direction (one transmitter)."""

    __slots__ = (
        "kernel", "params", "policy", "label", "pdt", "state", "state_entered",
        "durations", "transitions", "pending_wake", "timer_ev", "idle_since",
        "sleep_end", "wake_end", "hist", "busy_ns", "epoch_busy_mark", "on_active",
    )

    def __init__(self, kernel, params, policy, label="", on_active=None,
                 record_transitions=False):
        self.kernel = kernel
        self.params = params
        self.policy = policy
        self.label = label
        self.on_active = on_active
        self.state = LinkState.ACTIVE
        self.state_entered = 0
        self.durations = [0, 0, 0, 0]  # ns per LinkState
        self.transitions = [(0, LinkState.ACTIVE)] if record_transitions else None
        self.pending_wake = False
        self.timer_ev = None
        self.idle_since = None
        self.sleep_end = 0
        self.wake_end = 0
        self.busy_ns = 0
        self.epoch_busy_mark = 0
        if policy.kind == PolicyKind.PERFBOUND:
            self.pdt = policy.fallback_pdt_ns
            self.hist = IdleGapHistogram()
        else:
            self.pdt = policy.pdt_ns if policy.kind == PolicyKind.FIXED_PDT else PDT_INF
            self.hist = None

    def start(self):
        """Call once at t=0: the direction begins idle."""
        self.idle_since = 0
        self._arm(0)

    # -- state bookkeeping -------------------------------------------------

    def _set_state(self, t, new_state):
        self.durations[self.state] += t - self.state_entered
        self.state = new_state
        self.state_entered = t
        if self.transitions is not None:
            self.transitions.append((t, new_state))

    def finalize(self, t_end):
        """Close the ledger: state durations sum exactly to t_end."""
        self.durations[self.state] += t_end - self.state_entered
        self.state_entered = t_end

    def energy_j(self):
        p = self.params
        watts = (p.p_active_w, p.p_transition_w, p.p_lpi_w, p.p_transition_w)
        return sum(d * w for d, w in zip(self.durations, watts)) * 1e-9

    # -- engine notifications ----------------------------------------------

    def on_demand(self, t):
        """First packet queued for an idle direction. Returns the wake delay
        charged to the triggering packet (0 if the link was usable)."""
        if self.idle_since is not None:
            if self.hist is not None:
                self.hist.record(t - self.idle_since)
            self.idle_since = None
        if self.timer_ev is not None:
            self.kernel.cancel(self.timer_ev)
            self.timer_ev = None
        if self.state == LinkState.ACTIVE:
            return 0
        if self.state == LinkState.LPI:
            self._set_state(t, LinkState.TO_WAKE)
            self.wake_end = t + self.params.tw_ns
            self.kernel.schedule(self.wake_end, EventKind.STATE_DONE, self._wake_done)
            return self.params.tw_ns
        if self.state == LinkState.TO_SLEEP:
            if self.pending_wake:
                return 0
            self.pending_wake = True
            return (self.sleep_end - t) + self.params.tw_ns
        return 0  # TO_WAKE: already on its way up

    def on_tx_start(self, t):
        if self.state != LinkState.ACTIVE:
            raise PowerStateError(
                f"{self.label}: transmit attempted in {self.state.name} at t={t}")

    def on_tx_complete(self, t, ser_ns, queue_empty):
        self.busy_ns += ser_ns
        if queue_empty:
            self.idle_since = t
            self._arm(t)

    # -- timers and transitions ----------------------------------------------

    def _arm(self, t):
        if self.policy.kind == PolicyKind.ALWAYS_ON or self.pdt == PDT_INF:
            return
        self.timer_ev = self.kernel.schedule(t + int(self.pdt), EventKind.IDLE_TIMER,
                                             self._timer_fire)

    def _timer_fire(self, ev):
        self.timer_ev = None
        if self.state != LinkState.ACTIVE or self.idle_since is None:
            return  # stale: demand raced in at the same timestamp
        t = ev.time
        self._set_state(t, LinkState.TO_SLEEP)
        self.sleep_end = t + self.params.ts_ns
        self.kernel.schedule(self.sleep_end, EventKind.STATE_DONE, self._sleep_done)

    def _sleep_done(self, ev):
        t = ev.time
        self._set_state(t, LinkState.LPI)
        if self.pending_wake:
            self.pending_wake = False
            self._set_state(t, LinkState.TO_WAKE)
            self.wake_end = t + self.params.tw_ns
            self.kernel.schedule(self.wake_end, EventKind.STATE_DONE, self._wake_done)

    def _wake_done(self, ev):
        self._set_state(ev.time, LinkState.ACTIVE)
        if self.on_active is not None:
            self.on_active()

    # -- PerfBound epoch maintenance ---------------------------------------

    def epoch_update(self, t):
        """Recompute this direction's PDT, then age the histogram."""
        if self.hist is None:
            return
        pol = self.policy
        busy_in_epoch = self.busy_ns - self.epoch_busy_mark
        self.epoch_busy_mark = self.busy_ns
        self.pdt = perfbound_compute_pdt(
            self.hist, pol.alpha, self.params.tw_ns, pol.epoch_ns,
            pol.fallback_pdt_ns, pol.budget_ref, busy_in_epoch)
        self.hist.apply_strategy(pol.strategy, pol.decay_lambda)
        # Re-aim a pending idle timer at the new threshold.
        if self.timer_ev is not None:
            self.kernel.cancel(self.timer_ev)
            self.timer_ev = None
        if self.state == LinkState.ACTIVE and self.idle_since is not None and self.pdt != PDT_INF:
            fire_at = max(t, self.idle_since + int(self.pdt))
            self.timer_ev = self.kernel.schedule(fire_at, EventKind.IDLE_TIMER,
                                                 self._timer_fire)
