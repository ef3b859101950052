"""Event-driven simulation core: integer-ns clock, ordered event queue, seeded streams.

One Kernel instance drives one single-threaded run. Reproducibility contract:
identical inputs produce the identical dispatch sequence, because ties at equal
timestamps are broken by a sequence number assigned at schedule time.
"""

from __future__ import annotations

import heapq
import random
from enum import IntEnum


class SimTimeError(Exception):
    """An event was scheduled before the current clock (configuration bug)."""


class EventKind(IntEnum):
    PACKET_HEAD = 0   # first bit of a packet reaches the receiving port
    RX_COMPLETE = 1   # last bit received; packet is buffered or delivered
    TX_COMPLETE = 2   # sender finished serializing onto the link
    IDLE_TIMER = 3    # power-down timer expired on a link direction
    STATE_DONE = 4    # link power transition (sleep/wake) completed
    PAUSE_CTRL = 5    # PFC pause/resume frame reaches the transmitter
    INJECT = 6        # workload hands a packet to an endpoint
    EPOCH = 7         # policy epoch boundary


class Event:
    """Scheduled occurrence; doubles as the cancellation handle."""

    __slots__ = ("time", "seq", "kind", "data", "fn")

    def __init__(self, time, seq, kind, data, fn):
        self.time = time
        self.seq = seq
        self.kind = kind
        self.data = data
        self.fn = fn

    def __repr__(self):
        state = "live" if self.fn is not None else "cancelled"
        return f"Event(t={self.time}, seq={self.seq}, {self.kind.name}, {state})"


class Kernel:
    """Priority event queue over an integer-nanosecond simulated clock."""

    def __init__(self, max_dispatch=None):
        self.now = 0
        self.dispatched = 0
        self.max_dispatch = max_dispatch
        self._heap = []
        self._next_seq = 0
        self._stopped = False

    def schedule(self, time, kind, fn, data=None):
        """Queue fn(event) at `time`; returns the event as a cancellation handle."""
        if time < self.now:
            raise SimTimeError(f"schedule at t={time} before clock t={self.now}")
        ev = Event(time, self._next_seq, kind, data, fn)
        self._next_seq += 1
        heapq.heappush(self._heap, (time, ev.seq, ev))
        return ev

    @staticmethod
    def cancel(ev):
        """Cancelled events stay in the heap but are skipped at dispatch."""
        ev.fn = None

    def stop(self):
        """Abandon remaining events; run_until returns after the current handler."""
        self._stopped = True

    def pending(self):
        return sum(1 for _, _, ev in self._heap if ev.fn is not None)

    def run_until(self, limit):
        """Dispatch every live event with time <= limit in (time, seq) order.

        The clock only advances through dispatched events: it ends at the last
        dispatched timestamp (never past `limit`), or stays put if nothing ran.
        """
        heap = self._heap
        while heap and not self._stopped:
            time, _, ev = heap[0]
            if time > limit:
                break
            heapq.heappop(heap)
            if ev.fn is None:
                continue
            self.now = time
            self.dispatched += 1
            if self.max_dispatch is not None and self.dispatched > self.max_dispatch:
                raise RuntimeError(f"event budget exceeded ({self.max_dispatch})")
            ev.fn(ev)
        return self.now


def stream(seed, label):
    """Independent reproducible generator for (global seed, entity label).

    String seeding goes through hashlib inside random.Random, so streams do not
    depend on PYTHONHASHSEED and are stable across processes and platforms.
    """
    return random.Random(f"{seed}/{label}")
