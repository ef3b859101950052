"""Lossless switched fabric building blocks.

Input-buffered model: every receiving port keeps one FIFO buffer per virtual
channel, flow-controlled with byte thresholds (xoff/xon) toward its upstream
transmitter. Each transmitting port runs a single round-robin arbiter over
the (input buffer, VC) candidates whose head packet routes through it.

Store-and-forward timing on a link at `rate` with propagation delay P:
a transmission starting at t0 serializes for S = ceil(size*8/rate) ns
(rounded up to the integer-ns clock), the head reaches the far side at
t0+P, and the packet is fully received at t0+S+P. Buffer space downstream
is claimed at head arrival; the sender's buffer releases the packet at
t0+S. Occupancy above capacity is a protocol violation, never a drop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .power import LinkState

#: Smallest legal packet, bytes.
MIN_PACKET = 64

HOT = "hot"
COLD = "cold"


class LosslessViolation(Exception):
    """A VC buffer was pushed past its capacity."""


def serialization_ns(size_bytes, rate_bps):
    """Wire time for size_bytes at rate_bps, rounded up to whole ns."""
    return -(-size_bytes * 8 * 1_000_000_000 // rate_bps)


class Packet:
    __slots__ = ("id", "src", "dst", "size", "vc", "flow", "t_inject", "t_deliver",
                 "next_out")

    def __init__(self, pid, src, dst, size, vc, flow, t_inject):
        self.id = pid
        self.src = src
        self.dst = dst
        self.size = size
        self.vc = vc
        self.flow = flow
        self.t_inject = t_inject
        self.t_deliver = -1
        self.next_out = None

    def __repr__(self):
        return (f"Packet({self.id}, {self.src}->{self.dst}, {self.size}B, vc={self.vc},"
                f" {self.flow})")


@dataclass(frozen=True)
class PauseFrame:
    """Out-of-band per-VC flow-control frame (pause or resume)."""

    vc: int
    resume: bool
    t_sent: int


class VcBuffer:
    """One VC's FIFO at a receiving port.

    `claim` accounts bytes at head arrival and reports when the pause
    threshold is crossed; `release` accounts departure bytes and reports when
    the resume threshold is reached. Endpoint injection queues reuse this
    class with emits_pause=False and an effectively unbounded capacity.
    """

    __slots__ = ("vc", "capacity", "xoff", "xon", "occupancy", "fifo", "paused",
                 "emits_pause", "upstream")

    def __init__(self, vc, capacity, xoff, xon, emits_pause=True):
        self.vc = vc
        self.capacity = capacity
        self.xoff = xoff
        self.xon = xon
        self.occupancy = 0
        self.fifo = deque()
        self.paused = False
        self.emits_pause = emits_pause
        self.upstream = None  # TxPort the pause/resume frames go to

    def claim(self, size, where=""):
        """Account an arriving packet's bytes; True if a pause must be sent."""
        self.occupancy += size
        if self.occupancy > self.capacity:
            raise LosslessViolation(
                f"{where}: vc{self.vc} occupancy {self.occupancy} exceeds "
                f"capacity {self.capacity}")
        if self.emits_pause and not self.paused and self.occupancy >= self.xoff:
            self.paused = True
            return True
        return False

    def release(self, size):
        """Account a departing packet's bytes; True if a resume must be sent."""
        self.occupancy -= size
        if self.paused and self.occupancy <= self.xon:
            self.paused = False
            return True
        return False


class TxPort:
    """Transmitting side of one link direction, with its output arbiter."""

    __slots__ = ("label", "node_id", "port_no", "rate_bps", "prop_ns", "candidates",
                 "rr", "remote_paused", "busy", "queued", "power", "rx_peer")

    def __init__(self, label, node_id, port_no, rate_bps, prop_ns, nvc):
        self.label = label
        self.node_id = node_id
        self.port_no = port_no
        self.rate_bps = rate_bps
        self.prop_ns = prop_ns
        self.candidates = []       # VcBuffer list, filled during wiring
        self.rr = 0
        self.remote_paused = [False] * nvc
        self.busy = False
        self.queued = 0            # packets in local buffers routed through here
        self.power = None          # LinkPower, attached during wiring
        self.rx_peer = None        # RxPort on the far side

    def arbitrate(self):
        """Round-robin pick over candidate buffers; None when nothing can go.

        Eligible: non-empty FIFO whose head routes through this port and whose
        VC is not paused by the downstream receiver. A sleeping link does not
        block selection (the caller wakes it); a busy link does.
        """
        if self.busy:
            return None
        cands = self.candidates
        n = len(cands)
        for off in range(n):
            i = self.rr + off
            if i >= n:
                i -= n
            buf = cands[i]
            if not buf.fifo:
                continue
            if self.remote_paused[buf.vc]:
                continue
            if buf.fifo[0].next_out is not self:
                continue
            self.rr = i + 1 if i + 1 < n else 0
            return buf
        return None

    def ready_to_send(self):
        return self.power.state == LinkState.ACTIVE and not self.busy
