"""Simulation engine: wires topology, ports, power managers and workload
injection over the event kernel, and collects raw run state.

Event flow for one hop (sender tx port -> receiver rx port):

  t0        transmission starts; the sender's link goes busy
  t0+P      PACKET_HEAD: receiver claims buffer bytes, may emit pause
  t0+S      TX_COMPLETE: sender pops its FIFO, may emit resume, link idles
  t0+S+P    RX_COMPLETE: packet is forwardable downstream (or delivered)

Demand accounting: every tx port counts the packets sitting in local buffers
that route through it. The count going 0 -> 1 closes the port's idle gap and
wakes a sleeping link; the count reaching 0 at TX_COMPLETE starts the idle
timer. Waking is driven by queued work, not by pause state: a port with only
paused traffic stays awake waiting for the resume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import topology as topo_mod
from . import workload as wl_mod
from .config import RunConfig, fingerprint, run_id
from .fabric import Packet, PauseFrame, TxPort, VcBuffer, serialization_ns
from .kernel import EventKind, Kernel
from .power import LinkPower, LinkState, PolicyKind
from .sqs import map_vc

_UNBOUNDED = 1 << 62


class SimulationError(Exception):
    pass


class RxPort:
    """Receiving side of one link direction; buffers=None marks an endpoint sink."""

    __slots__ = ("node_id", "port_no", "buffers", "upstream")

    def __init__(self, node_id, port_no, buffers, upstream):
        self.node_id = node_id
        self.port_no = port_no
        self.buffers = buffers
        self.upstream = upstream


@dataclass
class RawRunResult:
    """Everything metrics need, straight off one finished run."""

    cfg: RunConfig
    run_id: str
    base_key: str
    n_endpoints: int
    injected: int = 0
    delivered: int = 0
    expected: int = 0
    messages: int = 0
    first_inject: int = -1
    last_deliver: int = 0
    t_end: int = 0
    lat_hot: list = field(default_factory=list)
    lat_cold: list = field(default_factory=list)
    wake_delay_ns: int = 0
    pause_counts: list = field(default_factory=list)
    directions: list = field(default_factory=list)  # (label, [ns per state])
    trace: list | None = None
    dispatched: int = 0

    def latencies(self):
        return self.lat_hot + self.lat_cold


class Simulation:
    """One deterministic run of a RunConfig."""

    def __init__(self, cfg: RunConfig, record_trace=False, record_transitions=False):
        self.cfg = cfg
        t = cfg.topology
        if t.kind == "fat_tree":
            self.topo = topo_mod.build_fat_tree(t.k, t.levels, t.rate_bps, t.prop_ns,
                                                t.max_endpoints)
        else:
            self.topo = topo_mod.build_single_switch(t.n, t.rate_bps, t.prop_ns)
        self.routing = topo_mod.build_routing(self.topo)
        self.n_endpoints = len(self.topo.endpoints)
        self.nvc = cfg.fabric.nvc

        self.record_trace = record_trace
        self.trace = [] if record_trace else None
        self.record_transitions = record_transitions

        self._build_injections()
        self.kernel = Kernel(max_dispatch=1_000_000 + 500 * len(self.injections))
        self._build_ports()

        # run state
        self.injected = 0
        self.delivered = 0
        self.expected = 0
        self.stop_on_budget = False
        self.first_inject = -1
        self.last_deliver = 0
        self.lat_hot = []
        self.lat_cold = []
        self.wake_delay_ns = 0
        self.pause_counts = [0] * self.nvc
        self.transit = set()

    # -- construction --------------------------------------------------------

    def _build_injections(self):
        cfg = self.cfg
        w = cfg.workload
        if w.kind == wl_mod.TRACE:
            inj, msgs = wl_mod.load_trace(w.trace_path, self.n_endpoints, cfg.fabric.mtu)
            if w.horizon_ns > 0:
                inj = [i for i in inj if i.t_ns < w.horizon_ns]
        else:
            inj, msgs = wl_mod.generate(w, self.n_endpoints, cfg.seed, cfg.fabric.mtu,
                                        cfg.topology.rate_bps)
        self.injections = inj
        self.messages = msgs

    def _make_buffers(self, emits_pause):
        f = self.cfg.fabric
        if emits_pause:
            return [VcBuffer(vc, f.buffer_bytes, f.xoff_bytes, f.xon_bytes, True)
                    for vc in range(self.nvc)]
        return [VcBuffer(vc, _UNBOUNDED, _UNBOUNDED, 0, False) for vc in range(self.nvc)]

    def _build_ports(self):
        topo = self.topo
        cfg = self.cfg
        endpoint_ids = set(topo.endpoints)
        self.tx_ports = []       # creation order: link order x (a->b, b->a)
        self.switch_out = {}     # (switch, port) -> TxPort
        self.switch_in = {}      # (switch, port) -> RxPort
        self.endpoint_out = {}   # endpoint -> TxPort

        for ln in topo.links:
            for tx_node, tx_port_no, rx_node, rx_port_no in (
                (ln.a_node, ln.a_port, ln.b_node, ln.b_port),
                (ln.b_node, ln.b_port, ln.a_node, ln.a_port),
            ):
                label = f"{tx_node}.{tx_port_no}->{rx_node}.{rx_port_no}"
                tx = TxPort(label, tx_node, tx_port_no, ln.rate_bps, ln.prop_ns, self.nvc)
                tx.power = LinkPower(self.kernel, cfg.power, cfg.policy, label,
                                     on_active=self._wake_cb(tx),
                                     record_transitions=self.record_transitions)
                if rx_node in endpoint_ids:
                    rx = RxPort(rx_node, rx_port_no, None, tx)
                else:
                    rx = RxPort(rx_node, rx_port_no, self._make_buffers(True), tx)
                    for buf in rx.buffers:
                        buf.upstream = tx
                    self.switch_in[(rx_node, rx_port_no)] = rx
                tx.rx_peer = rx
                self.tx_ports.append(tx)
                if tx_node in endpoint_ids:
                    bufs = self._make_buffers(False)
                    tx.candidates = bufs
                    self.endpoint_out[tx_node] = tx
                else:
                    self.switch_out[(tx_node, tx_port_no)] = tx

        # Switch arbitration candidates: every (input port, vc) pair, scanned
        # input-major so a single-input port degenerates to plain VC round-robin.
        by_switch = {}
        for (sw, port), rx in sorted(self.switch_in.items()):
            by_switch.setdefault(sw, []).extend(rx.buffers)
        for (sw, port), tx in sorted(self.switch_out.items()):
            tx.candidates = by_switch[sw]

    def _wake_cb(self, tx):
        def cb():
            self._try_start(tx)
        return cb

    # -- event handlers --------------------------------------------------------

    def _schedule_injections(self):
        horizon = self.cfg.workload.horizon_ns
        scheduled = 0
        for inj in self.injections:
            if horizon > 0 and inj.t_ns >= horizon:
                continue
            self.kernel.schedule(inj.t_ns, EventKind.INJECT, self._on_inject, inj)
            scheduled += 1
        self.expected = scheduled

    def _on_inject(self, ev):
        inj = ev.data
        t = ev.time
        vc = map_vc(self.cfg.sqs.scheme, inj.src, inj.dst, self.n_endpoints,
                    self.cfg.sqs_nvc())
        pkt = Packet(self.injected, inj.src, inj.dst, inj.size, vc, inj.flow, t)
        self.injected += 1
        if self.first_inject < 0:
            self.first_inject = t
        out = self.endpoint_out[inj.src]
        pkt.next_out = out
        buf = out.candidates[vc]
        buf.claim(pkt.size)  # unbounded source queue, never pauses
        buf.fifo.append(pkt)
        out.queued += 1
        if out.queued == 1:
            self.wake_delay_ns += out.power.on_demand(t)
        self._try_start(out)

    def _try_start(self, out):
        if out.busy or out.power.state != LinkState.ACTIVE:
            return
        buf = out.arbitrate()
        if buf is None:
            return
        pkt = buf.fifo[0]
        t = self.kernel.now
        out.power.on_tx_start(t)
        out.busy = True
        ser = serialization_ns(pkt.size, out.rate_bps)
        self.kernel.schedule(t + out.prop_ns, EventKind.PACKET_HEAD,
                             self._on_head, (out.rx_peer, pkt))
        self.kernel.schedule(t + ser, EventKind.TX_COMPLETE,
                             self._on_tx_complete, (out, buf, pkt, ser))
        self.kernel.schedule(t + ser + out.prop_ns, EventKind.RX_COMPLETE,
                             self._on_rx_complete, (out.rx_peer, pkt))

    def _on_head(self, ev):
        rx, pkt = ev.data
        if rx.buffers is None:
            return  # endpoint sink consumes at line rate
        buf = rx.buffers[pkt.vc]
        need_pause = buf.claim(pkt.size, where=f"rx {rx.node_id}.{rx.port_no}")
        if need_pause:
            self.pause_counts[pkt.vc] += 1
            frame = PauseFrame(pkt.vc, False, ev.time)
            self.kernel.schedule(ev.time + rx.upstream.prop_ns, EventKind.PAUSE_CTRL,
                                 self._on_pause, (rx.upstream, frame))

    def _on_tx_complete(self, ev):
        out, buf, pkt, ser = ev.data
        t = ev.time
        out.busy = False
        head = buf.fifo.popleft()
        assert head is pkt, "FIFO order violated"
        self.transit.add(pkt)
        if buf.release(pkt.size) and buf.upstream is not None:
            frame = PauseFrame(buf.vc, True, t)
            self.kernel.schedule(t + buf.upstream.prop_ns, EventKind.PAUSE_CTRL,
                                 self._on_pause, (buf.upstream, frame))
        out.queued -= 1
        out.power.on_tx_complete(t, ser, out.queued == 0)
        if out.queued > 0:
            self._try_start(out)
        if buf.fifo:
            # the uncovered head may route through a different output
            nxt = buf.fifo[0].next_out
            if nxt is not out:
                self._try_start(nxt)

    def _on_pause(self, ev):
        tx, frame = ev.data
        tx.remote_paused[frame.vc] = not frame.resume
        if frame.resume:
            self._try_start(tx)

    def _on_rx_complete(self, ev):
        rx, pkt = ev.data
        t = ev.time
        self.transit.discard(pkt)
        if rx.buffers is None:
            pkt.t_deliver = t
            self.delivered += 1
            self.last_deliver = t
            lat = t - pkt.t_inject
            (self.lat_hot if pkt.flow == "hot" else self.lat_cold).append(lat)
            if self.trace is not None:
                self.trace.append((pkt.id, t))
            if self.stop_on_budget and self.delivered == self.expected:
                self.kernel.stop()
            return
        buf = rx.buffers[pkt.vc]
        buf.fifo.append(pkt)
        port = self.routing[rx.node_id][pkt.dst]
        out = self.switch_out[(rx.node_id, port)]
        pkt.next_out = out
        out.queued += 1
        if out.queued == 1:
            self.wake_delay_ns += out.power.on_demand(t)
        self._try_start(out)

    def _on_epoch(self, ev):
        for tx in self.tx_ports:
            tx.power.epoch_update(ev.time)
        self.kernel.schedule(ev.time + self.cfg.policy.epoch_ns, EventKind.EPOCH,
                             self._on_epoch)

    # -- run -------------------------------------------------------------------

    def run(self):
        cfg = self.cfg
        # Injections are scheduled before the idle timers arm, so same-time
        # ties always dispatch workload demand before a power-down decision.
        self._schedule_injections()
        for tx in self.tx_ports:
            tx.power.start()
        self.stop_on_budget = cfg.workload.horizon_ns == 0
        if cfg.policy.kind == PolicyKind.PERFBOUND:
            self.kernel.schedule(cfg.policy.epoch_ns, EventKind.EPOCH, self._on_epoch)

        if self.stop_on_budget:
            self.kernel.run_until(1 << 62)
            if self.delivered != self.expected:
                raise SimulationError(
                    f"run stalled: delivered {self.delivered} of {self.expected}")
            t_end = self.kernel.now
        else:
            self.kernel.run_until(cfg.workload.horizon_ns)
            t_end = cfg.workload.horizon_ns

        for tx in self.tx_ports:
            tx.power.finalize(t_end)
        self._check_conservation()

        res = RawRunResult(
            cfg=cfg,
            run_id=run_id(cfg),
            base_key=fingerprint(cfg, include_policy=False),
            n_endpoints=self.n_endpoints,
            injected=self.injected,
            delivered=self.delivered,
            expected=self.expected,
            messages=self.messages,
            first_inject=self.first_inject,
            last_deliver=self.last_deliver,
            t_end=t_end,
            lat_hot=self.lat_hot,
            lat_cold=self.lat_cold,
            wake_delay_ns=self.wake_delay_ns,
            pause_counts=self.pause_counts,
            directions=[(tx.label, list(tx.power.durations)) for tx in self.tx_ports],
            trace=self.trace,
            dispatched=self.kernel.dispatched,
        )
        return res

    def _check_conservation(self):
        buffered = sum(len(buf.fifo) for tx in self.endpoint_out.values()
                       for buf in tx.candidates)
        buffered += sum(len(buf.fifo) for rx in self.switch_in.values()
                        for buf in rx.buffers)
        in_flight = buffered + len(self.transit)
        if self.injected != self.delivered + in_flight:
            raise SimulationError(
                f"packet conservation violated: injected={self.injected}, "
                f"delivered={self.delivered}, in_flight={in_flight}")


def simulate(cfg, record_trace=False, record_transitions=False):
    """Build and run one simulation; returns the RawRunResult."""
    sim = Simulation(cfg, record_trace=record_trace,
                     record_transitions=record_transitions)
    return sim.run()
