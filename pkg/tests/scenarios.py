"""Shared helpers for driving the production engine in small scenarios."""

from dataclasses import replace

from lpinet import (PDT_INF, PolicyKind, PolicySpec, PowerParams, RunConfig,
                    Scheme, Simulation)
from lpinet.config import (FabricConfig, SqsSettings, TopologyConfig,
                           WorkloadConfig)

RATE_10G = 10_000_000_000


def write_trace(path, records):
    """records: iterable of (t_ns, src, dst, size)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for rec in records:
            fh.write(" ".join(str(x) for x in rec) + "\n")
    return str(path)


def single_link_config(trace_path, pdt_ns, ts_ns, tw_ns, horizon_ns,
                       rate_bps=RATE_10G, prop_ns=100):
    """Two endpoints behind one switch; all traffic 0 -> 1 from a trace.

    Buffers are oversized so flow control never pauses the observed link and
    the endpoint-0 egress behaves as an isolated transmitter.
    """
    return RunConfig(
        topology=TopologyConfig(kind="single_switch", n=2, rate_bps=rate_bps,
                                prop_ns=prop_ns),
        fabric=FabricConfig(nvc=1, buffer_bytes=1 << 22, xoff_bytes=1 << 21,
                            xon_bytes=1 << 20, mtu=1500),
        power=PowerParams(ts_ns=ts_ns, tw_ns=tw_ns),
        policy=PolicySpec(kind=PolicyKind.FIXED_PDT, pdt_ns=pdt_ns),
        sqs=SqsSettings(scheme=Scheme.ONE_Q),
        workload=WorkloadConfig(kind="trace", trace_path=trace_path,
                                horizon_ns=horizon_ns),
        seed=1,
    )


def egress_transitions(cfg):
    """Run cfg and return endpoint 0's egress power-state transition list."""
    sim = Simulation(cfg, record_transitions=True)
    sim.run()
    tx = sim.endpoint_out[0]
    return list(tx.power.transitions)


def always_on(cfg):
    return replace(cfg, policy=PolicySpec(kind=PolicyKind.ALWAYS_ON))
