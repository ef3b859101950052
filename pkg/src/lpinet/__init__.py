"""lpinet: discrete-event simulation of lossless switched fabrics combining
EEE-style link power management with static queuing schemes over virtual
channels and per-VC priority flow control."""

from .config import (ConfigError, FabricConfig, RunConfig, SqsSettings,
                     TopologyConfig, WorkloadConfig, load_config, parse_config,
                     run_id, with_policy, with_seed, with_sqs)
from .engine import RawRunResult, Simulation, SimulationError, simulate
from .fabric import LosslessViolation, Packet, serialization_ns
from .kernel import EventKind, Kernel, SimTimeError, stream
from .metrics import MetricsReport, finalize, relate_to_baseline, write_csv, write_json
from .power import (PDT_INF, IdleGapHistogram, LinkPower, LinkState, PolicyKind,
                    PolicySpec, PowerParams, Strategy, perfbound_compute_pdt)
from .sqs import Scheme, SqsError, map_vc
from .sweep import SweepSpec, execute, expand_sweep, parse_sweep
from .topology import (Topology, TopologyError, build_fat_tree, build_routing,
                       build_single_switch, route_next_hop)

__version__ = "0.1.0"
