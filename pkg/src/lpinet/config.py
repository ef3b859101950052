"""Run configuration: flat `key = value` text with dotted sections.

Blank lines and `#` comments are ignored. Unknown keys are rejected and every
diagnostic carries the line number and key. The sentinel value `inf` for
`policy.pdt_ns` (and `policy.fallback_pdt_ns`) encodes a fixed policy that
never powers down, which is trace-identical to `always_on`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace

from . import workload as wl
from .fabric import MIN_PACKET, serialization_ns
from .power import PDT_INF, PolicyKind, PolicySpec, PowerParams, Strategy
from .sqs import Scheme


class ConfigError(Exception):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass(frozen=True)
class TopologyConfig:
    kind: str = "fat_tree"  # fat_tree | single_switch
    k: int = 8
    levels: int = 2
    n: int = 16             # single_switch endpoint count
    rate_bps: int = 10_000_000_000
    prop_ns: int = 100
    max_endpoints: int = 4096

    def n_endpoints(self):
        return self.k**self.levels if self.kind == "fat_tree" else self.n


@dataclass(frozen=True)
class FabricConfig:
    nvc: int = 4
    buffer_bytes: int = 16384
    xoff_bytes: int = 12288
    xon_bytes: int = 8192
    mtu: int = 1500


@dataclass(frozen=True)
class SqsSettings:
    scheme: Scheme = Scheme.ONE_Q
    nvc: int = 0  # 0 = use fabric.nvc


@dataclass(frozen=True)
class WorkloadConfig:
    kind: str = wl.PHASED_HOTSPOT
    message_bytes: int = 1500
    messages_per_burst: int = 8
    compute_ns: int = 1_500_000
    jitter_pct: float = 2.0
    hot_fraction: float = 0.25
    hot_dst: int = 0
    load: float = 0.7
    budget_messages: int = 0  # total messages; 0 = 24 per endpoint
    horizon_ns: int = 0       # 0 = run until the budget is delivered
    trace_path: str = ""


@dataclass(frozen=True)
class RunConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    fabric: FabricConfig = field(default_factory=FabricConfig)
    power: PowerParams = field(default_factory=PowerParams)
    policy: PolicySpec = field(default_factory=PolicySpec)
    sqs: SqsSettings = field(default_factory=SqsSettings)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    seed: int = 1
    out_dir: str = ""

    def sqs_nvc(self):
        return self.sqs.nvc if self.sqs.nvc > 0 else self.fabric.nvc


# -- key registry ------------------------------------------------------------

def _parse_pdt(s):
    if s == "inf":
        return PDT_INF
    return int(s)


def _fmt(v):
    if v == PDT_INF:
        return "inf"
    if isinstance(v, Scheme) or isinstance(v, PolicyKind) or isinstance(v, Strategy):
        return v.value
    if isinstance(v, float):
        return repr(v)
    return str(v)


_KEYS = {
    "topology.kind": ("topology", "kind", str),
    "topology.k": ("topology", "k", int),
    "topology.levels": ("topology", "levels", int),
    "topology.n": ("topology", "n", int),
    "topology.rate_bps": ("topology", "rate_bps", int),
    "topology.prop_ns": ("topology", "prop_ns", int),
    "topology.max_endpoints": ("topology", "max_endpoints", int),
    "fabric.nvc": ("fabric", "nvc", int),
    "fabric.buffer_bytes": ("fabric", "buffer_bytes", int),
    "fabric.xoff_bytes": ("fabric", "xoff_bytes", int),
    "fabric.xon_bytes": ("fabric", "xon_bytes", int),
    "fabric.mtu": ("fabric", "mtu", int),
    "power.ts_ns": ("power", "ts_ns", int),
    "power.tw_ns": ("power", "tw_ns", int),
    "power.p_active_w": ("power", "p_active_w", float),
    "power.p_lpi_w": ("power", "p_lpi_w", float),
    "power.p_transition_w": ("power", "p_transition_w", float),
    "policy.kind": ("policy", "kind", PolicyKind),
    "policy.pdt_ns": ("policy", "pdt_ns", _parse_pdt),
    "policy.alpha": ("policy", "alpha", float),
    "policy.epoch_ns": ("policy", "epoch_ns", int),
    "policy.strategy": ("policy", "strategy", Strategy),
    "policy.decay_lambda": ("policy", "decay_lambda", float),
    "policy.fallback_pdt_ns": ("policy", "fallback_pdt_ns", _parse_pdt),
    "policy.budget_ref": ("policy", "budget_ref", str),
    "sqs.scheme": ("sqs", "scheme", Scheme),
    "sqs.nvc": ("sqs", "nvc", int),
    "workload.kind": ("workload", "kind", str),
    "workload.message_bytes": ("workload", "message_bytes", int),
    "workload.messages_per_burst": ("workload", "messages_per_burst", int),
    "workload.compute_ns": ("workload", "compute_ns", int),
    "workload.jitter_pct": ("workload", "jitter_pct", float),
    "workload.hot_fraction": ("workload", "hot_fraction", float),
    "workload.hot_dst": ("workload", "hot_dst", int),
    "workload.load": ("workload", "load", float),
    "workload.budget_messages": ("workload", "budget_messages", int),
    "workload.horizon_ns": ("workload", "horizon_ns", int),
    "workload.trace_path": ("workload", "trace_path", str),
    "run.seed": ("run", "seed", int),
    "run.out_dir": ("run", "out_dir", str),
}

_SECTIONS = {
    "topology": TopologyConfig,
    "fabric": FabricConfig,
    "power": PowerParams,
    "policy": PolicySpec,
    "sqs": SqsSettings,
    "workload": WorkloadConfig,
}


def parse_kv_text(text, path="<config>"):
    """Lines of `key = value` -> {key: (value-string, line-no)}, with diagnostics."""
    values = {}
    problems = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            problems.append(f"{path}:{no}: expected 'key = value', got {body!r}")
            continue
        key, _, val = body.partition("=")
        key = key.strip()
        val = val.strip()
        if key in values:
            problems.append(f"{path}:{no}: duplicate key {key!r}")
            continue
        values[key] = (val, no)
    return values, problems


def parse_config(text, path="<config>"):
    """Parse and fully validate a run config; raises ConfigError on any problem."""
    values, problems = parse_kv_text(text, path)
    overrides = {name: {} for name in _SECTIONS}
    overrides["run"] = {}
    for key, (val, no) in values.items():
        spec = _KEYS.get(key)
        if spec is None:
            problems.append(f"{path}:{no}: unknown key {key!r}")
            continue
        section, fname, parse = spec
        try:
            overrides[section][fname] = parse(val)
        except (ValueError, KeyError):
            problems.append(f"{path}:{no}: bad value for {key}: {val!r}")
    if problems:
        raise ConfigError(problems)
    cfg = RunConfig(
        topology=TopologyConfig(**overrides["topology"]),
        fabric=FabricConfig(**overrides["fabric"]),
        power=PowerParams(**overrides["power"]),
        policy=PolicySpec(**overrides["policy"]),
        sqs=SqsSettings(**overrides["sqs"]),
        workload=WorkloadConfig(**overrides["workload"]),
        seed=overrides["run"].get("seed", 1),
        out_dir=overrides["run"].get("out_dir", ""),
    )
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path=path)


def pause_headroom_bytes(topo, fabric):
    """Worst-case bytes a VC buffer can absorb after emitting pause."""
    window_ns = 2 * topo.prop_ns + serialization_ns(fabric.mtu, topo.rate_bps)
    return -(-topo.rate_bps * window_ns // (8 * 1_000_000_000))


def validate_config(cfg):
    errs = []
    t = cfg.topology
    if t.kind not in ("fat_tree", "single_switch"):
        errs.append(f"topology.kind: unknown kind {t.kind!r}")
    elif t.kind == "fat_tree":
        if t.k < 2 or t.levels < 1:
            errs.append(f"topology.k/levels: need k >= 2 and levels >= 1 (got {t.k}, {t.levels})")
        elif t.k**t.levels > t.max_endpoints:
            errs.append(f"topology.k/levels: {t.k}^{t.levels} endpoints exceeds "
                        f"topology.max_endpoints = {t.max_endpoints}")
    elif t.n < 2:
        errs.append(f"topology.n: need n >= 2 (got {t.n})")
    if t.rate_bps <= 0:
        errs.append(f"topology.rate_bps: must be > 0 (got {t.rate_bps})")
    if t.prop_ns < 0:
        errs.append(f"topology.prop_ns: must be >= 0 (got {t.prop_ns})")

    f = cfg.fabric
    if f.nvc < 1:
        errs.append(f"fabric.nvc: must be >= 1 (got {f.nvc})")
    if f.mtu < MIN_PACKET:
        errs.append(f"fabric.mtu: must be >= {MIN_PACKET} (got {f.mtu})")
    if f.xon_bytes >= f.xoff_bytes:
        errs.append(f"fabric.xon_bytes ({f.xon_bytes}) must be < fabric.xoff_bytes "
                    f"({f.xoff_bytes})")
    if not errs:
        margin = pause_headroom_bytes(t, f)
        if f.xoff_bytes > f.buffer_bytes - margin:
            errs.append(
                f"fabric.xoff_bytes ({f.xoff_bytes}) must leave pause headroom: "
                f"max {f.buffer_bytes - margin} for buffer_bytes={f.buffer_bytes}, "
                f"headroom={margin}")

    errs.extend(f"power.{e}" for e in cfg.power.validate())
    errs.extend(f"policy.{e}" for e in cfg.policy.validate())

    if cfg.sqs.nvc < 0 or cfg.sqs.nvc > f.nvc:
        errs.append(f"sqs.nvc ({cfg.sqs.nvc}) must be in [0, fabric.nvc={f.nvc}]")

    w = cfg.workload
    n_end = t.n_endpoints()
    if w.kind not in wl.KINDS:
        errs.append(f"workload.kind: unknown kind {w.kind!r}")
    if w.message_bytes < MIN_PACKET:
        errs.append(f"workload.message_bytes: must be >= {MIN_PACKET} (got {w.message_bytes})")
    if w.messages_per_burst < 1:
        errs.append(f"workload.messages_per_burst: must be >= 1 (got {w.messages_per_burst})")
    if w.compute_ns < 0:
        errs.append(f"workload.compute_ns: must be >= 0 (got {w.compute_ns})")
    if not (0.0 <= w.jitter_pct <= 100.0):
        errs.append(f"workload.jitter_pct: must be in [0, 100] (got {w.jitter_pct})")
    if not (0.0 <= w.hot_fraction <= 1.0):
        errs.append(f"workload.hot_fraction: must be in [0, 1] (got {w.hot_fraction})")
    if not (0 <= w.hot_dst < n_end):
        errs.append(f"workload.hot_dst: must be in [0, {n_end}) (got {w.hot_dst})")
    if not (0.0 < w.load <= 1.0):
        errs.append(f"workload.load: must be in (0, 1] (got {w.load})")
    if w.budget_messages < 0 or w.horizon_ns < 0:
        errs.append("workload.budget_messages and workload.horizon_ns must be >= 0")
    if w.kind == wl.TRACE and not w.trace_path:
        errs.append("workload.trace_path: required when workload.kind = trace")

    if cfg.seed < 0:
        errs.append(f"run.seed: must be >= 0 (got {cfg.seed})")
    return errs


# -- canonical form and fingerprints -----------------------------------------

def to_flat(cfg):
    """Canonical flat key/value view of a config (strings, sorted keys)."""
    sections = {
        "topology": cfg.topology, "fabric": cfg.fabric, "power": cfg.power,
        "policy": cfg.policy, "sqs": cfg.sqs, "workload": cfg.workload,
    }
    flat = {}
    for key, (section, fname, _) in _KEYS.items():
        if section == "run":
            continue
        flat[key] = _fmt(getattr(sections[section], fname))
    flat["run.seed"] = str(cfg.seed)
    return dict(sorted(flat.items()))


def fingerprint(cfg, include_policy=True):
    flat = to_flat(cfg)
    if not include_policy:
        flat = {k: v for k, v in flat.items() if not k.startswith("policy.")}
    blob = "\n".join(f"{k}={v}" for k, v in flat.items())
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def policy_tag(policy):
    """Short human-readable policy label used in run ids and reports."""
    if policy.kind == PolicyKind.ALWAYS_ON:
        return "ao"
    if policy.kind == PolicyKind.FIXED_PDT:
        pdt = "inf" if policy.pdt_ns == PDT_INF else str(int(policy.pdt_ns))
        return f"pdt{pdt}"
    return f"pb{policy.alpha:g}-{policy.strategy.value}"


def run_id(cfg):
    return f"{cfg.sqs.scheme.value}_{policy_tag(cfg.policy)}_s{cfg.seed}_{fingerprint(cfg)}"


def with_policy(cfg, policy):
    return replace(cfg, policy=policy)


def with_seed(cfg, seed):
    return replace(cfg, seed=seed)


def with_sqs(cfg, scheme):
    return replace(cfg, sqs=replace(cfg.sqs, scheme=scheme))
