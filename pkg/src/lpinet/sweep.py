"""Sweep expansion and the experiment runner.

A sweep names value lists for the sweepable keys (sqs, policy, pdt_ns, alpha,
strategy, seed). Expansion is a cartesian product in that fixed key order,
capped by max_runs, and every non-always_on run is paired with one always_on
baseline per (sqs, seed) so baseline-relative metrics are always computable.
Baselines run first; runs share nothing mutable, so any worker count yields
identical results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .config import (ConfigError, fingerprint, parse_kv_text, run_id, with_policy,
                     with_seed, with_sqs)
from .engine import simulate
from .metrics import MetricsReport, finalize, relate_to_baseline, write_csv, write_json
from .power import PolicyKind, PolicySpec, Strategy
from .sqs import Scheme


@dataclass(frozen=True)
class SweepSpec:
    sqs: tuple = ()
    policy: tuple = ()
    pdt_ns: tuple = ()
    alpha: tuple = ()
    strategy: tuple = ()
    seed: tuple = ()
    max_runs: int = 512


def _parse_list(val, parse):
    return tuple(parse(part.strip()) for part in val.split(",") if part.strip())


_SWEEP_KEYS = {
    "sqs": lambda v: _parse_list(v, Scheme),
    "policy": lambda v: _parse_list(v, PolicyKind),
    "pdt_ns": lambda v: _parse_list(v, lambda s: float("inf") if s == "inf" else int(s)),
    "alpha": lambda v: _parse_list(v, float),
    "strategy": lambda v: _parse_list(v, Strategy),
    "seed": lambda v: _parse_list(v, int),
    "max_runs": lambda v: int(v),
}


def parse_sweep(text, path="<sweep>"):
    values, problems = parse_kv_text(text, path)
    kwargs = {}
    for key, (val, no) in values.items():
        parse = _SWEEP_KEYS.get(key)
        if parse is None:
            problems.append(f"{path}:{no}: unknown sweep key {key!r}")
            continue
        try:
            kwargs[key] = parse(val)
        except (ValueError, KeyError):
            problems.append(f"{path}:{no}: bad value for {key}: {val!r}")
    if problems:
        raise ConfigError(problems)
    return SweepSpec(**kwargs)


def load_sweep(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep(fh.read(), path=path)


_BASELINE = PolicySpec(kind=PolicyKind.ALWAYS_ON)


def _policy_variants(base_policy, sweep):
    kinds = list(sweep.policy)
    if not kinds:
        if sweep.pdt_ns:
            kinds.append(PolicyKind.FIXED_PDT)
        if sweep.alpha or sweep.strategy:
            kinds.append(PolicyKind.PERFBOUND)
        if not kinds:
            kinds = [base_policy.kind]
    variants = []
    for kind in kinds:
        if kind == PolicyKind.ALWAYS_ON:
            variants.append(_BASELINE)
        elif kind == PolicyKind.FIXED_PDT:
            for pdt in sweep.pdt_ns or (base_policy.pdt_ns,):
                variants.append(replace(base_policy, kind=kind, pdt_ns=pdt))
        else:
            for alpha in sweep.alpha or (base_policy.alpha,):
                for strat in sweep.strategy or (base_policy.strategy,):
                    variants.append(replace(base_policy, kind=kind, alpha=alpha,
                                            strategy=strat))
    return variants


def expand_sweep(base, sweep):
    """Ordered run list: deduplicated always_on baselines first, then dependents."""
    variants = _policy_variants(base.policy, sweep)
    need_baseline = any(v.kind != PolicyKind.ALWAYS_ON for v in variants)
    baselines, dependents, seen = [], [], set()
    for scheme in sweep.sqs or (base.sqs.scheme,):
        for seed in sweep.seed or (base.seed,):
            cfg0 = with_sqs(with_seed(base, seed), scheme)
            if need_baseline:
                bcfg = with_policy(cfg0, _BASELINE)
                rid = run_id(bcfg)
                if rid not in seen:
                    seen.add(rid)
                    baselines.append(bcfg)
            for variant in variants:
                cfg = with_policy(cfg0, variant)
                rid = run_id(cfg)
                if rid in seen:
                    continue
                seen.add(rid)
                (baselines if variant.kind == PolicyKind.ALWAYS_ON
                 else dependents).append(cfg)
    runs = baselines + dependents
    if len(runs) > sweep.max_runs:
        raise ConfigError([f"sweep expands to {len(runs)} runs, over max_runs="
                           f"{sweep.max_runs}"])
    return runs


def _run_worker(cfg):
    """Executed in a worker process; never raises."""
    try:
        return ("ok", finalize(simulate(cfg)))
    except Exception as exc:  # noqa: BLE001 - per-run failures must not kill the sweep
        return ("fail", _failed_report(cfg, f"{type(exc).__name__}: {exc}"))


def _failed_report(cfg, reason):
    return MetricsReport(
        run_id=run_id(cfg), base_key=fingerprint(cfg, include_policy=False),
        sqs=cfg.sqs.scheme.value, policy=cfg.policy.kind.value, pdt_ns=None,
        alpha=None, strategy=None, seed=cfg.seed, energy_j=0.0,
        per_link_energy_j={}, energy_norm=None, mean_lat_ns=None, p50_lat_ns=None,
        p99_lat_ns=None, max_lat_ns=None, cold_mean_lat_ns=None,
        hot_mean_lat_ns=None, makespan_ns=0, netlat_increase_pct=None,
        runtime_increase_pct=None, wake_delay_ns=0, pause_events=0,
        pause_events_per_vc=[], drops=0, failed=True, fail_reason=reason)


def _run_wave(configs, workers):
    if workers <= 1 or len(configs) <= 1:
        return [_run_worker(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_worker, configs, chunksize=1))


@dataclass
class SweepResult:
    reports: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (run_id, reason)
    csv_path: str = ""
    json_path: str = ""

    @property
    def exit_code(self):
        return 2 if self.failures else 0


def execute(runs, workers, out_dir, csv_name="results.csv", json_name="results.json"):
    """Run everything (baselines first), attach baseline-relative metrics, write files."""
    baselines = [c for c in runs if c.policy.kind == PolicyKind.ALWAYS_ON]
    dependents = [c for c in runs if c.policy.kind != PolicyKind.ALWAYS_ON]
    result = SweepResult()
    by_base_key = {}
    for wave in (baselines, dependents):
        for status, rep in _run_wave(wave, workers):
            result.reports.append(rep)
            if status == "fail":
                result.failures.append((rep.run_id, rep.fail_reason))
            elif rep.policy == PolicyKind.ALWAYS_ON.value:
                by_base_key[rep.base_key] = rep
    for rep in result.reports:
        if rep.failed or rep.policy == PolicyKind.ALWAYS_ON.value:
            continue
        base = by_base_key.get(rep.base_key)
        if base is not None:
            relate_to_baseline(rep, base)
    result.csv_path = write_csv(result.reports, f"{out_dir}/{csv_name}")
    result.json_path = write_json(result.reports, f"{out_dir}/{json_name}")
    return result
