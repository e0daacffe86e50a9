"""Run-time event recording, latency samples, and percentile summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


class Recorder:
    """Collects ordered protocol events and metric samples during a run.

    ``events`` is the oracle-facing log: session operations and apply
    events only, appended in simulation order. Everything else is
    metric bookkeeping.
    """

    def __init__(self):
        self.events: list = []          # oracle/trace records (tuples)
        self.visibility: list = []      # (origin_dc, dest_dc, origin_partition,
                                        #  install_t, arrival_t, apply_t)
        self.ops: list = []             # (dc, kind, partition, issue_t, latency, hops)
        self.emission_seq: dict = {}    # origin dc -> [op_id, ...] in emission order
        self.emission_events: dict = {} # origin dc -> [(t, count), ...]
        self.arrivals: dict = {}        # (dest_dc, op_id) -> first payload arrival t
        self.installs: dict = {}        # op_id -> (install_t, origin_dc, origin_partition)
        self.applied_pairs: set = set() # (dest_dc, op_id) seen apply (dedup guard)

    # -- oracle / trace log --------------------------------------------

    def log_update(self, t: int, client: str, idx: int, dc: int, key: int):
        self.events.append(("update", t, client, idx, dc, key))

    def log_read(self, t: int, client: str, idx: int, dc: int, key: int, writer):
        self.events.append(("read", t, client, idx, dc, key, writer))

    def log_install(self, t: int, dc: int, op_id):
        self.events.append(("install", t, dc, op_id[0], op_id[1]))

    def log_apply(self, t: int, dc: int, op_id):
        self.events.append(("apply", t, dc, op_id[0], op_id[1]))

    # -- metrics ---------------------------------------------------------

    def note_install(self, op_id, t: int, origin_dc: int, origin_partition: int):
        self.installs[op_id] = (t, origin_dc, origin_partition)

    def note_arrival(self, dest_dc: int, op_id, t: int):
        self.arrivals.setdefault((dest_dc, op_id), t)

    def note_apply(self, dest_dc: int, op_id, t: int):
        if (dest_dc, op_id) in self.applied_pairs:
            return
        self.applied_pairs.add((dest_dc, op_id))
        install_t, origin_dc, origin_partition = self.installs[op_id]
        arrival_t = self.arrivals.get((dest_dc, op_id), install_t)
        self.visibility.append(
            (origin_dc, dest_dc, origin_partition, install_t, arrival_t, t))

    def note_op(self, dc: int, kind: str, partition: int, issue_t: int,
                latency: int, hops: int):
        self.ops.append((dc, kind, partition, issue_t, latency, hops))

    def note_emission(self, origin_dc: int, t: int, op_ids: list):
        self.emission_seq.setdefault(origin_dc, []).extend(op_ids)
        self.emission_events.setdefault(origin_dc, []).append((t, len(op_ids)))


@dataclass
class MetricsReport:
    """Everything a finished run exposes to tests, suites and the CLI."""

    protocol: str
    seed: int
    num_dcs: int
    duration: int
    warmup: int
    cooldown: int
    visibility: list = field(default_factory=list)
    ops: list = field(default_factory=list)
    emission_seq: dict = field(default_factory=dict)
    emission_events: dict = field(default_factory=dict)
    oracle_ok: bool = True
    violations: list = field(default_factory=list)
    pending_at_end: dict = field(default_factory=dict)   # (dest, origin) -> count
    emitted_pairs: dict = field(default_factory=dict)    # (origin, dest) -> set(op_id)
    applied_pairs: dict = field(default_factory=dict)    # (origin, dest) -> set(op_id)
    inflight_pairs: dict = field(default_factory=dict)   # (origin, dest) -> set(op_id)

    def _window(self, t: int) -> bool:
        return self.warmup <= t <= self.duration - self.cooldown

    def visibility_extra(self, origin_dc: int, dest_dc: int,
                         trimmed: bool = True,
                         origin_partition: Optional[int] = None,
                         exclude_partition: Optional[int] = None,
                         install_window: Optional[tuple] = None) -> list:
        """Extra visibility delays (apply - data arrival), microseconds."""
        out = []
        for (odc, ddc, part, install_t, arrival_t, apply_t) in self.visibility:
            if odc != origin_dc or ddc != dest_dc:
                continue
            if trimmed and not self._window(install_t):
                continue
            if origin_partition is not None and part != origin_partition:
                continue
            if exclude_partition is not None and part == exclude_partition:
                continue
            if install_window is not None and not (
                    install_window[0] <= install_t <= install_window[1]):
                continue
            out.append(apply_t - arrival_t)
        return out

    def op_latencies(self, kind: Optional[str] = None, dc: Optional[int] = None,
                     partition: Optional[int] = None, trimmed: bool = True) -> list:
        out = []
        for (odc, okind, part, issue_t, latency, _hops) in self.ops:
            if kind is not None and okind != kind:
                continue
            if dc is not None and odc != dc:
                continue
            if partition is not None and part != partition:
                continue
            if trimmed and not self._window(issue_t):
                continue
            out.append(latency)
        return out

    def sync_hops(self, kind: str = "update") -> list:
        return [hops for (_dc, okind, _p, _t, _l, hops) in self.ops if okind == kind]


NO_DATA = "no data"

_PERCENTILES = (50, 90, 95, 99)


def percentile(samples: list, p: float):
    """Nearest-rank percentile; requires a non-empty sample list."""
    if not samples:
        raise ValueError("empty sample set")
    ordered = sorted(samples)
    rank = math.ceil(p / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]


def summarize(samples: list) -> dict:
    """p50/p90/p95/p99 and mean, or a ``no data`` marker when empty."""
    if not samples:
        return {"count": 0, "status": NO_DATA}
    out = {"count": len(samples)}
    for p in _PERCENTILES:
        out[f"p{p}"] = percentile(samples, p)
    out["mean"] = sum(samples) / len(samples)
    return out


def cdf_points(samples: list) -> list:
    """Sorted (value, cumulative fraction) pairs; monotone by construction."""
    ordered = sorted(samples)
    n = len(ordered)
    return [(v, (i + 1) / n) for i, v in enumerate(ordered)]
