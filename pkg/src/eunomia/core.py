"""Shared domain types for the causal geo-replication protocols.

Timestamps are 64-bit non-negative integers in simulated microseconds.
A hybrid timestamp is the value produced by a partition's hybrid clock
rule (physical reading merged with a logical bump); a vector timestamp
holds one such entry per datacenter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Iterable, Optional

# A hybrid clock value: total order is plain integer comparison.
HybridTimestamp = int

# One hybrid timestamp per datacenter, fixed length M per deployment.
VectorTimestamp = tuple  # tuple[HybridTimestamp, ...]

Key = int
Value = bytes

# (client name, per-session op index): globally unique operation identity.
OpId = tuple


class ConfigError(ValueError):
    """Invalid deployment / experiment configuration.

    ``path`` points at the offending field (e.g. "workload.read_ratio").
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ReadMissError(KeyError):
    """A read hit a key the harness never populated (a test bug)."""


class InvariantViolation(AssertionError):
    """A protocol safety check failed; aborts the simulation."""


class UpdateId(NamedTuple):
    """Unique update identity: field order gives the deterministic
    (timestamp, origin partition, key) tie-break used everywhere."""

    local_ts: HybridTimestamp
    origin_partition: int
    key: Key


class UpdateRecord(NamedTuple):
    key: Key
    value: Optional[Value]
    vts: VectorTimestamp
    origin_dc: int
    origin_partition: int
    uid: UpdateId
    op_id: OpId


def make_update(key: Key, value: Optional[Value], vts: VectorTimestamp,
                origin_dc: int, origin_partition: int, op_id: OpId) -> UpdateRecord:
    uid = UpdateId(vts[origin_dc], origin_partition, key)
    return UpdateRecord(key, value, vts, origin_dc, origin_partition, uid, op_id)


def vts_zero(num_dcs: int) -> VectorTimestamp:
    return (0,) * num_dcs


def vts_merge(a: VectorTimestamp, b: VectorTimestamp) -> VectorTimestamp:
    """Entry-wise max of two equal-length vector timestamps."""
    if len(a) != len(b):
        raise ConfigError("vts", f"length mismatch: {len(a)} vs {len(b)}")
    return tuple(x if x >= y else y for x, y in zip(a, b))


def vts_dominates(a: VectorTimestamp, b: VectorTimestamp,
                  skip: Iterable[int] = ()) -> bool:
    """True iff a[d] >= b[d] for every index d not in ``skip``."""
    skipped = frozenset(skip)
    return all(a[d] >= b[d] for d in range(len(a)) if d not in skipped)


def lww_order(vts: VectorTimestamp, origin_dc: int, origin_partition: int) -> tuple:
    """Last-writer-wins rank of a version: origin-entry timestamp, then
    origin partition, then origin datacenter."""
    return (vts[origin_dc], origin_partition, origin_dc)


@dataclass(frozen=True)
class DeploymentConfig:
    """Static deployment shape and protocol timer intervals (microseconds)."""

    num_dcs: int
    num_partitions_per_dc: int
    heartbeat_interval: int       # partition idle-heartbeat period
    stabilization_interval: int   # stabilizer ordering period
    receiver_interval: int        # receiver pending-queue scan period
    batch_interval: int           # partition metadata batch flush period

    def __post_init__(self):
        if self.num_dcs < 1:
            raise ConfigError("deployment.num_dcs", "must be >= 1")
        if self.num_partitions_per_dc < 1:
            raise ConfigError("deployment.num_partitions_per_dc", "must be >= 1")
        for name in ("heartbeat_interval", "stabilization_interval",
                     "receiver_interval", "batch_interval"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"deployment.{name}", "must be > 0")
