"""Deterministic discrete-event network simulator.

Single-threaded event loop over (fire_at, seq) ordered events. All
randomness comes from named streams derived from the run seed, so a
given (config, seed) pair always produces the same trace. Per-node
physical clocks are skewed/drifting but strictly monotone per read;
links are FIFO with fixed one-way delay, optional loss/duplication
(duplicates are delivered in order), and deactivation windows.
"""

from __future__ import annotations

import heapq
import random
from typing import Callable, Optional

from .core import ConfigError

_DELIVER = 0
_TIMER = 1


def stream_rng(seed: int, *labels) -> random.Random:
    """Independent RNG stream keyed by (seed, labels).

    Keyed streams keep unrelated draws (workload vs. link faults vs.
    clock skew) independent, so enabling faults on one link cannot
    perturb the workload of an otherwise identical run.
    """
    return random.Random(f"{seed}/" + "/".join(str(x) for x in labels))


class NodeClock:
    """Skewed, drifting physical clock; readings strictly increase.

    reading = epoch + drift * virtual_time + offset, bumped by +1 if a
    previous read was >= the formula value (microsecond tick floor).
    """

    __slots__ = ("offset", "drift", "epoch", "_last")

    def __init__(self, offset: int = 0, drift: float = 1.0, epoch: int = 1_000_000):
        self.offset = offset
        self.drift = drift
        self.epoch = epoch
        self._last = -1

    def read(self, now: int) -> int:
        t = self.epoch + int(self.drift * now) + self.offset
        if t <= self._last:
            t = self._last + 1
        self._last = t
        return t


class Link:
    __slots__ = ("src", "dst", "delay", "loss_rate", "dup_rate", "rng",
                 "active", "_held", "extra_delay_windows")

    def __init__(self, src: str, dst: str, delay: int,
                 loss_rate: float = 0.0, dup_rate: float = 0.0,
                 rng: Optional[random.Random] = None):
        self.src = src
        self.dst = dst
        self.delay = delay
        self.loss_rate = loss_rate
        self.dup_rate = dup_rate
        self.rng = rng
        self.active = True
        self._held: list = []
        # (from, to, extra_delay) windows, e.g. sequencer-mode stragglers
        self.extra_delay_windows: list = []

    def effective_delay(self, now: int) -> int:
        d = self.delay
        for start, end, extra in self.extra_delay_windows:
            if start <= now < end:
                d += extra
        return d


class Node:
    """Base for protocol state machines driven by the simulator."""

    def __init__(self, name: str, sim: "Simulator"):
        self.name = name
        self.sim = sim
        sim.add_node(self)

    def on_message(self, msg: tuple):  # pragma: no cover - abstract
        raise NotImplementedError

    def on_timer(self, kind: str):  # pragma: no cover - abstract
        raise NotImplementedError


class Simulator:
    """Event loop: virtual time, message delivery, periodic timers, faults."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.now = 0
        self.horizon: Optional[int] = None
        self._heap: list = []
        self._seq = 0
        self.nodes: dict = {}
        self.links: dict = {}
        self.crashed: set = set()
        self._timers: list = []  # (node, kind, base_period)
        self._straggles: dict = {}  # node -> [(from, to, period)]

    # -- topology -----------------------------------------------------

    def add_node(self, node: Node):
        if node.name in self.nodes:
            raise ConfigError("node", f"duplicate node name {node.name!r}")
        self.nodes[node.name] = node

    def add_link(self, src: str, dst: str, delay: int,
                 loss_rate: float = 0.0, dup_rate: float = 0.0):
        rng = None
        if loss_rate > 0.0 or dup_rate > 0.0:
            rng = stream_rng(self.seed, "link", src, dst)
        self.links[(src, dst)] = Link(src, dst, delay, loss_rate, dup_rate, rng)

    def link(self, src: str, dst: str) -> Link:
        try:
            return self.links[(src, dst)]
        except KeyError:
            raise ConfigError("link", f"no link {src!r} -> {dst!r}") from None

    # -- events -------------------------------------------------------

    def _push(self, fire_at: int, kind: int, a, b):
        if fire_at < self.now:
            raise ConfigError("schedule", f"event at {fire_at} is in the past (now={self.now})")
        self._seq += 1
        heapq.heappush(self._heap, (fire_at, self._seq, kind, a, b))

    def send(self, src: str, dst: str, msg: tuple):
        link = self.link(src, dst)
        if not link.active:
            link._held.append(msg)
            return
        delay = link.effective_delay(self.now)
        rng = link.rng
        if rng is not None:
            if link.loss_rate and rng.random() < link.loss_rate:
                return
            self._push(self.now + delay, _DELIVER, dst, msg)
            if link.dup_rate and rng.random() < link.dup_rate:
                self._push(self.now + delay, _DELIVER, dst, msg)
            return
        self._push(self.now + delay, _DELIVER, dst, msg)

    def send_local(self, dst: str, msg: tuple, delay: int = 0):
        """Direct delayed delivery without a configured link (harness use)."""
        self._push(self.now + delay, _DELIVER, dst, msg)

    def set_link_active(self, src: str, dst: str, active: bool):
        link = self.link(src, dst)
        if active and not link.active:
            link.active = True
            held, link._held = link._held, []
            for msg in held:
                self._push(self.now + link.effective_delay(self.now), _DELIVER, dst, msg)
        else:
            link.active = active

    # -- timers -------------------------------------------------------

    def add_periodic(self, node: str, kind: str, period: int, first_at: Optional[int] = None):
        if period <= 0:
            raise ConfigError("timer", f"period must be > 0, got {period}")
        idx = len(self._timers)
        self._timers.append((node, kind, period))
        start = self._effective_period(node, idx) if first_at is None else first_at
        self._push(max(start, self.now), _TIMER, idx, None)

    def call_at(self, fire_at: int, fn: Callable[[], None]):
        self._push(fire_at, _TIMER, None, fn)

    def _effective_period(self, node: str, timer_idx: int) -> int:
        base = self._timers[timer_idx][2]
        for start, end, period in self._straggles.get(node, ()):
            if start <= self.now < end:
                return period
        return base

    # -- faults -------------------------------------------------------

    def crash_at(self, node: str, at: int):
        if node not in self.nodes:
            raise ConfigError("fault.crash", f"unknown node {node!r}")
        self.call_at(at, lambda: self.crashed.add(node))

    def straggle(self, node: str, period: int, start: int, end: int):
        if node not in self.nodes:
            raise ConfigError("fault.straggle", f"unknown node {node!r}")
        self._straggles.setdefault(node, []).append((start, end, period))

    def delay_link_window(self, src: str, dst: str, extra: int, start: int, end: int):
        self.link(src, dst).extra_delay_windows.append((start, end, extra))

    def set_link_faults(self, src: str, dst: str, loss_rate: float, dup_rate: float):
        link = self.link(src, dst)
        link.loss_rate = loss_rate
        link.dup_rate = dup_rate
        if link.rng is None and (loss_rate > 0.0 or dup_rate > 0.0):
            link.rng = stream_rng(self.seed, "link", src, dst)

    # -- loop ---------------------------------------------------------

    def run(self, until: int):
        self.horizon = until
        heap = self._heap
        nodes = self.nodes
        crashed = self.crashed
        while heap and heap[0][0] <= until:
            fire_at, _seq, kind, a, b = heapq.heappop(heap)
            self.now = fire_at
            if kind == _DELIVER:
                if a in crashed:
                    continue
                nodes[a].on_message(b)
            else:
                if a is None:
                    b()
                    continue
                node, tkind, _base = self._timers[a]
                if node in crashed:
                    continue
                nodes[node].on_timer(tkind)
                nxt = fire_at + self._effective_period(node, a)
                if nxt <= until:
                    self._push(nxt, _TIMER, a, None)
        self.now = until
