"""Deterministic discrete-event simulation of the two issuance protocols.

Time is simulated milliseconds; nothing sleeps. The only randomness is a
``random.Random`` seeded from the caller's seed, so equal seeds give
byte-identical reports.

Per issuance:

* ``sss-delegation`` - the delegate fills its template locally. Zero
  messages reach the issuer once the grant has been delivered.
* ``multisig`` - proposal to the issuer, approval back: two messages.
  While the issuer is down, proposals either wait in its inbox (default)
  or, with ``retry_ms`` set, are dropped and resent after a timeout.
"""

from __future__ import annotations

import csv
import heapq
import io
import random
import statistics
from dataclasses import dataclass, field
from typing import Callable

PROTOCOLS = ("sss-delegation", "multisig")
CSV_COLUMNS = ("protocol", "issuance_id", "rounds", "issuer_msgs", "sim_time_ms", "outcome")


@dataclass(frozen=True)
class LatencyModel:
    one_way_ms: float = 50.0
    jitter_ms: tuple[float, float] | None = None  # uniform range replaces one_way_ms when set
    downtime: tuple[tuple[float, float], ...] = ()
    retry_ms: float | None = None
    issuer_processing_ms: float = 0.0
    delegate_processing_ms: float = 0.0

    def __post_init__(self):
        if self.one_way_ms < 0 or (self.jitter_ms and min(self.jitter_ms) < 0):
            raise ValueError("delays must be non-negative")
        if self.jitter_ms and self.jitter_ms[0] > self.jitter_ms[1]:
            raise ValueError("jitter range must be (low, high)")
        for start, end in self.downtime:
            if end < start:
                raise ValueError(f"downtime window ({start}, {end}) ends before it starts")
        if self.retry_ms is not None and self.retry_ms <= 0:
            raise ValueError("retry_ms must be positive")

    def delay(self, rng: random.Random) -> float:
        if self.jitter_ms:
            return rng.uniform(*self.jitter_ms)
        return self.one_way_ms

    def issuer_up(self, t: float) -> bool:
        return not any(start <= t < end for start, end in self.downtime)

    def next_up(self, t: float) -> float:
        moved = True
        while moved:
            moved = False
            for start, end in self.downtime:
                if start <= t < end:
                    t, moved = end, True
        return t

    def downtime_fraction(self, horizon_ms: float) -> float:
        covered = sum(max(0.0, min(end, horizon_ms) - max(start, 0.0)) for start, end in self.downtime)
        return covered / horizon_ms


def periodic_downtime(fraction: float, horizon_ms: float, window_ms: float,
                      rng: random.Random) -> tuple[tuple[float, float], ...]:
    """One down window of ``window_ms`` at a random offset in every cycle.

    Cycles last ``window_ms / fraction``, so the issuer is down for exactly
    ``fraction`` of every whole cycle.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    cycle = window_ms / fraction
    windows, start = [], 0.0
    while start < horizon_ms:
        offset = rng.uniform(0, cycle - window_ms)
        windows.append((start + offset, start + offset + window_ms))
        start += cycle
    return tuple(windows)


@dataclass(frozen=True)
class IssuanceRow:
    protocol: str
    issuance_id: int
    rounds: int
    issuer_msgs: int
    sim_time_ms: float
    outcome: str


@dataclass(frozen=True)
class TraceEvent:
    time_ms: float
    issuance_id: int
    kind: str


@dataclass
class SimulationReport:
    protocol: str
    seed: int
    rows: list[IssuanceRow] = field(default_factory=list)
    trace: list[TraceEvent] = field(default_factory=list)
    setup_msgs: int = 0

    @property
    def latencies(self) -> list[float]:
        return [r.sim_time_ms for r in self.rows]

    @property
    def mean_latency_ms(self) -> float:
        return statistics.fmean(self.latencies) if self.rows else 0.0

    @property
    def max_latency_ms(self) -> float:
        return max(self.latencies, default=0.0)

    @property
    def issuer_msgs(self) -> list[int]:
        return [r.issuer_msgs for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.protocol, r.issuance_id, r.rounds, r.issuer_msgs, repr(r.sim_time_ms), r.outcome])
        return buf.getvalue()


class _EventLoop:
    def __init__(self):
        self.now = 0.0
        self._queue: list = []
        self._seq = 0

    def at(self, t: float, fn: Callable, *args) -> None:
        heapq.heappush(self._queue, (t, self._seq, fn, args))
        self._seq += 1

    def run(self) -> None:
        while self._queue:
            t, _, fn, args = heapq.heappop(self._queue)
            self.now = t
            fn(*args)


class _Run:
    def __init__(self, protocol: str, latency: LatencyModel, seed: int):
        self.protocol = protocol
        self.latency = latency
        self.rng = random.Random(seed)
        self.loop = _EventLoop()
        self.report = SimulationReport(protocol, seed)
        self.started: dict[int, float] = {}
        self.msgs: dict[int, int] = {}
        self.reviewed: set[int] = set()

    def log(self, k: int, kind: str) -> None:
        self.report.trace.append(TraceEvent(self.loop.now, k, kind))

    def finish(self, k: int, rounds: int) -> None:
        self.log(k, "issued")
        self.report.rows.append(IssuanceRow(self.protocol, k, rounds, self.msgs.get(k, 0),
                                            self.loop.now - self.started[k], "issued"))

    # sss-delegation: local sanitization only
    def sss_request(self, k: int) -> None:
        self.started[k] = self.loop.now
        self.log(k, "request")
        self.loop.at(self.loop.now + self.latency.delegate_processing_ms, self.finish, k, 0)

    # multisig: propose -> review -> approve
    def ms_request(self, k: int) -> None:
        self.started[k] = self.loop.now
        self.log(k, "request")
        self.ms_send_proposal(k)

    def ms_send_proposal(self, k: int) -> None:
        self.msgs[k] = self.msgs.get(k, 0) + 1
        self.log(k, "proposal-sent")
        self.loop.at(self.loop.now + self.latency.delay(self.rng), self.ms_proposal_arrives, k)
        if self.latency.retry_ms is not None:
            self.loop.at(self.loop.now + self.latency.retry_ms, self.ms_timeout, k, self.msgs[k])

    def ms_timeout(self, k: int, attempt: int) -> None:
        if self.msgs.get(k) == attempt and k not in self.reviewed:
            self.log(k, "retry")
            self.ms_send_proposal(k)

    def ms_proposal_arrives(self, k: int) -> None:
        if k in self.reviewed:
            self.log(k, "duplicate-proposal-ignored")
            return
        if self.latency.issuer_up(self.loop.now):
            self.log(k, "proposal-received")
            self.loop.at(self.loop.now + self.latency.issuer_processing_ms, self.ms_review, k)
        elif self.latency.retry_ms is None:
            self.log(k, "proposal-queued")
            up = self.latency.next_up(self.loop.now)
            self.loop.at(up + self.latency.issuer_processing_ms, self.ms_review, k)
        else:
            self.log(k, "proposal-dropped")

    def ms_review(self, k: int) -> None:
        if k in self.reviewed:
            return
        self.reviewed.add(k)
        self.msgs[k] += 1
        self.log(k, "approval-sent")
        self.loop.at(self.loop.now + self.latency.delay(self.rng), self.finish, k, 2)


def simulate(protocol: str, latency: LatencyModel, issuance_count: int, seed: int,
             interarrival_ms: float = 100.0) -> SimulationReport:
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if issuance_count < 1:
        raise ValueError("issuance_count must be at least 1")
    run = _Run(protocol, latency, seed)
    if protocol == "sss-delegation":
        run.report.setup_msgs = 1  # the grant itself, delivered before issuance starts
        handler = run.sss_request
    else:
        handler = run.ms_request
    for k in range(1, issuance_count + 1):
        run.loop.at((k - 1) * interarrival_ms, handler, k)
    run.loop.run()
    run.report.rows.sort(key=lambda r: r.issuance_id)
    return run.report


def compare(latency: LatencyModel, issuance_count: int, seed: int,
            interarrival_ms: float = 100.0) -> dict[str, SimulationReport]:
    return {p: simulate(p, latency, issuance_count, seed, interarrival_ms) for p in PROTOCOLS}


def read_csv(text: str) -> list[IssuanceRow]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [IssuanceRow(r["protocol"], int(r["issuance_id"]), int(r["rounds"]), int(r["issuer_msgs"]),
                        float(r["sim_time_ms"]), r["outcome"]) for r in rows]
