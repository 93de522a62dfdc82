"""String-length statistics and resolution-latency benchmarking.

Quantiles use the nearest-rank rule: the p-th percentile of ``n`` sorted
values is the value at 1-based rank ``ceil(p * n / 100)`` (rank 1 for p=0).
"""

from __future__ import annotations

import csv
import http.client
import io
import json
import statistics
import time
import uuid
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from .store import HandleStore, HandleValue

BENCH_PREFIX = "11022"


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class BoxStats:
    count: int
    min: float
    q1: float
    median: float
    q3: float
    p95: float
    max: float
    mean: float


def nearest_rank(sorted_values: Sequence[float], percent: int) -> float:
    n = len(sorted_values)
    if not n:
        raise EmptyInput("no values")
    rank = max(1, -(-percent * n // 100))
    return sorted_values[rank - 1]


def box_stats(values: Iterable[float]) -> BoxStats:
    ordered = sorted(values)
    if not ordered:
        raise EmptyInput("no values to summarize")
    q1, median, q3, p95 = (nearest_rank(ordered, p) for p in (25, 50, 75, 95))
    return BoxStats(
        count=len(ordered),
        min=ordered[0],
        q1=q1,
        median=median,
        q3=q3,
        p95=p95,
        max=ordered[-1],
        mean=statistics.fmean(ordered),
    )


def length_stats(lines: Iterable[str]) -> BoxStats:
    """Character-count distribution of *lines* (newlines already stripped)."""
    return box_stats(len(line) for line in lines)


def read_lines(stream: Iterable[str]) -> Iterable[str]:
    """Yield lines without terminators, skipping blank ones."""
    for line in stream:
        line = line.rstrip("\r\n")
        if line:
            yield line


def stats_csv(stats: BoxStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f.name for f in fields(BoxStats)])
    writer.writerow(astuple(stats))
    return buf.getvalue()


# -- latency -------------------------------------------------------------------


@dataclass(frozen=True)
class LatencyPoint:
    value_size: int
    trials: int
    mean: float
    median: float


def synthetic_url(size: int) -> str:
    """A URL of exactly *size* characters (at least 16)."""
    head = "http://bench.example/"
    if size < 16:
        raise ValueError("synthetic values need at least 16 characters")
    if size <= len(head):
        return head[: size - 1] + "x"
    return head + "x" * (size - len(head))


class _StoreTarget:
    def __init__(self, store: HandleStore, prefix: str):
        self.store = store
        self.prefix = prefix
        if prefix not in store.prefixes:
            store.register_prefix(prefix)

    def create(self, data: str) -> str:
        record = self.store.create_handle(self.prefix, None, [HandleValue(1, "URL", data)])
        return record.pid

    def resolve(self, pid: str) -> None:
        self.store.resolve_default(pid)

    def close(self) -> None:
        pass


class _HttpTarget:
    def __init__(self, endpoint: str, token: str | None, prefix: str):
        url = urlsplit(endpoint)
        self.conn = http.client.HTTPConnection(url.hostname, url.port or 80, timeout=30)
        self.token = token
        self.prefix = prefix

    def _request(self, method: str, path: str, body: bytes | None = None, headers=None):
        self.conn.request(method, path, body=body, headers=headers or {})
        resp = self.conn.getresponse()
        payload = resp.read()
        return resp.status, payload

    def create(self, data: str) -> str:
        pid = f"{self.prefix}/bench-{uuid.uuid4()}"
        body = json.dumps({"values": [{"index": 1, "type": "URL", "data": data}]}).encode()
        status, payload = self._request(
            "PUT", "/" + pid, body,
            {"Authorization": f"Bearer {self.token}", "Content-Type": "application/json"},
        )
        if status != 201:
            raise RuntimeError(f"creating {pid} failed with {status}: {payload[:200]!r}")
        return pid

    def resolve(self, pid: str) -> None:
        status, _ = self._request("GET", "/" + pid)
        if status != 303:
            raise RuntimeError(f"resolving {pid} answered {status}")

    def close(self) -> None:
        self.conn.close()


def latency_benchmark(
    target: HandleStore | str,
    sizes: Sequence[int],
    trials: int,
    *,
    token: str | None = None,
    prefix: str = BENCH_PREFIX,
    warmup: int = 5,
) -> list[LatencyPoint]:
    """Time PID resolution for URL values of each size in *sizes*.

    *target* is either a :class:`HandleStore` (in-process) or the base URL
    of a running resolver.  The store keeps no cache, so every trial
    resolves from the record itself.
    """
    if not sizes:
        raise EmptyInput("no value sizes given")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if isinstance(target, str):
        driver = _HttpTarget(target, token, prefix)
    else:
        driver = _StoreTarget(target, prefix)
    points = []
    try:
        for size in sizes:
            pid = driver.create(synthetic_url(size))
            for _ in range(warmup):
                driver.resolve(pid)
            samples = []
            for _ in range(trials):
                start = time.perf_counter()
                driver.resolve(pid)
                samples.append(time.perf_counter() - start)
            points.append(
                LatencyPoint(size, trials, statistics.fmean(samples), statistics.median(samples))
            )
    finally:
        driver.close()
    return points


def latency_csv(points: Iterable[LatencyPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["size", "trials", "mean_s", "median_s"])
    for p in points:
        writer.writerow([p.value_size, p.trials, repr(p.mean), repr(p.median)])
    return buf.getvalue()
