"""Transfer-duration estimates for PID-initiated downloads.

Parallel (multi-peer) access pays a bootstrap cost and then waits for the
slowest chunk::

    d = t_r + t_b + max(volume_i / bandwidth_i)

Serial location-based access fetches the chunks one after another::

    d = t_r + sum(volume_i / bandwidth_i)

Units are seconds, bytes and bytes per second throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class EmptyPlan(ValueError):
    pass


class NonPositiveChunk(ValueError):
    pass


@dataclass(frozen=True)
class ChunkPlan:
    chunks: tuple[tuple[float, float], ...]

    def __post_init__(self):
        chunks = tuple((float(v), float(b)) for v, b in self.chunks)
        if not chunks:
            raise EmptyPlan("a chunk plan needs at least one chunk")
        for volume, bandwidth in chunks:
            if not (volume > 0 and bandwidth > 0) or not math.isfinite(volume / bandwidth):
                raise NonPositiveChunk(f"chunk ({volume}, {bandwidth}) must be positive and finite")
        object.__setattr__(self, "chunks", chunks)

    @classmethod
    def uniform(cls, volumes: Iterable[float], bandwidth: float) -> ChunkPlan:
        """All chunks served at the same bandwidth."""
        return cls(tuple((v, bandwidth) for v in volumes))

    @classmethod
    def split(cls, volume: float, parts: int, bandwidth: float) -> ChunkPlan:
        """*volume* cut into *parts* equal chunks at one bandwidth."""
        if parts < 1:
            raise EmptyPlan("parts must be at least 1")
        return cls.uniform([volume / parts] * parts, bandwidth)

    @property
    def times(self) -> list[float]:
        return [v / b for v, b in self.chunks]

    def __len__(self) -> int:
        return len(self.chunks)


@dataclass(frozen=True)
class TransferEstimate:
    resolution_time: float
    bootstrap_time: float
    duration: float


def _plan(plan: ChunkPlan | Sequence[tuple[float, float]]) -> ChunkPlan:
    return plan if isinstance(plan, ChunkPlan) else ChunkPlan(tuple(plan))


def _check_time(value: float, label: str) -> float:
    value = float(value)
    if not value >= 0 or not math.isfinite(value):
        raise ValueError(f"{label} must be a finite, non-negative number of seconds")
    return value


def estimate_parallel(t_r: float, t_b: float, plan) -> TransferEstimate:
    t_r, t_b, plan = _check_time(t_r, "t_r"), _check_time(t_b, "t_b"), _plan(plan)
    return TransferEstimate(t_r, t_b, math.fsum([t_r, t_b, max(plan.times)]))


def estimate_serial(t_r: float, plan) -> TransferEstimate:
    t_r, plan = _check_time(t_r, "t_r"), _plan(plan)
    return TransferEstimate(t_r, 0.0, math.fsum([t_r, *plan.times]))


def compare(t_r: float, t_b: float, plan) -> float:
    """Serial minus parallel duration; positive when parallel access is faster.

    The shared resolution time cancels, so it is left out of the difference.
    """
    _check_time(t_r, "t_r")
    t_b, plan = _check_time(t_b, "t_b"), _plan(plan)
    times = plan.times
    return math.fsum([*times, -t_b, -max(times)])


def break_even_bootstrap(plan) -> float:
    """Bootstrap time at which both access styles take equally long."""
    times = _plan(plan).times
    return math.fsum([*times, -max(times)])
