"""Workload traces: deterministic demand curves applied as pod churn.

A trace gives a raw cpu demand level per tick. Demand is realized as
uniform pods of one quantum each, so the actual total is the raw level
rounded to the nearest whole quantum (half rounds up). apply_workload
adjusts a cluster's pod set toward that target and always leaves
|actual - target| < quantum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

from .model import ZERO, Cluster, Pod, ResourceVector

DEFAULT_POD_QUANTUM = ResourceVector(cpu=100, memory=128)


@dataclass(frozen=True)
class ConstantTrace:
    kind: ClassVar[str] = "Constant"
    level: int
    pod_quantum: ResourceVector = DEFAULT_POD_QUANTUM

    def level_at(self, tick: int) -> float:
        return float(self.level)


@dataclass(frozen=True)
class StepTrace:
    """Piecewise-constant demand; steps are (start tick, level), first at 0."""

    kind: ClassVar[str] = "Step"
    steps: tuple[tuple[int, int], ...]
    pod_quantum: ResourceVector = DEFAULT_POD_QUANTUM

    def __post_init__(self):
        if not self.steps or self.steps[0][0] != 0:
            raise ValueError("steps must be non-empty and start at tick 0")
        starts = [start for start, _ in self.steps]
        if starts != sorted(set(starts)):
            raise ValueError("step start ticks must be strictly ascending")

    def level_at(self, tick: int) -> float:
        level = self.steps[0][1]
        for start, value in self.steps:
            if start > tick:
                break
            level = value
        return float(level)


@dataclass(frozen=True)
class SineTrace:
    """base + amplitude * sin(2*pi*(tick + phase) / period), clamped at 0."""

    kind: ClassVar[str] = "Sine"
    base: int
    amplitude: int
    period: int
    phase: int = 0
    pod_quantum: ResourceVector = DEFAULT_POD_QUANTUM

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")

    def level_at(self, tick: int) -> float:
        return self.base + self.amplitude * math.sin(
            2.0 * math.pi * (tick + self.phase) / self.period
        )


@dataclass(frozen=True)
class SpikeTrace:
    """Flat base with a rectangular burst on [start, start + duration)."""

    kind: ClassVar[str] = "Spike"
    base: int
    peak: int
    start: int
    duration: int
    pod_quantum: ResourceVector = DEFAULT_POD_QUANTUM

    def level_at(self, tick: int) -> float:
        if self.start <= tick < self.start + self.duration:
            return float(self.peak)
        return float(self.base)


TraceSpec = Union[ConstantTrace, StepTrace, SineTrace, SpikeTrace]


@dataclass(frozen=True)
class WorkloadDelta:
    """Pod churn performed by one apply_workload call."""

    created: tuple[str, ...]
    deleted: tuple[str, ...]


def target_demand(trace: TraceSpec, tick: int) -> ResourceVector:
    """The trace's level at a tick, clamped at zero and quantized to pods."""
    if tick < 0:
        raise ValueError(f"tick must be >= 0, got {tick}")
    raw = max(0.0, trace.level_at(tick))
    quantum = trace.pod_quantum
    pods = int(math.floor(raw / quantum.cpu + 0.5))  # nearest, half rounds up
    return ResourceVector(pods * quantum.cpu, pods * quantum.memory)


def _total_demand(cluster: Cluster) -> ResourceVector:
    total = ZERO
    for pod in cluster.pods.values():
        total = total + pod.demand
    return total


def apply_workload(cluster: Cluster, trace: TraceSpec, tick: int) -> WorkloadDelta:
    """Adjust the cluster's pods toward the trace's target for this tick.

    Demand above the target is shed by deleting pods newest-first (highest
    pod id), but only while a whole quantum of excess remains, rounding
    toward fewer deletions. Demand below the target is topped up with new
    Pending pods of one quantum each; placement is the scheduler's job.
    """
    target = target_demand(trace, tick)
    quantum = trace.pod_quantum

    deleted = []
    while cluster.pods:
        current = _total_demand(cluster)
        if current.cpu - target.cpu < quantum.cpu:
            break
        newest = max(cluster.pods)
        del cluster.pods[newest]
        deleted.append(newest)

    created = []
    current = _total_demand(cluster)
    if current.cpu < target.cpu:
        count = int((target.cpu - current.cpu) / quantum.cpu + 0.5)
        for i in range(count):
            pod_id = f"{cluster.id}-p{tick:05d}-{i:04d}"
            cluster.pods[pod_id] = Pod(id=pod_id, demand=quantum)
            created.append(pod_id)
    return WorkloadDelta(created=tuple(created), deleted=tuple(deleted))
