"""Threshold evaluation: classify a group's members for the balancer."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidThresholds, UnknownCluster
from .model import Cluster, Group, Thresholds, cluster_utilization


@dataclass(frozen=True)
class Evaluation:
    """Snapshot of which members sit outside the band at a given tick.

    overutilized is ordered by descending utilization, underutilized by
    ascending utilization; ties break by ascending cluster id in both.
    The two lists are always disjoint because t_low < t_high.
    """

    overutilized: tuple[str, ...]
    underutilized: tuple[str, ...]
    sampled_at: int


def validate_thresholds(thresholds: Thresholds) -> None:
    """Enforce 0 < t_low < t_high <= 1, naming the violated relation."""
    if not 0 < thresholds.t_low < 1:
        raise InvalidThresholds(f"t_low must be in (0, 1), got {thresholds.t_low}")
    if not 0 < thresholds.t_high <= 1:
        raise InvalidThresholds(f"t_high must be in (0, 1], got {thresholds.t_high}")
    if not thresholds.t_low < thresholds.t_high:
        raise InvalidThresholds(
            f"t_low must be strictly less than t_high, got "
            f"({thresholds.t_low}, {thresholds.t_high})"
        )


def evaluate_group(group: Group, clusters: dict[str, Cluster], tick: int = 0) -> Evaluation:
    """Classify every member against the group's thresholds.

    Both comparisons are strict: a cluster sitting exactly on a threshold is
    neither overutilized nor underutilized. The result depends only on the
    member set, never on its enumeration order.
    """
    validate_thresholds(group.thresholds)
    loads: list[tuple[str, float]] = []
    for cluster_id in group.members:
        cluster = clusters.get(cluster_id)
        if cluster is None:
            raise UnknownCluster(f"group {group.id!r} references unknown cluster {cluster_id!r}")
        loads.append((cluster_id, cluster_utilization(cluster).u))

    over = [(u, cid) for cid, u in loads if u > group.thresholds.t_high]
    under = [(u, cid) for cid, u in loads if u < group.thresholds.t_low]
    over.sort(key=lambda pair: (-pair[0], pair[1]))
    under.sort(key=lambda pair: (pair[0], pair[1]))
    return Evaluation(
        overutilized=tuple(cid for _, cid in over),
        underutilized=tuple(cid for _, cid in under),
        sampled_at=tick,
    )
