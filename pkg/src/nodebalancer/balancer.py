"""The balancing cycle: move nodes from quiet clusters to overloaded ones.

One cycle walks the overutilized clusters in descending urgency. For each,
it tries underutilized donors in ascending utilization order, drains the
donor's least-loaded node, deprovisions it, and re-measures the donor. If
giving up the node pushed the donor over t_high the move is reversed (the
node goes straight back); otherwise the node is provisioned into the
overloaded cluster. At most one node moves into each overloaded cluster per
cycle, and a cluster plays at most one role (donor or recipient) per cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DuplicateNode, NodeNotInTransit, NodeNotReserved
from .model import Cluster, Group, Node, NodeState, cluster_utilization, node_utilization
from .reporting import NULL_RECORDER, EventKind
from .rules import evaluate_group, validate_thresholds
from .scheduler import drain_node


class OutcomeKind(str, Enum):
    MOVED = "Moved"
    REVERSED = "Reversed"
    NO_CANDIDATE = "NoCandidate"
    NO_ACTION = "NoAction"


class AttemptReason(str, Enum):
    """Why a donor candidate was passed over."""

    MIN_ACTIVE_NODES = "MinActiveNodes"  # donor cannot spare a node at all
    DRAIN_INFEASIBLE = "DrainInfeasible"  # drain aborted, pods would not fit
    WOULD_EXCEED_T_HIGH = "WouldExceedTHigh"  # donor itself went hot; reversed


@dataclass(frozen=True)
class RebalanceOutcome:
    """What one overutilized cluster got out of a cycle.

    attempts lists (donor id, reason) for every candidate tried before the
    terminal outcome, in the order they were tried.
    """

    kind: OutcomeKind
    high_cluster: str | None = None
    low_cluster: str | None = None
    node: str | None = None
    attempts: tuple[tuple[str, str], ...] = ()


def deprovision_node(cluster: Cluster, node_id: str, recorder=None) -> Node:
    """Detach a drained node from its cluster; the node goes InTransit."""
    rec = recorder if recorder is not None else NULL_RECORDER
    node = cluster.nodes.get(node_id)
    if node is None or node.state is not NodeState.RESERVED:
        state = node.state.value if node is not None else "absent"
        raise NodeNotReserved(f"cannot deprovision node {node_id!r}: {state}")
    del cluster.nodes[node_id]
    node.state = NodeState.IN_TRANSIT
    node.host_cluster = None
    rec.emit(EventKind.NODE_DEPROVISIONED, cluster=cluster.id, node=node_id)
    return node


def provision_node(cluster: Cluster, node: Node, recorder=None) -> None:
    """Attach an InTransit node to a cluster as a fresh Active node.

    origin_cluster is deliberately left alone: the node remembers where it
    came from no matter how many times it is re-homed.
    """
    rec = recorder if recorder is not None else NULL_RECORDER
    if node.state is not NodeState.IN_TRANSIT:
        raise NodeNotInTransit(f"cannot provision node {node.id!r}: {node.state.value}")
    if node.id in cluster.nodes:
        raise DuplicateNode(f"cluster {cluster.id!r} already hosts a node {node.id!r}")
    node.state = NodeState.ACTIVE
    node.host_cluster = cluster.id
    cluster.nodes[node.id] = node
    rec.emit(EventKind.NODE_PROVISIONED, cluster=cluster.id, node=node.id)


def rebalance_cycle(
    group: Group,
    clusters: dict[str, Cluster],
    *,
    recorder=None,
    tick: int = 0,
) -> list[RebalanceOutcome]:
    """Run one balancing cycle over the group; returns one outcome per
    overutilized cluster (reversals appear as extra outcomes as they happen).

    Candidate classification is a single snapshot taken at cycle start. The
    drain/deprovision/provision mechanics re-measure the live state, but no
    cluster is reclassified mid-cycle, which keeps the cycle deterministic
    and guarantees termination.
    """
    rec = recorder if recorder is not None else NULL_RECORDER
    validate_thresholds(group.thresholds)
    evaluation = evaluate_group(group, clusters, tick=tick)
    t_high = group.thresholds.t_high
    outcomes: list[RebalanceOutcome] = []
    used: set[str] = set()  # clusters that already played a role this cycle

    for high_id in evaluation.overutilized:
        if not evaluation.underutilized:
            outcomes.append(RebalanceOutcome(kind=OutcomeKind.NO_ACTION, high_cluster=high_id))
            continue
        recipient = clusters[high_id]
        attempts: list[tuple[str, str]] = []
        moved = False

        for low_id in evaluation.underutilized:
            if low_id in used:
                continue
            donor = clusters[low_id]
            actives = donor.active_nodes()
            if len(actives) - 1 < donor.min_active_nodes:
                attempts.append((low_id, AttemptReason.MIN_ACTIVE_NODES.value))
                continue

            victim = min(actives, key=lambda n: (node_utilization(n, donor), n.id))
            drain = drain_node(donor, victim.id, recorder=recorder)
            if drain.restored:
                attempts.append((low_id, AttemptReason.DRAIN_INFEASIBLE.value))
                continue

            node = deprovision_node(donor, victim.id, recorder=recorder)
            try:
                donor_after = cluster_utilization(donor).u
            except Exception:
                # Never leave a node stranded InTransit on an error path.
                provision_node(donor, node, recorder=recorder)
                raise

            if donor_after > t_high:
                provision_node(donor, node, recorder=recorder)
                rec.emit(
                    EventKind.MOVE_REVERSED,
                    group=group.id,
                    cluster=low_id,
                    node=node.id,
                    reason=AttemptReason.WOULD_EXCEED_T_HIGH.value,
                    utilization_after=donor_after,
                    intended_recipient=high_id,
                )
                attempts.append((low_id, AttemptReason.WOULD_EXCEED_T_HIGH.value))
                outcomes.append(
                    RebalanceOutcome(
                        kind=OutcomeKind.REVERSED,
                        high_cluster=high_id,
                        low_cluster=low_id,
                        node=node.id,
                    )
                )
                continue

            try:
                provision_node(recipient, node, recorder=recorder)
            except Exception:
                provision_node(donor, node, recorder=recorder)
                raise
            rec.emit(
                EventKind.MOVE_COMPLETED,
                group=group.id,
                cluster=high_id,
                node=node.id,
                from_cluster=low_id,
                donor_utilization_after=donor_after,
            )
            outcomes.append(
                RebalanceOutcome(
                    kind=OutcomeKind.MOVED,
                    high_cluster=high_id,
                    low_cluster=low_id,
                    node=node.id,
                    attempts=tuple(attempts),
                )
            )
            used.add(high_id)
            used.add(low_id)
            moved = True
            break

        if not moved:
            rec.emit(
                EventKind.NO_CANDIDATE,
                group=group.id,
                cluster=high_id,
                attempts=[list(attempt) for attempt in attempts],
            )
            outcomes.append(
                RebalanceOutcome(
                    kind=OutcomeKind.NO_CANDIDATE,
                    high_cluster=high_id,
                    attempts=tuple(attempts),
                )
            )
    return outcomes
