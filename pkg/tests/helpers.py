"""Builders and independent reference implementations shared by the tests.

The reference functions (ffd_oracle, raw utilization sums) are written from
the documented behaviour, not from the package internals, so they can catch
the package drifting from its own contract.
"""

from __future__ import annotations

import copy
import random
from collections import Counter

from nodebalancer import (
    Cluster,
    ConstantTrace,
    GroupManager,
    Node,
    Pod,
    PodState,
    ResourceVector,
    Thresholds,
    apply_workload,
    build_cluster,
    place_pending,
)


def rv(cpu: int, memory: int | None = None) -> ResourceVector:
    """Resource pair; memory defaults to 128 MiB per 100 millicores."""
    if memory is None:
        memory = cpu * 128 // 100
    return ResourceVector(cpu, memory)


def make_cluster(cid, cpus, memory=8192, min_active=1) -> Cluster:
    """Cluster with one node per entry of cpus, all with the same memory."""
    nodes = {}
    for i, cpu in enumerate(cpus):
        nid = f"{cid}-n{i:03d}"
        nodes[nid] = Node(
            id=nid,
            capacity=ResourceVector(cpu, memory),
            origin_cluster=cid,
            host_cluster=cid,
        )
    return Cluster(
        id=cid,
        nodes=nodes,
        original_node_ids=frozenset(nodes),
        min_active_nodes=min_active,
    )


def run_pod(cluster, pid, node_id, cpu, memory=None) -> Pod:
    pod = Pod(id=pid, demand=rv(cpu, memory), assignment=node_id, state=PodState.RUNNING)
    cluster.pods[pid] = pod
    return pod


def pending_pod(cluster, pid, cpu, memory=None) -> Pod:
    pod = Pod(id=pid, demand=rv(cpu, memory))
    cluster.pods[pid] = pod
    return pod


def fill(cluster, node_id, total_cpu, quantum=100, prefix=None):
    """Load one node with total_cpu of running demand in quantum-sized pods."""
    prefix = prefix or f"{node_id}-fill"
    for i in range(total_cpu // quantum):
        run_pod(cluster, f"{prefix}-{i:04d}", node_id, quantum)


def snapshot(obj):
    return copy.deepcopy(obj)


def node_multiset(clusters) -> Counter:
    return Counter(nid for cluster in clusters.values() for nid in cluster.nodes)


def origin_map(clusters) -> dict:
    return {
        node.id: node.origin_cluster
        for cluster in clusters.values()
        for node in cluster.nodes.values()
    }


def ffd_oracle(pods, free_slots):
    """Reference first-fit-decreasing placement.

    pods: (id, cpu, mem) triples; free_slots: ordered (node, cpu, mem).
    Returns ({pod: node}, [unplaced ids]) per the documented policy: sort by
    descending cpu, then descending mem, then ascending id; scan slots in
    the given order; first fit wins.
    """
    order = sorted(pods, key=lambda p: (-p[1], -p[2], p[0]))
    slots = [[name, cpu, mem] for name, cpu, mem in free_slots]
    placed = {}
    unplaced = []
    for pid, cpu, mem in order:
        for slot in slots:
            if cpu <= slot[1] and mem <= slot[2]:
                slot[1] -= cpu
                slot[2] -= mem
                placed[pid] = slot[0]
                break
        else:
            unplaced.append(pid)
    return placed, unplaced


def random_world(rng: random.Random, n_clusters=None):
    """A manager with one group of random clusters, no load yet."""
    count = n_clusters if n_clusters is not None else rng.randint(2, 4)
    manager = GroupManager()
    t_low = round(rng.uniform(0.15, 0.45), 2)
    t_high = round(rng.uniform(t_low + 0.15, 1.0), 2)
    manager.create_group("g0", Thresholds(t_low, t_high), rng.randint(1, 3))
    for i in range(count):
        capacity = ResourceVector(rng.choice([2000, 3000, 4000]), rng.choice([4096, 8192]))
        manager.register_cluster(build_cluster(f"c{i}", rng.randint(1, 5), capacity))
        manager.add_cluster("g0", f"c{i}")
    return manager, manager.groups["g0"]


def randomize_load(rng: random.Random, cluster, tick):
    """Jump the cluster to a random demand level, scheduled normally."""
    capacity = sum(node.capacity.cpu for node in cluster.active_nodes())
    level = rng.randrange(0, capacity + capacity // 4 + 100, 100)
    apply_workload(cluster, ConstantTrace(level=level), tick)
    place_pending(cluster)


def random_scenario(rng: random.Random, min_ticks=8, max_ticks=18, membership=True) -> dict:
    """A JSON-shaped scenario document with random traces and thresholds."""
    count = rng.randint(2, 6)
    ticks = rng.randint(min_ticks, max_ticks)
    quantum_cpu = rng.choice([100, 200])

    clusters = []
    for i in range(count):
        cap_cpu = rng.choice([2000, 3000, 4000, 6000])
        node_count = rng.randint(1, 8)
        budget = min(node_count * cap_cpu + cap_cpu // 2, 45 * quantum_cpu)

        def level():
            return rng.randrange(0, budget + quantum_cpu, quantum_cpu)

        kind = rng.choice(["Constant", "Step", "Sine", "Spike"])
        if kind == "Constant":
            trace = {"kind": "Constant", "level": level()}
        elif kind == "Step":
            switches = sorted(rng.sample(range(1, ticks), rng.randint(1, 2)))
            trace = {
                "kind": "Step",
                "steps": [{"tick": 0, "level": level()}]
                + [{"tick": t, "level": level()} for t in switches],
            }
        elif kind == "Sine":
            base = level()
            trace = {
                "kind": "Sine",
                "base": base,
                "amplitude": rng.randrange(0, base + quantum_cpu, quantum_cpu),
                "period": rng.randint(4, 16),
                "phase": rng.randint(0, 8),
            }
        else:
            trace = {
                "kind": "Spike",
                "base": level() // 2 // quantum_cpu * quantum_cpu,
                "peak": budget,
                "start": rng.randint(0, max(1, ticks - 4)),
                "duration": rng.randint(1, 6),
            }
        if quantum_cpu != 100:
            trace["pod_quantum"] = {"cpu_millicores": quantum_cpu, "memory_mib": 256}
        clusters.append(
            {
                "id": f"c{i}",
                "node_count": node_count,
                "node_capacity": {
                    "cpu_millicores": cap_cpu,
                    "memory_mib": rng.choice([4096, 8192]),
                },
                "trace": trace,
            }
        )

    t_low = round(rng.uniform(0.15, 0.45), 2)
    t_high = round(rng.uniform(t_low + 0.15, 1.0), 2)
    doc = {
        "clusters": clusters,
        "groups": [
            {
                "id": "g0",
                "thresholds": {"t_low": t_low, "t_high": t_high},
                "balance_interval": rng.randint(1, 4),
                "members": [spec["id"] for spec in clusters],
            }
        ],
        "ticks": ticks,
        "seed": rng.getrandbits(64),
    }
    if membership and count >= 3 and rng.random() < 0.3:
        victim = rng.choice([spec["id"] for spec in clusters])
        leave = rng.randint(1, ticks // 2)
        changes = [{"tick": leave, "action": "Remove", "cluster": victim, "group": "g0"}]
        if leave + 1 < ticks and rng.random() < 0.5:
            changes.append(
                {
                    "tick": rng.randint(leave + 1, ticks - 1),
                    "action": "Add",
                    "cluster": victim,
                    "group": "g0",
                }
            )
        doc["membership_changes"] = changes
    return doc
