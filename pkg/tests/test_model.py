import random

import pytest

from nodebalancer import (
    Node,
    NodeState,
    ResourceVector,
    Utilization,
    build_cluster,
    cluster_utilization,
    node_utilization,
    place_pending,
)
from nodebalancer.errors import NodeNotActive, NodeNotInCluster, ZeroCapacity
from nodebalancer.model import free_capacity, node_demand, pending_demand, running_demand

from helpers import make_cluster, pending_pod, run_pod, rv


def test_resource_vector_arithmetic():
    a = ResourceVector(300, 512)
    b = ResourceVector(100, 128)
    assert a + b == ResourceVector(400, 640)
    assert a - b == ResourceVector(200, 384)
    assert b.fits_within(a)
    assert not a.fits_within(b)
    assert b.scaled(3) == ResourceVector(300, 384)


def test_resource_vector_rejects_negative_components():
    with pytest.raises(ValueError):
        ResourceVector(-1, 0)
    with pytest.raises(ValueError):
        ResourceVector(100, 128) - ResourceVector(200, 0)


def test_node_capacity_must_be_positive():
    with pytest.raises(ValueError):
        Node(id="n", capacity=ResourceVector(0, 128), origin_cluster="c", host_cluster="c")
    with pytest.raises(ValueError):
        Node(id="n", capacity=ResourceVector(100, 0), origin_cluster="c", host_cluster="c")


def test_build_cluster_records_original_configuration():
    cluster = build_cluster("a", 3, ResourceVector(4000, 8192))
    assert sorted(cluster.nodes) == ["a-n000", "a-n001", "a-n002"]
    assert cluster.original_node_ids == frozenset(cluster.nodes)
    assert all(n.state is NodeState.ACTIVE for n in cluster.nodes.values())
    assert all(n.origin_cluster == "a" and n.host_cluster == "a" for n in cluster.nodes.values())


def test_empty_cluster_utilization_is_zero():
    cluster = build_cluster("a", 2, ResourceVector(4000, 8192))
    assert cluster_utilization(cluster) == Utilization(0.0, 0.0, 0.0)


def test_utilization_simple_ratio():
    cluster = make_cluster("a", [1000], memory=1000)
    run_pod(cluster, "p0", "a-n000", 500, 250)
    util = cluster_utilization(cluster)
    assert util.u_cpu == pytest.approx(0.5, abs=1e-9)
    assert util.u_mem == pytest.approx(0.25, abs=1e-9)
    assert util.u == pytest.approx(0.5, abs=1e-9)


def test_utilization_is_max_of_dimensions():
    cluster = make_cluster("a", [1000], memory=1000)
    run_pod(cluster, "p0", "a-n000", 300, 600)
    util = cluster_utilization(cluster)
    assert util.u == pytest.approx(0.6, abs=1e-9)
    assert util.u == util.u_mem


def test_utilization_sums_across_nodes():
    # 70 pods of 100m over three 4000m nodes; checked against raw sums.
    cluster = make_cluster("a", [4000, 4000, 4000])
    for i in range(70):
        run_pod(cluster, f"p{i:03d}", f"a-n{i % 3:03d}", 100, 96)
    total_cpu = sum(p.demand.cpu for p in cluster.pods.values())
    total_mem = sum(p.demand.memory for p in cluster.pods.values())
    cap_cpu = sum(n.capacity.cpu for n in cluster.nodes.values())
    cap_mem = sum(n.capacity.memory for n in cluster.nodes.values())
    util = cluster_utilization(cluster)
    assert util.u_cpu == pytest.approx(total_cpu / cap_cpu, abs=1e-9)
    assert util.u_mem == pytest.approx(total_mem / cap_mem, abs=1e-9)
    assert util.u == pytest.approx(7000 / 12000, abs=1e-9)


def test_pending_pods_do_not_count_as_demand():
    cluster = make_cluster("a", [1000], memory=100000)
    run_pod(cluster, "p0", "a-n000", 500)
    pending_pod(cluster, "p1", 5000)
    assert cluster_utilization(cluster).u == pytest.approx(0.5, abs=1e-9)
    assert pending_demand(cluster).cpu == 5000
    assert running_demand(cluster).cpu == 500


def test_only_active_nodes_provide_capacity():
    cluster = make_cluster("a", [1000, 1000], memory=4096)
    run_pod(cluster, "p0", "a-n000", 500)
    assert cluster_utilization(cluster).u_cpu == pytest.approx(0.25, abs=1e-9)
    cluster.nodes["a-n001"].state = NodeState.RESERVED
    assert cluster_utilization(cluster).u_cpu == pytest.approx(0.5, abs=1e-9)


def test_zero_capacity_is_an_error():
    cluster = make_cluster("a", [1000])
    cluster.nodes["a-n000"].state = NodeState.RESERVED
    with pytest.raises(ZeroCapacity):
        cluster_utilization(cluster)


def test_node_utilization_value_and_errors():
    cluster = make_cluster("a", [1000, 1000], memory=1000)
    run_pod(cluster, "p0", "a-n000", 300, 600)
    node = cluster.nodes["a-n000"]
    assert node_utilization(node, cluster) == pytest.approx(0.6, abs=1e-9)

    other = make_cluster("b", [1000])
    with pytest.raises(NodeNotInCluster):
        node_utilization(other.nodes["b-n000"], cluster)
    node.state = NodeState.RESERVED
    with pytest.raises(NodeNotActive):
        node_utilization(node, cluster)


def test_node_and_free_accounting():
    cluster = make_cluster("a", [1000], memory=1000)
    run_pod(cluster, "p0", "a-n000", 300, 200)
    run_pod(cluster, "p1", "a-n000", 100, 100)
    assert node_demand(cluster, "a-n000") == ResourceVector(400, 300)
    assert free_capacity(cluster, cluster.nodes["a-n000"]) == ResourceVector(600, 700)


def test_scale_consistency():
    # Scaling capacity and demand by the same factor leaves u unchanged.
    rng = random.Random(101)
    for _ in range(50):
        cpu = rng.randrange(100, 2000, 100)
        mem = rng.randrange(128, 4096, 128)
        base = make_cluster("a", [2000], memory=4096)
        run_pod(base, "p0", "a-n000", cpu, mem)
        base_u = cluster_utilization(base)
        for k in (2, 3, 7):
            scaled = make_cluster("b", [2000] * k, memory=4096)
            for i in range(k):
                run_pod(scaled, f"p{i}", f"b-n{i:03d}", cpu, mem)
            scaled_u = cluster_utilization(scaled)
            assert scaled_u.u == pytest.approx(base_u.u, abs=1e-9)
            assert scaled_u.u_cpu == pytest.approx(base_u.u_cpu, abs=1e-9)
            assert scaled_u.u_mem == pytest.approx(base_u.u_mem, abs=1e-9)


def test_losing_an_idle_node_raises_utilization():
    rng = random.Random(202)
    for _ in range(50):
        nodes = rng.randint(2, 5)
        cluster = make_cluster("a", [2000] * nodes, memory=4096)
        run_pod(cluster, "p0", "a-n000", rng.randrange(100, 2000, 100))
        before = cluster_utilization(cluster).u
        idle = cluster.nodes[f"a-n{nodes - 1:03d}"]
        idle.state = NodeState.RESERVED  # capacity shrinks, demand fixed
        assert cluster_utilization(cluster).u > before


def test_node_utilization_never_exceeds_one_for_scheduled_pods():
    rng = random.Random(303)
    for _ in range(30):
        cluster = make_cluster("a", [rng.choice([1000, 2000, 4000]) for _ in range(3)])
        for i in range(rng.randint(0, 40)):
            pending_pod(cluster, f"p{i:03d}", rng.randrange(100, 1200, 100))
        place_pending(cluster)
        for node in cluster.active_nodes():
            assert node_utilization(node, cluster) <= 1.0 + 1e-12
