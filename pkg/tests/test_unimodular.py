"""Mass transport, duality, delayed walks, and ergodic averaging."""

from fractions import Fraction

import networkx as nx
import pytest

import tilelab.unimodular as um


def families():
    return {name: um.uniform_family(g)
            for name, g in um.bundled_fixtures().items()}


def test_family_weights():
    for fam in families().values():
        um.check_family_weights(fam)
    with pytest.raises(ValueError):
        um.check_family_weights([um.RootedSample(nx.path_graph(2), 0,
                                                 Fraction(1, 3))])


def test_mtp_exact_on_uniform_families():
    for name, fam in families().items():
        for fn, res in um.mtp_battery(fam).items():
            assert res["equal"], f"{name}/{fn}: {res['lhs']} != {res['rhs']}"


def test_mtp_detects_biased_rooting():
    # rooting a path at a fixed endpoint is not unimodular: the
    # neighbor-degree transport must come out asymmetric
    g = nx.path_graph(3)
    for v in g:
        g.nodes[v]["mark"] = 0
    for e in g.edges:
        g.edges[e]["color"] = "a"
    fam = [um.RootedSample(g, 0, Fraction(1))]
    res = um.mtp_battery(fam)
    assert not res["neighbor_degree"]["equal"]


def test_battery_manifest():
    import json
    doc = json.loads(um.battery_manifest())
    assert doc["version"] == um.F_BATTERY_VERSION
    assert len(doc["functions"]) == 8
    assert len({f["name"] for f in doc["functions"]}) == 8


def test_duality_suite():
    for name, g in um.bundled_fixtures().items():
        fam = um.bigraph_fixture(g)
        rerooted = um.reroot_to_H(fam)
        assert sum((w.weight for w in rerooted), Fraction(0)) == 1
        dual = um.dual_family(rerooted)
        for fn, res in um.mtp_battery(um.bigraph_samples(dual)).items():
            assert res["equal"], f"{name}/{fn}"


def test_reroot_zero_mass_raises():
    g = nx.path_graph(4)
    secondary = g.subgraph([0]).copy()
    fam = [um.WeightedBigraph(um.Bigraph(g, secondary, 3), Fraction(1))]
    with pytest.raises(ValueError):
        um.reroot_to_H(fam)


def test_stationarity_exact():
    for name, g in um.bundled_fixtures().items():
        om = um.omega_fixture(g)
        assert um.stationarity_check(g, om), name
    # uniform is not stationary for the delayed walk on an irregular graph
    star = nx.star_graph(3)
    assert not um.stationarity_check(star, star)


def test_delayed_walk_moves_only_on_omega():
    g = um.bundled_fixtures()["cycle6"]
    om = um.omega_fixture(g)
    traj = um.delayed_srw(g, om, 0, 500, seed=1)
    for x, y in zip(traj, traj[1:]):
        assert x == y or om.has_edge(x, y)
    assert traj == um.delayed_srw(g, om, 0, 500, seed=1)
    assert traj != um.delayed_srw(g, om, 0, 500, seed=2)


def cube_setup():
    g = um.bundled_fixtures()["cube"]
    om = um.omega_fixture(g)
    labels = {v: Fraction(i, 8) for i, v in enumerate(sorted(g, key=repr))}
    x0 = sorted(om, key=repr)[0]
    pattern = um._ball(om, x0, 1)
    event = um.CylinderEvent(1, pattern, x0, [(Fraction(0), Fraction(1, 2))])
    return g, om, labels, x0, event


def test_birkhoff_average_within_error_bar():
    g, om, labels, x0, event = cube_setup()
    traj = um.delayed_srw(g, om, x0, 20000, seed=7)
    res = um.birkhoff_average(traj, event, om, labels)
    assert not res["truncated"]
    assert res["sigma_hat"] > 0
    assert abs(res["average"] - res["factored_product"]) <= 3 * res["sigma_hat"]


def test_birkhoff_truncates_at_unsafe_states():
    g, om, labels, x0, event = cube_setup()
    traj = um.delayed_srw(g, om, x0, 2000, seed=3)
    safe = {x0} | set(g.neighbors(x0))
    res = um.birkhoff_average(traj, event, om, labels, safe=safe)
    assert res["truncated"]
    assert res["n"] < len(traj)


def test_cylinder_event_validation():
    with pytest.raises(ValueError):
        um.CylinderEvent(1, None, None, [(Fraction(1, 2), Fraction(3, 2))])
    ev = um.CylinderEvent(0, None, None,
                          [(0, Fraction(1, 4)), (Fraction(1, 2), 1)])
    assert ev.label_measure() == Fraction(3, 4)
    assert ev.label_holds(Fraction(0)) and not ev.label_holds(Fraction(1, 4))


def test_variance_decay():
    g, om, labels, x0, event = cube_setup()
    ensemble = []
    for s in range(55):
        traj = um.delayed_srw(g, om, x0, 400, seed=s)
        ensemble.append(um.birkhoff_average(traj, event, om,
                                            labels)["indicators"])
    out = um.variance_decay(ensemble)
    assert out["passes"] and out["slope"] <= -0.4


def test_variance_decay_requirements():
    with pytest.raises(ValueError):
        um.variance_decay([[0, 1]] * 10)
    degenerate = um.variance_decay([[1] * 100] * 60)
    assert degenerate["degenerate"] and degenerate["passes"]


def test_piece_statistics_flags_outlier():
    table = {k: {"boxes_per_member": 2.0 + 0.01 * k,
                 "elongation": 1.0} for k in range(8)}
    clean = um.piece_statistics(table)
    assert not clean["separated"]
    table["control"] = {"boxes_per_member": 2.0, "elongation": 2.0}
    assert um.piece_statistics(table)["separated"]


def test_pooled_separation():
    tables = []
    for s in range(5):
        table = {k: {"boxes_per_member": 2.0 + 0.01 * (s + k),
                     "elongation": 1.0} for k in range(4)}
        tables.append(um.piece_statistics(table))
    pooled = um.pooled_separation(tables)
    assert not pooled["separated"]
