"""Rooted tree windows and the synthetic generators."""

import pytest
from hypothesis import given, strategies as st

from tilelab.trees import RootedTreeWindow, synthetic_tree


def test_path_shape():
    t = synthetic_tree("path(7)")
    assert len(t) == 7
    assert t.max_degree() == 2
    assert len(t.leaves()) == 1  # the root is not counted as a leaf end


def test_canopy_sizes():
    t = synthetic_tree("canopy(3,2)")
    assert len(t) == 2 ** 4 - 1
    assert t.max_degree() == 3
    t3 = synthetic_tree("canopy(2,3)")
    assert len(t3) == 1 + 3 + 9
    assert synthetic_tree("binary-canopy(4)").max_degree() == 3


def test_spine_shape():
    t = synthetic_tree("spine(5,2)")
    assert len(t) == 5 + 10
    assert t.max_degree() == 4  # interior spine: parent + next + two arms


@given(st.integers(min_value=2, max_value=200), st.integers(0, 10))
def test_random_tree_degree_bound(n, seed):
    t = synthetic_tree(f"random({n},4)", seed=seed)
    assert len(t) == n
    assert t.max_degree() <= 4
    # every vertex reaches the root
    for v in t.vertices():
        assert t.path_to_root(v)[-1] == t.root


def test_random_tree_seeded():
    a = synthetic_tree("random(60,3)", seed=5)
    b = synthetic_tree("random(60,3)", seed=5)
    assert a.parent == b.parent
    assert a.parent != synthetic_tree("random(60,3)", seed=6).parent


def test_euler_intervals_encode_ancestry():
    t = synthetic_tree("random(80,4)", seed=1)
    for v in t.vertices():
        for u in t.path_to_root(v):
            assert t.is_ancestor(u, v)
        anc = set(t.path_to_root(v))
        for u in t.vertices():
            assert t.is_ancestor(u, v) == (u in anc)


def test_tree_path_endpoints():
    t = synthetic_tree("canopy(3,2)")
    verts = t.vertices()
    u, v = verts[3], verts[11]
    p = t.tree_path(u, v)
    assert p[0] == u and p[-1] == v
    # consecutive entries are parent/child pairs
    for a, b in zip(p, p[1:]):
        assert t.parent.get(a) == b or t.parent.get(b) == a


def test_subtree_and_restriction():
    t = synthetic_tree("canopy(2,2)")
    child = t.children[t.root][0]
    sub = set(t.subtree(child))
    assert all(t.is_ancestor(child, v) for v in sub)
    keep = set(t.path_to_root(child)) | sub
    r = t.restricted(keep)
    assert set(r.vertices()) == keep
    assert r.root == t.root


def test_restriction_must_be_connected():
    t = synthetic_tree("path(5)")
    with pytest.raises(ValueError):
        t.restricted({0, 2})


def test_bad_descriptor():
    with pytest.raises(ValueError):
        synthetic_tree("mystery(3)")
    with pytest.raises(ValueError):
        synthetic_tree("path")
