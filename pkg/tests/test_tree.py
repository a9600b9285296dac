import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeshift.errors import (CapacityError, CycleDetected, InteriorLeaf, MultipleParents,
                              NotConnected, TreeSpecError)
from treeshift.tree import (DirectedTree, build_explicit, build_kary, build_random, build_ray,
                            build_t20, from_spec)


def test_kary_one_is_a_ray():
    t = build_kary(1, 5)
    assert t.n_vertices == 6
    assert t.branching_vertices() == set()
    assert t.isomorphic(build_ray(5))


def test_ternary_depth_two():
    t = build_kary(3, 2)
    assert t.n_vertices == 13
    assert [t.label(v) for v in t.children(0)] == [(1, 1), (1, 2), (1, 3)]
    assert t.label(0) == (0, 1)


def test_binary_slices_by_traversal():
    t = build_kary(2, 10)
    assert t.n_vertices == 2047
    # count each slice by walking children level by level
    level, sizes = [0], [1]
    while True:
        level = [c for u in level for c in t.children(u)]
        if not level:
            break
        sizes.append(len(level))
    assert sizes == [2 ** k for k in range(11)]
    assert list(t.slice_sizes) == sizes


def test_kary_labels_follow_the_level_index():
    t = build_kary(3, 3)
    for v in range(1, t.n_vertices):
        k, l = t.label(v)
        pk, pl = t.label(int(t.parent[v]))
        assert k == pk + 1
        assert (l - 1) // 3 + 1 == pl


def test_capacity():
    with pytest.raises(CapacityError):
        build_kary(10, 10, max_vertices=1000)


def test_t20_shapes():
    t1 = build_t20(1)
    assert t1.n_vertices == 3 and len(t1.children(0)) == 2
    t3 = build_t20(3)
    assert t3.n_vertices == 7
    assert sorted(t3.label(v) for v in t3.frontier) == [(1, 3), (2, 3)]
    assert build_t20(100).branching_vertices() == {0}


def test_explicit_ray():
    t = build_explicit([(0, 1), (1, 2)], depth=2)
    assert t.n_vertices == 3 and t.max_depth == 2
    assert t.isomorphic(build_ray(2))


@pytest.mark.parametrize("edges, exc", [
    ([(0, 1), (0, 2), (1, 2)], MultipleParents),
    ([(0, 1), (1, 2), (2, 1)], MultipleParents),
    ([(0, 1), (1, 1)], CycleDetected),
    ([(0, 1), (2, 3), (3, 2)], CycleDetected),
    ([(0, 1), (2, 3)], NotConnected),
    ([(0, 1), (0, 2), (1, 3)], InteriorLeaf),
])
def test_explicit_rejects(edges, exc):
    with pytest.raises(exc):
        build_explicit(edges, depth=2)


def test_explicit_errors_are_value_errors():
    with pytest.raises(ValueError):
        build_explicit([(0, 1), (0, 2), (1, 2)])


def test_t20_spec_matches_builder():
    spec = {"kind": "explicit", "depth": 3,
            "edges": [[0, 1], [0, 2], [1, 3], [2, 4], [3, 5], [4, 6]]}
    assert from_spec(spec).isomorphic(build_t20(3))


def test_unknown_kind():
    with pytest.raises(TreeSpecError):
        from_spec({"kind": "banana", "depth": 2})


def test_descendants():
    k3 = build_kary(3, 3)
    assert k3.descendants_n(0, 0).vertices == frozenset({0})
    cone = k3.descendants_n(0, 2)
    assert len(cone.vertices) == 13 and not cone.truncated
    t = build_t20(5)
    got = t.descendants_n(t.vertex((1, 1)), 2).vertices
    assert got == {t.vertex((1, j)) for j in (1, 2, 3)}
    assert build_t20(2).descendants_n(0, 5).truncated


def test_paths():
    assert len(build_ray(7).enumerate_paths(10).paths) == 1
    pl = build_t20(6).enumerate_paths(10)
    assert len(pl.paths) == 2 and pl.complete
    pl = build_kary(2, 4).enumerate_paths(100)
    assert len(pl.paths) == 16 and pl.complete
    capped = build_kary(2, 4).enumerate_paths(5)
    assert len(capped.paths) == 5 and not capped.complete
    for p in pl.paths:
        assert p.vertices[0] == 0 and p.length == 4


def test_paths_share_prefix_above_branching():
    t = build_t20(8)
    a, b = t.enumerate_paths(2).paths
    assert a.vertices[0] == b.vertices[0]
    assert a.vertices[1] != b.vertices[1]


def test_branching_vertices_kary():
    t = build_kary(3, 3)
    assert t.branching_vertices() == set(np.flatnonzero(t.depth < 3).tolist())
    assert len(t.branching_vertices()) == 13


def test_lambda_like_structure_invariants():
    t = build_random(7, 6)
    for v in range(1, t.n_vertices):
        assert v in t.children(int(t.parent[v]))
        assert t.depth[v] == t.depth[t.parent[v]] + 1
    kids = np.sort(t.child_idx)
    assert kids.tolist() == list(range(1, t.n_vertices))


def test_width_capped_frontier():
    t = build_kary(4, 50, width=4)
    assert t.max_depth == 50
    assert not t.slices_complete
    assert set(t.frontier.tolist()) >= set(t.slice(50).tolist())
    assert t.cone_height[0] == 2  # 4 + 16 stored, only 4 of the 16 expanded
    assert t.expanded.sum() == 1 + 4 * 49


def test_cone_height_on_full_tree():
    t = build_kary(2, 5)
    assert np.array_equal(t.cone_height, 5 - t.depth)


def test_truncate():
    t = build_t20(10).truncate(4)
    assert t.n_vertices == 9 and t.max_depth == 4
    assert t.isomorphic(build_t20(4))
    assert t.label(int(t.frontier[0]))[1] == 4


def test_serialize_is_canonical_json():
    t = build_t20(3)
    text = t.serialize()
    assert text.endswith("\n")
    spec = json.loads(text)
    assert spec["kind"] == "explicit" and spec["depth"] == 3
    assert spec["edges"][:2] == [[0, 1], [0, 2]]


@given(seed=st.integers(0, 10_000), depth=st.integers(1, 7), maxc=st.integers(1, 4))
def test_serialize_round_trip(seed, depth, maxc):
    t = build_random(seed, depth, max_children=maxc, max_vertices=400)
    back = build_explicit(json.loads(t.serialize())["edges"], depth=depth)
    assert back.isomorphic(t)
    assert back.serialize() == t.serialize()


@given(seed=st.integers(0, 10_000), depth=st.integers(1, 8))
def test_slices_cover_every_vertex(seed, depth):
    t = build_random(seed, depth, max_vertices=500)
    assert int(t.slice_sizes.sum()) == t.n_vertices
    assert all((t.depth[t.slice(k)] == k).all() for k in range(depth + 1))


def test_constructor_validation():
    with pytest.raises(TreeSpecError):
        DirectedTree([0, 0])
    with pytest.raises(TreeSpecError):
        DirectedTree([-1, 0, 1], max_depth=1)
