"""Rooted leafless directed trees, truncated at a finite depth horizon.

Vertices are dense integer ids with the root at 0.  Children are kept in a
CSR layout (``child_ptr``/``child_idx``) in insertion order, so every
traversal in the package is deterministic.

A vertex whose children are not stored is a *frontier* vertex.  Normally the
frontier is exactly the depth-``max_depth`` slice; width-capped builders
(:func:`build_kary` with ``width``) also prune vertices above the horizon,
and those join the frontier.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    CapacityError,
    CycleDetected,
    InteriorLeaf,
    MultipleParents,
    NotConnected,
    TreeSpecError,
)

DEFAULT_MAX_VERTICES = 2_000_000


@dataclass(frozen=True)
class Path:
    """Initial segment of a path: one vertex per depth, starting at the root."""

    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


class Cone(NamedTuple):
    vertices: frozenset
    truncated: bool


class PathList(NamedTuple):
    paths: list
    complete: bool


def _readonly(a, dtype=None):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


class DirectedTree:
    """Immutable truncated rooted tree.

    Parameters
    ----------
    parent : sequence of int
        ``parent[v]`` for every vertex, ``-1`` for the root (vertex 0).
    order : sequence of int, optional
        Insertion order of the non-root vertices; sibling order follows it.
        Defaults to increasing id.
    expanded : sequence of bool, optional
        Which vertices have their children stored.  Defaults to
        ``depth < max_depth``.
    """

    def __init__(self, parent, *, order=None, max_depth=None, expanded=None,
                 labels=None, kind="explicit", params=None):
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.size
        if n == 0 or parent[0] != -1:
            raise TreeSpecError("vertex 0 must be the root")
        nonroot = np.arange(1, n) if order is None else np.asarray(order, dtype=np.int64)
        if nonroot.size != n - 1:
            raise TreeSpecError("order must list every non-root vertex once")
        pos = np.argsort(parent[nonroot], kind="stable")
        child_idx = nonroot[pos]
        counts = np.bincount(parent[nonroot], minlength=n) if n > 1 else np.zeros(n, np.int64)
        child_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=child_ptr[1:])

        depth = np.full(n, -1, dtype=np.int64)
        depth[0] = 0
        queue = np.array([0])
        while queue.size:
            kids = child_idx[_expand_ranges(child_ptr, queue)]
            depth[kids] = depth[parent[kids]] + 1
            queue = kids
        if (depth < 0).any():
            raise NotConnected("some vertices are not reachable from the root")

        if max_depth is None:
            max_depth = int(depth.max())
        if depth.max() > max_depth:
            raise TreeSpecError(f"vertices below the horizon {max_depth}")
        if expanded is None:
            expanded = depth < max_depth
        expanded = np.asarray(expanded, dtype=bool)
        childless = counts == 0
        bad = np.flatnonzero(expanded & childless)
        if bad.size:
            raise InteriorLeaf(f"vertex {int(bad[0])} at depth {int(depth[bad[0]])} has no child")
        if (~expanded & ~childless).any():
            raise TreeSpecError("frontier vertices must not have stored children")

        self.parent = _readonly(parent)
        self.child_ptr = _readonly(child_ptr)
        self.child_idx = _readonly(child_idx)
        self.depth = _readonly(depth)
        self.expanded = _readonly(expanded)
        self.max_depth = int(max_depth)
        self.labels = None if labels is None else tuple(labels)
        self.kind = kind
        self.params = dict(params or {})

    # -- basic queries -------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return int(self.parent.size)

    def __len__(self):
        return self.n_vertices

    root = 0

    def children(self, u: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[u]:self.child_ptr[u + 1]]

    def parent_of(self, v: int):
        p = int(self.parent[v])
        return None if p < 0 else p

    @cached_property
    def n_children(self) -> np.ndarray:
        return _readonly(np.diff(self.child_ptr))

    @cached_property
    def is_frontier(self) -> np.ndarray:
        return _readonly(~self.expanded)

    @cached_property
    def frontier(self) -> np.ndarray:
        return _readonly(np.flatnonzero(~self.expanded))

    @cached_property
    def slices_complete(self) -> bool:
        """True when every frontier vertex sits at the horizon."""
        return bool((self.depth[self.frontier] == self.max_depth).all())

    @cached_property
    def slice_sizes(self) -> np.ndarray:
        return _readonly(np.bincount(self.depth, minlength=self.max_depth + 1))

    def slice(self, k: int) -> np.ndarray:
        return self.levels[k] if 0 <= k <= self.max_depth else np.zeros(0, np.int64)

    @cached_property
    def levels(self) -> tuple:
        """Vertex ids grouped by depth, each group in increasing id order."""
        order = np.argsort(self.depth, kind="stable")
        cuts = np.cumsum(self.slice_sizes)[:-1]
        return tuple(_readonly(a) for a in np.split(order, cuts))

    @cached_property
    def cone_height(self) -> np.ndarray:
        """Number of complete stored levels below each vertex."""
        h = np.zeros(self.n_vertices, dtype=np.int64)
        for d in range(self.max_depth - 1, -1, -1):
            us = np.flatnonzero((self.depth == d) & self.expanded)
            if us.size == 0:
                continue
            kid_h = h[self.child_idx[_expand_ranges(self.child_ptr, us)]]
            starts = np.concatenate(([0], np.cumsum(self.n_children[us])[:-1]))
            h[us] = 1 + np.minimum.reduceat(kid_h, starts)
        return _readonly(h)

    def label(self, v: int):
        return self.labels[v] if self.labels is not None else v

    @cached_property
    def _label_index(self):
        return {lab: i for i, lab in enumerate(self.labels)} if self.labels is not None else {}

    def vertex(self, label) -> int:
        """Vertex id for a family label such as ``(2, 3)``."""
        if self.labels is None:
            return int(label)
        return self._label_index[tuple(label)]

    def ancestors(self, v: int) -> list[int]:
        """``[v, pa(v), ..., root]``."""
        out = [int(v)]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
        return out

    # -- tree operations ---------------------------------------------
    def descendants_n(self, u: int, n: int) -> Cone:
        """Vertices ``v`` with ``pa^k(v) = u`` for some ``0 <= k <= n``."""
        seen = [int(u)]
        level = [int(u)]
        truncated = False
        for _ in range(n):
            nxt = []
            for x in level:
                if not self.expanded[x]:
                    truncated = True
                nxt.extend(int(c) for c in self.children(x))
            if not nxt:
                break
            seen.extend(nxt)
            level = nxt
        return Cone(frozenset(seen), truncated)

    def enumerate_paths(self, budget: int) -> PathList:
        """Maximal stored root-to-frontier paths in DFS order, at most ``budget``."""
        if budget < 1:
            raise ValueError("budget must be positive")
        paths: list[Path] = []
        stack = [(0,)]
        while stack:
            prefix = stack.pop()
            last = prefix[-1]
            kids = self.children(last)
            if kids.size == 0:
                if len(paths) == budget:
                    return PathList(paths, False)
                paths.append(Path(prefix))
                continue
            for c in kids[::-1]:
                stack.append(prefix + (int(c),))
        return PathList(paths, True)

    def branching_vertices(self) -> set:
        return set(np.flatnonzero(self.n_children >= 2).tolist())

    # -- canonical form / serialization --------------------------------
    def bfs_order(self) -> np.ndarray:
        order = [0]
        q = deque([0])
        while q:
            u = q.popleft()
            for c in self.children(u):
                order.append(int(c))
                q.append(int(c))
        return np.asarray(order, dtype=np.int64)

    def canonical_form(self) -> tuple:
        """Ordered-tree invariant: child counts and frontier flags in BFS order."""
        order = self.bfs_order()
        return (self.max_depth, tuple(self.n_children[order].tolist()),
                tuple(self.expanded[order].tolist()))

    def isomorphic(self, other: "DirectedTree") -> bool:
        return self.canonical_form() == other.canonical_form()

    def truncate(self, depth: int) -> "DirectedTree":
        """The subtree of vertices at depth ``<= depth``, ids kept in increasing order."""
        if depth >= self.max_depth:
            return self
        keep = self.depth <= depth
        new_id = np.cumsum(keep) - 1
        old = np.flatnonzero(keep)
        parent = np.where(self.parent[old] < 0, -1, new_id[np.maximum(self.parent[old], 0)])
        child_pos = np.empty(self.n_vertices, dtype=np.int64)
        child_pos[self.child_idx] = np.arange(self.child_idx.size)
        order = old[1:][np.argsort(child_pos[old[1:]], kind="stable")]
        labels = None if self.labels is None else [self.labels[v] for v in old]
        return DirectedTree(parent, order=new_id[order], max_depth=depth,
                            expanded=self.expanded[old] & (self.depth[old] < depth),
                            labels=labels, kind=self.kind, params=self.params)

    def to_spec(self) -> dict:
        order = self.bfs_order()
        relabel = np.empty(self.n_vertices, dtype=np.int64)
        relabel[order] = np.arange(self.n_vertices)
        edges = [[int(relabel[self.parent[v]]), int(relabel[v])] for v in order[1:]]
        return {"kind": "explicit", "depth": self.max_depth, "edges": edges}

    def serialize(self) -> str:
        return json.dumps(self.to_spec(), separators=(",", ":"), ensure_ascii=False) + "\n"

    def __repr__(self):
        return f"DirectedTree(kind={self.kind!r}, n_vertices={self.n_vertices}, max_depth={self.max_depth})"


def _expand_ranges(ptr, us):
    starts = ptr[us]
    lens = ptr[us + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return offs + np.arange(total)


def _check_capacity(n, max_vertices):
    if n > max_vertices:
        raise CapacityError(f"{n} vertices exceeds the budget of {max_vertices}")


# -- builders -----------------------------------------------------------

def build_kary(kappa: int, depth: int, *, width: int | None = None,
               max_vertices: int = DEFAULT_MAX_VERTICES) -> DirectedTree:
    """Rooted ``kappa``-ary tree truncated at ``depth``.

    Vertex ``(k, l)`` (level ``k``, 1-based position ``l``) has children
    ``(k+1, kappa*(l-1)+1) ... (k+1, kappa*l)``.  With ``width`` only the
    first ``width`` vertices of each level are expanded; the rest become
    frontier vertices, which keeps deep κ-ary scans within budget.
    """
    if kappa < 1 or depth < 1:
        raise ValueError("kappa and depth must be positive")
    if width is not None and width < 1:
        raise ValueError("width must be positive")
    sizes = [1]
    for _ in range(depth):
        grow = sizes[-1] if width is None else min(sizes[-1], width)
        sizes.append(grow * kappa)
        _check_capacity(sum(sizes), max_vertices)
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    n = int(offsets[-1])
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    expanded = np.zeros(n, dtype=bool)
    labels = []
    for k, size in enumerate(sizes):
        pos = np.arange(size)
        if k > 0:
            parent[offsets[k]:offsets[k + 1]] = offsets[k - 1] + pos // kappa
        if k < depth:
            limit = size if width is None else min(size, width)
            expanded[offsets[k]:offsets[k] + limit] = True
        labels.extend((k, int(l) + 1) for l in pos)
    return DirectedTree(parent, max_depth=depth, expanded=expanded, labels=labels,
                        kind="kary", params={"kappa": kappa, "width": width})


def build_ray(depth: int, **kw) -> DirectedTree:
    t = build_kary(1, depth, **kw)
    t.kind = "ray"
    return t


def build_t20(depth: int, *, max_vertices: int = DEFAULT_MAX_VERTICES) -> DirectedTree:
    """Root ``(0, 0)`` with two rays ``(1, j)`` and ``(2, j)``, ``j >= 1``."""
    if depth < 1:
        raise ValueError("depth must be positive")
    n = 2 * depth + 1
    _check_capacity(n, max_vertices)
    # BFS ids: (i, j) -> 2j - 2 + i
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    parent[1:3] = 0
    parent[3:] = np.arange(1, n - 2)
    labels = [(0, 0)] + [(i, j) for j in range(1, depth + 1) for i in (1, 2)]
    return DirectedTree(parent, max_depth=depth, labels=labels, kind="t20")


def build_explicit(edges: Iterable[Sequence[int]], depth: int | None = None,
                   *, max_vertices: int = DEFAULT_MAX_VERTICES) -> DirectedTree:
    """Validate ``(parent, child)`` edges rooted at 0 and build the tree."""
    edges = [(int(p), int(c)) for p, c in edges]
    ids = {0}
    for p, c in edges:
        ids.update((p, c))
    n = len(ids)
    _check_capacity(n, max_vertices)
    if ids != set(range(n)) or min(ids) < 0:
        raise TreeSpecError("vertex ids must be contiguous 0..n-1")
    parent = np.full(n, -1, dtype=np.int64)
    order = []
    for p, c in edges:
        if p == c or c == 0:
            raise CycleDetected(f"edge ({p}, {c}) closes a cycle through the root or itself")
        if parent[c] >= 0:
            raise MultipleParents(f"vertex {c} has more than one parent")
        parent[c] = p
        order.append(c)
    # cycle vs disconnection: walk parents from every vertex
    state = np.zeros(n, dtype=np.int8)  # 0 unknown, 1 on stack, 2 reaches root
    state[0] = 2
    for v in range(n):
        trail = []
        x = v
        while state[x] == 0:
            state[x] = 1
            trail.append(x)
            x = int(parent[x])
            if x < 0:
                raise NotConnected(f"vertex {trail[-1]} has no parent and is not the root")
        if state[x] == 1:
            raise CycleDetected(f"cycle through vertex {x}")
        state[trail] = 2
    return DirectedTree(parent, order=order, max_depth=depth, kind="explicit")


def build_random(seed, depth: int, *, max_children: int = 3,
                 max_vertices: int = 2000) -> DirectedTree:
    """Random leafless tree: each interior vertex gets 1..max_children children."""
    rng = np.random.default_rng(seed)
    if max_vertices < depth + 1:
        raise CapacityError("budget too small for a leafless tree of this depth")
    parent = [-1]
    level = [0]
    for d in range(depth):
        remaining = depth - d
        # every next-level vertex must still be extendable as a ray to the horizon
        width_cap = (max_vertices - len(parent)) // remaining
        extras = rng.integers(0, max_children, size=len(level))
        nxt = []
        for i, u in enumerate(level):
            room = width_cap - len(nxt) - (len(level) - i)
            for _ in range(1 + max(0, min(int(extras[i]), room))):
                parent.append(u)
                nxt.append(len(parent) - 1)
        level = nxt
    return DirectedTree(np.asarray(parent), max_depth=depth, kind="random",
                        params={"seed": seed if isinstance(seed, int) else None})


def from_spec(spec: dict, *, max_vertices: int = DEFAULT_MAX_VERTICES) -> DirectedTree:
    """Build a tree from a TreeSpec mapping (``kind``: kary, t20, ray, explicit)."""
    kind = spec.get("kind")
    depth = spec.get("depth")
    if kind == "kary":
        return build_kary(int(spec["kappa"]), int(depth), width=spec.get("width"),
                          max_vertices=max_vertices)
    if kind == "t20":
        return build_t20(int(depth), max_vertices=max_vertices)
    if kind == "ray":
        return build_ray(int(depth), max_vertices=max_vertices)
    if kind == "explicit":
        return build_explicit(spec["edges"], None if depth is None else int(depth),
                              max_vertices=max_vertices)
    raise TreeSpecError(f"unknown tree kind {kind!r}")
