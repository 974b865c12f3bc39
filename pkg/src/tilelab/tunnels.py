"""Corridor carving between tiles, and the BS(1,2) assembly pipeline.

A tunnel turns two tiles with a common neighbor into face-adjacent tiles:
a thin rectilinear tube is carved out of the middle tile and grafted onto
the first one, leaving everything outside the tube's neighborhood
bit-identical.  In an axis-aligned box tiling, at most four dihedral sectors
meet around any arrangement edge, so a tunnel necessarily creates a triangle
with the tile it passes through; edges whose endpoints have no common
neighbor are therefore reported as unrealizable rather than approximated.
"""

from __future__ import annotations

from fractions import Fraction

from .boxes import BoxSet, contact_faces, polyline_neighborhood
from .bs12 import CayleyWindow, FiberDecomposition, fiber_spanning_tree, fibers
from .dyadic import Dyadic
from .labels import LabelSource
from .partition import Schedule
from .tiler import Tiling, tile_tree
from .trees import RootedTreeWindow


class RoutingError(RuntimeError):
    pass


class UnrealizableEdgeError(RuntimeError):
    """No axis-aligned tunnel exists for this edge (endpoints share no tile)."""


class TunnelPlan:
    def __init__(self, edge, path, gamma, epsilon: Dyadic):
        self.edge = edge
        self.path = list(path)
        self.gamma = [tuple(Dyadic.coerce(c) for c in p) for p in gamma]
        self.epsilon = Dyadic.coerce(epsilon)

    def tube(self) -> BoxSet:
        return polyline_neighborhood(self.gamma, self.epsilon.halve())

    def halo(self) -> BoxSet:
        return polyline_neighborhood(self.gamma, self.epsilon)


def tree_path(tree: RootedTreeWindow, e):
    u, v = e
    return tree.tree_path(u, v)


class EdgeSchedule:
    def __init__(self, buckets: dict):
        self.buckets = buckets  # n -> list of edges

    def ordered(self):
        for n in sorted(self.buckets):
            for e in sorted(self.buckets[n], key=repr):
                yield e


def schedule_edges(tree: RootedTreeWindow, non_tree_edges) -> EdgeSchedule:
    """Bucket each edge by max(path length, 1 + points hanging off the path)."""
    buckets: dict = {}
    for e in non_tree_edges:
        path = tree_path(tree, e)
        on_path = set(path)
        hanging = 0
        for v in path:
            for c in tree.children[v]:
                if c not in on_path:
                    hanging += tree.subtree_size[c]
        n = max(len(path), hanging + 1)
        buckets.setdefault(n, []).append(tuple(e))
    return EdgeSchedule(buckets)


def _seg_points(p, q):
    diff = [a for a in range(3) if p[a] != q[a]]
    if len(diff) > 1:
        raise ValueError("not axis aligned")
    return [p, q]


def _max_clearance(points, region: BoxSet, finest_exp: int = 12) -> Dyadic | None:
    """Largest 2^-j (j <= finest_exp) with the 2^-j-neighborhood of the
    polyline inside the region; exact membership tests."""
    for j in range(1, finest_exp + 1):
        eps = Dyadic(1, j)
        if polyline_neighborhood(points, eps).difference(region).is_empty():
            return eps
    return None


def _center(face_box):
    return tuple((lo + hi).halve() for lo, hi in face_box)


def route_gamma(tiling_tiles: dict, path, occupied=()) -> TunnelPlan:
    """Rectilinear polyline from the first tile of a 3-vertex path, through
    the middle tile, into the last, with certified exact clearance."""
    if len(path) != 3:
        raise UnrealizableEdgeError(
            f"path length {len(path)}: axis-aligned tunnels need a common neighbor"
        )
    d1, d2, d3 = (tiling_tiles[v] for v in path)
    union = d1.union(d2).union(d3)
    faces12 = sorted(contact_faces(d1, d2), key=lambda fa: -fa[1])
    faces23 = sorted(contact_faces(d2, d3), key=lambda fa: -fa[1])
    if not faces12 or not faces23:
        raise RoutingError("consecutive path tiles are not adjacent")

    for f12, _a12 in faces12[:3]:
        for f23, _a23 in faces23[:3]:
            p = _center(f12)
            q = _center(f23)
            for mids in _candidate_mids(p, q):
                pts = [p] + mids + [q]
                pts = _dedupe(pts)
                try:
                    for a, b in zip(pts, pts[1:]):
                        _seg_points(a, b)
                except ValueError:
                    continue
                eps = _max_clearance(pts, union)
                if eps is None:
                    continue
                # extend the ends into the interiors of d1 and d3
                ext = _extend(pts, f12, f23, eps, d1, d3)
                if ext is None:
                    continue
                pts2, eps = ext
                plan = TunnelPlan((path[0], path[-1]), path, pts2, eps)
                if not plan.tube().difference(union).is_empty():
                    continue
                halo = plan.halo()
                if any(not halo.intersection(o).is_empty() for o in occupied):
                    continue
                return plan
    raise RoutingError(f"no certified corridor found along {path!r}")


def _candidate_mids(p, q):
    yield []
    # 3-segment staircases through the two possible corner orders
    for order in ((0, 1, 2), (2, 1, 0), (1, 0, 2), (0, 2, 1), (2, 0, 1), (1, 2, 0)):
        cur = list(p)
        mids = []
        for ax in order:
            if cur[ax] != q[ax]:
                cur = list(cur)
                cur[ax] = q[ax]
                mids.append(tuple(cur))
        if mids and mids[-1] == tuple(q):
            mids = mids[:-1]
        yield mids


def _dedupe(pts):
    out = [pts[0]]
    for p in pts[1:]:
        if tuple(p) != tuple(out[-1]):
            out.append(tuple(p))
    return out


def _extend(pts, f12, f23, eps, d1, d3):
    """Push the polyline endpoints past the contact faces into d1 and d3."""
    def normal_axis(face):
        for a, (lo, hi) in enumerate(face):
            if lo == hi:
                return a
        return None

    out = list(map(tuple, pts))
    for end, face, tile in ((0, f12, d1), (-1, f23, d3)):
        ax = normal_axis(face)
        if ax is None:
            return None
        for sign in (1, -1):
            cand = list(out[end])
            cand[ax] = cand[ax] + eps.halve() if sign > 0 else cand[ax] - eps.halve()
            probe = polyline_neighborhood([tuple(cand)], eps.halve())
            if probe.difference(tile).is_empty():
                if end == 0:
                    out.insert(0, tuple(cand))
                else:
                    out.append(tuple(cand))
                break
        else:
            return None
    return _dedupe(out), eps


def add_edge(tiling: Tiling, plan: TunnelPlan) -> Tiling:
    """Carve the tunnel: the tube leaves the middle tile and joins the first.

    Outside the epsilon-neighborhood of the polyline every box is unchanged;
    the resulting adjacency graph is the old one plus the planned edge.
    """
    path = plan.path
    if len(path) == 2:
        return tiling  # endpoints already adjacent; graph unchanged
    if len(path) != 3:
        raise UnrealizableEdgeError(
            "axis-aligned tunnels require a 3-vertex path (common neighbor)"
        )
    u, mid, w = path
    d1, d2, d3 = tiling.tile_of[u], tiling.tile_of[mid], tiling.tile_of[w]
    tube = plan.tube()
    if not tube.difference(d1.union(d2).union(d3)).is_empty():
        raise RoutingError("tube escapes the path tiles")
    new_d1 = d1.union(tube.difference(d3))
    new_d2 = d2.difference(tube)
    if len(new_d2.components()) != 1:
        raise RoutingError("tunnel would disconnect the middle tile")
    if new_d1.shared_face_area(d3) <= 0:
        raise RoutingError("tunnel failed to reach the far tile")
    if new_d1.shared_face_area(new_d2) <= 0 or new_d2.shared_face_area(d3) <= 0:
        raise RoutingError("tunnel consumed an existing contact face")
    tiles = dict(tiling.tile_of)
    tiles[u] = new_d1
    tiles[mid] = new_d2
    out = Tiling(tiles, tiling.region, tiling.roots, tiling.unresolved,
                 tiling.demoted, tiling.meta)
    return out


def assemble_bs12(window: CayleyWindow, seed: int, stages: int = 2,
                  schedule_n=(1, 6)) -> dict:
    """Window pipeline: fiber spanning tree, partitions, carving, tunnels.

    Returns a dict with the tiling, the fiber decomposition, the spanning
    tree, and an honest report of which non-tree edges were realized as
    tunnels (only edges whose endpoints acquire a common neighbor can be).
    """
    labels = LabelSource(seed)
    fib = fibers(window)
    flagged_tree = fiber_spanning_tree(window, fib, labels)
    # the carve tiles the window tree as a finite tree; truncation flags only
    # qualify the statistics of boundary-adjacent pieces, handled by the
    # fiber interiority criterion downstream
    tree = RootedTreeWindow(flagged_tree.root, flagged_tree.parent)
    sched = Schedule(schedule_n[:stages], 4)
    built = tile_tree(tree, sched, stages, labels)
    tiling, ts, grid = built["tiling"], built["topset"], built["grid"]

    tree_edges = {frozenset((tree.parent[v], v)) for v in tree.order
                  if tree.parent[v] is not None}
    non_tree = []
    for s, t, _c in window.edges:
        e = frozenset((s.key(), t.key()))
        if e not in tree_edges:
            non_tree.append(tuple(sorted(e)))
    sched_edges = schedule_edges(tree, non_tree)

    realized, unrealized = [], []
    occupied = []
    current = tiling
    adj = {frozenset(e) for e in current.adjacency()}
    for e in sched_edges.ordered():
        u, w = e
        if u not in current.tile_of or w not in current.tile_of:
            unrealized.append((e, "endpoint unresolved"))
            continue
        if frozenset(e) in adj:
            realized.append((e, "already adjacent"))
            continue
        commons = [v for v in current.tile_of
                   if frozenset((u, v)) in adj and frozenset((w, v)) in adj]
        if not commons:
            unrealized.append((e, "no common neighbor (axis-aligned obstruction)"))
            continue
        done = False
        for v in sorted(commons, key=repr):
            try:
                plan = route_gamma(current.tile_of, [u, v, w], occupied)
                current = add_edge(current, plan)
                occupied.append(plan.halo())
                adj.add(frozenset(e))
                realized.append((e, f"via {v!r}"))
                done = True
                break
            except (RoutingError, UnrealizableEdgeError):
                continue
        if not done:
            unrealized.append((e, "routing failed"))

    return {
        "tiling": current,
        "fibers": fib,
        "tree": tree,
        "topset": ts,
        "grid": grid,
        "realized": realized,
        "unrealized": unrealized,
    }


def contract_fibers(tiling: Tiling, fib: FiberDecomposition) -> Tiling:
    """One tile per fiber: the union of its members' tiles."""
    pieces = {}
    unresolved = set()
    for fid, members in fib.members.items():
        tiles = [tiling.tile_of[v.key()] for v in members
                 if v.key() in tiling.tile_of]
        if not tiles:
            unresolved.add(fid)
            continue
        acc = tiles[0]
        for t in tiles[1:]:
            acc = acc.union(t)
        if len(acc.components()) != 1:
            # a fragmented window trace cannot make an honest piece
            unresolved.add(("disconnected", fid))
            continue
        pieces[fid] = acc
        if len(tiles) != len(members):
            unresolved.add(("partial", fid))
    return Tiling(pieces, tiling.region, [], unresolved, [],
                  meta={"contracted": True})


_CUBE_SYMMETRIES = None


def cube_symmetries():
    global _CUBE_SYMMETRIES
    if _CUBE_SYMMETRIES is None:
        import itertools

        out = []
        for perm in itertools.permutations((0, 1, 2)):
            for signs in itertools.product((1, -1), repeat=3):
                out.append((perm, signs))
        _CUBE_SYMMETRIES = out
    return _CUBE_SYMMETRIES


def random_isometry(tiling: Tiling, seed: int, precision: int = 10) -> Tiling:
    """Uniform dyadic translation composed with a uniform cube symmetry."""
    labels = LabelSource(seed, salt="isometry")
    syms = cube_symmetries()
    idx = labels.bits("symmetry") % len(syms)
    perm, signs = syms[idx]
    tr = tuple(
        Dyadic(labels.bits(("shift", a)) % (1 << precision), precision)
        for a in range(3)
    )
    return tiling.transform(perm, signs, tr)
