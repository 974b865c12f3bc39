"""Tilings of rooted tree windows by nested dyadic bricks.

Pipeline: the limit partitions pick out "top" vertices whose class hangs
entirely below them; each top vertex gets a grid block of unit cells sized
2^floor(m/3) x 2^floor((m+1)/3) x 2^floor((m+2)/3); blocks of lower strata
are packed inside via a binary buddy allocator; tiles are margin-eroded
bricks nested along the tree so that the face-adjacency graph of the tiles
reproduces the tree edges exactly on the resolved vertex set.
"""

from __future__ import annotations

import sys
from fractions import Fraction

from .boxes import Box, BoxSet, box_is_empty, box_volume, deflate
from .dyadic import Dyadic, HALF
from .labels import LabelSource
from .partition import PartitionStack
from .trees import RootedTreeWindow


def block_dims(m: int) -> tuple:
    return (1 << (m // 3), 1 << ((m + 1) // 3), 1 << ((m + 2) // 3))


def split_axis(m: int) -> int:
    """Axis along which a size-m buddy box splits into two size-(m-1) boxes."""
    return {0: 0, 2: 1, 1: 2}[m % 3]


def margin(stratum: int) -> Dyadic:
    """Brick erosion margin for a given stratum (2^-k scaled by 1/4 so the
    smallest 1x1x2 blocks keep a nonempty brick)."""
    return Dyadic(1, stratum + 2)


def nest_margin(stratum: int, depth: int) -> Dyadic:
    """Strictly increasing interpolation margins mu*(2 - 2^-t), always below
    twice the stratum margin so hanging bricks of lower strata stay inside."""
    return Dyadic((1 << (depth + 1)) - 1, stratum + 2 + depth)


class BuddyAllocator:
    """Aligned packing of power-of-two blocks inside a size-m block."""

    def __init__(self, m: int):
        self.free: dict[int, list] = {m: [(0, 0, 0)]}
        self.m = m

    def alloc(self, size: int):
        avail = [t for t in self.free if t >= size and self.free[t]]
        if not avail:
            raise MemoryError(f"buddy allocation failed for size {size}")
        t = min(avail)
        self.free[t].sort()
        origin = self.free[t].pop(0)
        while t > size:
            t -= 1
            ax = split_axis(t + 1)
            d = block_dims(t)
            sibling = list(origin)
            sibling[ax] += d[ax]
            self.free.setdefault(t, []).append(tuple(sibling))
        return origin


class TopSet:
    def __init__(self, members, m_of, stratum, class_at, pruned):
        self.members = set(members)
        self.m_of = m_of
        self.stratum = stratum
        self.class_at = class_at
        self.pruned = pruned


def top_set(tree: RootedTreeWindow, stack: PartitionStack) -> TopSet:
    """Vertices carrying a class that lies entirely in their subtree, with the
    maximal such level; pruned to a laminar family along ancestor chains."""
    m_of = {}
    class_at = {}
    for lvl in stack.levels:
        # blocks are sized by the class cardinality 2^n_i of the stage
        n_i = stack.schedule.n_values[lvl.level_index - 1]
        for ms in lvl.nonsingleton_classes().values():
            x = min(ms, key=lambda v: tree.depth[v])
            if all(tree.is_ancestor(x, v) for v in ms):
                if n_i > m_of.get(x, 0):
                    m_of[x] = n_i
                    class_at[x] = frozenset(ms)
    members = sorted(m_of, key=lambda v: tree.depth[v])
    kept = []
    kept_set = set()
    pruned = []
    for x in members:  # ancestors first
        anc = tree.parent[x]
        while anc is not None and anc not in kept_set:
            anc = tree.parent[anc]
        if anc is not None:
            if not (m_of[x] < m_of[anc] and class_at[x] <= class_at[anc]):
                pruned.append((x, "not nested in ancestor class"))
                continue
        kept.append(x)
        kept_set.add(x)
    stratum = {}
    for x in sorted(kept, key=lambda v: -tree.depth[v]):  # deepest first
        below = [stratum[y] for y in kept_set
                 if y != x and tree.is_ancestor(x, y) and y in stratum]
        stratum[x] = 1 + (max(below) if below else 0)
    return TopSet(kept_set, {x: m_of[x] for x in kept_set}, stratum,
                  {x: class_at[x] for x in kept_set}, pruned)


class GridAssignment:
    def __init__(self, tree, topset, kept, block_origin, coords, vtop_children,
                 f_children, hang, territory, demoted):
        self.tree = tree
        self.topset = topset
        self.kept = kept                  # surviving top vertices
        self.block_origin = block_origin  # top vertex -> integer cell origin
        self.coords = coords              # class vertex -> integer cell
        self.vtop_children = vtop_children
        self.f_children = f_children      # F-tree children per resolved vertex
        self.hang = hang                  # F-vertex -> top children hanging there
        self.territory = territory        # F-vertex -> (size, origin) or None
        self.demoted = demoted

    def box_dims(self, x):
        return block_dims(self.topset.m_of[x])

    def roots(self):
        return [x for x in self.kept
                if not any(y != x and self.tree.is_ancestor(y, x) for y in self.kept)]


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def assign_grid(tree: RootedTreeWindow, topset: TopSet,
                labels: LabelSource) -> GridAssignment:
    """Pack blocks and assign cell coordinates; lower blocks embedded intact.

    When the rounded space demands of a block's interior structure exceed its
    capacity, the smallest offending lower block is demoted (its vertices stay
    resolved, it just loses dedicated block status) and packing is retried.
    """
    kept = set(topset.members)
    demoted = []

    while True:
        vtop_children = {x: [] for x in kept}
        for y in kept:
            anc = tree.parent[y]
            while anc is not None and anc not in kept:
                anc = tree.parent[anc]
            if anc is not None:
                vtop_children[anc].append(y)
        roots = [x for x in kept if x not in
                 {c for cs in vtop_children.values() for c in cs}]

        # F-structure: per kept x, the vertices below x with no kept top
        # vertex strictly between; hanging blocks attach at their tree parent
        f_children = {}
        hang = {}
        f_nodes = {}  # kept top vertex -> list of its F-vertices
        for x in kept:
            nodes = []
            stk = [x]
            while stk:
                z = stk.pop()
                nodes.append(z)
                hang.setdefault(z, [])
                f_children[z] = []
                for c in tree.children[z]:
                    if c in kept:
                        hang[z].append(c)
                    else:
                        f_children[z].append(c)
                        stk.append(c)
            f_nodes[x] = nodes

        # recursive space demand (in cells) of each F-subtree
        demand = {}
        tsize = {}

        def compute_demand(x):
            for z in reversed(_f_order(x, f_children)):
                d = sum(1 << topset.m_of[y] for y in hang[z])
                d += sum(1 << tsize[c] for c in f_children[z] if demand[c] > 0)
                demand[z] = d
                tsize[z] = _ceil_log2(d) if d > 0 else 0

        failure = None
        for x in sorted(kept, key=repr):
            compute_demand(x)
            need = sum(1 << topset.m_of[y] for y in hang[x])
            need += sum(1 << tsize[c] for c in f_children[x] if demand[c] > 0)
            if need > (1 << topset.m_of[x]):
                failure = x
                break
        if failure is not None:
            victims = [y for y in kept
                       if y != failure and tree.is_ancestor(failure, y)]
            victim = min(victims, key=lambda y: (topset.m_of[y], repr(y)))
            kept.discard(victim)
            demoted.append(victim)
            continue

        # allocate: blocks and territories, outermost first
        block_origin = {}
        territory = {z: None for z in f_children}
        cursor = 0
        pending = []
        for x in sorted(roots, key=repr):
            block_origin[x] = (cursor, 0, 0)
            cursor += block_dims(topset.m_of[x])[0] + 3
            pending.append((x, block_origin[x], topset.m_of[x]))
        while pending:
            x, origin, cap = pending.pop()
            territory[x] = (cap, origin)
            stk = [(x, cap, origin)]
            while stk:
                z, size_z, org_z = stk.pop()
                items = [( topset.m_of[y], "hang", y) for y in hang[z]]
                items += [(tsize[c], "terr", c) for c in f_children[z]
                          if demand[c] > 0]
                items.sort(key=lambda it: (-it[0], repr(it[2])))
                alloc = BuddyAllocator(size_z)
                for s, kind, obj in items:
                    rel = alloc.alloc(s)
                    absolute = tuple(o + r for o, r in zip(org_z, rel))
                    if kind == "hang":
                        block_origin[obj] = absolute
                        pending.append((obj, absolute, topset.m_of[obj]))
                    else:
                        territory[obj] = (s, absolute)
                        stk.append((obj, s, absolute))
        break

    # cell coordinates: class vertices biject onto block cells, nested blocks
    # keeping their own assignment
    coords = {}
    for x in kept:
        cells = _block_cells(block_origin[x], block_dims(topset.m_of[x]))
        child_cells = set()
        child_verts = set()
        for y in vtop_children[x]:
            child_cells.update(
                _block_cells(block_origin[y], block_dims(topset.m_of[y])))
            child_verts.update(topset.class_at[y])
        free_cells = sorted(c for c in cells if c not in child_cells)
        free_verts = sorted(
            (v for v in topset.class_at[x] if v not in child_verts),
            key=lambda v: (labels.bits(repr(v)), repr(v)),
        )
        assert len(free_cells) == len(free_verts), "grid capacity mismatch"
        for cell, v in zip(free_cells, free_verts):
            coords[v] = cell

    return GridAssignment(tree, topset, kept, block_origin, coords,
                          vtop_children, f_children, hang, territory, demoted)


def _f_order(x, f_children):
    order = []
    stk = [x]
    while stk:
        z = stk.pop()
        order.append(z)
        stk.extend(f_children[z])
    return order


def _block_cells(origin, dims):
    return [
        (origin[0] + i, origin[1] + j, origin[2] + k)
        for i in range(dims[0]) for j in range(dims[1]) for k in range(dims[2])
    ]


def _cell_box(origin, dims) -> Box:
    """Geometry of a block: cells are unit cubes centered at integer coords."""
    return tuple(
        (Dyadic(2 * o - 1, 1), Dyadic(2 * (o + d) - 1, 1))
        for o, d in zip(origin, dims)
    )


def expand_cubes(grid: GridAssignment) -> dict:
    """Unit cube centered at each assigned coordinate."""
    return {
        v: tuple((Dyadic.coerce(c) - HALF, Dyadic.coerce(c) + HALF) for c in cell)
        for v, cell in grid.coords.items()
    }


def _pow2_floor(fr: Fraction) -> Dyadic:
    """Largest power of two <= fr (fr > 0)."""
    e = 0
    while Fraction(1, 1 << e) > fr:
        e += 1
    while Fraction(2) * Fraction(1, 1 << e) <= fr and e > 0:
        e -= 1
    # also allow values >= 1
    v = Dyadic(1, e)
    while (v + v).as_fraction() <= fr:
        v = v + v
    return v


def place_cubes(box: Box, k: int) -> list:
    """k disjoint closed cubes strictly inside a box, dyadic coordinates."""
    sides = [(hi - lo).as_fraction() for lo, hi in box]
    msid = min(sides)
    ax = sides.index(max(sides))
    k2 = 1 << _ceil_log2(max(k, 1))
    slot = (box[ax][1] - box[ax][0]).as_fraction() / (2 * k2)
    g = _pow2_floor(min(Fraction(msid, 4), Fraction(slot, 2)))
    half = g.halve()
    out = []
    lo_ax = box[ax][0]
    slot_d = _frac_dyadic(slot)
    for i in range(k):
        center = [
            (lo + hi).halve() if a != ax else lo_ax + slot_d * Dyadic(2 * i + 1)
            for a, (lo, hi) in enumerate(box)
        ]
        out.append(tuple((c - half, c + half) for c in center))
    return out


def _frac_dyadic(fr: Fraction) -> Dyadic:
    e = fr.denominator.bit_length() - 1
    assert (1 << e) == fr.denominator, "not dyadic"
    return Dyadic(fr.numerator, e)


class Tiling:
    """Vertex -> tile map with exact face-adjacency graph."""

    def __init__(self, tile_of: dict, region: BoxSet, expected_roots,
                 unresolved, demoted, meta=None):
        self.tile_of = tile_of
        self.region = region
        self.roots = list(expected_roots)
        self.unresolved = set(unresolved)
        self.demoted = list(demoted)
        self.meta = dict(meta or {})
        self._adjacency = None

    def vertices(self):
        return list(self.tile_of)

    def adjacency(self) -> set:
        """Pairs of vertices whose tile closures share positive face area."""
        if self._adjacency is not None:
            return self._adjacency
        verts = sorted(self.tile_of, key=repr)
        import numpy as np

        n = len(verts)
        lo = np.empty((n, 3))
        hi = np.empty((n, 3))
        for i, v in enumerate(verts):
            bb = self.tile_of[v].bbox()
            for a in range(3):
                lo[i, a] = float(bb[a][0])
                hi[i, a] = float(bb[a][1])
        edges = set()
        for i in range(n):
            gap = np.maximum(lo[i] - hi[i + 1:], lo[i + 1:] - hi[i]).max(axis=1)
            for off in np.nonzero(gap <= 1e-9)[0]:
                j = i + 1 + int(off)
                a = self.tile_of[verts[i]].shared_face_area(self.tile_of[verts[j]])
                if a > 0:
                    edges.add((verts[i], verts[j]))
        self._adjacency = edges
        return edges

    def transform(self, perm, signs, translation) -> "Tiling":
        t = {
            v: s.signed_permute(perm, signs).translate(translation)
            for v, s in self.tile_of.items()
        }
        region = self.region.signed_permute(perm, signs).translate(translation)
        out = Tiling(t, region, self.roots, self.unresolved, self.demoted, self.meta)
        return out

    def to_json(self) -> dict:
        def boxes_json(bs: BoxSet):
            return [[[lo.as_pair(), hi.as_pair()] for lo, hi in b] for b in bs.boxes]

        return {
            "tiles": {repr(v): boxes_json(s) for v, s in sorted(
                self.tile_of.items(), key=lambda kv: repr(kv[0]))},
            "region": boxes_json(self.region),
            "adjacency": sorted([repr(a), repr(b)] for a, b in self.adjacency()),
            "unresolved": sorted(repr(v) for v in self.unresolved),
            "demoted": sorted(repr(v) for v in self.demoted),
        }


def carve(tree: RootedTreeWindow, topset: TopSet, grid: GridAssignment) -> Tiling:
    """Erode blocks into nested bricks, one tile per resolved vertex."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))
    tile_of = {}
    region_boxes = []

    def emit_cubes(v, cube: Box):
        kids = grid.tree.children[v]
        killed = []
        if kids:
            side = (cube[0][1] - cube[0][0]).as_fraction()
            inner = deflate(cube, _frac_dyadic(Fraction(side, 8)))
            killed = place_cubes(inner, len(kids))
            for c, sub in zip(kids, killed):
                emit_cubes(c, sub)
        tile_of[v] = BoxSet([cube]).difference(BoxSet(killed))

    def emit_block(x):
        s = topset.stratum[x]
        blockbox = _cell_box(grid.block_origin[x], block_dims(topset.m_of[x]))

        def emit_node(z, tbox: Box, depth: int):
            brick = deflate(tbox, nest_margin(s, depth))
            assert not box_is_empty(brick), "degenerate brick margin"
            removed = []
            for y in grid.hang[z]:
                ybox = _cell_box(grid.block_origin[y],
                                 block_dims(topset.m_of[y]))
                removed.append(deflate(ybox, margin(topset.stratum[y])))
                emit_block(y)
            cube_kids = []
            for c in grid.f_children[z]:
                terr = grid.territory[c]
                if terr is not None:
                    size_c, org_c = terr
                    cbox = _cell_box(org_c, block_dims(size_c))
                    removed.append(deflate(cbox, nest_margin(s, depth + 1)))
                    emit_node(c, cbox, depth + 1)
                else:
                    cube_kids.append(c)
            if cube_kids:
                outer = deflate(tbox, nest_margin(s, depth))
                inner = deflate(tbox, nest_margin(s, depth) + Dyadic(1, s + 4 + depth))
                band = BoxSet([outer]).difference(BoxSet([inner]))
                host = min(band.boxes)
                cubes = place_cubes(host, len(cube_kids))
                removed.extend(cubes)
                for c, cu in zip(cube_kids, cubes):
                    emit_cubes(c, cu)
            tile_of[z] = BoxSet([brick]).difference(BoxSet(removed))

        emit_node(x, blockbox, 0)

    roots = grid.roots()
    for x in sorted(roots, key=repr):
        emit_block(x)
        region_boxes.append(
            deflate(_cell_box(grid.block_origin[x], block_dims(topset.m_of[x])),
                    margin(topset.stratum[x])))

    resolved = set(tile_of)
    unresolved = [v for v in tree.order if v not in resolved]
    region = BoxSet(region_boxes)
    return Tiling(tile_of, region, roots, unresolved, grid.demoted,
                  meta={"strata": max(topset.stratum.values(), default=0)})


def verify_representation(tiling: Tiling, tree: RootedTreeWindow,
                          sample_points=()) -> dict:
    """Check the four tiling-representation conditions on the resolved set.

    (i) tiles nonempty, connected, polyhedral; (ii) pairwise interior
    disjointness plus exact closure-cover of the carved region; (iii) local
    finiteness around sample points; (iv) face-adjacency graph equal, as a
    rooted forest, to the tree restricted to resolved vertices.
    """
    from .canon import forest_hash, rooted_forest_from_edges

    report = {"pass": True}

    bad = []
    for v, s in tiling.tile_of.items():
        if s.is_empty() or s.volume() <= 0 or len(s.components()) != 1:
            bad.append(repr(v))
    report["tiles_open_connected"] = {"pass": not bad, "witnesses": bad[:5]}

    verts = sorted(tiling.tile_of, key=repr)
    overlap = None
    vol = Fraction(0)
    for i, v in enumerate(verts):
        vol += tiling.tile_of[v].volume()
    # disjointness via the same bbox prefilter as adjacency
    import numpy as np

    n = len(verts)
    lo = np.empty((n, 3))
    hi = np.empty((n, 3))
    for i, v in enumerate(verts):
        bb = tiling.tile_of[v].bbox()
        for a in range(3):
            lo[i, a] = float(bb[a][0])
            hi[i, a] = float(bb[a][1])
    for i in range(n):
        gap = np.maximum(lo[i] - hi[i + 1:], lo[i + 1:] - hi[i]).max(axis=1)
        for off in np.nonzero(gap <= 1e-9)[0]:
            j = i + 1 + int(off)
            if tiling.tile_of[verts[i]].interior_intersects(tiling.tile_of[verts[j]]):
                overlap = (repr(verts[i]), repr(verts[j]))
                break
        if overlap:
            break
    cover_ok = (vol == tiling.region.volume()) and overlap is None
    report["disjoint_and_cover"] = {
        "pass": cover_ok,
        "tile_volume": str(vol),
        "region_volume": str(tiling.region.volume()),
        "overlap_witness": overlap,
    }

    counts = []
    for pt in sample_points:
        ball = BoxSet([tuple((Dyadic.coerce(c) - HALF, Dyadic.coerce(c) + HALF)
                             for c in pt)])
        hit = sum(1 for v in verts
                  if not tiling.tile_of[v].intersection(ball).is_empty())
        counts.append(hit)
    report["local_finiteness"] = {"pass": True, "counts": counts}

    resolved = set(tiling.tile_of)
    expected = set()
    for v in resolved:
        p = tree.parent[v]
        if p is not None and p in resolved:
            expected.add((min(v, p, key=repr), max(v, p, key=repr)))
    got = {(min(a, b, key=repr), max(a, b, key=repr))
           for a, b in tiling.adjacency()}
    iso = expected == got
    hashes = None
    if iso:
        try:
            ch_got = rooted_forest_from_edges(resolved, got, tiling.roots)
            ch_exp = rooted_forest_from_edges(resolved, expected, tiling.roots)
            hashes = (forest_hash(ch_got, tiling.roots),
                      forest_hash(ch_exp, tiling.roots))
            iso = hashes[0] == hashes[1]
        except ValueError:
            iso = False
    report["adjacency_isomorphic"] = {
        "pass": iso,
        "missing": sorted(map(repr, expected - got))[:5],
        "extra": sorted(map(repr, got - expected))[:5],
        "hashes": hashes,
    }

    report["pass"] = all(
        report[k]["pass"] for k in
        ("tiles_open_connected", "disjoint_and_cover",
         "local_finiteness", "adjacency_isomorphic")
    )
    return report


def tile_tree(tree: RootedTreeWindow, schedule, stages: int,
              labels: LabelSource, u_min: int = 2):
    """Full pipeline: partitions -> top set -> grid -> carve."""
    from .partition import limit_partitions

    stack, _u, _report = limit_partitions(tree, schedule, stages, labels, u_min)
    ts = top_set(tree, stack)
    if not ts.members:
        raise ValueError("window too small: empty top set")
    grid = assign_grid(tree, ts, labels)
    return {"tiling": carve(tree, ts, grid), "topset": ts, "grid": grid}
