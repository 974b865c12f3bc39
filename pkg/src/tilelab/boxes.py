"""Exact axis-aligned box sets over dyadic coordinates.

A :class:`BoxSet` is a finite union of closed axis-aligned boxes with
:class:`~tilelab.dyadic.Dyadic` corner coordinates, kept in a canonical form:
the maximal slab decomposition obtained by merging grid cells along the last
axis first, then grouping identical sections along earlier axes.  The
canonical form depends only on the point set, so equality of canonical box
lists is equality of regions.

All boolean operations are *regularized*: results are closures of open sets,
so lower-dimensional slivers never survive.  The kernel is dimension-generic
(the fractal module uses it in 2D, everything else in 3D).
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dyadic import Dyadic, ZERO

Box = tuple  # tuple of (lo, hi) Dyadic pairs, one per axis


def box_of(*intervals) -> Box:
    out = []
    for lo, hi in intervals:
        out.append((Dyadic.coerce(lo), Dyadic.coerce(hi)))
    return tuple(out)


def cube_at(center: Sequence, half: Dyadic) -> Box:
    h = Dyadic.coerce(half)
    return tuple((Dyadic.coerce(c) - h, Dyadic.coerce(c) + h) for c in center)


def box_is_empty(box: Box) -> bool:
    return any(lo >= hi for lo, hi in box)


def box_volume(box: Box) -> Fraction:
    v = Fraction(1)
    for lo, hi in box:
        v *= (hi - lo).as_fraction()
    return v


def inflate(box: Box, eps) -> Box:
    e = Dyadic.coerce(eps)
    return tuple((lo - e, hi + e) for lo, hi in box)


def deflate(box: Box, eps) -> Box:
    e = Dyadic.coerce(eps)
    return tuple((lo + e, hi - e) for lo, hi in box)


def box_contains_box(outer: Box, inner: Box) -> bool:
    return all(ol <= il and ih <= oh for (ol, oh), (il, ih) in zip(outer, inner))


def boxes_bbox(boxes: Iterable[Box]) -> Box | None:
    boxes = list(boxes)
    if not boxes:
        return None
    dim = len(boxes[0])
    return tuple(
        (min((b[a][0] for b in boxes), key=lambda d: d.as_fraction()),
         max((b[a][1] for b in boxes), key=lambda d: d.as_fraction()))
        for a in range(dim)
    )


def _axis_grid(boxes: Sequence[Box], axis: int) -> list[Dyadic]:
    vals = {b[axis][0].as_fraction(): b[axis][0] for b in boxes}
    vals.update({b[axis][1].as_fraction(): b[axis][1] for b in boxes})
    return [vals[k] for k in sorted(vals)]


def _fill(arr: np.ndarray, grids: list[list[Fraction]], boxes: Sequence[Box], value=True):
    """Mark cells covered by ``boxes``; box edges must lie on the grids."""
    for b in boxes:
        idx = []
        for a, (lo, hi) in enumerate(b):
            i0 = bisect_left(grids[a], lo.as_fraction())
            i1 = bisect_left(grids[a], hi.as_fraction())
            idx.append(slice(i0, i1))
        arr[tuple(idx)] = value


def _extract(arr: np.ndarray, grids_dy: list[list[Dyadic]]) -> list[Box]:
    """Canonical maximal merge: runs along the last axis, grouping outward."""

    def structure(sub: np.ndarray):
        if sub.ndim == 1:
            runs = []
            i = 0
            n = sub.shape[0]
            while i < n:
                if sub[i]:
                    j = i
                    while j < n and sub[j]:
                        j += 1
                    runs.append((i, j))
                    i = j
                else:
                    i += 1
            return tuple(runs)
        groups = []
        prev = None
        start = 0
        for i in range(sub.shape[0]):
            s = structure(sub[i])
            if s != prev:
                if prev is not None and prev != ():
                    groups.append((start, i, prev))
                prev = s
                start = i
        if prev is not None and prev != ():
            groups.append((start, sub.shape[0], prev))
        return tuple(groups)

    def emit(struct, depth: int, prefix: list, out: list):
        g = grids_dy[depth]
        if depth == len(grids_dy) - 1:
            for i0, i1 in struct:
                out.append(tuple(prefix + [(g[i0], g[i1])]))
        else:
            for i0, i1, sub in struct:
                emit(sub, depth + 1, prefix + [(g[i0], g[i1])], out)

    out: list[Box] = []
    emit(structure(arr), 0, [], out)
    return out


class BoxSet:
    """Canonical finite union of closed dyadic boxes."""

    __slots__ = ("boxes", "dim")

    def __init__(self, boxes: Sequence[Box], _canonical: bool = False):
        boxes = [b for b in boxes if not box_is_empty(b)]
        if boxes and not _canonical:
            boxes = self._canonicalize(boxes)
        dims = {len(b) for b in boxes}
        if len(dims) > 1:
            raise ValueError("mixed dimensions")
        object.__setattr__(self, "boxes", tuple(boxes))
        object.__setattr__(self, "dim", dims.pop() if dims else 0)

    def __setattr__(self, *a):
        raise AttributeError("BoxSet is immutable")

    @staticmethod
    def _canonicalize(boxes: Sequence[Box]) -> list[Box]:
        dim = len(boxes[0])
        grids_dy = [_axis_grid(boxes, a) for a in range(dim)]
        grids = [[d.as_fraction() for d in g] for g in grids_dy]
        arr = np.zeros([max(len(g) - 1, 0) for g in grids], dtype=bool)
        if arr.size == 0:
            return []
        _fill(arr, grids, boxes)
        return _extract(arr, grids_dy)

    @staticmethod
    def empty(dim: int = 3) -> "BoxSet":
        s = BoxSet([])
        object.__setattr__(s, "dim", dim)
        return s

    @staticmethod
    def from_box(box: Box) -> "BoxSet":
        return BoxSet([box])

    # -- basic queries ---------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.boxes

    def volume(self) -> Fraction:
        return sum((box_volume(b) for b in self.boxes), Fraction(0))

    def bbox(self) -> Box | None:
        return boxes_bbox(self.boxes)

    def min_side(self) -> Fraction | None:
        sides = [(hi - lo).as_fraction() for b in self.boxes for lo, hi in b]
        return min(sides) if sides else None

    def contains_point(self, pt: Sequence) -> bool:
        p = [Dyadic.coerce(x) for x in pt]
        return any(all(lo <= x <= hi for x, (lo, hi) in zip(p, b)) for b in self.boxes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxSet):
            return NotImplemented
        return self.boxes == other.boxes

    def __hash__(self):
        return hash(self.boxes)

    def __repr__(self):
        return f"BoxSet({len(self.boxes)} boxes, dim={self.dim})"

    # -- booleans ---------------------------------------------------------------

    def _binary(self, other: "BoxSet", op) -> "BoxSet":
        if not self.boxes and not other.boxes:
            return BoxSet.empty(max(self.dim, other.dim, 3))
        allb = list(self.boxes) + list(other.boxes)
        dim = len(allb[0])
        grids_dy = [_axis_grid(allb, a) for a in range(dim)]
        grids = [[d.as_fraction() for d in g] for g in grids_dy]
        shape = [max(len(g) - 1, 0) for g in grids]
        a = np.zeros(shape, dtype=bool)
        b = np.zeros(shape, dtype=bool)
        if a.size:
            _fill(a, grids, self.boxes)
            _fill(b, grids, other.boxes)
        res = op(a, b)
        out = BoxSet(_extract(res, grids_dy) if res.size else [], _canonical=True)
        if not out.boxes:
            return BoxSet.empty(dim)
        return out

    def union(self, other: "BoxSet") -> "BoxSet":
        return self._binary(other, np.logical_or)

    def intersection(self, other: "BoxSet") -> "BoxSet":
        return self._binary(other, np.logical_and)

    def difference(self, other: "BoxSet") -> "BoxSet":
        """Regularized difference: closure of (self minus other)."""
        return self._binary(other, lambda x, y: np.logical_and(x, np.logical_not(y)))

    def interior_intersects(self, other: "BoxSet") -> bool:
        # cheap pre-filter then exact check
        for p in self.boxes:
            for q in other.boxes:
                if all(max(pl, ql) < min(ph, qh)
                       for (pl, ph), (ql, qh) in zip(p, q)):
                    return True
        return False

    def contains_set(self, other: "BoxSet") -> bool:
        return other.difference(self).is_empty()

    # -- geometry ops -----------------------------------------------------------

    def translate(self, vec: Sequence) -> "BoxSet":
        v = [Dyadic.coerce(x) for x in vec]
        return BoxSet(
            [tuple((lo + dv, hi + dv) for (lo, hi), dv in zip(b, v)) for b in self.boxes],
            _canonical=True,
        )

    def signed_permute(self, perm: Sequence[int], signs: Sequence[int]) -> "BoxSet":
        """Apply the cube symmetry x_i -> signs[i] * x[perm[i]]."""
        out = []
        for b in self.boxes:
            nb = []
            for i in range(len(b)):
                lo, hi = b[perm[i]]
                if signs[i] < 0:
                    lo, hi = -hi, -lo
                nb.append((lo, hi))
            out.append(tuple(nb))
        return BoxSet(out)

    def inflate_all(self, eps) -> "BoxSet":
        """Closed eps-neighborhood in the L-infinity metric."""
        e = Dyadic.coerce(eps)
        return BoxSet([inflate(b, e) for b in self.boxes])

    def thin(self, eps) -> "BoxSet":
        """Exact L-infinity erosion: points whose eps-cube stays inside."""
        e = Dyadic.coerce(eps)
        if e < ZERO:
            raise ValueError("thin: negative margin")
        if self.is_empty() or e == ZERO:
            return self
        bb = self.bbox()
        outer = BoxSet.from_box(inflate(bb, e + Dyadic(1)))
        comp = outer.difference(self)
        dil = comp.inflate_all(e)
        return self.difference(dil)

    # -- contact structure --------------------------------------------------------

    def shared_face_area(self, other: "BoxSet") -> Fraction:
        """Total codimension-1 contact area; assumes disjoint interiors."""
        total = Fraction(0)
        for p in self.boxes:
            for q in other.boxes:
                area = _face_contact(p, q)
                if area is not None:
                    total += area
        return total

    def components(self) -> list["BoxSet"]:
        """Face-connected components (edge/corner contact does not connect)."""
        n = len(self.boxes)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                if _face_contact(self.boxes[i], self.boxes[j]):
                    pi, pj = find(i), find(j)
                    if pi != pj:
                        parent[pi] = pj
        groups: dict[int, list[Box]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(self.boxes[i])
        return [BoxSet(g, _canonical=True) for g in groups.values()]

    # -- voxel bridge ---------------------------------------------------------------

    def voxelize(self, pitch_exp: int, bbox: Box | None = None) -> tuple[np.ndarray, Box]:
        """Occupancy grid with cell size 2^-pitch_exp over ``bbox``.

        Exact when every box corner lies on the pitch lattice (callers that
        need exactness align their inputs); otherwise cells are marked when
        covered, by half-open index ranges of the snapped corners.
        """
        if bbox is None:
            bbox = self.bbox()
        if bbox is None:
            raise ValueError("voxelize: empty set without bbox")
        scale = 1 << pitch_exp
        lo = [x[0].as_fraction() for x in bbox]
        shape = []
        for (a, b) in bbox:
            span = (b - a).as_fraction() * scale
            if span != int(span):
                raise ValueError("voxelize: bbox not on pitch lattice")
            shape.append(int(span))
        arr = np.zeros(shape, dtype=bool)
        for box in self.boxes:
            idx = []
            for ax, (a, b) in enumerate(box):
                i0 = (a.as_fraction() - lo[ax]) * scale
                i1 = (b.as_fraction() - lo[ax]) * scale
                idx.append(slice(max(int(i0), 0), min(int(i1), shape[ax])))
            arr[tuple(idx)] = True
        return arr, bbox


def _face_contact(p: Box, q: Box) -> Fraction | None:
    """Positive contact area if p, q touch along a codim-1 face, else None."""
    touch_axis = -1
    area = Fraction(1)
    for a, ((pl, ph), (ql, qh)) in enumerate(zip(p, q)):
        lo = pl if pl >= ql else ql
        hi = ph if ph <= qh else qh
        c = lo._cmp(hi)
        if c > 0:
            return None
        if c == 0:
            if touch_axis >= 0:
                return None  # edge or corner contact only
            touch_axis = a
        else:
            area *= (hi - lo).as_fraction()
    if touch_axis < 0:
        return None  # overlapping interiors; not a face contact
    return area


def contact_faces(a: BoxSet, b: BoxSet) -> list[tuple[Box, Fraction]]:
    """Degenerate boxes where closures of a and b meet along codim-1 faces,
    paired with their areas.  Assumes disjoint interiors."""
    out = []
    for p in a.boxes:
        for q in b.boxes:
            area = _face_contact(p, q)
            if area is None:
                continue
            face = tuple(
                (pl if pl >= ql else ql, ph if ph <= qh else qh)
                for (pl, ph), (ql, qh) in zip(p, q)
            )
            out.append((face, area))
    return out


# ---------------------------------------------------------------------------
# polylines and corridors
# ---------------------------------------------------------------------------


def polyline_neighborhood(points: Sequence[Sequence], c) -> BoxSet:
    """Closed c-neighborhood (L-infinity) of a rectilinear polyline."""
    cc = Dyadic.coerce(c)
    pts = [[Dyadic.coerce(x) for x in p] for p in points]
    if len(pts) == 0:
        raise ValueError("empty polyline")
    boxes = []
    if len(pts) == 1:
        boxes.append(inflate(tuple((x, x) for x in pts[0]), cc))
    for p, q in zip(pts, pts[1:]):
        diff_axes = [a for a in range(len(p)) if p[a] != q[a]]
        if len(diff_axes) > 1:
            raise ValueError("polyline segments must be axis-aligned")
        seg = tuple(
            (p[a] if p[a] <= q[a] else q[a], p[a] if p[a] >= q[a] else q[a])
            for a in range(len(p))
        )
        boxes.append(inflate(seg, cc))
    return BoxSet(boxes)


def _interval_dist_bounds(c0, c1, b0, b1):
    """(min, max) over p in [c0,c1] of dist(p, [b0,b1]) along one axis (ints)."""
    lo = max(b0 - c1, c0 - b1, 0)
    hi = max(b0 - c0, c1 - b1, 0)
    return lo, hi


def _cells_dist_bounds(starts, pitch_num, boxes_int, want_upper):
    """Per-cell distance bound to a box union, all in scaled integers.

    ``starts``: list of per-axis arrays of cell left edges.  Returns an array:
    min over boxes of (max over axes of per-axis bound), which is the exact
    min distance when want_upper is False, and an exact upper bound for the
    max-over-cell distance when want_upper is True.
    """
    shape = tuple(len(s) for s in starts)
    best = None
    for box in boxes_int:
        per_box = None
        for ax, (b0, b1) in enumerate(box):
            c0 = starts[ax]
            c1 = c0 + pitch_num
            if want_upper:
                d = np.maximum(np.maximum(b0 - c0, c1 - b1), 0)
            else:
                d = np.maximum(np.maximum(b0 - c1, c0 - b1), 0)
            d = d.reshape([-1 if i == ax else 1 for i in range(len(shape))])
            per_box = d if per_box is None else np.maximum(per_box, d)
        per_box = np.broadcast_to(per_box, shape)
        best = per_box.copy() if best is None else np.minimum(best, per_box)
    return best


def corridor(a: BoxSet, b: BoxSet, eps, resolution_exp: int) -> BoxSet:
    """Voxelized inner approximation of the eps-restricted Voronoi region of
    ``a`` against ``b``: the face-connected component containing ``a`` of the
    cells certified to satisfy dist(x, a) < min(dist(x, b), eps).

    The cell pitch is 2^-resolution_exp and must be at most eps/4.  Refining
    the resolution grows the output monotonically; the output closure never
    meets ``b``.
    """
    from scipy import ndimage

    e = Dyadic.coerce(eps)
    if e <= ZERO:
        raise ValueError("corridor: eps must be positive")
    pitch = Fraction(1, 1 << resolution_exp)
    if pitch * 4 > e.as_fraction():
        raise ValueError("corridor: pitch must be at most eps/4")
    if a.is_empty():
        raise ValueError("corridor: empty source")

    bb = inflate(a.bbox(), e)
    # snap region to the pitch lattice
    import math

    lo = [Fraction(math.floor(x[0].as_fraction() / pitch)) * pitch for x in bb]
    hi = [Fraction(math.ceil(x[1].as_fraction() / pitch)) * pitch for x in bb]
    # common integer scale
    scale = 1 << resolution_exp

    def as_int(fr: Fraction) -> int:
        v = fr * scale
        assert v.denominator == 1
        return int(v)

    def box_int(box: Box):
        out = []
        for (x0, x1) in box:
            out.append((int(math.floor(x0.as_fraction() * scale)),
                        int(math.ceil(x1.as_fraction() * scale))))
        return out

    # exact integer corners for a/b boxes (dyadic; may be off-lattice for b,
    # in which case we use conservative outward rounding, keeping the
    # inner-approximation property)
    def box_int_exact_or_outer(box: Box, outward: bool):
        out = []
        for (x0, x1) in box:
            v0 = x0.as_fraction() * scale
            v1 = x1.as_fraction() * scale
            if outward:
                out.append((int(math.floor(v0)), int(math.ceil(v1))))
            else:
                out.append((int(math.ceil(v0)), int(math.floor(v1))))
        return out

    a_int = [box_int_exact_or_outer(bx, outward=True) for bx in a.boxes]
    b_int = [box_int_exact_or_outer(bx, outward=False) for bx in b.boxes] if not b.is_empty() else []

    starts = [np.arange(as_int(l), as_int(h), dtype=object) for l, h in zip(lo, hi)]
    if any(len(s) == 0 for s in starts):
        raise ValueError("corridor: degenerate region")

    ub_a = _cells_dist_bounds(starts, 1, a_int, want_upper=True)
    eps_int = e.as_fraction() * scale
    ok = np.vectorize(lambda d: Fraction(int(d)) < eps_int)(ub_a)
    if b_int:
        lb_b = _cells_dist_bounds(starts, 1, b_int, want_upper=False)
        ok &= np.vectorize(lambda u, l: int(u) < int(l))(ub_a, lb_b)

    # seeds: cells whose closure meets a
    lb_a = _cells_dist_bounds(starts, 1, a_int, want_upper=False)
    seeds = np.vectorize(lambda d: int(d) == 0)(lb_a) & ok
    if not seeds.any():
        raise ValueError("corridor: no corridor cell touches the source at this resolution")

    structure = ndimage.generate_binary_structure(ok.ndim, 1)
    labels, _ = ndimage.label(ok, structure=structure)
    keep = np.unique(labels[seeds])
    keep = keep[keep > 0]
    mask = np.isin(labels, keep)

    pdy = Dyadic(1, resolution_exp)
    grid_dy = [[Dyadic(int(s0), 0) * pdy if False else _frac_to_dyadic(Fraction(int(s0), scale))
                for s0 in list(starts[ax]) + [starts[ax][-1] + 1]]
               for ax in range(len(starts))]
    out = _extract(mask, grid_dy)
    return BoxSet(out, _canonical=True) if out else BoxSet.empty(a.dim)


def _frac_to_dyadic(fr: Fraction) -> Dyadic:
    den = fr.denominator
    exp = den.bit_length() - 1
    if (1 << exp) != den:
        raise ValueError("not dyadic")
    return Dyadic(fr.numerator, exp)
