"""Nested dyadic partitions of rooted tree windows.

The construction grows, in stages i = 1, 2, ..., partitions whose classes
are connected vertex sets of size exactly 2^{n_i} (or singletons), refining
earlier stages so that no later class cuts a surviving earlier class.  Stage
sizes n_i must grow fast enough relative to the degree bound for the fraction
of vertices caught in non-singleton classes to stay bounded below.
"""

from __future__ import annotations

import math

from .labels import LabelSource
from .trees import RootedTreeWindow


class ScheduleError(ValueError):
    pass


class InfeasibleGrowth(RuntimeError):
    """Window truncation prevented a class from reaching its target size."""


class Schedule:
    """Strictly increasing stage sizes with ratio gaps > 3 + 2 ln d."""

    def __init__(self, n_values, degree_bound):
        self.n_values = list(int(n) for n in n_values)
        self.degree_bound = int(degree_bound)
        if self.degree_bound < 2:
            raise ScheduleError("degree bound must be >= 2")
        if any(n <= 0 for n in self.n_values):
            raise ScheduleError("stage sizes must be positive")
        threshold = 3 + 2 * math.log(self.degree_bound)
        for a, b in zip(self.n_values, self.n_values[1:]):
            if b <= a or b / a <= threshold:
                raise ScheduleError(
                    f"schedule ratio {b}/{a} must exceed 3 + 2 ln d = {threshold:.4f}"
                )

    def __repr__(self):
        return f"Schedule({self.n_values}, d={self.degree_bound})"


class PartitionLevel:
    """One partition: class ids -> member sets, plus the inverse map."""

    def __init__(self, level_index: int, class_members: dict):
        self.level_index = level_index
        self.class_members = {cid: frozenset(m) for cid, m in class_members.items()}
        self.class_of = {}
        for cid, ms in self.class_members.items():
            for v in ms:
                self.class_of[v] = cid

    def nonsingleton_classes(self):
        return {c: m for c, m in self.class_members.items() if len(m) > 1}

    def singletonize(self, cid):
        members = self.class_members.pop(cid)
        for v in members:
            scid = ("s", self.level_index, v)
            self.class_members[scid] = frozenset([v])
            self.class_of[v] = scid


class PartitionStack:
    def __init__(self, tree: RootedTreeWindow, schedule: Schedule):
        self.tree = tree
        self.schedule = schedule
        self.levels: list[PartitionLevel] = []
        self.history: list[dict] = []
        self.flagged = set()  # vertices singletonized due to window truncation

    def cuts(self, a: frozenset, b: frozenset) -> bool:
        """a cuts b when a meets b but does not contain it."""
        return not a.isdisjoint(b) and not b.issubset(a)


def core_set(tree: RootedTreeWindow, k: int) -> set:
    """S_k: vertices whose window subtree has at least 2^k elements."""
    return {v for v in tree.order if tree.subtree_size[v] >= (1 << k)}


def leaf_set(tree: RootedTreeWindow, schedule: Schedule, i: int) -> list:
    """Degree-1 vertices of the induced subgraph on S_{n_i}, root and
    truncation-flagged vertices excluded; size bounds asserted."""
    n = schedule.n_values[i - 1]
    s = core_set(tree, n)
    out = []
    d = schedule.degree_bound
    for v in s:
        if v == tree.root or v in tree.boundary:
            continue
        deg_in_s = (1 if tree.parent[v] in s else 0) + sum(
            1 for c in tree.children[v] if c in s
        )
        if deg_in_s == 1:
            size = tree.subtree_size[v]
            assert (1 << n) <= size <= 1 + (d - 1) * (1 << n), (
                f"leaf-set size bound violated at {v!r}: {size}"
            )
            out.append(v)
    out.sort(key=repr)
    return out


def peel(tree: RootedTreeWindow, leaves) -> RootedTreeWindow:
    """Remove the subtrees hanging at the given vertices; keep the root side."""
    if tree.root in leaves:
        raise ValueError("cannot peel the root")
    drop = set()
    for x in leaves:
        drop.update(tree.subtree(x))
    keep = [v for v in tree.order if v not in drop]
    parent = {v: tree.parent[v] for v in keep}
    bnd = {v for v in keep if v in tree.boundary}
    return RootedTreeWindow(tree.root, parent, bnd)


def grow_class(tree: RootedTreeWindow, x, target: int, stack: PartitionStack,
               labels: LabelSource, region=None) -> set:
    """Grow a connected class of exactly ``target`` vertices inside T_x.

    One vertex is added at a time.  Whenever the current set cuts an earlier
    class, the smallest cut class is completed before free growth resumes;
    free growth takes the label-minimal frontier vertex whose commitment
    (the outermost earlier class it belongs to) still fits in the budget.
    """
    if region is None:
        region = set(tree.subtree(x))
    if len(region) < target:
        raise InfeasibleGrowth(f"|T_x| = {len(region)} < target {target} at {x!r}")

    # earlier non-singleton classes, outermost-first lookup per vertex
    classes = []
    for lvl in stack.levels:
        for cid, ms in lvl.nonsingleton_classes().items():
            if not ms.isdisjoint(region):
                classes.append(ms)
    classes.sort(key=len, reverse=True)
    outermost = {}
    completable = []
    for ms in classes:
        if ms.issubset(region):
            completable.append(ms)
            for v in ms:
                if v not in outermost:
                    outermost[v] = ms
        else:
            # straddles the region: entering it would be unrecoverable
            for v in ms:
                if v in region and v not in outermost:
                    outermost[v] = None

    c = {x}
    adj = {}

    def neighbors(v):
        if v not in adj:
            adj[v] = [w for w in ([tree.parent[v]] + tree.children[v])
                      if w is not None and w in region]
        return adj[v]

    if outermost.get(x, "free") is None:
        raise InfeasibleGrowth(f"seed {x!r} lies in a window-straddling class")
    if x in outermost and outermost[x] is not None and len(outermost[x]) > target:
        raise InfeasibleGrowth(f"seed {x!r} committed to an oversized class")

    while len(c) < target:
        cut = [ms for ms in completable
               if not ms.isdisjoint(c) and not ms.issubset(c)]
        if cut:
            smallest = min(cut, key=len)
            cands = [v for v in smallest if v not in c
                     and any(w in c for w in neighbors(v))]
        else:
            frontier = set()
            for v in c:
                frontier.update(w for w in neighbors(v) if w not in c)
            cands = []
            for v in frontier:
                om = outermost.get(v, "free")
                if om is None:
                    continue
                cost = 1 if om == "free" else len(om - c)
                if len(c) + cost <= target:
                    cands.append(v)
            if not cands:
                raise InfeasibleGrowth(
                    f"no feasible frontier vertex at size {len(c)}/{target} from {x!r}"
                )
        pick = labels.choose_min([repr(v) for v in cands])
        c.add(next(v for v in cands if repr(v) == pick))
    return c


def build_stage(tree: RootedTreeWindow, schedule: Schedule, stack: PartitionStack,
                i: int, labels: LabelSource) -> PartitionStack:
    """Run stage i: peel leaf sets repeatedly, growing one class per leaf."""
    n = schedule.n_values[i - 1]
    target = 1 << n
    new_classes = {}
    flagged = set()
    current = tree
    k = 0
    while True:
        k += 1
        leaves = leaf_set(current, schedule, i)
        if not leaves:
            break
        for x in leaves:
            region = set(current.subtree(x))
            try:
                cx = grow_class(current, x, target, stack, labels, region)
                new_classes[("c", i, k, repr(x))] = cx
            except InfeasibleGrowth:
                flagged.update(region)
        if all(x == current.root for x in leaves):
            break
        current = peel(current, [x for x in leaves if x != current.root])
        if len(current) <= 1:
            break

    # refinement: singletonize earlier classes cut by any new class
    invalidated = []
    for lvl in stack.levels:
        for cid, ms in list(lvl.nonsingleton_classes().items()):
            if any(stack.cuts(frozenset(cx), ms) for cx in new_classes.values()):
                lvl.singletonize(cid)
                invalidated.append((lvl.level_index, cid))

    covered = set()
    for cx in new_classes.values():
        covered |= cx
    members = dict(new_classes)
    for v in tree.order:
        if v not in covered:
            members[("s", i, v)] = {v}
    stack.levels.append(PartitionLevel(i, members))
    stack.history.append({"stage": i, "classes": len(new_classes),
                          "invalidated": invalidated, "flagged": len(flagged)})
    stack.flagged |= flagged
    return stack


def limit_partitions(tree: RootedTreeWindow, schedule: Schedule, stages: int,
                     labels: LabelSource, u_min: int = 2):
    """Run all stages; return (stack, U, per-level non-singleton report)."""
    if stages < 1 or stages > len(schedule.n_values):
        raise ScheduleError("stages out of range for the schedule")
    stack = PartitionStack(tree, schedule)
    for i in range(1, stages + 1):
        build_stage(tree, schedule, stack, i, labels)
    counts = {v: 0 for v in tree.order}
    report = {}
    for lvl in stack.levels:
        nons = set()
        for ms in lvl.nonsingleton_classes().values():
            nons |= ms
        for v in nons:
            counts[v] += 1
        interior = [v for v in tree.order if v not in tree.boundary]
        report[lvl.level_index] = (
            sum(1 for v in interior if v in nons) / max(len(interior), 1)
        )
    u = {v for v, c in counts.items() if c >= u_min}
    return stack, u, report
