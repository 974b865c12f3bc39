"""Probabilistic verification machinery for rooted decorated graphs.

Finite weighted families of rooted graphs stand in for unimodular measures:
the mass-transport identity, the bigraph duality transform, delayed random
walks with ergodic averaging, and indistinguishability statistics for tile
pieces are all checked at the finite level with exact rational arithmetic
where the statement is exact, and with 3-sigma bands where it is statistical.
"""

from __future__ import annotations

import json
import math
import random
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx


# -- rooted samples ------------------------------------------------------------


class RootedSample:
    """A finite decorated graph with a distinguished root and a sampling weight."""

    def __init__(self, graph: nx.Graph, root, weight: Fraction):
        if root not in graph:
            raise ValueError("root must be a vertex of the graph")
        self.graph = graph
        self.root = root
        self.weight = Fraction(weight)
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")

    def __repr__(self):
        return (f"RootedSample(n={self.graph.number_of_nodes()}, "
                f"root={self.root!r}, weight={self.weight})")


def uniform_family(graph: nx.Graph) -> List[RootedSample]:
    """One sample per vertex, each with weight 1/|V| (uniform rooting)."""
    n = graph.number_of_nodes()
    return [RootedSample(graph, v, Fraction(1, n)) for v in sorted(graph, key=repr)]


def check_family_weights(samples: Sequence[RootedSample]) -> None:
    total = sum((s.weight for s in samples), Fraction(0))
    if total != 1:
        raise ValueError(f"family weights sum to {total}, not 1")


# -- rooted distance -----------------------------------------------------------


def _ball(graph: nx.Graph, root, r: int) -> nx.Graph:
    dist = nx.single_source_shortest_path_length(graph, root, cutoff=r)
    ball = graph.subgraph(dist).copy()
    for v, d in dist.items():
        ball.nodes[v]["_dist"] = d
    return ball


def _rooted_ball_isomorphic(g1: nx.Graph, o1, g2: nx.Graph, o2, r: int) -> bool:
    b1, b2 = _ball(g1, o1, r), _ball(g2, o2, r)
    nm = nx.algorithms.isomorphism.categorical_node_match(
        ["_dist", "mark"], [None, None])
    em = nx.algorithms.isomorphism.categorical_edge_match("color", None)
    return nx.is_isomorphic(b1, b2, node_match=nm, edge_match=em)


def rooted_distance(s1: RootedSample, s2: RootedSample, r_max: int) -> Fraction:
    """1/r for the first radius r at which the rooted r-balls fail to be
    isomorphic (decorations included); 0 if they agree out to r_max."""
    for r in range(0, r_max + 1):
        if not _rooted_ball_isomorphic(s1.graph, s1.root, s2.graph, s2.root, r):
            return Fraction(1) if r == 0 else Fraction(1, r)
    return Fraction(0)


# -- transport function battery ------------------------------------------------

F_BATTERY_VERSION = "1.0"

TransportFn = Callable[[nx.Graph, object, object], Fraction]


def _f_unit_neighbors(g, x, y):
    return Fraction(int(g.has_edge(x, y)))


def _f_inverse_degree(g, x, y):
    if g.has_edge(x, y):
        return Fraction(1, g.degree(x))
    return Fraction(0)


def _f_unit_self(g, x, y):
    return Fraction(int(x == y))


def _f_neighbor_degree(g, x, y):
    if g.has_edge(x, y):
        return Fraction(g.degree(y))
    return Fraction(0)


def _f_mark_match(g, x, y):
    if g.has_edge(x, y) and g.nodes[x].get("mark") == g.nodes[y].get("mark"):
        return Fraction(1)
    return Fraction(0)


def _f_color_weight(g, x, y):
    if g.has_edge(x, y):
        color = g.edges[x, y].get("color")
        colors = sorted({repr(g.edges[e].get("color")) for e in g.edges}) or [repr(None)]
        return Fraction(1 + colors.index(repr(color)))
    return Fraction(0)


def _f_ball_iso(g, x, y):
    if g.has_edge(x, y) and _rooted_ball_isomorphic(g, x, g, y, 1):
        return Fraction(1)
    return Fraction(0)


def _f_distance_two(g, x, y):
    if x == y or g.has_edge(x, y):
        return Fraction(0)
    for z in g.neighbors(x):
        if g.has_edge(z, y):
            return Fraction(1)
    return Fraction(0)


F_BATTERY: Dict[str, TransportFn] = {
    "unit_to_neighbors": _f_unit_neighbors,
    "inverse_degree_on_edges": _f_inverse_degree,
    "unit_to_self": _f_unit_self,
    "neighbor_degree": _f_neighbor_degree,
    "mark_match_on_edges": _f_mark_match,
    "edge_color_rank": _f_color_weight,
    "one_ball_isomorphic_neighbors": _f_ball_iso,
    "distance_exactly_two": _f_distance_two,
}

_F_DESCRIPTIONS = {
    "unit_to_neighbors": "send 1 along every edge",
    "inverse_degree_on_edges": "send 1/deg(x) along every edge out of x",
    "unit_to_self": "send 1 from every vertex to itself",
    "neighbor_degree": "send deg(y) along every edge",
    "mark_match_on_edges": "send 1 along edges whose endpoint marks agree",
    "edge_color_rank": "send the rank of the edge color along every edge",
    "one_ball_isomorphic_neighbors": "send 1 to neighbors with rooted-isomorphic 1-balls",
    "distance_exactly_two": "send 1 to vertices at graph distance exactly 2",
}


def battery_manifest() -> str:
    return json.dumps(
        {
            "version": F_BATTERY_VERSION,
            "functions": [
                {"name": name, "description": _F_DESCRIPTIONS[name]}
                for name in F_BATTERY
            ],
        },
        indent=2,
        sort_keys=True,
    )


# -- mass transport ------------------------------------------------------------


def mtp_check(samples: Sequence[RootedSample],
              f: TransportFn) -> Tuple[Fraction, Fraction, bool]:
    """Exact expected mass out of the root vs into the root."""
    lhs = Fraction(0)
    rhs = Fraction(0)
    for s in samples:
        for y in s.graph:
            lhs += s.weight * f(s.graph, s.root, y)
            rhs += s.weight * f(s.graph, y, s.root)
    return lhs, rhs, lhs == rhs


def mtp_battery(samples: Sequence[RootedSample]) -> Dict[str, dict]:
    out = {}
    for name, f in F_BATTERY.items():
        lhs, rhs, ok = mtp_check(samples, f)
        out[name] = {"lhs": str(lhs), "rhs": str(rhs), "equal": ok}
    return out


# -- bigraphs and duality --------------------------------------------------------


class Bigraph:
    """A primary graph with a decoration graph on a subset of its vertices."""

    def __init__(self, primary: nx.Graph, secondary: nx.Graph, root):
        if primary.number_of_nodes() and not nx.is_connected(primary):
            raise ValueError("primary graph must be connected")
        if secondary.number_of_nodes() and not nx.is_connected(secondary):
            raise ValueError("secondary graph must be connected")
        if root not in primary:
            raise ValueError("root must be a primary vertex")
        self.primary = primary
        self.secondary = secondary
        self.root = root

    def dual(self) -> "Bigraph":
        if self.root not in self.secondary:
            raise ValueError("cannot dualize: root outside the secondary graph")
        return Bigraph(self.secondary, self.primary, self.root)

    def root_in_secondary(self) -> bool:
        return self.root in self.secondary


class WeightedBigraph:
    def __init__(self, bigraph: Bigraph, weight: Fraction):
        self.bigraph = bigraph
        self.weight = Fraction(weight)


def reroot_to_H(family: Sequence[WeightedBigraph]) -> List[WeightedBigraph]:
    """Condition on the root lying in the secondary vertex set; renormalize."""
    kept = [w for w in family if w.bigraph.root_in_secondary()]
    mass = sum((w.weight for w in kept), Fraction(0))
    if mass == 0:
        raise ValueError("no mass on roots inside the secondary graph")
    return [WeightedBigraph(w.bigraph, w.weight / mass) for w in kept]


def dual_family(family: Sequence[WeightedBigraph]) -> List[WeightedBigraph]:
    return [WeightedBigraph(w.bigraph.dual(), w.weight) for w in family]


def bigraph_samples(family: Sequence[WeightedBigraph]) -> List[RootedSample]:
    """Rooted samples over the primary graphs of a weighted bigraph family.

    The root must lie in each primary graph; transport functions evaluated on
    the primary graph vanish outside it, which is the finite version of
    extending f by zero off the decoration.
    """
    out = []
    for w in family:
        if w.bigraph.root not in w.bigraph.primary:
            raise ValueError("root outside primary graph; reroot first")
        out.append(RootedSample(w.bigraph.primary, w.bigraph.root, w.weight))
    return out


# -- delayed random walk ---------------------------------------------------------


def delayed_srw(graph: nx.Graph, omega: nx.Graph, start, steps: int,
                seed) -> List:
    """Propose a uniform graph neighbor; move only along edges of ``omega``."""
    if start not in graph:
        raise ValueError("start must be a graph vertex")
    rng = random.Random(f"delayed-srw:{seed!r}")
    neighbors = {v: sorted(graph.neighbors(v), key=repr) for v in graph}
    traj = [start]
    x = start
    for _ in range(steps):
        nbrs = neighbors[x]
        if nbrs:
            y = nbrs[rng.randrange(len(nbrs))]
            if omega.has_edge(x, y):
                x = y
        traj.append(x)
    return traj


def stationarity_check(graph: nx.Graph, omega: nx.Graph) -> bool:
    """Exact fixed-point check: is the uniform distribution stationary for the
    delayed walk on each component of ``omega``?

    Flow balance at y reads sum over omega-neighbors x of 1/deg_G(x) equals
    deg_omega(y)/deg_G(y); exact rational arithmetic throughout.
    """
    for y in graph:
        dg = graph.degree(y)
        if dg == 0:
            continue
        inflow = Fraction(0)
        d_om = 0
        for x in graph.neighbors(y):
            if omega.has_edge(x, y):
                d_om += 1
                inflow += Fraction(1, graph.degree(x))
        if inflow != Fraction(d_om, dg):
            return False
    return True


# -- cylinder events and Birkhoff averaging --------------------------------------


class CylinderEvent:
    """A local event: the subgraph ball around the walker matches a rooted
    pattern, and the walker's label falls in a union of intervals."""

    def __init__(self, radius: int, pattern: Optional[nx.Graph], pattern_root,
                 label_intervals: Sequence[Tuple[Fraction, Fraction]]):
        self.radius = radius
        self.pattern = pattern
        self.pattern_root = pattern_root
        self.label_intervals = [(Fraction(a), Fraction(b))
                                for a, b in label_intervals]
        for a, b in self.label_intervals:
            if not (0 <= a <= b <= 1):
                raise ValueError("label intervals must sit inside [0, 1]")

    def label_measure(self) -> Fraction:
        return sum((b - a for a, b in self.label_intervals), Fraction(0))

    def label_holds(self, value: Fraction) -> bool:
        return any(a <= value < b for a, b in self.label_intervals)

    def pattern_holds(self, omega: nx.Graph, x) -> bool:
        if self.pattern is None:
            return True
        if x not in omega:
            return self.pattern.number_of_nodes() == 0
        return _rooted_ball_isomorphic(omega, x, self.pattern,
                                       self.pattern_root, self.radius)

    def holds(self, omega: nx.Graph, x, labels: Dict) -> bool:
        return self.pattern_holds(omega, x) and self.label_holds(labels[x])


def _batch_means_sigma(indicators: Sequence[int]) -> float:
    """Standard error of the mean via batch means (sqrt(n) batches)."""
    n = len(indicators)
    b = max(1, int(math.sqrt(n)))
    k = n // b
    if k < 2:
        return float("inf")
    means = [sum(indicators[i * b:(i + 1) * b]) / b for i in range(k)]
    grand = sum(means) / k
    var = sum((m - grand) ** 2 for m in means) / (k - 1)
    return math.sqrt(var / k)


def birkhoff_average(trajectory: Sequence, event: CylinderEvent,
                     omega: nx.Graph, labels: Dict,
                     safe: Optional[set] = None) -> dict:
    """Running ergodic averages of a cylinder event along a trajectory.

    ``safe`` is the set of states whose radius-R neighborhood is fully inside
    the window; the trajectory is truncated (with a flag) at the first unsafe
    state. Also reports the factored estimate: empirical pattern frequency
    times the exact label-box measure.

    ``sigma_hat`` combines two independent noise sources in quadrature: the
    batch-means trajectory error, and the label-realization error.  The
    second term matters because the labels are drawn once per vertex: the
    occupation-weighted label frequency over the finitely many visited
    vertices deviates from the interval measure by an amount controlled by
    the sum of squared occupation weights (the same local-time quantity that
    drives the n^{-1/2} second-moment bound), and that deviation does not
    shrink as the trajectory revisits the same vertices.
    """
    traj = list(trajectory)
    truncated = False
    if safe is not None:
        for i, x in enumerate(traj):
            if x not in safe:
                traj = traj[:i]
                truncated = True
                break
    indicators = []
    pattern_hits = []
    pattern_cache: Dict = {}
    for x in traj:
        p = pattern_cache.get(x)
        if p is None:
            p = event.pattern_holds(omega, x)
            pattern_cache[x] = p
        pattern_hits.append(int(p))
        indicators.append(int(p and event.label_holds(labels[x])))
    running = []
    acc = 0
    for i, v in enumerate(indicators):
        acc += v
        running.append(acc / (i + 1))
    n = len(indicators)
    p_pattern = (sum(pattern_hits) / n) if n else 0.0
    factored = p_pattern * float(event.label_measure())
    if n:
        counts: Dict = {}
        for x, hit in zip(traj, pattern_hits):
            if hit:
                counts[x] = counts.get(x, 0) + 1
        mu = float(event.label_measure())
        w2 = sum((c / n) ** 2 for c in counts.values())
        label_var = mu * (1.0 - mu) * w2
        sigma = math.sqrt(_batch_means_sigma(indicators) ** 2 + label_var)
    else:
        sigma = float("inf")
    return {
        "n": n,
        "running": running,
        "average": running[-1] if running else 0.0,
        "factored_product": factored,
        "sigma_hat": sigma,
        "truncated": truncated,
        "indicators": indicators,
    }


def variance_decay(indicator_ensemble: Sequence[Sequence[int]],
                   n_checkpoints: int = 12) -> dict:
    """Log-log slope of Var(running average at n) across an ensemble."""
    m = len(indicator_ensemble)
    if m < 50:
        raise ValueError("need at least 50 trajectories")
    length = min(len(t) for t in indicator_ensemble)
    if length < 4:
        raise ValueError("trajectories too short")
    ns = sorted({max(2, int(round(length ** (k / (n_checkpoints - 1)))))
                 for k in range(1, n_checkpoints)})
    points = []
    for n in ns:
        avgs = [sum(t[:n]) / n for t in indicator_ensemble]
        mean = sum(avgs) / m
        var = sum((a - mean) ** 2 for a in avgs) / (m - 1)
        if var > 0:
            points.append((math.log(n), math.log(var)))
    if len(points) < 2:
        # constant event: variance identically zero, nothing to fit
        return {"slope": None, "checkpoints": ns, "degenerate": True,
                "passes": True}
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    slope = (sum((x - xbar) * (y - ybar) for x, y in points)
             / sum((x - xbar) ** 2 for x in xs))
    return {"slope": slope, "checkpoints": ns, "degenerate": False,
            "passes": slope <= -0.4}


# -- bundled fixtures --------------------------------------------------------------


def bundled_fixtures() -> Dict[str, nx.Graph]:
    """Small decorated regular graphs used by the exact checking suites."""
    graphs = {
        "cycle6": nx.cycle_graph(6),
        "complete4": nx.complete_graph(4),
        "cube": nx.hypercube_graph(3),
        "bipartite33": nx.complete_bipartite_graph(3, 3),
        "petersen": nx.petersen_graph(),
    }
    for g in graphs.values():
        for i, v in enumerate(sorted(g, key=repr)):
            g.nodes[v]["mark"] = i % 2
        for j, e in enumerate(sorted(g.edges, key=repr)):
            g.edges[e]["color"] = "ab"[j % 2]
    return graphs


def omega_fixture(graph: nx.Graph) -> nx.Graph:
    """A deterministic spanning subgraph: every other edge in sorted order."""
    omega = nx.Graph()
    omega.add_nodes_from(graph.nodes(data=True))
    for j, e in enumerate(sorted(graph.edges, key=repr)):
        if j % 2 == 0:
            omega.add_edge(*e, **graph.edges[e])
    return omega


def bigraph_fixture(graph: nx.Graph) -> List[WeightedBigraph]:
    """Uniformly rooted bigraph family over ``graph`` with the decoration
    graph induced on the closed neighborhood of the smallest vertex."""
    center = sorted(graph, key=repr)[0]
    keep = {center} | set(graph.neighbors(center))
    secondary = graph.subgraph(keep).copy()
    n = graph.number_of_nodes()
    return [WeightedBigraph(Bigraph(graph, secondary, v), Fraction(1, n))
            for v in sorted(graph, key=repr)]


# -- piece statistics -------------------------------------------------------------


PIECE_FEATURES = ("boxes_per_member", "elongation")


def piece_features(piece, n_members: int) -> Dict[str, float]:
    """Scale-free shape features of one contracted piece.

    Window tiles shrink exponentially with depth by construction, so any
    absolute-size feature separates pieces trivially; only the shape of a
    piece is comparable across fibers. ``elongation`` is the bounding-box
    aspect ratio: invariant under uniform rescaling but responsive to any
    directional distortion of a piece.  Volume-to-bounding-box fill is
    deliberately not tracked: tunnel corridors subtract a boundary term that
    is tiny in absolute size but deterministic per window position, so
    z-scoring it against its near-zero spread flags machine-precision
    residue on every run rather than a shape difference.
    """
    bb = piece.bbox()
    sides = sorted(((hi - lo).as_fraction() for lo, hi in bb))
    return {
        "boxes_per_member": len(piece.boxes) / n_members,
        "elongation": float(sides[-1] / sides[0]),
    }


def piece_statistics(pieces: Dict[object, Dict[str, float]]) -> dict:
    """Leave-one-out separation scan over a table of per-piece features.

    ``pieces`` maps a piece id to its feature dict. A feature separates a
    piece when the piece sits more than 3 sigma from the mean of the others;
    with fewer than 3 pieces nothing can be flagged.
    """
    ids = sorted(pieces, key=repr)
    flagged = []
    table = {repr(i): pieces[i] for i in ids}
    for feat in PIECE_FEATURES:
        values = [pieces[i][feat] for i in ids]
        for k, i in enumerate(ids):
            rest = values[:k] + values[k + 1:]
            if len(rest) < 2:
                continue
            mean = sum(rest) / len(rest)
            var = sum((v - mean) ** 2 for v in rest) / (len(rest) - 1)
            sd = math.sqrt(var)
            if sd == 0:
                if values[k] != mean:
                    flagged.append({"piece": repr(i), "feature": feat,
                                    "z": float("inf")})
                continue
            z = (values[k] - mean) / sd
            if abs(z) > 3:
                flagged.append({"piece": repr(i), "feature": feat, "z": z})
    return {
        "n_pieces": len(ids),
        "features": list(PIECE_FEATURES),
        "table": table,
        "flagged": flagged,
        "separated": bool(flagged),
    }


def pooled_separation(tables: Sequence[dict]) -> dict:
    """Pool per-run feature tables across seeds and flag pieces more than
    3 sigma from the pooled mean of each feature."""
    values: Dict[str, List[float]] = {f: [] for f in PIECE_FEATURES}
    entries = []
    for t in tables:
        for pid, feats in t["table"].items():
            entries.append((pid, feats))
            for f in PIECE_FEATURES:
                values[f].append(feats[f])
    flagged = []
    for f in PIECE_FEATURES:
        vals = values[f]
        if len(vals) < 3:
            continue
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
        sd = math.sqrt(var)
        for pid, feats in entries:
            if sd == 0:
                continue
            z = (feats[f] - mean) / sd
            if abs(z) > 3:
                flagged.append({"piece": pid, "feature": f, "z": z})
    return {"n_entries": len(entries), "flagged": flagged,
            "separated": bool(flagged)}
