"""Canonical forms for trees and small decorated graphs."""

from __future__ import annotations

import hashlib


def ahu_code(children: dict, root) -> str:
    """Canonical string of a rooted tree (AHU encoding), iterative."""
    code: dict = {}
    stack = [(root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            code[v] = "(" + "".join(sorted(code[c] for c in children.get(v, ()))) + ")"
        else:
            stack.append((v, True))
            for c in children.get(v, ()):
                stack.append((c, False))
    return code[root]


def forest_hash(children: dict, roots) -> str:
    """Order-independent canonical hash of a rooted forest."""
    codes = sorted(ahu_code(children, r) for r in roots)
    return hashlib.sha256("|".join(codes).encode()).hexdigest()[:16]


def rooted_forest_from_edges(vertices, edges, roots) -> dict:
    """Orient an acyclic edge set away from the given roots; returns children map.

    Raises ValueError if the edge set has a cycle or connects two roots' trees.
    """
    adj: dict = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    children: dict = {v: [] for v in vertices}
    seen = set()
    for r in roots:
        if r in seen:
            raise ValueError("roots share a component")
        stack = [(r, None)]
        while stack:
            v, par = stack.pop()
            if v in seen:
                raise ValueError("cycle detected in claimed forest")
            seen.add(v)
            for w in adj[v]:
                if w != par:
                    children[v].append(w)
                    stack.append((w, v))
    if len(seen) != len(adj):
        raise ValueError("edges reach vertices outside the rooted components")
    return children


def graph_canonical_hash(nx_graph, node_attr=None, edge_attr=None, iterations=4) -> str:
    """Weisfeiler-Lehman hash (networkx) for small decorated graphs."""
    import networkx as nx

    return nx.weisfeiler_lehman_graph_hash(
        nx_graph, node_attr=node_attr, edge_attr=edge_attr, iterations=iterations
    )
