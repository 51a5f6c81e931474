"""Underlying digraphs of matrices and the structural tests built on them.

Vertices are numbered ``1..n`` to match the usual matrix row labels.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import NotAnScc, NotSubstochastic
from .matrix_core import (
    STOCH_TOL,
    as_matrix,
    as_rates,
    deficient_rows,
    is_substochastic,
    recompose,
)

INFINITE = math.inf


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


SINGLE_VERTEX_NO_LOOP = _Marker("SingleVertexNoLoop")


@dataclass(frozen=True)
class DiGraph:
    n: int
    arcs: frozenset

    def __post_init__(self):
        for i, j in self.arcs:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"arc ({i}, {j}) outside 1..{self.n}")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "DiGraph":
        return cls(n, frozenset((int(i), int(j)) for i, j in arcs))

    def successors(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for i, j in sorted(self.arcs):
            out[i].append(j)
        return out

    def predecessors(self) -> dict[int, list[int]]:
        inc: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for i, j in sorted(self.arcs):
            inc[j].append(i)
        return inc

    def has_loop(self, v: int) -> bool:
        return (v, v) in self.arcs

    def to_dot(self, name: str = "G", labels: dict[int, str] | None = None) -> str:
        lines = [f"digraph {name} {{"]
        for v in range(1, self.n + 1):
            label = labels.get(v, str(v)) if labels else str(v)
            lines.append(f'  {v} [label="{label}"];')
        for i, j in sorted(self.arcs):
            lines.append(f"  {i} -> {j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_digraph(M, zero_tol: float = 0.0) -> DiGraph:
    """Arc ``(i, j)`` iff ``|M(i, j)| > zero_tol``."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    M = as_matrix(M)
    rows, cols = np.nonzero(np.abs(M) > zero_tol)
    return DiGraph.from_arcs(M.shape[0], zip(rows + 1, cols + 1))


@dataclass(frozen=True)
class SccDecomposition:
    component_of: dict[int, int]
    components: list[frozenset]
    condensation: DiGraph
    sinks: frozenset
    periods: dict[int, object]

    def sink_components(self) -> list[frozenset]:
        return [self.components[c - 1] for c in sorted(self.sinks)]

    def to_json(self) -> dict:
        return {
            "components": [sorted(c) for c in self.components],
            "sinks": [sorted(self.components[c - 1]) for c in sorted(self.sinks)],
            "periods": {
                str(c): (p if isinstance(p, int) else repr(p))
                for c, p in sorted(self.periods.items())
            },
            "condensation_arcs": sorted(list(a) for a in self.condensation.arcs),
        }


def _tarjan(G: DiGraph) -> list[list[int]]:
    succ = G.successors()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(1, G.n + 1):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            nbrs = succ[v]
            while pos < len(nbrs):
                w = nbrs[pos]
                pos += 1
                if w not in index:
                    work.append((v, pos))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def strongly_connected_components(G: DiGraph) -> SccDecomposition:
    """Tarjan's algorithm with an explicit stack, plus condensation and periods.

    Components are numbered ``1..k`` in order of their smallest vertex.
    """
    comps = sorted(_tarjan(G), key=min)
    component_of = {v: c for c, comp in enumerate(comps, start=1) for v in comp}
    cond_arcs = {
        (component_of[i], component_of[j])
        for i, j in G.arcs
        if component_of[i] != component_of[j]
    }
    condensation = DiGraph.from_arcs(len(comps), cond_arcs)
    has_out = {i for i, _ in cond_arcs}
    sinks = frozenset(c for c in range(1, len(comps) + 1) if c not in has_out)
    components = [frozenset(c) for c in comps]
    periods = {c: _period(G, components[c - 1]) for c in range(1, len(comps) + 1)}
    return SccDecomposition(component_of, components, condensation, sinks, periods)


def _period(G: DiGraph, scc: frozenset):
    verts = set(scc)
    if len(verts) == 1:
        (v,) = verts
        return 1 if G.has_loop(v) else SINGLE_VERTEX_NO_LOOP
    succ = G.successors()
    root = min(verts)
    level = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in succ[u]:
            if w in verts and w not in level:
                level[w] = level[u] + 1
                queue.append(w)
    if len(level) != len(verts):
        raise NotAnScc("vertex set is not strongly connected")
    g = 0
    for u, w in G.arcs:
        if u in verts and w in verts:
            g = math.gcd(g, level[u] + 1 - level[w])
    return abs(g)


def scc_period(G: DiGraph, scc: Iterable[int]):
    """Period of a strongly connected vertex set, or ``SINGLE_VERTEX_NO_LOOP``."""
    verts = frozenset(scc)
    if not verts or any(not (1 <= v <= G.n) for v in verts):
        raise NotAnScc("vertex set is empty or out of range")
    if len(verts) > 1:
        # strong connectivity needs reachability in both directions
        pred = G.predecessors()
        root = min(verts)
        seen = {root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in pred[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    queue.append(w)
        if seen != verts:
            raise NotAnScc("vertex set is not strongly connected")
    return _period(G, verts)


def is_condensely_aperiodic(M, zero_tol: float = 0.0) -> bool:
    G = M if isinstance(M, DiGraph) else build_digraph(M, zero_tol)
    dec = strongly_connected_components(G)
    return all(dec.periods[c] in (1, SINGLE_VERTEX_NO_LOOP) for c in dec.sinks)


@dataclass
class AnchorReport:
    anchors: frozenset
    defective: frozenset
    overlearners: frozenset
    condensely_anchored: bool | None = None
    witness_walks: dict[int, list[int] | None] = field(default_factory=dict)
    sinks: list[frozenset] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "anchors": sorted(self.anchors),
            "defective": sorted(self.defective),
            "non_anchor_overlearners": sorted(self.overlearners),
            "condensely_anchored": self.condensely_anchored,
        }
        if self.witness_walks:
            out["witness_walks"] = {str(v): w for v, w in sorted(self.witness_walks.items())}
        if self.sinks:
            out["sink_sccs"] = [sorted(s) for s in self.sinks]
        return out


def anchors(A, E) -> AnchorReport:
    """Classify agents: anchor if ``0 < E(i) < 2 A(i,i)``, defective if ``E(i) = 0``."""
    A = as_matrix(A)
    E = as_rates(E, A.shape[0])
    d = np.diag(A)
    anc, dfc, over = set(), set(), set()
    for i in range(A.shape[0]):
        if E[i] == 0:
            dfc.add(i + 1)
        elif E[i] < 2 * d[i]:
            anc.add(i + 1)
        else:
            over.add(i + 1)
    return AnchorReport(frozenset(anc), frozenset(dfc), frozenset(over))


def _walks_to(G: DiGraph, targets: set[int]) -> dict[int, list[int] | None]:
    # Reverse multi-source BFS; parent pointers lead forward towards a target.
    pred = G.predecessors()
    nxt: dict[int, int | None] = {t: None for t in targets}
    queue = deque(sorted(targets))
    while queue:
        u = queue.popleft()
        for w in pred[u]:
            if w not in nxt:
                nxt[w] = u
                queue.append(w)
    walks: dict[int, list[int] | None] = {}
    for v in range(1, G.n + 1):
        if v not in nxt:
            walks[v] = None
            continue
        walk = [v]
        while nxt[walk[-1]] is not None:
            walk.append(nxt[walk[-1]])
        walks[v] = walk
    return walks


def is_condensely_anchored(A, E, zero_tol: float = 0.0) -> AnchorReport:
    """Does every sink SCC of ``G[A - E]`` contain an anchor?

    Also records, for every vertex, a shortest walk in ``G[A - E]`` ending
    at an anchor (``None`` when no anchor is reachable).
    """
    report = anchors(A, E)
    G = build_digraph(recompose(A, E), zero_tol)
    dec = strongly_connected_components(G)
    sinks = dec.sink_components()
    report.condensely_anchored = all(s & report.anchors for s in sinks)
    report.witness_walks = _walks_to(G, set(report.anchors))
    report.sinks = sinks
    return report


def index_of_contraction(B, stoch_tol: float = STOCH_TOL, zero_tol: float = 0.0):
    """Longest shortest walk from a vertex to a deficient row of ``B``.

    Returns ``math.inf`` when some vertex cannot reach a deficient row.
    """
    B = as_matrix(B)
    if not is_substochastic(B, stoch_tol):
        raise NotSubstochastic("index of contraction needs a substochastic matrix")
    targets = {i + 1 for i in np.flatnonzero(deficient_rows(B, stoch_tol))}
    if not targets:
        return INFINITE
    G = build_digraph(B, zero_tol)
    walks = _walks_to(G, targets)
    if any(w is None for w in walks.values()):
        return INFINITE
    return max(len(w) - 1 for w in walks.values())
