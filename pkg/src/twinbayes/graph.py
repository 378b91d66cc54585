"""Causal DAGs over named discrete variables.

Graph values are immutable; mutilation returns a new graph.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    BadCardinality,
    BadIntervention,
    CycleError,
    InputError,
    OverlappingSets,
    ReservedName,
    UnknownNode,
)

STAR = "*"  # reserved suffix for post-intervention copies


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[str, ...]
    cards: tuple[int, ...]
    edges: frozenset[tuple[str, str]]
    latent: frozenset[str] = frozenset()
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "latent", frozenset(self.latent))
        if len(self.cards) != len(self.nodes):
            raise BadCardinality("one cardinality per node required")
        if len(set(self.nodes)) != len(self.nodes):
            raise InputError("duplicate node names")
        index = {v: i for i, v in enumerate(self.nodes)}
        object.__setattr__(self, "_index", index)
        for v, c in zip(self.nodes, self.cards):
            if not isinstance(v, str) or not v:
                raise InputError(f"node names must be non-empty strings, got {v!r}")
            if STAR in v:
                raise ReservedName(f"node name {v!r} contains reserved token {STAR!r}")
            if c < 2:
                raise BadCardinality(f"cardinality of {v!r} is {c}; must be >= 2")
        for a, b in self.edges:
            for end in (a, b):
                if end not in index:
                    raise UnknownNode(end)
            if a == b:
                raise CycleError([a, a])
        for v in self.latent:
            if v not in index:
                raise UnknownNode(v)
        cycle = _find_cycle(self.nodes, self.edges)
        if cycle:
            raise CycleError(cycle)

    @classmethod
    def from_edges(cls, nodes, edges=(), cards=None, latent=()):
        """Shorthand constructor; ``cards`` may be an int, a mapping, or a sequence."""
        nodes = tuple(nodes)
        if cards is None:
            cards = 2
        if isinstance(cards, int):
            cards = [cards] * len(nodes)
        elif isinstance(cards, Mapping):
            cards = [cards[v] for v in nodes]
        return cls(nodes, tuple(cards), frozenset(map(tuple, edges)), frozenset(latent))

    def __contains__(self, v):
        return v in self._index

    def __len__(self):
        return len(self.nodes)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownNode(v) from None

    def card(self, v: str) -> int:
        return self.cards[self.index(v)]

    def parents(self, v: str) -> tuple[str, ...]:
        """Parents of ``v`` in declaration order (this fixes CPT axis order)."""
        self.index(v)
        return tuple(u for u in self.nodes if (u, v) in self.edges)

    def children(self, v: str) -> tuple[str, ...]:
        self.index(v)
        return tuple(u for u in self.nodes if (v, u) in self.edges)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if v not in self.latent)

    def with_latent(self, latent: Iterable[str]) -> "CausalGraph":
        return CausalGraph(self.nodes, self.cards, self.edges, frozenset(latent))

    def to_spec(self) -> dict:
        return {
            "nodes": [
                {"name": v, "cardinality": c, "latent": v in self.latent}
                for v, c in zip(self.nodes, self.cards)
            ],
            "edges": [list(e) for e in self.sorted_edges()],
        }


@dataclass(frozen=True)
class Intervention:
    """Atomic intervention do(target = value)."""

    target: str
    value: int

    def check(self, g: CausalGraph) -> None:
        k = g.card(self.target)
        if not 0 <= self.value < k:
            raise BadIntervention(
                f"do({self.target}={self.value}) out of range; {self.target} has {k} states"
            )

    def __str__(self):
        return f"do({self.target}={self.value})"


def _find_cycle(nodes, edges):
    children = {v: [] for v in nodes}
    for a, b in edges:
        children[a].append(b)
    state = dict.fromkeys(nodes, 0)  # 0 new, 1 on stack, 2 done
    for root in nodes:
        if state[root]:
            continue
        stack = [(root, iter(children[root]))]
        path = [root]
        state[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[v] = 2
            elif state[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(children[nxt])))
    return None


_NODE_FIELDS = {"name", "cardinality", "latent"}
_GRAPH_FIELDS = {"nodes", "edges"}


def build_graph(spec: Mapping) -> CausalGraph:
    """Validate a graph-spec document and return the graph.

    The document is ``{"nodes": [{"name", "cardinality", "latent"}], "edges":
    [[parent, child], ...]}``; ``latent`` defaults to false and unknown keys are
    rejected.
    """
    if not isinstance(spec, Mapping):
        raise InputError("graph spec must be a JSON object")
    extra = set(spec) - _GRAPH_FIELDS
    if extra:
        raise InputError(f"unknown graph field(s): {sorted(extra)}")
    if "nodes" not in spec:
        raise InputError("graph spec needs a 'nodes' list")
    names, cards, latent = [], [], set()
    for entry in spec["nodes"]:
        if not isinstance(entry, Mapping):
            raise InputError(f"node entry must be an object, got {entry!r}")
        extra = set(entry) - _NODE_FIELDS
        if extra:
            raise InputError(f"unknown node field(s): {sorted(extra)}")
        if "name" not in entry or "cardinality" not in entry:
            raise InputError(f"node entry {entry!r} needs 'name' and 'cardinality'")
        card = entry["cardinality"]
        if isinstance(card, bool) or not isinstance(card, int):
            raise InputError(f"cardinality of {entry['name']!r} must be an integer")
        is_latent = entry.get("latent", False)
        if not isinstance(is_latent, bool):
            raise InputError(f"'latent' of {entry['name']!r} must be a boolean")
        names.append(entry["name"])
        cards.append(card)
        if is_latent:
            latent.add(entry["name"])
    edges = []
    for e in spec.get("edges", []):
        if not (isinstance(e, (list, tuple)) and len(e) == 2):
            raise InputError(f"edge must be a [parent, child] pair, got {e!r}")
        edges.append(tuple(e))
    if len(set(edges)) != len(edges):
        raise InputError("duplicate edges")
    return CausalGraph(tuple(names), tuple(cards), frozenset(edges), frozenset(latent))


def mutilate_incoming(g: CausalGraph, t: str) -> CausalGraph:
    """Remove every edge into ``t``."""
    g.index(t)
    return CausalGraph(g.nodes, g.cards, frozenset(e for e in g.edges if e[1] != t), g.latent)


def mutilate_outgoing(g: CausalGraph, t: str) -> CausalGraph:
    """Remove every edge out of ``t``."""
    g.index(t)
    return CausalGraph(g.nodes, g.cards, frozenset(e for e in g.edges if e[0] != t), g.latent)


def descendants(g: CausalGraph, v: str) -> frozenset[str]:
    g.index(v)
    seen, todo = set(), [v]
    while todo:
        for c in g.children(todo.pop()):
            if c not in seen:
                seen.add(c)
                todo.append(c)
    return frozenset(seen)


def ancestors(g: CausalGraph, vs: Iterable[str]) -> frozenset[str]:
    """Ancestors of a node set, including the set itself."""
    seen = set(vs)
    for v in seen:
        g.index(v)
    todo = list(seen)
    while todo:
        for p in g.parents(todo.pop()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return frozenset(seen)


def topological_order(g: CausalGraph) -> list[str]:
    """Kahn's algorithm; among ready nodes the earliest-declared goes first."""
    indeg = {v: len(g.parents(v)) for v in g.nodes}
    ready = [g.index(v) for v in g.nodes if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = g.nodes[heapq.heappop(ready)]
        order.append(v)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, g.index(c))
    return order


def _as_set(g: CausalGraph, xs) -> frozenset[str]:
    if isinstance(xs, str):
        xs = (xs,)
    xs = frozenset(xs)
    for v in xs:
        g.index(v)
    return xs


def _check_disjoint(X, Y, Z):
    if X & Y or X & Z or Y & Z:
        raise OverlappingSets(
            f"sets must be pairwise disjoint: {sorted(X)}, {sorted(Y)}, {sorted(Z)}"
        )


def d_separated(g: CausalGraph, X, Y, Z=()) -> bool:
    """True iff ``X`` and ``Y`` are d-separated by ``Z`` in ``g``.

    Reachability ("Bayes ball") over (node, direction) pairs: a trail is
    traversed from ``X`` and we report whether any node of ``Y`` is reached by
    an active trail.
    """
    X, Y, Z = _as_set(g, X), _as_set(g, Y), _as_set(g, Z)
    _check_disjoint(X, Y, Z)
    if not X or not Y:
        return True
    anc_z = ancestors(g, Z)
    # "up": arrived at node from a child; "down": arrived from a parent
    todo = [(x, "up") for x in X]
    visited = set()
    while todo:
        v, direction = todo.pop()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in Z and v in Y:
            return False
        if direction == "up" and v not in Z:
            todo.extend((p, "up") for p in g.parents(v))
            todo.extend((c, "down") for c in g.children(v))
        elif direction == "down":
            if v not in Z:
                todo.extend((c, "down") for c in g.children(v))
            if v in anc_z:
                todo.extend((p, "up") for p in g.parents(v))
    return True


def d_separated_by_paths(g: CausalGraph, X, Y, Z=()) -> bool:
    """Naive d-separation: enumerate every simple undirected path.

    Exponential; kept as an independent cross-check for :func:`d_separated`.
    """
    X, Y, Z = _as_set(g, X), _as_set(g, Y), _as_set(g, Z)
    _check_disjoint(X, Y, Z)
    nbrs = {v: set(g.parents(v)) | set(g.children(v)) for v in g.nodes}
    desc_or_self = {v: descendants(g, v) | {v} for v in g.nodes}

    def blocked(path):
        for a, m, b in zip(path, path[1:], path[2:]):
            collider = (a, m) in g.edges and (b, m) in g.edges
            if collider:
                if not desc_or_self[m] & Z:
                    return True
            elif m in Z:
                return True
        return False

    def walk(path):
        v = path[-1]
        if v in Y:
            yield path
            return
        for u in nbrs[v]:
            if u not in path:
                yield from walk(path + [u])

    return all(blocked(p) for x in X for p in walk([x]))


def graph_spec_problems(spec: Mapping) -> list[str]:
    """Every domain problem in a schema-valid graph spec (empty if valid)."""
    problems = []
    names = [n.get("name") for n in spec.get("nodes", [])]
    seen = set()
    for n in spec.get("nodes", []):
        name = n.get("name")
        if not isinstance(name, str) or not name:
            problems.append(f"node name {name!r} must be a non-empty string")
            continue
        if name in seen:
            problems.append(f"duplicate node {name!r}")
        seen.add(name)
        if STAR in name:
            problems.append(f"node name {name!r} contains reserved token {STAR!r}")
        if n.get("cardinality", 0) < 2:
            problems.append(f"cardinality of {name!r} is {n.get('cardinality')}; must be >= 2")
    edges = []
    for a, b in spec.get("edges", []):
        bad = [x for x in (a, b) if x not in seen]
        for x in bad:
            problems.append(f"edge {a}->{b} references unknown node {x!r}")
        if not bad:
            edges.append((a, b))
    cycle = _find_cycle([n for n in names if n in seen], edges)
    if cycle:
        problems.append("directed cycle: " + " -> ".join(cycle))
    return problems
