"""Joint pre/post-intervention PGM with shared parameter nodes.

The pre-intervention copy of the graph sits inside a plate ``m=1..M`` (the
observed data); the post-intervention copy is the graph with every edge
into the target removed, node names starred.  Each variable ``V`` gets a
parameter node feeding ``V`` and, unless ``V`` is the target, ``V*`` too.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidTwin, LatentTarget, ReservedName
from .graph import STAR, CausalGraph, Intervention, _find_cycle, mutilate_incoming

# Parameter names used in the three-node confounder figure.
FIGURE_PARAM_NAMES = {"Z": "gamma", "T": "phi", "Y": "psi"}


def star(v: str) -> str:
    return v + STAR


def default_param_name(v: str) -> str:
    return f"theta_{v}"


@dataclass(frozen=True)
class TwinPgm:
    graph: CausalGraph
    intervention: Intervention
    pre_nodes: tuple[str, ...]
    post_nodes: tuple[str, ...]
    params: tuple[tuple[str, str], ...]  # (variable, parameter node) in declaration order
    edges: frozenset[tuple[str, str]]

    @property
    def param_of(self) -> dict[str, str]:
        return dict(self.params)

    @property
    def param_nodes(self) -> tuple[str, ...]:
        return tuple(p for _, p in self.params)

    @property
    def clamped(self) -> str:
        return star(self.intervention.target)

    def to_json(self) -> dict:
        order = {n: i for i, n in enumerate(self.param_nodes + self.pre_nodes + self.post_nodes)}
        return {
            "graph": self.graph.to_spec(),
            "intervention": {"target": self.intervention.target, "value": self.intervention.value},
            "plate": {"index": "m", "range": "1..M", "nodes": list(self.pre_nodes)},
            "pre_nodes": list(self.pre_nodes),
            "post_nodes": list(self.post_nodes),
            "param_nodes": {v: p for v, p in self.params},
            "clamped": {self.clamped: self.intervention.value},
            "edges": [
                list(e)
                for e in sorted(self.edges, key=lambda e: (order.get(e[0], 1e9), order.get(e[1], 1e9), e))
            ],
        }


def causal_bayes_construct(
    g: CausalGraph, iv: Intervention, param_names: Mapping[str, str] | None = None
) -> TwinPgm:
    """Build the twin PGM for ``iv`` on ``g``.

    ``param_names`` optionally renames parameter nodes (e.g.
    :data:`FIGURE_PARAM_NAMES`); by default ``V`` gets ``theta_V``.
    """
    iv.check(g)
    t = iv.target
    if t in g.latent:
        raise LatentTarget(f"cannot intervene on latent node {t!r}")
    names = {v: (param_names or {}).get(v, default_param_name(v)) for v in g.nodes}
    taken = set(g.nodes) | {star(v) for v in g.nodes}
    if len(set(names.values())) != len(names) or taken & set(names.values()):
        raise ReservedName("parameter node names collide with each other or with variables")

    pre = g.nodes  # step 1: original graph inside the plate
    edges = set(g.edges)
    edges |= {(names[v], v) for v in g.nodes}  # step 2: one parameter per CPT
    post_graph = mutilate_incoming(g, t)  # step 3: starred mutilated copy
    post = tuple(star(v) for v in g.nodes)
    edges |= {(star(a), star(b)) for a, b in post_graph.edges}
    edges |= {(names[v], star(v)) for v in g.nodes if v != t}  # step 4: share all but theta_T
    return TwinPgm(g, iv, pre, post, tuple((v, names[v]) for v in g.nodes), frozenset(edges))


def validate_twin(tw: TwinPgm) -> list[str]:
    """List every violated twin invariant; an empty list means valid."""
    problems = []
    g, t = tw.graph, tw.intervention.target
    names = tw.param_of
    if tuple(tw.pre_nodes) != g.nodes:
        problems.append("pre nodes differ from the original graph's nodes")
    if tuple(tw.post_nodes) != tuple(star(v) for v in g.nodes):
        problems.append("post nodes are not the starred copies of the original nodes")
    if set(tw.pre_nodes) & set(tw.post_nodes):
        problems.append("pre and post node names overlap")
    if set(names) != set(g.nodes):
        problems.append("not exactly one parameter node per variable")
    pset = set(names.values())
    pre, post = set(tw.pre_nodes), set(tw.post_nodes)
    known = pre | post | pset
    for a, b in tw.edges:
        if a not in known or b not in known:
            problems.append(f"edge {a}->{b} references an unknown node")

    pre_edges = {e for e in tw.edges if e[0] in pre and e[1] in pre}
    if pre_edges != set(g.edges):
        problems.append("pre graph differs from the original graph")
    post_edges = {e for e in tw.edges if e[0] in post and e[1] in post}
    want_post = {(star(a), star(b)) for a, b in mutilate_incoming(g, t).edges}
    if post_edges != want_post:
        problems.append("post graph not mutilated: post edges differ from the graph with edges into the target removed")
    cross = {e for e in tw.edges if (e[0] in pre and e[1] in post) or (e[0] in post and e[1] in pre)}
    if cross:
        problems.append("edges link the pre and post worlds directly")
    if any(b in pset for _, b in tw.edges):
        problems.append("parameter nodes must have no parents")

    clamped = star(t)
    if any(b == clamped for _, b in tw.edges):
        if (names.get(t), clamped) in tw.edges:
            problems.append("parameter sharing includes target: theta of the target feeds the clamped node")
        else:
            problems.append("clamped target has parents")
    for v, p in names.items():
        if (p, v) not in tw.edges:
            problems.append(f"parameter {p} does not feed {v}")
        if v != t and (p, star(v)) not in tw.edges:
            problems.append(f"parameter {p} is not shared with {star(v)}")
        outs = {b for a, b in tw.edges if a == p}
        allowed = {v} | ({star(v)} if v != t else set())
        if outs - allowed and not (v == t and outs - allowed == {clamped}):
            problems.append(f"parameter {p} feeds nodes other than {sorted(allowed)}")
    if _find_cycle(sorted(known), tw.edges):
        problems.append("combined twin graph has a directed cycle")
    return problems


@dataclass(frozen=True)
class Factor:
    kind: str  # "prior" | "pre" | "post"
    variable: str
    given: tuple[str, ...]

    def __str__(self):
        return f"P({self.variable}|{','.join(self.given)})" if self.given else f"P({self.variable})"


def factorization(tw: TwinPgm) -> list[Factor]:
    """Symbolic factor list: priors, pre-world likelihood, post-world predictive.

    In post factors the clamped target appears as the constant ``t*``.
    """
    problems = validate_twin(tw)
    if problems:
        raise InvalidTwin("; ".join(problems))
    g, t, names = tw.graph, tw.intervention.target, tw.param_of
    factors = [Factor("prior", names[v], ()) for v in g.nodes]
    factors += [Factor("pre", v, g.parents(v) + (names[v],)) for v in g.nodes]
    for v in g.nodes:
        if v == t:
            continue
        given = tuple("t*" if p == t else star(p) for p in g.parents(v))
        factors.append(Factor("post", star(v), given + (names[v],)))
    return factors


def export_dot(tw: TwinPgm) -> str:
    """Graphviz DOT; the plate is a cluster and parameter nodes are diamonds."""
    g = tw.graph
    t = tw.intervention.target

    def q(s):
        return '"' + s.replace('"', '\\"') + '"'

    lines = ["digraph twin {", "  rankdir=TB;", "  node [shape=circle];"]
    lines.append("  subgraph cluster_plate {")
    lines.append('    label="m=1..M";')
    for v in tw.pre_nodes:
        style = ", style=filled, fillcolor=gray80" if v not in g.latent else ""
        lines.append(f"    {q(v)} [label={q(v + '_m')}{style}];")
    lines.append("  }")
    for v in tw.post_nodes:
        if v == star(t):
            lines.append(f"  {q(v)} [label={q(f'{v}={tw.intervention.value}')}, shape=box, style=filled, fillcolor=gray80];")
        else:
            lines.append(f"  {q(v)};")
    for p in tw.param_nodes:
        lines.append(f"  {q(p)} [shape=diamond];")
    order = {n: i for i, n in enumerate(tw.param_nodes + tw.pre_nodes + tw.post_nodes)}
    for a, b in sorted(tw.edges, key=lambda e: (order[e[0]], order[e[1]])):
        lines.append(f"  {q(a)} -> {q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
