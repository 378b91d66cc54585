"""Rules 1-3 of the single-variable do-calculus and the truncated product.

Each rule is a d-separation test on a mutilated graph.  The truncated
product supplies exact post-intervention distributions for identifiable
queries and is the ground truth the Bayesian pipeline is checked against.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import OverlappingSets, UnknownNode
from .graph import (
    CausalGraph,
    Intervention,
    _as_set,
    d_separated,
    descendants,
    mutilate_incoming,
    mutilate_outgoing,
)
from .model import Cpt, Distribution, _check_size, _contract, check_cpts, tables_of


@dataclass(frozen=True)
class RuleQuery:
    """Query P(y | do(t), z[, w])."""

    y: frozenset[str]
    t: str
    z: frozenset[str] = frozenset()
    w: frozenset[str] = frozenset()

    def __post_init__(self):
        for name in ("y", "z", "w"):
            val = getattr(self, name)
            object.__setattr__(self, name, frozenset((val,) if isinstance(val, str) else val))
        sets = [self.y, frozenset([self.t]), self.z, self.w]
        for i in range(4):
            for j in range(i + 1, 4):
                if sets[i] & sets[j]:
                    raise OverlappingSets("query sets y, {t}, z, w must be pairwise disjoint")

    def check(self, g: CausalGraph):
        _as_set(g, self.y | self.z | self.w | {self.t})

    def describe(self, with_w=False) -> str:
        cond = ["do(%s)" % self.t] + sorted(self.z) + (sorted(self.w) if with_w else [])
        return "P(%s | %s)" % (",".join(sorted(self.y)), ", ".join(cond))


def _fmt(xs):
    xs = sorted(xs)
    return "{" + ", ".join(xs) + "}"


def rule1_applies(g: CausalGraph, q: RuleQuery) -> bool:
    """Y _||_ W | (Z, T) in the graph with edges into T removed."""
    q.check(g)
    return d_separated(mutilate_incoming(g, q.t), q.y, q.w, q.z | {q.t})


def rule2_applies(g: CausalGraph, q: RuleQuery) -> bool:
    """Y _||_ T | Z in the graph with edges out of T removed."""
    q.check(g)
    return d_separated(mutilate_outgoing(g, q.t), q.y, {q.t}, q.z)


def rule3_applies(g: CausalGraph, q: RuleQuery) -> bool:
    """Y _||_ T | Z with edges into T removed, and no member of Z descends from T."""
    q.check(g)
    if q.z & descendants(g, q.t):
        return False
    return d_separated(mutilate_incoming(g, q.t), q.y, {q.t}, q.z)


@dataclass
class RuleResult:
    rule: int
    applicable: bool
    applies: bool
    statement: str
    conclusion: str
    notes: list[str] = field(default_factory=list)

    def to_json(self):
        return {
            "rule": self.rule,
            "applicable": self.applicable,
            "applies": self.applies,
            "d_separation": self.statement,
            "conclusion": self.conclusion,
            "notes": self.notes,
        }


def identify(g: CausalGraph, q: RuleQuery) -> dict:
    """Evaluate all three rules for ``q`` and summarise which ones fire."""
    q.check(g)
    y, t, z, w = _fmt(q.y), q.t, q.z, q.w
    results = []
    if w:
        ok = rule1_applies(g, q)
        results.append(RuleResult(
            1, True, ok,
            f"{y} _||_ {_fmt(w)} | {_fmt(z | {t})} in G with edges into {t} removed: {ok}",
            f"{q.describe(with_w=True)} = {q.describe()}",
        ))
    else:
        results.append(RuleResult(1, False, False, "no W given; Rule 1 not evaluated", ""))
    ok2 = rule2_applies(g, q)
    results.append(RuleResult(
        2, True, ok2,
        f"{y} _||_ {{{t}}} | {_fmt(z)} in G with edges out of {t} removed: {ok2}",
        "{} = P({} | {})".format(q.describe(), ",".join(sorted(q.y)), ", ".join([t] + sorted(z))),
    ))
    desc_hit = sorted(z & descendants(g, t))
    ok3 = rule3_applies(g, q)
    sep3 = d_separated(mutilate_incoming(g, t), q.y, {t}, z)
    r3 = RuleResult(
        3, True, ok3,
        f"{y} _||_ {{{t}}} | {_fmt(z)} in G with edges into {t} removed: {sep3}",
        "{} = P({}{})".format(
            q.describe(), ",".join(sorted(q.y)), (" | " + ", ".join(sorted(z))) if z else ""
        ),
    )
    if desc_hit:
        r3.notes.append(f"{_fmt(desc_hit)} descend from {t}")
    results.append(r3)
    identified = ok2 or ok3
    return {
        "query": q.describe(with_w=bool(w)),
        "rules": results,
        "identified": identified,
        "summary": (
            "identified by Rule " + " and Rule ".join(str(r.rule) for r in results[1:] if r.applies)
            if identified else "not identified by Rules 1-3"
        ),
    }


def _interventional(g, cpts, iv):
    if isinstance(next(iter(cpts.values()), None), Cpt):
        check_cpts(g, cpts, "table")
        tables = tables_of(cpts)
    else:
        tables = cpts
    iv.check(g)
    return tables


def truncated_product(g: CausalGraph, cpts: Mapping[str, Cpt], iv: Intervention) -> Distribution:
    """Post-intervention joint over every node except the target."""
    tables = _interventional(g, cpts, iv)
    keep = tuple(v for v in g.nodes if v != iv.target)
    _check_size(g, keep)
    return Distribution(keep, _contract(g, tables, iv, keep))


def interventional_marginal(
    g: CausalGraph, cpts: Mapping[str, Cpt], iv: Intervention, y
) -> Distribution:
    """P(y | do(iv)) computed by contracting straight to ``y``."""
    ys = (y,) if isinstance(y, str) else tuple(y)
    for v in ys:
        if v not in g:
            raise UnknownNode(v)
        if v == iv.target:
            raise OverlappingSets(f"target variable {v!r} is the intervened node")
    tables = _interventional(g, cpts, iv)
    return Distribution(ys, _contract(g, tables, iv, ys))


def batched_interventional_marginal(g, tables, iv, y) -> np.ndarray:
    """Vectorized marginal; every table has a leading sample axis.

    Returns an array of shape ``(n, |y|)``.
    """
    return _contract(g, tables, iv, (y,), batched=True)
