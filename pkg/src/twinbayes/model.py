"""CPTs, probability tables and exact factor contraction.

A CPT for variable ``V`` with parents ``(P1, .., Pk)`` (declaration order) is
an array of shape ``(|P1|, .., |Pk|, |V|)``; the last axis is the state of
``V``.  In JSON a CPT is a list of rows indexed by the row-major parent
configuration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, InputError, SizeError, UnknownNode
from .graph import CausalGraph, Intervention

MAX_JOINT = 2**20
NORM_TOL = 1e-9


@dataclass(frozen=True)
class Cpt:
    """P(variable | parents) with an optional Dirichlet prior and point table."""

    variable: str
    parents: tuple[str, ...]
    prior: np.ndarray | None = None
    table: np.ndarray | None = None

    @property
    def shape(self):
        arr = self.table if self.table is not None else self.prior
        return arr.shape

    def rows(self, which="table"):
        arr = getattr(self, which)
        return arr.reshape(-1, arr.shape[-1])


def expected_shape(g: CausalGraph, v: str) -> tuple[int, ...]:
    return tuple(g.card(p) for p in g.parents(v)) + (g.card(v),)


def check_cpts(g: CausalGraph, cpts: Mapping[str, Cpt], need: str = "table") -> None:
    """Raise DimensionMismatch unless ``cpts`` has one well-formed CPT per node."""
    missing = [v for v in g.nodes if v not in cpts]
    if missing:
        raise DimensionMismatch(f"no CPT for node(s) {missing}")
    extra = [v for v in cpts if v not in g]
    if extra:
        raise DimensionMismatch(f"CPT for unknown node(s) {extra}")
    for v in g.nodes:
        c = cpts[v]
        if tuple(c.parents) != g.parents(v):
            raise DimensionMismatch(
                f"CPT of {v} has parents {list(c.parents)}, graph has {list(g.parents(v))}"
            )
        arr = getattr(c, need)
        if arr is None:
            raise DimensionMismatch(f"CPT of {v} has no {need}")
        if arr.shape != expected_shape(g, v):
            raise DimensionMismatch(
                f"CPT {need} of {v} has shape {arr.shape}, expected {expected_shape(g, v)}"
            )
        if need == "table":
            if np.any(arr < 0) or not np.allclose(arr.sum(-1), 1.0, atol=1e-12, rtol=0):
                raise DimensionMismatch(f"rows of the CPT of {v} must be distributions")


def uniform_priors(g: CausalGraph, alpha: float = 1.0) -> dict[str, Cpt]:
    return {
        v: Cpt(v, g.parents(v), prior=np.full(expected_shape(g, v), float(alpha)))
        for v in g.nodes
    }


def tables_of(cpts: Mapping[str, Cpt]) -> dict[str, np.ndarray]:
    return {v: c.table for v, c in cpts.items()}


def cpts_from_tables(g: CausalGraph, tables: Mapping[str, np.ndarray]) -> dict[str, Cpt]:
    return {v: Cpt(v, g.parents(v), table=np.asarray(tables[v], dtype=float)) for v in g.nodes}


def random_tables(g: CausalGraph, rng: np.random.Generator, floor: float = 0.02):
    """Strictly positive random CPT tables (Dirichlet(1) rows mixed with a floor)."""
    out = {}
    for v in g.nodes:
        shape = expected_shape(g, v)
        raw = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])
        out[v] = (1 - floor * shape[-1]) * raw + floor
    return out


@dataclass(frozen=True)
class Distribution:
    """Normalized probability table over ``scope``; axis i is ``scope[i]``."""

    scope: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        t = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", t)
        if t.ndim != len(self.scope):
            raise DimensionMismatch(f"table rank {t.ndim} != scope size {len(self.scope)}")
        if np.any(t < 0) or abs(t.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"not a normalized distribution (sum={t.sum()!r})")

    @property
    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def marginal(self, keep) -> "Distribution":
        if isinstance(keep, str):
            keep = (keep,)
        keep = tuple(keep)
        for v in keep:
            if v not in self.scope:
                raise UnknownNode(v)
        drop = tuple(i for i, v in enumerate(self.scope) if v not in keep)
        t = self.table.sum(axis=drop)
        kept = [v for v in self.scope if v in keep]
        t = np.transpose(t, [kept.index(v) for v in keep])
        return Distribution(keep, t)

    def to_json(self, graph: CausalGraph | None = None) -> dict:
        return {"scope": list(self.scope), "table": self.flat.tolist()}

    def __getitem__(self, state):
        return float(self.table[state])


def _check_size(g: CausalGraph, nodes) -> None:
    size = int(np.prod([g.card(v) for v in nodes], dtype=np.int64))
    if size > MAX_JOINT:
        raise SizeError(f"joint over {len(nodes)} nodes has {size} cells (> {MAX_JOINT})")


def _contract(g: CausalGraph, tables, iv: Intervention | None, keep, batched=False):
    """Contract the (possibly mutilated) factor product down to ``keep``.

    With ``iv`` the target's own factor is dropped and the target's axis is
    sliced at ``iv.value`` in every child factor.  With ``batched`` every table
    carries one leading sample axis, kept in the output.
    """
    ax = {v: i for i, v in enumerate(g.nodes)}
    operands = []
    for v in g.nodes:
        if iv is not None and v == iv.target:
            continue
        arr = np.asarray(tables[v], dtype=float)
        scope = list(g.parents(v)) + [v]
        if iv is not None and iv.target in scope:
            pos = scope.index(iv.target) + (1 if batched else 0)
            arr = np.take(arr, iv.value, axis=pos)
            scope.remove(iv.target)
        sub = [ax[u] for u in scope]
        operands += [arr, ([Ellipsis] if batched else []) + sub]
    out = ([Ellipsis] if batched else []) + [ax[u] for u in keep]
    if not operands:
        return np.ones(())
    return np.einsum(*operands, out, optimize=len(operands) > 6)


def joint(g: CausalGraph, tables: Mapping[str, np.ndarray]) -> Distribution:
    """Exact observational joint over all nodes."""
    _check_size(g, g.nodes)
    return Distribution(g.nodes, _contract(g, tables, None, g.nodes))


def parse_cpt_document(g: CausalGraph, doc: Mapping, kind: str) -> dict[str, Cpt]:
    """Parse a CPT/prior JSON document.

    ``doc`` maps each variable to a list of rows (row ``i`` is the parent
    configuration with row-major index ``i`` over the variable's parents in
    declaration order).  For priors a bare number means that pseudocount in
    every cell.  ``kind`` is ``"table"`` or ``"prior"``.
    """
    if not isinstance(doc, Mapping):
        raise InputError(f"{kind} document must be a JSON object")
    unknown = [k for k in doc if k not in g]
    if unknown:
        raise InputError(f"{kind} document names unknown variable(s) {unknown}")
    out = {}
    for v in g.nodes:
        shape = expected_shape(g, v)
        if v not in doc:
            if kind == "prior":
                out[v] = Cpt(v, g.parents(v), prior=np.ones(shape))
                continue
            raise InputError(f"{kind} document has no entry for {v!r}")
        raw = doc[v]
        if kind == "prior" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
            arr = np.full(shape, float(raw))
        else:
            try:
                arr = np.asarray(raw, dtype=float)
            except (TypeError, ValueError) as exc:
                raise InputError(f"{kind} entry for {v!r} is not numeric: {exc}") from None
            rows = int(np.prod(shape[:-1], dtype=np.int64))
            if arr.shape != (rows, shape[-1]):
                raise DimensionMismatch(
                    f"{kind} entry for {v!r} has shape {arr.shape}, expected {(rows, shape[-1])}"
                )
            arr = arr.reshape(shape)
        if kind == "prior":
            out[v] = Cpt(v, g.parents(v), prior=arr)
        else:
            out[v] = Cpt(v, g.parents(v), table=arr)
    if kind == "table":
        check_cpts(g, out, "table")
    return out


def cpt_document(cpts: Mapping[str, Cpt], which: str = "table") -> dict:
    return {v: c.rows(which).tolist() for v, c in cpts.items()}
