"""Datasets, CSV I/O, seeding and ancestral sampling."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError, UnknownColumn
from .graph import CausalGraph, Intervention, topological_order
from .model import Cpt, check_cpts, tables_of

MISSING = -1


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for a named stage.

    Splitting rule: ``SeedSequence(seed, spawn_key=keys)`` and the first
    64-bit word of its generated state.
    """
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) % 2**64))


@dataclass(frozen=True, eq=False)
class Dataset:
    """``M`` rows of state indices; ``MISSING`` marks an unobserved cell."""

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        vals = np.asarray(self.values, dtype=np.int64).reshape(-1, len(self.columns))
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.columns == other.columns and np.array_equal(self.values, other.values)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise UnknownColumn(f"no column {name!r}") from None

    def check(self, g: CausalGraph) -> None:
        for j, c in enumerate(self.columns):
            if c not in g:
                raise UnknownColumn(f"column {c!r} is not a graph node")
            col = self.values[:, j]
            k = g.card(c)
            if np.any((col != MISSING) & ((col < 0) | (col >= k))):
                raise InputError(f"column {c!r} has states outside [0, {k})")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.values:
            w.writerow(["" if x == MISSING else int(x) for x in row])
        return buf.getvalue()


def read_csv(text: str) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InputError("empty CSV: a header row is required")
    header = [h.strip() for h in rows[0]]
    vals = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"CSV line {n}: expected {len(header)} fields, got {len(row)}")
        try:
            vals.append([MISSING if x.strip() == "" else int(x) for x in row])
        except ValueError:
            raise InputError(f"CSV line {n}: non-integer state in {row!r}") from None
    return Dataset(tuple(header), np.array(vals, dtype=np.int64).reshape(-1, len(header)))


@dataclass(frozen=True)
class GroundTruthModel:
    graph: CausalGraph
    cpts: Mapping[str, Cpt]

    def __post_init__(self):
        check_cpts(self.graph, self.cpts, "table")


def _draw(g, tables, M, rng, iv: Intervention | None):
    cols = {}
    u = rng.random((M, len(g.nodes)))
    for v in topological_order(g):
        j = g.index(v)
        if iv is not None and v == iv.target:
            cols[v] = np.full(M, iv.value, dtype=np.int64)
            continue
        idx = tuple(cols[p] for p in g.parents(v))
        probs = tables[v][idx] if idx else np.broadcast_to(tables[v], (M, g.card(v)))
        cdf = np.cumsum(probs, axis=1)
        # inverse CDF over states in declaration order
        state = (u[:, j : j + 1] >= cdf[:, :-1]).sum(axis=1)
        cols[v] = state.astype(np.int64)
    return Dataset(g.nodes, np.column_stack([cols[v] for v in g.nodes]) if M else np.zeros((0, len(g.nodes)), dtype=np.int64))


def forward_sample(m: GroundTruthModel, M: int, seed: int) -> Dataset:
    """``M`` i.i.d. ancestral samples from the observational model."""
    return _draw(m.graph, tables_of(m.cpts), int(M), make_rng(seed), None)


def interventional_sample(m: GroundTruthModel, iv: Intervention, M: int, seed: int) -> Dataset:
    """Ancestral samples from the model with the target clamped to ``iv.value``."""
    iv.check(m.graph)
    return _draw(m.graph, tables_of(m.cpts), int(M), make_rng(seed), iv)


def hide_columns(data: Dataset, names: Iterable[str]) -> Dataset:
    names = set(names)
    unknown = names - set(data.columns)
    if unknown:
        raise UnknownColumn(f"no column(s) {sorted(unknown)}")
    vals = data.values.copy()
    for j, c in enumerate(data.columns):
        if c in names:
            vals[:, j] = MISSING
    return Dataset(data.columns, vals)


def empirical(data: Dataset, g: CausalGraph, scope) -> np.ndarray:
    """Empirical joint frequency table over ``scope`` (rows with missing cells dropped)."""
    idx = [data.columns.index(v) for v in scope]
    sub = data.values[:, idx]
    sub = sub[(sub != MISSING).all(axis=1)]
    counts = np.zeros([g.card(v) for v in scope])
    np.add.at(counts, tuple(sub.T), 1)
    return counts / max(len(sub), 1)
