"""Bayesian inference of post-intervention distributions on the twin PGM.

Every CPT row gets an independent Dirichlet prior.  Conditioning on the
pre-intervention data updates the pseudocounts; the post-intervention
predictive for ``Y*`` integrates the shared parameters against that
posterior.  Because each term of the post-world sum uses every
(variable, parent-row) parameter vector at most once, the integral equals
the truncated product evaluated at the posterior-mean CPTs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import MISSING, Dataset, make_rng
from .docalc import batched_interventional_marginal, interventional_marginal
from .errors import (
    BadSampleCount,
    DimensionMismatch,
    LatentNodePresent,
    MissingColumn,
    MissingValueInObservedColumn,
    NoLatentNodes,
    NonPositivePrior,
    OverlappingSets,
)
from .graph import CausalGraph, Intervention
from .model import Cpt, Distribution, expected_shape, uniform_priors


DEFAULT_ALPHA = 1.0
DEFAULT_BURN = 1_000
DEFAULT_KEEP = 4_000
_MC_CHUNK = 10_000


@dataclass(frozen=True)
class PosteriorCounts:
    """Dirichlet posterior pseudocounts (prior + observed) per CPT cell.

    ``unobserved`` lists variables whose family contains missing latent
    values; their cells hold the prior only.
    """

    graph: CausalGraph
    counts: Mapping[str, np.ndarray]
    prior: Mapping[str, np.ndarray]
    unobserved: frozenset[str] = frozenset()


def _prior_arrays(g: CausalGraph, priors) -> dict[str, np.ndarray]:
    if priors is None:
        priors = uniform_priors(g, DEFAULT_ALPHA)
    out = {}
    for v in g.nodes:
        if v not in priors:
            raise DimensionMismatch(f"no prior for {v!r}")
        c = priors[v]
        arr = c.prior if isinstance(c, Cpt) else np.asarray(c, dtype=float)
        if arr is None:
            raise DimensionMismatch(f"CPT of {v!r} carries no prior pseudocounts")
        if isinstance(c, Cpt) and tuple(c.parents) != g.parents(v):
            raise DimensionMismatch(f"prior of {v!r} has parents {c.parents}, graph has {g.parents(v)}")
        if arr.shape != expected_shape(g, v):
            raise DimensionMismatch(f"prior of {v!r} has shape {arr.shape}, expected {expected_shape(g, v)}")
        if not np.all(arr > 0):
            raise NonPositivePrior(f"prior pseudocounts of {v!r} must be strictly positive")
        out[v] = np.asarray(arr, dtype=float)
    return out


def _family_counts(g: CausalGraph, v: str, full: np.ndarray) -> np.ndarray:
    shape = expected_shape(g, v)
    fam = [g.index(p) for p in g.parents(v)] + [g.index(v)]
    flat = np.ravel_multi_index(tuple(full[:, fam].T), shape) if len(full) else np.zeros(0, int)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape).astype(float)


def _aligned(g: CausalGraph, data: Dataset) -> np.ndarray:
    """Data as an (M, |nodes|) array in graph order; absent latent columns are MISSING."""
    data.check(g)
    out = np.full((len(data), len(g.nodes)), MISSING, dtype=np.int64)
    for v in g.nodes:
        if v in data.columns:
            col = data.column(v)
            if v not in g.latent and np.any(col == MISSING):
                raise MissingValueInObservedColumn(f"observed column {v!r} has missing values")
            out[:, g.index(v)] = col
        elif v not in g.latent:
            raise MissingColumn(f"data has no column for observed node {v!r}")
    return out


def fit_counts(g: CausalGraph, data: Dataset, priors=None) -> PosteriorCounts:
    """Add observed family counts to the prior pseudocounts."""
    prior = _prior_arrays(g, priors)
    full = _aligned(g, data)
    counts, unobserved = {}, set()
    for v in g.nodes:
        fam = [g.index(p) for p in g.parents(v)] + [g.index(v)]
        if np.any(full[:, fam] == MISSING):
            unobserved.add(v)
            counts[v] = prior[v].copy()
        else:
            counts[v] = prior[v] + _family_counts(g, v, full)
    return PosteriorCounts(g, counts, prior, frozenset(unobserved))


def posterior_mean_cpt(pc: PosteriorCounts) -> dict[str, Cpt]:
    g = pc.graph
    return {
        v: Cpt(v, g.parents(v), prior=pc.prior[v], table=c / c.sum(axis=-1, keepdims=True))
        for v, c in pc.counts.items()
    }


def _check_query(g, iv, y):
    iv.check(g)
    g.index(y)
    if y == iv.target:
        raise OverlappingSets("target variable must differ from the intervened node")


def posterior_predictive(
    g: CausalGraph, data: Dataset, priors, iv: Intervention, y: str
) -> Distribution:
    """Exact P(Y* | data, do(t*)) for fully observed graphs."""
    if g.latent:
        raise LatentNodePresent(
            f"graph has latent node(s) {sorted(g.latent)}; use latent_posterior_predictive"
        )
    _check_query(g, iv, y)
    return interventional_marginal(g, posterior_mean_cpt(fit_counts(g, data, priors)), iv, y)


def _dirichlet(rng: np.random.Generator, alpha: np.ndarray, n: int | None = None) -> np.ndarray:
    size = alpha.shape if n is None else (n,) + alpha.shape
    draws = rng.standard_gamma(np.broadcast_to(alpha, size))
    return draws / draws.sum(axis=-1, keepdims=True)


def mc_posterior_predictive(
    g: CausalGraph,
    data: Dataset,
    priors,
    iv: Intervention,
    y: str,
    n_samples: int,
    seed: int,
) -> tuple[Distribution, np.ndarray]:
    """Monte Carlo version of :func:`posterior_predictive`.

    Returns the estimate and its per-state standard error.
    """
    if n_samples <= 0:
        raise BadSampleCount("n_samples must be positive")
    if g.latent:
        raise LatentNodePresent(
            f"graph has latent node(s) {sorted(g.latent)}; use latent_posterior_predictive"
        )
    _check_query(g, iv, y)
    pc = fit_counts(g, data, priors)
    rng = make_rng(seed)
    total = np.zeros(g.card(y))
    total_sq = np.zeros(g.card(y))
    done = 0
    while done < n_samples:
        n = min(_MC_CHUNK, n_samples - done)
        tables = {v: _dirichlet(rng, pc.counts[v], n) for v in g.nodes}
        vals = batched_interventional_marginal(g, tables, iv, y)
        total += vals.sum(axis=0)
        total_sq += (vals**2).sum(axis=0)
        done += n
    mean = total / n_samples
    var = np.maximum(total_sq / n_samples - mean**2, 0.0) * n_samples / max(n_samples - 1, 1)
    mean = mean / mean.sum()
    return Distribution((y,), mean), np.sqrt(var / n_samples)


def latent_posterior_predictive(
    g: CausalGraph,
    data: Dataset,
    priors,
    iv: Intervention,
    y: str,
    n_burn: int = DEFAULT_BURN,
    n_keep: int = DEFAULT_KEEP,
    seed: int = 0,
) -> tuple[Distribution, np.ndarray]:
    """Gibbs sampler for graphs with latent nodes.

    Each sweep draws every CPT from its Dirichlet full conditional given the
    completed data, then redraws each latent node's missing cells from their
    full conditionals.  Returns the predictive averaged over the kept draws
    and the per-state standard deviation of the per-draw predictive.
    """
    if not g.latent:
        raise NoLatentNodes("graph has no latent nodes; use posterior_predictive")
    if n_keep <= 0 or n_burn < 0:
        raise BadSampleCount("n_keep must be positive and n_burn non-negative")
    _check_query(g, iv, y)
    prior = _prior_arrays(g, priors)
    full = _aligned(g, data)
    rng = make_rng(seed)

    hidden = [v for v in g.nodes if v in g.latent and np.any(full[:, g.index(v)] == MISSING)]
    masks = {v: full[:, g.index(v)] == MISSING for v in hidden}
    for v in hidden:
        full[masks[v], g.index(v)] = rng.integers(0, g.card(v), size=int(masks[v].sum()))
    blanket = {v: (v,) + g.children(v) for v in hidden}

    kept = {v: np.empty((n_keep,) + expected_shape(g, v)) for v in g.nodes}
    for it in range(n_burn + n_keep):
        theta = {v: _dirichlet(rng, prior[v] + _family_counts(g, v, full)) for v in g.nodes}
        for v in hidden:
            rows = np.flatnonzero(masks[v])
            if rows.size == 0:
                continue
            j = g.index(v)
            sub = full[rows]
            logp = np.empty((rows.size, g.card(v)))
            for state in range(g.card(v)):
                sub[:, j] = state
                acc = np.zeros(rows.size)
                for c in blanket[v]:
                    fam = [g.index(p) for p in g.parents(c)] + [g.index(c)]
                    acc += np.log(theta[c][tuple(sub[:, fam].T)])
                logp[:, state] = acc
            logp -= logp.max(axis=1, keepdims=True)
            p = np.exp(logp)
            cdf = np.cumsum(p, axis=1)
            u = rng.random(rows.size) * cdf[:, -1]
            full[rows, j] = (u[:, None] >= cdf[:, :-1]).sum(axis=1)
        if it >= n_burn:
            for v in g.nodes:
                kept[v][it - n_burn] = theta[v]
    vals = batched_interventional_marginal(g, kept, iv, y)
    mean = vals.mean(axis=0)
    return Distribution((y,), mean / mean.sum()), vals.std(axis=0)


def _needs_gibbs(g: CausalGraph, data: Dataset) -> bool:
    for v in g.latent:
        if v not in data.columns or np.any(data.column(v) == MISSING):
            return True
    return False


def predictive(
    g: CausalGraph,
    data: Dataset,
    priors,
    iv: Intervention,
    y: str,
    n_burn: int = DEFAULT_BURN,
    n_keep: int = DEFAULT_KEEP,
    seed: int = 0,
) -> Distribution:
    """Route to the Gibbs sampler when latent values are missing, else the exact path."""
    if _needs_gibbs(g, data):
        return latent_posterior_predictive(g, data, priors, iv, y, n_burn, n_keep, seed)[0]
    return posterior_predictive(g.with_latent(()), data, priors, iv, y)


def prior_sensitivity(
    g: CausalGraph,
    data: Dataset,
    priors_list: Sequence[tuple[str, object]],
    iv: Intervention,
    y: str,
    n_burn: int = DEFAULT_BURN,
    n_keep: int = DEFAULT_KEEP,
    seed: int = 0,
) -> dict[str, Distribution]:
    """One predictive per labelled prior; every Gibbs run reuses ``seed``."""
    if len(priors_list) < 2:
        raise ValueError("prior sensitivity needs at least two priors")
    out = {}
    for label, priors in priors_list:
        if label in out:
            raise ValueError(f"duplicate prior label {label!r}")
        out[label] = predictive(g, data, priors, iv, y, n_burn, n_keep, seed)
    return out


def max_gap(results: Mapping[str, Distribution]) -> float:
    tabs = [d.flat for d in results.values()]
    return max(
        float(np.max(np.abs(a - b))) for i, a in enumerate(tabs) for b in tabs[i + 1 :]
    )
