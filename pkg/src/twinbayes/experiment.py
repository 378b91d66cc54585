"""Bayesian twin-graph inference versus the truncated product.

For each sample size M: simulate M observational rows, compute the
posterior predictive for the target under the intervention, and compare it
with the exact interventional marginal and with an empirical frequency from
interventional samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .data import GroundTruthModel, derive_seed, forward_sample, hide_columns, interventional_sample
from .docalc import interventional_marginal
from .errors import InputError, OverlappingSets
from .graph import Intervention
from .inference import DEFAULT_BURN, DEFAULT_KEEP, latent_posterior_predictive, mc_posterior_predictive, posterior_predictive
from .io import load_priors, parse_do, parse_model, read_json
from .model import parse_cpt_document

# stage keys for derive_seed
OBS_STAGE, INTERVENTIONAL_STAGE, INFERENCE_STAGE = 0, 1, 2

_CONFIG_FIELDS = {
    "model", "prior", "do", "target", "sizes", "seed", "interventional_n",
    "method", "hide", "samples", "burn",
}


@dataclass
class ExperimentConfig:
    model: GroundTruthModel
    intervention: Intervention
    target: str
    sizes: list[int]
    seed: int = 0
    priors: Any = None
    interventional_n: int = 200_000
    method: str = "auto"
    hide: list[str] = field(default_factory=list)
    samples: int = DEFAULT_KEEP
    burn: int = DEFAULT_BURN

    def __post_init__(self):
        g = self.model.graph
        self.intervention.check(g)
        g.index(self.target)
        if self.target == self.intervention.target:
            raise OverlappingSets("target must differ from the intervened variable")
        if self.method not in {"auto", "exact", "mc", "gibbs"}:
            raise InputError(f"unknown method {self.method!r}")
        if any(m < 0 for m in self.sizes):
            raise InputError("sample sizes must be non-negative")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(read_json(path), Path(path).parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise InputError("experiment config must be a JSON object")
        extra = set(doc) - _CONFIG_FIELDS
        if extra:
            raise InputError(f"unknown config field(s): {sorted(extra)}")
        for key in ("model", "do", "target", "sizes"):
            if key not in doc:
                raise InputError(f"config needs {key!r}")
        mdoc = doc["model"]
        if isinstance(mdoc, str):
            p = Path(mdoc) if base is None else base / mdoc
            model = parse_model(read_json(p), p.parent)
        else:
            model = parse_model(mdoc, base)
        g = model.graph.with_latent(doc.get("hide", []))
        model = GroundTruthModel(g, model.cpts)
        priors = None
        if doc.get("prior") is not None:
            p = doc["prior"]
            if isinstance(p, str):
                priors = load_priors(g, p if base is None else base / p)
            else:
                priors = parse_cpt_document(g, p, "prior")
        return cls(
            model=model,
            intervention=parse_do(doc["do"], g),
            target=doc["target"],
            sizes=[int(m) for m in doc["sizes"]],
            seed=int(doc.get("seed", 0)),
            priors=priors,
            interventional_n=int(doc.get("interventional_n", 200_000)),
            method=doc.get("method", "auto"),
            hide=list(doc.get("hide", [])),
            samples=int(doc.get("samples", DEFAULT_KEEP)),
            burn=int(doc.get("burn", DEFAULT_BURN)),
        )


def run_compare(cfg: ExperimentConfig) -> dict:
    """Rows of (truth, Bayesian predictive, empirical interventional frequency, gaps)."""
    m, iv, y = cfg.model, cfg.intervention, cfg.target
    g = m.graph
    truth = interventional_marginal(g, m.cpts, iv, y).flat
    rows = []
    for i, M in enumerate(cfg.sizes):
        obs = forward_sample(m, M, derive_seed(cfg.seed, OBS_STAGE, i))
        if cfg.hide:
            obs = hide_columns(obs, cfg.hide)
        inf_seed = derive_seed(cfg.seed, INFERENCE_STAGE, i)
        method = cfg.method
        if method == "auto":
            method = "gibbs" if cfg.hide else "exact"
        if method == "gibbs":
            bayes = latent_posterior_predictive(g, obs, cfg.priors, iv, y, cfg.burn, cfg.samples, inf_seed)[0].flat
        elif method == "mc":
            bayes = mc_posterior_predictive(g.with_latent(()), obs, cfg.priors, iv, y, cfg.samples, inf_seed)[0].flat
        else:
            bayes = posterior_predictive(g.with_latent(()), obs, cfg.priors, iv, y).flat
        if cfg.interventional_n > 0:
            isamp = interventional_sample(m, iv, cfg.interventional_n, derive_seed(cfg.seed, INTERVENTIONAL_STAGE, i))
            col = isamp.column(y)
            emp = np.bincount(col, minlength=g.card(y)) / len(col)
        else:
            emp = np.full(g.card(y), np.nan)
        rows.append({
            "M": M,
            "method": method,
            "truth": truth.tolist(),
            "bayes": bayes.tolist(),
            "empirical": emp.tolist(),
            "gap_bayes": float(np.max(np.abs(bayes - truth))),
            "gap_empirical": float(np.max(np.abs(emp - truth))) if cfg.interventional_n > 0 else None,
        })
    return {
        "intervention": {"target": iv.target, "value": iv.value},
        "target": y,
        "seed": cfg.seed,
        "interventional_n": cfg.interventional_n,
        "rows": rows,
    }


def format_compare(result: dict) -> str:
    y = result["target"]
    iv = result["intervention"]
    head = f"P({y}* | do({iv['target']}={iv['value']}))  [state-wise max gaps]"
    lines = [head, f"{'M':>8}  {'method':<6} {'truth':>18} {'bayes':>18} {'empirical':>18} {'|b-t|':>8} {'|e-t|':>8}"]

    def fmt(v):
        return "[" + " ".join(f"{x:.4f}" for x in v) + "]"

    for r in result["rows"]:
        ge = "-" if r["gap_empirical"] is None else f"{r['gap_empirical']:.4f}"
        lines.append(
            f"{r['M']:>8}  {r['method']:<6} {fmt(r['truth']):>18} {fmt(r['bayes']):>18} "
            f"{fmt(r['empirical']):>18} {r['gap_bayes']:>8.4f} {ge:>8}"
        )
    return "\n".join(lines) + "\n"
