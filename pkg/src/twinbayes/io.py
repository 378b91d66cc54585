"""Loading the JSON/CSV documents the CLI consumes."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .data import Dataset, GroundTruthModel, read_csv
from .errors import InputError
from .graph import CausalGraph, Intervention, build_graph
from .model import Cpt, cpt_document, parse_cpt_document


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_graph(path) -> CausalGraph:
    return build_graph(read_json(path))


def load_data(path) -> Dataset:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return read_csv(text)


def load_priors(g: CausalGraph, path) -> dict[str, Cpt]:
    return parse_cpt_document(g, read_json(path), "prior")


def parse_model(doc, base: Path | None = None) -> GroundTruthModel:
    """A model document is ``{"graph": <graph spec>, "cpts": <CPT document>}``.

    Either field may instead be a path (relative to ``base``).
    """
    if not isinstance(doc, dict) or set(doc) != {"graph", "cpts"}:
        raise InputError("model document must have exactly the fields 'graph' and 'cpts'")
    gdoc, cdoc = doc["graph"], doc["cpts"]
    if isinstance(gdoc, str):
        gdoc = read_json(_resolve(gdoc, base))
    if isinstance(cdoc, str):
        cdoc = read_json(_resolve(cdoc, base))
    g = build_graph(gdoc)
    return GroundTruthModel(g, parse_cpt_document(g, cdoc, "table"))


def load_model(path) -> GroundTruthModel:
    return parse_model(read_json(path), Path(path).parent)


def model_document(m: GroundTruthModel) -> dict:
    return {"graph": m.graph.to_spec(), "cpts": cpt_document(m.cpts, "table")}


def _resolve(p, base):
    p = Path(p)
    return p if p.is_absolute() or base is None else base / p


def parse_do(text: str, g: CausalGraph | None = None) -> Intervention:
    """Parse ``VAR=STATE``."""
    name, sep, state = text.partition("=")
    if not sep or not name.strip():
        raise InputError(f"--do expects VAR=STATE, got {text!r}")
    try:
        value = int(state)
    except ValueError:
        raise InputError(f"--do state must be an integer index, got {state!r}") from None
    iv = Intervention(name.strip(), value)
    if g is not None:
        iv.check(g)
    return iv


def parse_names(text: str | None) -> list[str]:
    if not text:
        return []
    return [s.strip() for s in text.split(",") if s.strip()]
