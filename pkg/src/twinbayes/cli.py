"""Command-line entry point: ``twinbayes <subcommand> ...``.

Exit status: 0 success, 1 domain error, 2 input/parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .data import forward_sample, hide_columns, interventional_sample
from .docalc import RuleQuery, identify
from .errors import InputError, TwinBayesError
from .experiment import ExperimentConfig, format_compare, run_compare
from .graph import build_graph, graph_spec_problems
from .inference import (
    DEFAULT_BURN,
    DEFAULT_KEEP,
    latent_posterior_predictive,
    max_gap,
    mc_posterior_predictive,
    posterior_predictive,
    prior_sensitivity,
)
from .io import load_data, load_graph, load_model, load_priors, parse_do, parse_names, read_json
from .twin import FIGURE_PARAM_NAMES, causal_bayes_construct, export_dot

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class _UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _fmt_dist(table) -> str:
    return "[" + ", ".join(f"{x:.6f}" for x in table) + "]"


def cmd_validate(args, out) -> int:
    doc = read_json(args.graph)
    try:
        g = build_graph(doc)
    except TwinBayesError as exc:
        if isinstance(exc, InputError):
            raise
        problems = graph_spec_problems(doc) or [str(exc)]
        if args.json:
            out.write(_dumps({"valid": False, "errors": problems}))
        else:
            out.write(f"{args.graph}: invalid\n")
            for p in problems:
                out.write(f"  error: {p}\n")
        return EXIT_DOMAIN
    if args.json:
        out.write(_dumps({"valid": True, "errors": [], "graph": g.to_spec()}))
    else:
        out.write(f"{args.graph}: ok ({len(g.nodes)} nodes, {len(g.edges)} edges)\n")
    return EXIT_OK


def cmd_twin(args, out) -> int:
    g = load_graph(args.graph)
    iv = parse_do(args.do, g)
    names = FIGURE_PARAM_NAMES if args.figure_names else None
    tw = causal_bayes_construct(g, iv, names)
    if args.format == "dot":
        out.write(export_dot(tw))
    else:
        out.write(_dumps(tw.to_json()))
    return EXIT_OK


def cmd_identify(args, out) -> int:
    g = load_graph(args.graph)
    try:
        q = RuleQuery(frozenset(parse_names(args.y)), args.t, frozenset(parse_names(args.z)), frozenset(parse_names(args.w)))
    except TwinBayesError as exc:
        raise _UsageError(str(exc)) from None
    if not q.y:
        raise _UsageError("--y needs at least one variable")
    report = identify(g, q)
    if args.json:
        out.write(_dumps({
            "query": report["query"],
            "identified": report["identified"],
            "summary": report["summary"],
            "rules": [r.to_json() for r in report["rules"]],
        }))
        return EXIT_OK
    out.write(f"query: {report['query']}\n")
    for r in report["rules"]:
        if not r.applicable:
            out.write(f"  Rule {r.rule}: n/a ({r.statement})\n")
            continue
        verdict = "applies" if r.applies else "does not apply"
        out.write(f"  Rule {r.rule}: {verdict}\n    witness: {r.statement}\n")
        for n in r.notes:
            out.write(f"    note: {n}\n")
        if r.applies:
            out.write(f"    => {r.conclusion}\n")
    out.write(report["summary"] + "\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    m = load_model(args.model)
    if args.n < 0:
        raise InputError("--n must be non-negative")
    if args.do:
        data = interventional_sample(m, parse_do(args.do, m.graph), args.n, args.seed)
    else:
        data = forward_sample(m, args.n, args.seed)
    if args.hide:
        data = hide_columns(data, parse_names(args.hide))
    text = data.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_infer(args, out) -> int:
    g = load_graph(args.graph)
    data = load_data(args.data)
    iv = parse_do(args.do, g)
    priors = load_priors(g, args.prior) if args.prior else None
    method = args.method
    spread = None
    if method == "gibbs":
        dist, spread = latent_posterior_predictive(g, data, priors, iv, args.target, args.burn, args.samples, args.seed)
    elif method == "mc":
        dist, spread = mc_posterior_predictive(g, data, priors, iv, args.target, args.samples, args.seed)
    else:
        dist = posterior_predictive(g, data, priors, iv, args.target)
    if args.json:
        doc = {
            "method": method,
            "intervention": {"target": iv.target, "value": iv.value},
            "target": args.target,
            "M": len(data),
            "distribution": dist.to_json(),
        }
        if spread is not None:
            doc["standard_error" if method == "mc" else "posterior_sd"] = spread.tolist()
        out.write(_dumps(doc))
    else:
        out.write(f"P({args.target}* | data, {iv})  [method={method}, M={len(data)}]\n")
        for s, p in enumerate(dist.flat):
            extra = f"  (+/- {spread[s]:.6f})" if spread is not None else ""
            out.write(f"  {args.target}={s}: {p:.6f}{extra}\n")
    return EXIT_OK


def cmd_compare(args, out) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    result = run_compare(cfg)
    out.write(_dumps(result) if args.json else format_compare(result))
    return EXIT_OK


def cmd_sensitivity(args, out) -> int:
    g = load_graph(args.graph)
    data = load_data(args.data)
    iv = parse_do(args.do, g)
    if not args.prior or len(args.prior) < 2:
        raise _UsageError("sensitivity needs at least two --prior arguments")
    plist = []
    for p in args.prior:
        if p == "flat":
            plist.append(("flat", None))
        else:
            plist.append((Path(p).stem, load_priors(g, p)))
    res = prior_sensitivity(g, data, plist, iv, args.target, args.burn, args.samples, args.seed)
    gap = max_gap(res)
    if args.json:
        out.write(_dumps({
            "intervention": {"target": iv.target, "value": iv.value},
            "target": args.target,
            "M": len(data),
            "results": {k: d.to_json() for k, d in res.items()},
            "max_gap": gap,
        }))
    else:
        out.write(f"P({args.target}* | data, {iv}) by prior  [M={len(data)}]\n")
        width = max(len(k) for k in res)
        for k, d in res.items():
            out.write(f"  {k:<{width}}  {_fmt_dist(d.flat)}\n")
        out.write(f"max pairwise gap: {gap:.6f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twinbayes", description="Causal effects by Bayesian inference on twin graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a graph-spec document")
    s.add_argument("graph")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("twin", help="emit the twin PGM for an intervention")
    s.add_argument("graph")
    s.add_argument("--do", required=True, metavar="VAR=STATE")
    s.add_argument("--format", choices=["dot", "json"], default="dot")
    s.add_argument("--figure-names", action="store_true", help="name parameters gamma/phi/psi for Z/T/Y")
    s.set_defaults(func=cmd_twin)

    s = sub.add_parser("identify", help="check Rules 1-3 for P(y | do(t), z[, w])")
    s.add_argument("graph")
    s.add_argument("--y", required=True, help="comma-separated outcome variables")
    s.add_argument("--t", required=True, help="intervened variable")
    s.add_argument("--z", default="", help="comma-separated conditioning variables")
    s.add_argument("--w", default="", help="comma-separated variables Rule 1 tries to drop")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("simulate", help="ancestral sampling to CSV")
    s.add_argument("--model", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--do", metavar="VAR=STATE")
    s.add_argument("--hide", help="comma-separated columns to blank out")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    def inference_flags(s):
        s.add_argument("--graph", required=True)
        s.add_argument("--data", required=True)
        s.add_argument("--do", required=True, metavar="VAR=STATE")
        s.add_argument("--target", required=True)
        s.add_argument("--samples", type=int, default=None)
        s.add_argument("--burn", type=int, default=DEFAULT_BURN)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--json", action="store_true")

    s = sub.add_parser("infer", help="posterior predictive P(Y* | data, do(T=t))")
    inference_flags(s)
    s.add_argument("--prior")
    s.add_argument("--method", choices=["exact", "mc", "gibbs"], default="exact")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("compare", help="Bayesian predictive vs truncated product across sample sizes")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=None, help="override the config seed")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("sensitivity", help="predictive under several priors")
    inference_flags(s)
    s.add_argument("--prior", action="append", help="prior file, or 'flat'; repeat")
    s.set_defaults(func=cmd_sensitivity)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 0) is None:
        args.samples = 50_000 if getattr(args, "method", None) == "mc" else DEFAULT_KEEP
    try:
        return args.func(args, out)
    except _UsageError as exc:
        parser.error(str(exc))
    except InputError as exc:
        print(f"twinbayes: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TwinBayesError as exc:
        print(f"twinbayes: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"twinbayes: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
