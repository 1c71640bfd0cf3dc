"""Command-line interface.

Thin mappings onto library calls.  Exit codes: 0 success, 1 domain error
(impossible evidence, missing file content, ...), 2 usage or parse error.
With ``--json`` every command prints exactly the dict the HTTP service
would return for the same request, so one golden suite covers both.
Human output prints probabilities at six decimals.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

from . import api
from .errors import ParseError, RiskbnError
from .learning import (Dataset, DirichletPrior, StructureSearchSettings, fit_em,
                       fit_mle, hill_climb, score_bic)
from .network import load, to_doc
from .temporal import dynamic_load, is_dynamic_doc


def _read(path: str) -> str:
    p = pathlib.Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {path}", locus=path)
    return p.read_text()


def _load_net(path: str):
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", locus=f"{path}:{e.lineno}") from None
    return dynamic_load(text) if is_dynamic_doc(doc) else load(text)


def _parse_evidence(pairs: list[str], soft_pairs: list[str]) -> dict:
    out: dict = {}
    for item in pairs or []:
        if "=" not in item:
            raise SystemExit2(f"evidence must look like VAR=STATE, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    for item in soft_pairs or []:
        if "=" not in item:
            raise SystemExit2(f"soft evidence must look like VAR=p0,p1,..., got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = [float(x) for x in v.split(",")]
        except ValueError:
            raise SystemExit2(f"bad likelihood vector for {k!r}: {v!r}") from None
    return out


class SystemExit2(Exception):
    """Usage error; maps to exit code 2."""


def _emit(result: dict, as_json: bool, human):
    if as_json:
        print(json.dumps(result))
    else:
        human(result)


def _print_posteriors(result: dict):
    for name, marg in result["posteriors"].items():
        probs = ", ".join(f"{p:.6f}" for p in marg["probabilities"])
        print(f"{name}: {probs}   (states: {', '.join(marg['states'])})")
    if "log_prob_evidence" in result:
        print(f"log P(evidence) = {result['log_prob_evidence']:.6f}")
    if "converged" in result:
        print(f"converged: {result['converged']} after {result['iterations']} iterations")


def cmd_validate(args) -> dict:
    text = _read(args.net)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        doc = None
        result = {"valid": False,
                  "violations": [{"code": "ParseError", "node": None,
                                  "detail": f"invalid JSON: {e.msg}"}]}
    if doc is not None:
        if is_dynamic_doc(doc):
            try:
                dynamic_load(text)
                result = {"valid": True, "violations": []}
            except (RiskbnError, ValueError) as e:
                msg = e.message if isinstance(e, RiskbnError) else str(e)
                result = {"valid": False,
                          "violations": [{"code": type(e).__name__, "node": None,
                                          "detail": msg}]}
        else:
            result = api.run_validate(doc)
    _emit(result, args.json, lambda r: print(
        "valid" if r["valid"] else "invalid:\n" + "\n".join(
            f"  {v['code']}: {v['detail']}" for v in r["violations"])))
    return result


def cmd_query(args) -> dict:
    net = _load_net(args.net)
    evidence = _parse_evidence(args.evidence, args.soft)
    result = api.run_query(net, args.target, evidence, args.method)
    _emit(result, args.json, _print_posteriors)
    return result


def cmd_dsep(args) -> dict:
    net = _load_net(args.net)
    result = api.run_dsep(net, args.x, args.y, args.z or [])
    _emit(result, args.json, lambda r: print(f"separated: {str(r['separated']).lower()}"))
    return result


def cmd_jtree(args) -> dict:
    net = _load_net(args.net)
    result = api.run_jtree(net)
    def human(r):
        for i, c in enumerate(r["cliques"]):
            print(f"clique {i}: {{{', '.join(c)}}}")
        for s in r["sepsets"]:
            i, j = s["between"]
            print(f"sepset {i}-{j}: {{{', '.join(s['variables'])}}}")
        print(f"max clique size: {r['max_clique_size']}")
    _emit(result, args.json, human)
    return result


def cmd_filter(args) -> dict:
    net = _load_net(args.net)
    from .temporal import DynamicNet

    if not isinstance(net, DynamicNet):
        raise ValueError("filter requires a dynamic network document")
    stream = []
    for lineno, line in enumerate(_read(args.stream).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", locus=f"{args.stream}:{lineno}") from None
        stream.append(rec)
    result = api.run_filter(net, stream)
    def human(r):
        for tick in r["ticks"]:
            parts = [f"t={tick['t']}"]
            for name, marg in tick["belief"].items():
                parts.append(f"{name}=({', '.join(f'{p:.6f}' for p in marg['probabilities'])})")
            print("  ".join(parts))
        print(f"log evidence: {r['log_evidence']:.6f}")
    _emit(result, args.json, human)
    return result


def _load_dataset(path: str) -> Dataset:
    return Dataset.from_csv(_read(path))


def cmd_learn(args) -> dict:
    data = _load_dataset(args.data)
    if args.mode == "params":
        if not args.dag:
            raise SystemExit2("learn params needs --dag")
        net = _load_net(args.dag)
        prior = DirichletPrior(args.alpha) if args.alpha else None
        by_name = {v.name: v for v in net.variables}
        data = Dataset(tuple(by_name[v.name] for v in data.variables), data.rows)
        fitted = fit_mle(net.dag, data, prior)
        result = {"network": to_doc(fitted), "bic": float(score_bic(fitted, data))}
    elif args.mode == "em":
        if not args.dag:
            raise SystemExit2("learn em needs --dag")
        net = _load_net(args.dag)
        by_name = {v.name: v for v in net.variables}
        cols = [by_name.get(v.name, v) for v in data.variables]
        missing = [v.name for v in net.variables if v.name not in {c.name for c in cols}]
        if missing:
            raise ValueError(f"dataset lacks columns for {missing}")
        data = Dataset(tuple(cols), data.rows)
        fitted, trace = fit_em(net.dag, set(args.latent or []), data,
                               seed=args.seed, max_iters=args.max_iters)
        result = {"network": to_doc(fitted),
                  "loglik_trace": [float(x) for x in trace]}
    elif args.mode == "structure":
        settings = StructureSearchSettings(seed=args.seed or 0)
        dag, trace = hill_climb(data, settings)
        result = {"edges": sorted([dag.names[p], dag.names[c]] for p, c in dag.edges()),
                  "score_trace": [float(x) for x in trace]}
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit2(f"unknown learn mode {args.mode!r}")
    def human(r):
        if "edges" in r:
            for p, c in r["edges"]:
                print(f"{p} -> {c}")
            print(f"final score: {r['score_trace'][-1]:.6f}")
        elif "loglik_trace" in r:
            print(f"EM converged in {len(r['loglik_trace'])} evaluations; "
                  f"final log-likelihood {r['loglik_trace'][-1]:.6f}")
        else:
            print(f"BIC: {r['bic']:.6f}")
    _emit(result, args.json, human)
    return result


def cmd_catalog(args) -> dict:
    if args.action == "list":
        result = api.catalog_listing()
        def human(r):
            for e in r["entries"]:
                variants = f" (variants: {', '.join(e['variants'])})" if e["variants"] else ""
                print(f"{e['id']:24s} {e['kind']:8s}{variants}")
        _emit(result, args.json, human)
    elif args.action == "show":
        if not args.id:
            raise SystemExit2("catalog show needs an id")
        result = api.catalog_entry_json(args.id, args.variant)
        _emit(result, args.json, lambda r: print(json.dumps(r["network"], indent=2)))
    elif args.action == "instantiate":
        if not args.id:
            raise SystemExit2("catalog instantiate needs an id")
        entry_json = api.catalog_entry_json(args.id, args.variant)
        result = entry_json["network"]
        def human(r):
            from .network import canonical_json
            print(canonical_json(r))
        _emit(result, args.json, human)
    else:  # pragma: no cover
        raise SystemExit2(f"unknown catalog action {args.action!r}")
    return result


def cmd_serve(args) -> dict:
    from . import service

    argv = ["--addr", args.addr]
    if args.persist_dir:
        argv += ["--persist-dir", args.persist_dir]
    for origin in args.cors_origin or []:
        argv += ["--cors-origin", origin]
    service.main(argv)
    return {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskbn",
        description="Discrete Bayesian-network toolkit for actuarial models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("validate", help="validate a network document")
    p.add_argument("net")
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("query", help="posterior marginals given evidence")
    p.add_argument("net")
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--evidence", action="append", default=[], metavar="VAR=STATE")
    p.add_argument("--soft", action="append", default=[], metavar="VAR=p0,p1,...")
    p.add_argument("--method", choices=["exact", "loopy"], default="exact")
    common(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("dsep", help="d-separation check")
    p.add_argument("net")
    p.add_argument("--x", action="append", required=True)
    p.add_argument("--y", action="append", required=True)
    p.add_argument("--z", action="append", default=[])
    common(p)
    p.set_defaults(fn=cmd_dsep)

    p = sub.add_parser("jtree", help="print the junction tree")
    p.add_argument("net")
    common(p)
    p.set_defaults(fn=cmd_jtree)

    p = sub.add_parser("filter", help="run a dynamic network over an evidence stream")
    p.add_argument("net")
    p.add_argument("--stream", required=True)
    common(p)
    p.set_defaults(fn=cmd_filter)

    p = sub.add_parser("learn", help="parameter or structure learning")
    p.add_argument("mode", choices=["params", "em", "structure"])
    p.add_argument("data")
    p.add_argument("--dag", help="network document supplying the structure")
    p.add_argument("--latent", action="append", help="latent variable (em)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None, help="Dirichlet smoothing")
    p.add_argument("--max-iters", type=int, default=100)
    common(p)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("catalog", help="list, show, or instantiate built-in networks")
    p.add_argument("action", choices=["list", "show", "instantiate"])
    p.add_argument("id", nargs="?")
    p.add_argument("--variant", default=None)
    common(p)
    p.set_defaults(fn=cmd_catalog)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--addr", default="127.0.0.1:8080")
    p.add_argument("--persist-dir", default=None)
    p.add_argument("--cors-origin", action="append", default=[])
    common(p)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        args.fn(args)
        return 0
    except SystemExit2 as e:
        print(json.dumps({"code": "Usage", "message": str(e), "locus": None}),
              file=sys.stderr)
        return 2
    except ParseError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return 2
    except RiskbnError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return 1
    except ValueError as e:
        print(json.dumps({"code": "Invalid", "message": str(e), "locus": None}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
