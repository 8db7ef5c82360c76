"""Command-line interface.

Every command writes JSON to stdout by default and plain text with
``--format text``.  Exit status is 0 on success, 1 on a domain error (a
JSON error record goes to stderr) and 2 on a usage error.
"""

import argparse
import json
import os
import sys
from fractions import Fraction

from .concepts import ObjectDescription, load_concepts
from .datasets import HAIR_CONCEPTS, hair10, hair100
from .encoding import build_index
from .errors import InvalidParams, SemlearnError
from .facts import dump_facts, load_facts
from .lunch import (
    DISHES,
    SubgoalNode,
    collect_logs,
    dump_logs,
    evaluate_agent,
    invent_subgoals,
    lunch_concepts,
    transitions_to_kb,
)
from .miner import MiningParams, mine_laws
from .predictor import predict
from .rules import LawSet, explain, format_fraction
from .selfcheck import SUITES, run_selfcheck

__all__ = ["main", "build_parser"]

LOGS_FILE = "logs.jsonl"
LAWS_FILE = "laws.jsonl"
CHAIN_FILE = "chain.json"


class UsageError(Exception):
    pass


def _dump(obj):
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _grid(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 5x5, got {text!r}") from None
    if w < 2 or h < 2:
        raise argparse.ArgumentTypeError("grid sides must be at least 2")
    return w, h


def _probability(text):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction or decimal: {text!r}") from None
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("probability must be in [0, 1]")
    return value


def _split(values):
    out = []
    for v in values or ():
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def _load_kb(path):
    return load_facts(path).freeze()


# -- commands -------------------------------------------------------------------


def cmd_kb_load(args, out):
    model = _load_kb(args.path)
    info = {
        "objects": model.n_objects,
        "facts": model.n_facts,
        "categories": sorted(model.categories),
        "schema": dict(sorted(model.schema.items())),
        "fingerprint": model.fingerprint(),
    }
    if args.format == "text":
        out.write(f"{info['objects']} objects, {info['facts']} facts\n")
        out.write(f"categories: {', '.join(info['categories']) or '-'}\n")
        for key, kind in info["schema"].items():
            out.write(f"  {key}: {kind}\n")
        out.write(f"fingerprint: {info['fingerprint']}\n")
    else:
        out.write(_dump(info) + "\n")


def cmd_concepts_load(args, out):
    model = _load_kb(args.kb) if args.kb else None
    concepts = load_concepts(args.path, model)
    if args.format == "text":
        for c in concepts:
            out.write(f"{c.name} := {c.gloss()}\n")
    else:
        for c in concepts:
            out.write(_dump({"name": c.name, "body": c.gloss()}) + "\n")


def _mining_params(args):
    targets = _split(args.target)
    if not targets:
        raise UsageError("mine needs at least one --target")
    vocab = _split(args.vocab) or None
    return MiningParams(
        targets=tuple(targets),
        vocabulary=tuple(vocab) if vocab else None,
        max_premises=args.max_premises,
        min_support=args.min_support,
        min_p=args.min_p,
        beam_width=args.beam,
        max_nodes=args.max_nodes,
    )


def cmd_mine(args, out):
    model = _load_kb(args.kb)
    concepts = load_concepts(args.concepts, model)
    params = _mining_params(args)
    laws = mine_laws(build_index(model, concepts), params)
    if args.out:
        laws.save(args.out)
    if args.provenance:
        with open(args.provenance, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(laws.provenance, indent=2, sort_keys=True) + "\n")
    if args.format == "text":
        for law in laws:
            out.write(f"{law}\n    {explain(law, concepts)}\n")
    else:
        out.write(laws.to_jsonl())


def _description(args):
    if args.object is not None and args.object_file is not None:
        raise UsageError("give either --object or --object-file, not both")
    if args.object_file is not None:
        with open(args.object_file, encoding="utf-8") as fh:
            text = fh.read()
    elif args.object is not None:
        text = args.object
    else:
        raise UsageError("predict needs --object or --object-file")
    try:
        desc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"object description is not valid JSON: {exc.msg}") from None
    if not isinstance(desc, dict):
        raise InvalidParams("object description must be a JSON object")
    return desc


def cmd_predict(args, out):
    model = _load_kb(args.kb) if args.kb else None
    concepts = load_concepts(args.concepts, model)
    laws = LawSet.load(args.laws)
    for law in laws:
        for lit in law.premises + (law.conclusion,):
            if lit.concept not in concepts:
                raise InvalidParams(f"law {law.rule} uses concept {lit.concept!r} not in {args.concepts}")
    desc = ObjectDescription.from_dict(
        _description(args),
        schema=model.schema if model is not None else None,
        known_categories=set(concepts.categories()) | set(model.categories if model else ()),
    )
    report = predict(desc, laws, concepts)
    if args.format == "text":
        for pr in report.predicted:
            out.write(f"{pr.literal} [[{format_fraction(pr.confidence)}]]  {explain(pr.law, concepts)}\n")
        for concept in report.ambiguous:
            out.write(f"{concept}: ambiguous (laws for both signs tie)\n")
        if not report.predicted and not report.ambiguous:
            out.write("no applicable laws\n")
    else:
        out.write(report.to_json() + "\n")


def cmd_explain(args, out):
    concepts = load_concepts(args.concepts) if args.concepts else None
    laws = LawSet.load(args.laws)
    for law in laws:
        text = explain(law, concepts)
        if args.format == "text":
            out.write(text + "\n")
        else:
            out.write(_dump({"law": law.to_dict(), "explanation": text}) + "\n")


def cmd_selfcheck(args, out):
    results = run_selfcheck(args.seed, args.cases, args.suite or None)
    if args.format == "text":
        for r in results:
            out.write(r.line() + "\n")
    else:
        out.write(_dump({"passed": all(r.passed for r in results),
                         "suites": [r.to_dict() for r in results]}) + "\n")
    return 0 if all(r.passed for r in results) else 1


def cmd_make_dataset(args, out):
    os.makedirs(args.out_dir, exist_ok=True)
    model = hair10() if args.name == "hair10" else hair100()
    facts_path = os.path.join(args.out_dir, f"{args.name}.jsonl")
    concepts_path = os.path.join(args.out_dir, "hair.cdl")
    dump_facts(model, facts_path)
    with open(concepts_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(HAIR_CONCEPTS)
    written = {"facts": facts_path, "concepts": concepts_path}
    if args.format == "text":
        out.write(f"wrote {facts_path} and {concepts_path}\n")
    else:
        out.write(_dump(written) + "\n")


# -- lunch ------------------------------------------------------------------------


def _load_chain(model_dir):
    path = os.path.join(model_dir, CHAIN_FILE)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return data, SubgoalNode.from_dict(data["chain"])


def cmd_lunch_train(args, out):
    width, height = args.grid
    logs = collect_logs(args.episodes, args.seed, width, height)
    model, concepts = transitions_to_kb(logs)
    root, laws = invent_subgoals(
        build_index(model, concepts),
        max_premises=args.max_premises,
        min_support=args.min_support,
    )
    os.makedirs(args.out, exist_ok=True)
    dump_logs(logs, os.path.join(args.out, LOGS_FILE))
    laws.save(os.path.join(args.out, LAWS_FILE))
    meta = {
        "grid": [width, height],
        "episodes": len(logs),
        "transitions": model.n_objects,
        "seed": args.seed,
        "chain": root.to_dict(),
    }
    with open(os.path.join(args.out, CHAIN_FILE), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(meta, indent=2) + "\n")
    if args.format == "text":
        out.write(f"{len(logs)} episodes, {model.n_objects} transitions, {len(laws)} laws\n")
        out.write(root.render() + "\n")
    else:
        out.write(_dump({"episodes": len(logs), "transitions": model.n_objects,
                         "laws": len(laws), "depth": root.depth,
                         "chain": [n.goal for n in root.chain()]}) + "\n")


def cmd_lunch_eval(args, out):
    if args.random:
        root, grid = None, args.grid or (5, 5)
    else:
        if not args.model:
            raise UsageError("lunch eval needs --model (or --random)")
        meta, root = _load_chain(args.model)
        grid = args.grid or tuple(meta["grid"])
    rate = evaluate_agent(root, args.episodes, args.seed, grid[0], grid[1])
    policy = "random" if root is None else "subgoal"
    if args.format == "text":
        out.write(f"{policy} policy: success rate {format_fraction(rate)} ({float(rate):.3f}) "
                  f"over {args.episodes} episodes\n")
    else:
        out.write(_dump({"policy": policy, "episodes": args.episodes, "seed": args.seed,
                         "success_rate": format_fraction(rate)}) + "\n")


def cmd_lunch_show_chain(args, out):
    meta, root = _load_chain(args.model)
    if args.format == "json":
        out.write(_dump(meta["chain"]) + "\n")
        return
    out.write(root.render(lunch_concepts(DISHES)) + "\n")


# -- parser ---------------------------------------------------------------------


def build_parser():
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS,
                     help="output format (default: json)")

    parser = argparse.ArgumentParser(
        prog="semlearn", parents=[fmt],
        description="Mine probabilistic laws from factual models and predict with them.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("kb-load", parents=[fmt], help="load and summarise a fact file")
    p.add_argument("path")
    p.set_defaults(func=cmd_kb_load)

    p = sub.add_parser("concepts-load", parents=[fmt], help="parse a concept file")
    p.add_argument("path")
    p.add_argument("--kb", help="check symbols against this fact file")
    p.set_defaults(func=cmd_concepts_load)

    p = sub.add_parser("mine", parents=[fmt], help="mine probabilistic laws")
    p.add_argument("--kb", required=True)
    p.add_argument("--concepts", required=True)
    p.add_argument("--target", action="append", help="conclusion literal, e.g. T10 or !T9 (repeatable)")
    p.add_argument("--vocab", action="append", help="premise concepts, comma separated (default: all)")
    p.add_argument("--max-premises", type=int, default=3)
    p.add_argument("--min-support", type=int, default=3)
    p.add_argument("--min-p", type=_probability, default=Fraction(1, 2), help="fraction or decimal (default: 1/2)")
    p.add_argument("--beam", type=int, default=0, help="beam width; 0 = exhaustive")
    p.add_argument("--max-nodes", type=int, default=10**7)
    p.add_argument("--out", help="also write the law set to this file")
    p.add_argument("--provenance", help="write mining provenance JSON to this file")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("predict", parents=[fmt], help="predict concepts of a described object")
    p.add_argument("--kb", help="fact file whose schema checks the description")
    p.add_argument("--concepts", required=True)
    p.add_argument("--laws", required=True)
    p.add_argument("--object", help="JSON object, e.g. '{\"Age\": 15}'")
    p.add_argument("--object-file")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explain", parents=[fmt], help="render laws as English sentences")
    p.add_argument("--laws", required=True)
    p.add_argument("--concepts", help="concept file for glosses")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("selfcheck", parents=[fmt], help="run randomised self-checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("make-dataset", parents=[fmt], help="write a built-in dataset")
    p.add_argument("name", choices=("hair10", "hair100"))
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_make_dataset)

    lunch = sub.add_parser("lunch", help="the grid-world lunch problem")
    lsub = lunch.add_subparsers(dest="lunch_command", metavar="COMMAND")

    p = lsub.add_parser("train", parents=[fmt], help="explore, then invent the subgoal chain")
    p.add_argument("--grid", type=_grid, default=(5, 5))
    p.add_argument("--episodes", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-premises", type=int, default=3)
    p.add_argument("--min-support", type=int, default=3)
    p.add_argument("--out", required=True, help="model directory to write")
    p.set_defaults(func=cmd_lunch_train)

    p = lsub.add_parser("eval", parents=[fmt], help="success rate on fresh layouts")
    p.add_argument("--model", help="model directory written by train")
    p.add_argument("--random", action="store_true", help="evaluate the random policy instead")
    p.add_argument("--grid", type=_grid)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lunch_eval)

    p = lsub.add_parser("show-chain", parents=[fmt], help="print the subgoal hierarchy")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_lunch_show_chain, default_format="text")

    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if not hasattr(args, "func"):
        parser.print_usage(stderr)
        return 2
    if not hasattr(args, "format"):
        args.format = getattr(args, "default_format", "json")
    for key in ("episodes", "cases"):
        if getattr(args, key, 1) < 1:
            stderr.write(f"semlearn: error: --{key} must be >= 1\n")
            return 2
    try:
        code = args.func(args, stdout)
    except UsageError as exc:
        parser.print_usage(stderr)
        stderr.write(f"semlearn: error: {exc}\n")
        return 2
    except SemlearnError as exc:
        stderr.write(_dump(exc.to_dict()) + "\n")
        return 1
    except OSError as exc:
        stderr.write(_dump({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
