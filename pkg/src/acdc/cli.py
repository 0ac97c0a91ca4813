"""Command-line front end: train, score, eval, inspect, synth, tree.

Every command is deterministic given its flags (plus --seed where data is
generated). Exit codes: 0 success, 2 usage errors, 3 I/O failures, 4 data
errors (malformed CSV, bad labels, single-class data), 5 model errors
(format version, feature mismatch).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .alpha_tree import TreeNode, train_tree, tree_leaves, tree_score_batch
from .chain import (
    ChainConfig,
    DecisionChain,
    deserialize,
    rule_for_terminal,
    score_batch,
    serialize,
    train_chain,
)
from .dataset import generate_synthetic, load_csv, load_features_csv
from .errors import DataError, ModelFormatError
from .metrics import (
    annotate_chain_curve,
    annotate_tree_curve,
    lift_chart,
    write_curve_csv,
    write_curve_svg,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_MODEL = 5


def _write_manifest(anchor_path: str, payload: dict) -> None:
    """Machine-readable mirror of the stdout report, next to the artifact."""
    with open(anchor_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _load_model(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def _data_flags(p: argparse.ArgumentParser, with_label: bool) -> None:
    p.add_argument("--data", required=True, help="input CSV with a header row")
    if with_label:
        p.add_argument("--label", required=True, help="name of the label column")
        p.add_argument(
            "--positive-label",
            default=None,
            help="raw label value mapped to 1 (default: the rarer value)",
        )
    p.add_argument(
        "--missing-token",
        default="",
        help="cell text treated as missing (default: empty string)",
    )


def _stage_rows(chain: DecisionChain) -> list[dict]:
    rows = []
    for s in chain.stages:
        rows.append(
            {
                "stage": s.stage_index,
                "alpha": s.alpha_used,
                "alpha_kind": s.alpha_kind,
                "predicate": s.predicate.describe(),
                "carved_count": s.carved_count,
                "carved_positive": s.carved_positive,
                "raw_ratio": s.raw_ratio,
                "score": s.score,
            }
        )
    return rows


def _print_chain_report(chain: DecisionChain) -> None:
    meta = chain.training_meta
    print(
        f"trained chain: {chain.n_stages} stages on {meta['rows']} rows "
        f"({meta['positives']} positives)"
    )
    omega = " -> ".join(f"{w:.4f}" for w in meta["omega_trajectory"])
    print(f"omega_y trajectory: {omega}")
    print(f"{'stage':>5}  {'alpha':>9}  {'kind':<13} {'carved_n':>8}  "
          f"{'carved_pos':>10}  {'score':>7}  predicate")
    for r in _stage_rows(chain):
        print(
            f"{r['stage']:>5}  {r['alpha']:>9.4g}  {r['alpha_kind']:<13} "
            f"{r['carved_count']:>8}  {r['carved_positive']:>10}  "
            f"{r['score']:>7.4f}  {r['predicate']}"
        )
    print(
        f"{'final':>5}  {'-':>9}  {'-':<13} {chain.final_count:>8}  "
        f"{chain.final_positive:>10}  {chain.final_score:>7.4f}  (remaining rows)"
    )


def _cmd_train(args) -> int:
    dataset = load_csv(args.data, args.label, args.missing_token, args.positive_label)
    config = ChainConfig(
        nu=args.nu,
        max_stages=args.max_stages,
        min_carve_fraction=args.min_carve_fraction,
        min_carve_count=args.min_carve_count,
        max_thresholds=args.max_thresholds,
    )
    chain = train_chain(dataset, config)
    with open(args.out, "wb") as fh:
        fh.write(serialize(chain))
    _print_chain_report(chain)
    print(f"model written to {args.out}")
    _write_manifest(
        args.out,
        {
            "command": "train",
            "parameters": {
                "data": args.data,
                "label": args.label,
                "positive_label": args.positive_label,
                "missing_token": args.missing_token,
                "nu": args.nu,
                "max_stages": args.max_stages,
                "min_carve_fraction": args.min_carve_fraction,
                "min_carve_count": args.min_carve_count,
                "max_thresholds": args.max_thresholds,
            },
            "report": {
                "rows": dataset.row_count,
                "positives": dataset.positives,
                "omega_trajectory": chain.training_meta["omega_trajectory"],
                "remaining_ratio_trajectory": chain.training_meta[
                    "remaining_ratio_trajectory"
                ],
                "stages": _stage_rows(chain),
                "final": {
                    "count": chain.final_count,
                    "positive": chain.final_positive,
                    "score": chain.final_score,
                },
            },
            "outputs": {"model": args.out},
        },
    )
    return EXIT_OK


def _cmd_score(args) -> int:
    model = _load_model(args.model)
    dataset = load_features_csv(args.data, args.missing_token)
    if isinstance(model, DecisionChain):
        scores, terminals = score_batch(model, dataset)
        traces = {0: rule_for_terminal(model, "final")}
        for s in model.stages:
            traces[s.stage_index] = rule_for_terminal(model, s.stage_index)
        names = {0: "final"}
        for s in model.stages:
            names[s.stage_index] = str(s.stage_index)
    else:
        scores, terminals = tree_score_batch(model, dataset)
        leaves = tree_leaves(model)
        traces = {i: rule for i, (_, rule) in enumerate(leaves)}
        names = {i: f"leaf:{i}" for i in range(len(leaves))}
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", "score", "terminal", "rule_trace"])
        for i in range(dataset.row_count):
            t = int(terminals[i])
            writer.writerow([i, repr(float(scores[i])), names[t], traces[t]])
    print(f"scored {dataset.row_count} rows -> {args.out}")
    _write_manifest(
        args.out,
        {
            "command": "score",
            "parameters": {
                "model": args.model,
                "data": args.data,
                "missing_token": args.missing_token,
            },
            "report": {"rows": dataset.row_count},
            "outputs": {"scores": args.out},
        },
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    model = _load_model(args.model)
    dataset = load_csv(args.data, args.label, args.missing_token, args.positive_label)
    if isinstance(model, DecisionChain):
        roc = annotate_chain_curve(model, dataset)
        scores, _ = score_batch(model, dataset)
    else:
        roc = annotate_tree_curve(model, dataset)
        scores, _ = tree_score_batch(model, dataset)
    print(f"AUROC: {roc.auroc:.6f}")
    outputs = {}
    if args.roc:
        write_curve_csv(roc, args.roc)
        outputs["roc"] = args.roc
        print(f"ROC curve -> {args.roc}")
    if args.lift:
        lift = lift_chart(scores, dataset.labels, args.bins)
        write_curve_csv(lift, args.lift)
        outputs["lift"] = args.lift
        print(f"Lift chart -> {args.lift}")
    if args.svg:
        write_curve_svg(roc, args.svg)
        outputs["svg"] = args.svg
        print(f"ROC rendering -> {args.svg}")
    if outputs:
        anchor = args.roc or args.lift or args.svg
        _write_manifest(
            anchor,
            {
                "command": "eval",
                "parameters": {
                    "model": args.model,
                    "data": args.data,
                    "label": args.label,
                    "bins": args.bins,
                },
                "report": {"auroc": roc.auroc, "rows": dataset.row_count},
                "outputs": outputs,
            },
        )
    return EXIT_OK


def _cmd_inspect(args) -> int:
    model = _load_model(args.model)
    if isinstance(model, DecisionChain):
        rows = model.training_meta.get("rows")
        for s in model.stages:
            frac = f"{s.carved_count / rows:.1%} of rows" if rows else f"{s.carved_count} rows"
            indent = " " * (s.stage_index - 1)
            print(
                f"{indent}stage {s.stage_index} | carve {frac} "
                f"(n={s.carved_count}, pos={s.carved_positive}) | "
                f"score {s.score:.4f} | {s.predicate.describe()}"
            )
        indent = " " * model.n_stages
        frac = f"{model.final_count / rows:.1%} of rows" if rows else f"{model.final_count} rows"
        print(
            f"{indent}final   | remain {frac} (n={model.final_count}, "
            f"pos={model.final_positive}) | score {model.final_score:.4f}"
        )
    else:
        _print_tree(model, 0)
    return EXIT_OK


def _print_tree(node: TreeNode, depth: int) -> None:
    indent = "  " * depth
    if node.is_leaf:
        print(
            f"{indent}leaf: n={node.count} pos={node.positives} "
            f"score={node.score:.4f}"
        )
    else:
        print(f"{indent}[{node.predicate.describe()}] n={node.count}")
        _print_tree(node.left, depth + 1)
        _print_tree(node.right, depth + 1)


def _cmd_synth(args) -> int:
    dataset = generate_synthetic(
        args.rows, args.informative, args.noise, args.positive_rate, args.seed
    )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([c.name for c in dataset.columns] + [args.label])
        for i in range(dataset.row_count):
            row = [repr(float(c.values[i])) for c in dataset.columns]
            writer.writerow(row + [int(dataset.labels[i])])
    print(
        f"wrote {dataset.row_count} rows ({dataset.positives} positives) "
        f"to {args.out}"
    )
    _write_manifest(
        args.out,
        {
            "command": "synth",
            "parameters": {
                "rows": args.rows,
                "informative": args.informative,
                "noise": args.noise,
                "positive_rate": args.positive_rate,
                "seed": args.seed,
                "label": args.label,
            },
            "report": {"rows": dataset.row_count, "positives": dataset.positives},
            "outputs": {"data": args.out},
        },
    )
    return EXIT_OK


def _cmd_tree(args) -> int:
    dataset = load_csv(args.data, args.label, args.missing_token, args.positive_label)
    tree = train_tree(
        dataset,
        alpha=args.alpha,
        max_depth=args.depth,
        min_leaf=args.min_leaf,
        max_thresholds=args.max_thresholds,
    )
    with open(args.out, "wb") as fh:
        fh.write(serialize(tree))
    print(
        f"trained tree: alpha={args.alpha:g}, depth<={args.depth} on "
        f"{dataset.row_count} rows ({dataset.positives} positives)"
    )
    _print_tree(tree, 0)
    print(f"model written to {args.out}")
    leaves = tree_leaves(tree)
    _write_manifest(
        args.out,
        {
            "command": "tree",
            "parameters": {
                "data": args.data,
                "label": args.label,
                "positive_label": args.positive_label,
                "missing_token": args.missing_token,
                "alpha": args.alpha,
                "depth": args.depth,
                "min_leaf": args.min_leaf,
                "max_thresholds": args.max_thresholds,
            },
            "report": {
                "rows": dataset.row_count,
                "positives": dataset.positives,
                "leaves": [
                    {
                        "rule": rule,
                        "count": leaf.count,
                        "positives": leaf.positives,
                        "score": leaf.score,
                    }
                    for leaf, rule in leaves
                ],
            },
            "outputs": {"model": args.out},
        },
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acdc",
        description="Train, inspect, and evaluate alpha-carving decision chains.",
    )
    parser.add_argument("--version", action="version", version=f"acdc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a decision chain on a CSV")
    _data_flags(p, with_label=True)
    p.add_argument("--nu", type=float, required=True, help="carving velocity target")
    p.add_argument("--max-stages", type=int, default=4)
    p.add_argument("--min-carve-count", type=int, default=5)
    p.add_argument("--min-carve-fraction", type=float, default=0.01)
    p.add_argument("--max-thresholds", type=int, default=256)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="score a CSV with a trained model")
    p.add_argument("model", help="model file")
    _data_flags(p, with_label=False)
    p.add_argument("--out", required=True, help="scores CSV to write")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", help="ROC/Lift evaluation of a trained model")
    p.add_argument("model", help="model file")
    _data_flags(p, with_label=True)
    p.add_argument("--roc", default=None, help="write the annotated ROC CSV here")
    p.add_argument("--lift", default=None, help="write the lift CSV here")
    p.add_argument("--bins", type=int, default=10, help="lift bins (default 10)")
    p.add_argument("--svg", default=None, help="write an SVG of the ROC here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("inspect", help="print a chain as an indented pyramid")
    p.add_argument("model", help="model file")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("synth", help="generate a synthetic imbalanced CSV")
    p.add_argument("--rows", type=int, default=10000)
    p.add_argument("--informative", type=int, default=10)
    p.add_argument("--noise", type=int, default=10)
    p.add_argument("--positive-rate", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--label", default="label", help="label column name")
    p.add_argument("--out", required=True, help="CSV file to write")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("tree", help="train a fixed-alpha baseline tree")
    _data_flags(p, with_label=True)
    p.add_argument("--alpha", type=float, default=2.0, help="criterion alpha (>= 1)")
    p.add_argument("--depth", type=int, default=3, help="maximum tree depth")
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--max-thresholds", type=int, default=256)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_tree)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:  # includes feature mismatches
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
