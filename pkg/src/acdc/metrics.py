"""ROC and Lift evaluation with decision rules attached to curve points.

A trained chain partitions rows into k+1 terminal groups with distinct
smoothed scores, so its ROC has one interior point per group and each point
can carry the conjunctive rule that produces it when the score threshold is
set just below that group.
"""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .alpha_tree import TreeNode, tree_leaves, tree_score_batch
from .chain import FINAL, DecisionChain, rule_for_terminal, score_batch
from .dataset import Dataset
from .errors import SingleClassError


@dataclass(frozen=True)
class AnnotatedPoint:
    x: float  # FPR for ROC, population fraction for Lift
    y: float  # TPR for ROC, cumulative lift for Lift
    threshold: float | None
    rule: str | None = None


@dataclass(frozen=True)
class EvaluationCurve:
    kind: str  # "roc" | "lift"
    points: tuple[AnnotatedPoint, ...]
    auroc: float | None = None


def _check_scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d vectors of equal length")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    n_pos = int(np.sum(labels == 1))
    if n_pos == 0 or n_pos == labels.size:
        raise SingleClassError("both classes must be present")
    return scores, labels, n_pos


def roc_curve(scores, labels, annotations: dict | None = None) -> EvaluationCurve:
    """ROC points, one per distinct score threshold, plus (0,0) and (1,1).

    The area is the trapezoidal integral over the points, which equals the
    probability that a random positive outscores a random negative with half
    credit for ties. annotations maps a score value to the rule text attached
    to that threshold's point.
    """
    scores, labels, n_pos = _check_scores_labels(scores, labels)
    n_neg = labels.size - n_pos
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = (labels[order] == 1).astype(np.int64)
    cum_pos = np.cumsum(pos)
    # last row of every tie group of equal scores
    boundary = np.nonzero(np.append(s[:-1] != s[1:], True))[0]
    points = [AnnotatedPoint(0.0, 0.0, None)]
    for i in boundary:
        tp = int(cum_pos[i])
        fp = int(i + 1 - tp)
        thr = float(s[i])
        rule = annotations.get(thr) if annotations else None
        points.append(AnnotatedPoint(fp / n_neg, tp / n_pos, thr, rule))
    points.append(AnnotatedPoint(1.0, 1.0, None))
    return EvaluationCurve("roc", tuple(points), auroc=_trapezoid(points))


def _trapezoid(points) -> float:
    area = 0.0
    for a, b in zip(points, points[1:]):
        area += (b.x - a.x) * (a.y + b.y) / 2.0
    return area


def concordance(scores, labels) -> float:
    """Pairwise concordance probability with half credit for score ties.

    Quadratic-time reference used to cross-check the trapezoidal area."""
    scores, labels, _ = _check_scores_labels(scores, labels)
    pos = scores[np.asarray(labels) == 1]
    neg = scores[np.asarray(labels) == 0]
    wins = 0.0
    for p in pos:
        wins += np.sum(p > neg) + 0.5 * np.sum(p == neg)
    return float(wins / (len(pos) * len(neg)))


def lift_chart(scores, labels, n_bins: int) -> EvaluationCurve:
    """Cumulative lift at n_bins equally spaced population fractions.

    Rows are taken in descending score order (ties keep input order); the
    lift at a boundary is the positive rate within the boundary divided by
    the overall positive rate, so it is exactly 1 at fraction 1.0.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    scores, labels, n_pos = _check_scores_labels(scores, labels)
    n = labels.size
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    cum_pos = np.cumsum((labels[order] == 1).astype(np.int64))
    base_rate = n_pos / n
    points = []
    for i in range(1, n_bins + 1):
        c = (2 * i * n + n_bins) // (2 * n_bins)  # round(i*n/n_bins), half up
        if c == 0:
            continue
        rate = cum_pos[c - 1] / c
        points.append(AnnotatedPoint(c / n, float(rate / base_rate), float(s[c - 1])))
    return EvaluationCurve("lift", tuple(points))


def _annotated_roc(scores, labels, rules_by_score: dict) -> EvaluationCurve:
    merged = {
        score: " | ".join(rules) for score, rules in sorted(rules_by_score.items())
    }
    return roc_curve(scores, labels, merged)


def annotate_chain_curve(chain: DecisionChain, dataset: Dataset) -> EvaluationCurve:
    """ROC of chain scores on a dataset, every interior point carrying the
    conjunctive rule of the terminal group that produces it."""
    scores, terminals = score_batch(chain, dataset)
    rules = defaultdict(list)
    for stage in chain.stages:
        rules[float(stage.score)].append(rule_for_terminal(chain, stage.stage_index))
    rules[float(chain.final_score)].append(rule_for_terminal(chain, FINAL))
    return _annotated_roc(scores, dataset.labels, rules)


def annotate_tree_curve(tree: TreeNode, dataset: Dataset) -> EvaluationCurve:
    """ROC of tree scores with leaf path rules attached to the points."""
    scores, _ = tree_score_batch(tree, dataset)
    rules = defaultdict(list)
    for leaf, rule in tree_leaves(tree):
        rules[float(leaf.score)].append(rule)
    return _annotated_roc(scores, dataset.labels, rules)


def write_curve_csv(curve: EvaluationCurve, path) -> None:
    """Write points as CSV with columns kind,x,y,threshold,rule."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "x", "y", "threshold", "rule"])
        for p in curve.points:
            writer.writerow(
                [
                    curve.kind,
                    repr(p.x),
                    repr(p.y),
                    "" if p.threshold is None else repr(p.threshold),
                    "" if p.rule is None else p.rule,
                ]
            )


def read_curve_csv(path) -> list[dict]:
    """Rows of a curve CSV as dicts (strings as written)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


_SVG_SIZE = 560
_SVG_MARGIN = 60


def _svg_xy(x: float, y: float) -> tuple[float, float]:
    span = _SVG_SIZE - 2 * _SVG_MARGIN
    return _SVG_MARGIN + x * span, _SVG_SIZE - _SVG_MARGIN - y * span


def write_curve_svg(curve: EvaluationCurve, path, title: str | None = None) -> None:
    """Render the curve as a standalone SVG with rule labels on the points.

    Lift y values are rescaled to the curve's own maximum so both kinds fit
    the same square canvas.
    """
    y_max = 1.0
    if curve.kind == "lift":
        y_max = max(1.0, max(p.y for p in curve.points))
    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": str(_SVG_SIZE),
            "height": str(_SVG_SIZE),
            "viewBox": f"0 0 {_SVG_SIZE} {_SVG_SIZE}",
        },
    )
    ET.SubElement(svg, "rect", {"width": "100%", "height": "100%", "fill": "white"})
    axis = {"stroke": "#444", "stroke-width": "1"}
    x0, y0 = _svg_xy(0.0, 0.0)
    x1, y1 = _svg_xy(1.0, 1.0)
    ET.SubElement(
        svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x1), "y2": str(y0), **axis}
    )
    ET.SubElement(
        svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x0), "y2": str(y1), **axis}
    )
    if curve.kind == "roc":
        ET.SubElement(
            svg,
            "line",
            {
                "x1": str(x0),
                "y1": str(y0),
                "x2": str(x1),
                "y2": str(y1),
                "stroke": "#bbb",
                "stroke-dasharray": "4 4",
            },
        )
    coords = [_svg_xy(p.x, p.y / y_max) for p in curve.points]
    ET.SubElement(
        svg,
        "polyline",
        {
            "points": " ".join(f"{cx:.2f},{cy:.2f}" for cx, cy in coords),
            "fill": "none",
            "stroke": "#1f6fb2",
            "stroke-width": "2",
        },
    )
    for p, (cx, cy) in zip(curve.points, coords):
        if p.threshold is None:
            continue
        ET.SubElement(
            svg,
            "circle",
            {"cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": "3.5", "fill": "#d04a35"},
        )
        if p.rule:
            label = p.rule if len(p.rule) <= 60 else p.rule[:57] + "..."
            text = ET.SubElement(
                svg,
                "text",
                {"x": f"{cx + 6:.2f}", "y": f"{cy - 6:.2f}", "font-size": "9"},
            )
            text.text = label
    caption = title or (
        "ROC with rule-annotated points" if curve.kind == "roc" else "Cumulative lift"
    )
    head = ET.SubElement(
        svg, "text", {"x": str(_SVG_MARGIN), "y": "28", "font-size": "14"}
    )
    head.text = caption
    if curve.kind == "roc" and curve.auroc is not None:
        sub = ET.SubElement(
            svg, "text", {"x": str(_SVG_MARGIN), "y": "44", "font-size": "11"}
        )
        sub.text = f"AUROC = {curve.auroc:.4f}"
    ET.ElementTree(svg).write(path, encoding="unicode", xml_declaration=True)
