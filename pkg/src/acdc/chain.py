"""Greedy one-sided training loop, the trained chain model, and scoring.

Each stage solves an alpha from the current node's dominant class ratio,
scores every feasible cut with the divergence criterion at that alpha, and
carves the chosen cut's lower-risk side out as a terminal group. The rest of
the rows continue to the next stage, so carved-group positive ratios are
nondecreasing along the chain by construction (the monotonic risk condition)
and the final remaining node is the highest-risk group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .alpha_tree import TreeNode, smoothed_score
from .carving import CarvingConfig, omega_y, solve_alpha
from .criterion import divergence_values
from .dataset import (
    Dataset,
    SplitPredicate,
    SplitStats,
    enumerate_split_stats,
)
from .errors import (
    DataError,
    FeatureMismatchError,
    ModelFormatError,
    SingleClassError,
)

MODEL_FORMAT = "acdc-model/1"

FINAL = "final"

_OMEGA_STOP = 0.5 + 1e-9


@dataclass(frozen=True)
class ChainStage:
    """One carved rule: rows where the predicate holds leave the chain here."""

    predicate: SplitPredicate
    carved_count: int
    carved_positive: int
    score: float  # smoothed risk of the carved group
    raw_ratio: float  # carved_positive / carved_count
    alpha_used: float
    alpha_kind: str
    stage_index: int  # 1-based position in the chain

    def __post_init__(self):
        if self.carved_positive > self.carved_count:
            raise ValueError("carved_positive cannot exceed carved_count")


@dataclass(frozen=True)
class DecisionChain:
    """An ordered sequence of carving stages plus the final remaining node."""

    stages: tuple[ChainStage, ...]
    final_count: int
    final_positive: int
    final_score: float
    nu: float
    training_meta: dict

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        ratios = [s.raw_ratio for s in self.stages]
        if self.final_count > 0:
            ratios.append(self.final_positive / self.final_count)
        if any(a > b for a, b in zip(ratios, ratios[1:])):
            raise ValueError("carved-group positive ratios must be nondecreasing")
        rows = self.training_meta.get("rows")
        if rows is not None:
            carved = sum(s.carved_count for s in self.stages)
            if carved + self.final_count != rows:
                raise ValueError("stage carves plus final node must cover all rows")

    @property
    def n_stages(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class ChainConfig:
    """Training knobs. nu is authoritative; a supplied CarvingConfig only
    contributes its solver bounds."""

    nu: float
    max_stages: int = 4
    min_carve_fraction: float = 0.01
    min_carve_count: int = 5
    max_thresholds: int = 256
    carving: CarvingConfig | None = None

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.max_stages < 1:
            raise ValueError("max_stages must be at least 1")
        if self.min_carve_fraction < 0:
            raise ValueError("min_carve_fraction must be nonnegative")
        if self.min_carve_count < 1:
            raise ValueError("min_carve_count must be positive")
        if self.max_thresholds < 1:
            raise ValueError("max_thresholds must be positive")

    def resolved_carving(self) -> CarvingConfig:
        if self.carving is None:
            return CarvingConfig(nu=self.nu)
        return replace(self.carving, nu=self.nu)


@dataclass(frozen=True)
class FeasibleSplit:
    """A candidate oriented so its predicate-true side is the carved side."""

    predicate: SplitPredicate
    stats: SplitStats
    carved_ratio: float


def feasible_splits(
    candidates: list[tuple[SplitPredicate, SplitStats]],
    prev_carved_ratio: float | None,
    *,
    node_rows: int,
    min_carve_count: int = 5,
    min_carve_fraction: float = 0.01,
) -> list[FeasibleSplit]:
    """Filter candidates to those that may carve under the monotonic risk
    condition, re-orienting each so the carved side is the predicate-true side.

    Taking a candidate's lower-positive-ratio side as the carved side, it is
    kept iff (a) that ratio does not exceed the other side's, (b) it is at
    least prev_carved_ratio when one is given, (c) the carved side holds at
    least max(min_carve_count, min_carve_fraction * node_rows) rows, and
    (d) the other side is nonempty.
    """
    min_size = max(float(min_carve_count), min_carve_fraction * node_rows)
    out: list[FeasibleSplit] = []
    for pred, stats in candidates:
        if stats.n_true == 0 or stats.n_false == 0:
            continue  # degenerate: nothing to carve or nothing remains
        r_true = stats.true_positive_ratio
        r_false = stats.false_positive_ratio
        if r_true <= r_false:
            carved_pred, carved_stats, carved_ratio, other_ratio = (
                pred,
                stats,
                r_true,
                r_false,
            )
        else:
            carved_pred, carved_stats, carved_ratio, other_ratio = (
                pred.complement(),
                stats.swapped(),
                r_false,
                r_true,
            )
        if carved_ratio > other_ratio:  # (a); unreachable after designation
            continue
        if prev_carved_ratio is not None and carved_ratio < prev_carved_ratio:
            continue  # (b)
        if carved_stats.n_true < min_size:
            continue  # (c)
        if carved_stats.n_false == 0:
            continue  # (d)
        out.append(FeasibleSplit(carved_pred, carved_stats, carved_ratio))
    return out


def train_chain(dataset: Dataset, config: ChainConfig) -> DecisionChain:
    """Run the carving loop until a stopping condition fires.

    Per stage: solve alpha from omega_y of the remaining rows, enumerate and
    tabulate candidate cuts, keep the feasible ones, pick the divergence
    argmax at that alpha, record its carved side as a terminal group, and
    drop those rows. Stops on max_stages, an empty feasible set, a balanced
    or pure remaining node, or a remaining node smaller than twice
    min_carve_count.
    """
    if dataset.row_count == 0:
        raise DataError("empty dataset")
    positives = dataset.positives
    if positives == 0 or positives == dataset.row_count:
        raise SingleClassError("training data holds a single label class")

    carving_cfg = config.resolved_carving()
    labels = dataset.labels
    remaining = dataset.full_mask()
    stages: list[ChainStage] = []
    prev_ratio: float | None = None
    ratio_trajectory: list[float] = []
    omega_trajectory: list[float] = []

    while True:
        rem_n = int(np.count_nonzero(remaining))
        rem_pos = int(labels[remaining].sum())
        p = rem_pos / rem_n
        w = max(p, 1.0 - p)
        ratio_trajectory.append(p)
        omega_trajectory.append(w)
        if len(stages) >= config.max_stages:
            break
        if rem_n < 2 * config.min_carve_count:
            break
        if rem_pos == 0 or rem_pos == rem_n:
            break  # pure remaining node: nothing left to separate
        if w <= _OMEGA_STOP:
            break  # balanced node: the slope target is unreachable
        solution = solve_alpha(w, carving_cfg)
        candidates = enumerate_split_stats(dataset, remaining, config.max_thresholds)
        feasible = feasible_splits(
            candidates,
            prev_ratio,
            node_rows=rem_n,
            min_carve_count=config.min_carve_count,
            min_carve_fraction=config.min_carve_fraction,
        )
        if not feasible:
            break
        values = divergence_values(
            [(f.predicate, f.stats) for f in feasible], solution.alpha
        )
        best = feasible[int(np.argmax(values))]
        carved_n = best.stats.n_true
        carved_pos = best.stats.n11
        stages.append(
            ChainStage(
                predicate=best.predicate,
                carved_count=carved_n,
                carved_positive=carved_pos,
                score=smoothed_score(carved_pos, carved_n),
                raw_ratio=best.carved_ratio,
                alpha_used=solution.alpha,
                alpha_kind=solution.kind,
                stage_index=len(stages) + 1,
            )
        )
        outcome = best.predicate.evaluate(dataset.column(best.predicate.feature))
        remaining = remaining & ~outcome
        prev_ratio = best.carved_ratio

    final_count = int(np.count_nonzero(remaining))
    final_positive = int(labels[remaining].sum())
    meta = {
        "rows": dataset.row_count,
        "positives": positives,
        "config": {
            "nu": config.nu,
            "max_stages": config.max_stages,
            "min_carve_fraction": config.min_carve_fraction,
            "min_carve_count": config.min_carve_count,
            "max_thresholds": config.max_thresholds,
            "carving": {
                "nu": carving_cfg.nu,
                "alpha_min": carving_cfg.alpha_min,
                "alpha_max": carving_cfg.alpha_max,
                "tolerance": carving_cfg.tolerance,
                "grid_points": carving_cfg.grid_points,
            },
        },
        "remaining_ratio_trajectory": ratio_trajectory,
        "omega_trajectory": omega_trajectory,
    }
    return DecisionChain(
        stages=tuple(stages),
        final_count=final_count,
        final_positive=final_positive,
        final_score=smoothed_score(final_positive, final_count),
        nu=config.nu,
        training_meta=meta,
    )


# ---------------------------------------------------------------------------
# scoring


def rule_for_terminal(chain: DecisionChain, terminal: int | str) -> str:
    """Conjunctive rule describing one terminal group.

    terminal is a 1-based stage index, or FINAL for the remaining node."""
    parts: list[str] = []
    for stage in chain.stages:
        if terminal == stage.stage_index:
            parts.append(stage.predicate.describe())
            return " AND ".join(parts)
        parts.append(f"NOT({stage.predicate.describe()})")
    if terminal == FINAL:
        return " AND ".join(parts) if parts else "(all rows)"
    raise ValueError(f"unknown terminal {terminal!r}")


def score(chain: DecisionChain, row) -> tuple[float, int | str, str]:
    """Score one row (mapping feature -> value, missing allowed).

    Walks stages in order; the first stage whose predicate fires claims the
    row and returns its score, otherwise the final node does. The trace is
    the conjunction of negated earlier predicates plus the firing condition.
    """
    parts: list[str] = []
    for stage in chain.stages:
        if stage.predicate.evaluate_row(row):
            parts.append(stage.predicate.describe())
            return stage.score, stage.stage_index, " AND ".join(parts)
        parts.append(f"NOT({stage.predicate.describe()})")
    trace = " AND ".join(parts) if parts else "(all rows)"
    return chain.final_score, FINAL, trace


def score_batch(chain: DecisionChain, dataset: Dataset):
    """Vectorized scoring of a whole dataset.

    Returns (scores, terminals) where terminals holds the 1-based stage index
    that claimed each row, or 0 for the final node.
    """
    for stage in chain.stages:
        try:
            col = dataset.column(stage.predicate.feature)
        except ValueError as exc:
            raise FeatureMismatchError(str(exc)) from None
        if not stage.predicate.matches_kind(col.kind):
            raise FeatureMismatchError(
                f"feature {stage.predicate.feature!r} is {col.kind} in the data "
                "but the model cuts it with an incompatible relation"
            )
    terminals = np.zeros(dataset.row_count, dtype=np.int64)
    unclaimed = dataset.full_mask()
    for stage in chain.stages:
        outcome = stage.predicate.evaluate(dataset.column(stage.predicate.feature))
        hit = unclaimed & outcome
        terminals[hit] = stage.stage_index
        unclaimed &= ~outcome
    scores = np.full(dataset.row_count, chain.final_score, dtype=np.float64)
    for stage in chain.stages:
        scores[terminals == stage.stage_index] = stage.score
    return scores, terminals


# ---------------------------------------------------------------------------
# serialization


def _predicate_doc(pred: SplitPredicate) -> dict:
    return {"feature": pred.feature, "relation": pred.relation, "value": pred.value}


def _predicate_from_doc(doc: dict) -> SplitPredicate:
    try:
        return SplitPredicate(doc["feature"], doc["relation"], doc["value"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed predicate record: {exc}") from None


def _tree_doc(node: TreeNode) -> dict:
    doc = {"count": node.count, "positives": node.positives, "score": node.score}
    if not node.is_leaf:
        doc["predicate"] = _predicate_doc(node.predicate)
        doc["left"] = _tree_doc(node.left)
        doc["right"] = _tree_doc(node.right)
    return doc


def _tree_from_doc(doc: dict) -> TreeNode:
    try:
        if "predicate" in doc:
            return TreeNode(
                int(doc["count"]),
                int(doc["positives"]),
                float(doc["score"]),
                _predicate_from_doc(doc["predicate"]),
                _tree_from_doc(doc["left"]),
                _tree_from_doc(doc["right"]),
            )
        return TreeNode(int(doc["count"]), int(doc["positives"]), float(doc["score"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed tree record: {exc}") from None


def serialize(model: DecisionChain | TreeNode) -> bytes:
    """Versioned JSON document for a trained chain or baseline tree.

    Field order is fixed so identical models serialize byte-identically."""
    if isinstance(model, DecisionChain):
        doc = {
            "format": MODEL_FORMAT,
            "kind": "chain",
            "nu": model.nu,
            "stages": [
                {
                    "index": s.stage_index,
                    "predicate": _predicate_doc(s.predicate),
                    "carved_count": s.carved_count,
                    "carved_positive": s.carved_positive,
                    "raw_ratio": s.raw_ratio,
                    "score": s.score,
                    "alpha": s.alpha_used,
                    "alpha_kind": s.alpha_kind,
                }
                for s in model.stages
            ],
            "final": {
                "count": model.final_count,
                "positive": model.final_positive,
                "score": model.final_score,
            },
            "training": model.training_meta,
        }
    elif isinstance(model, TreeNode):
        doc = {"format": MODEL_FORMAT, "kind": "tree", "root": _tree_doc(model)}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def deserialize(data: bytes) -> DecisionChain | TreeNode:
    """Inverse of serialize. Raises ModelFormatError on version mismatch or
    a malformed payload."""
    try:
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"malformed model payload: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError("malformed model payload: not a JSON object")
    fmt = doc.get("format")
    if fmt != MODEL_FORMAT:
        raise ModelFormatError(
            f"unsupported model format {fmt!r}, expected {MODEL_FORMAT!r}"
        )
    kind = doc.get("kind")
    if kind == "tree":
        if "root" not in doc:
            raise ModelFormatError("malformed model payload: tree without root")
        return _tree_from_doc(doc["root"])
    if kind != "chain":
        raise ModelFormatError(f"unknown model kind {kind!r}")
    try:
        stages = tuple(
            ChainStage(
                predicate=_predicate_from_doc(s["predicate"]),
                carved_count=int(s["carved_count"]),
                carved_positive=int(s["carved_positive"]),
                score=float(s["score"]),
                raw_ratio=float(s["raw_ratio"]),
                alpha_used=float(s["alpha"]),
                alpha_kind=str(s["alpha_kind"]),
                stage_index=int(s["index"]),
            )
            for s in doc["stages"]
        )
        return DecisionChain(
            stages=stages,
            final_count=int(doc["final"]["count"]),
            final_positive=int(doc["final"]["positive"]),
            final_score=float(doc["final"]["score"]),
            nu=float(doc["nu"]),
            training_meta=doc["training"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed chain record: {exc}") from None
