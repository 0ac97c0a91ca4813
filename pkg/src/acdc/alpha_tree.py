"""Fixed-alpha, depth-limited binary decision tree baseline.

Uses the same splitting criterion, missing routing, and leaf smoothing as the
chain trainer, so chain-vs-tree comparisons measure structure rather than
plumbing. alpha=1 recovers information-gain splits, alpha=2 Gini splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criterion import criterion_limit_alpha1, divergence_values
from .dataset import Dataset, SplitPredicate, enumerate_split_stats
from .errors import FeatureMismatchError, SingleClassError


def smoothed_score(positives: int, count: int) -> float:
    """Laplace-smoothed positive ratio (positives+1)/(count+2)."""
    return (positives + 1) / (count + 2)


@dataclass(frozen=True)
class TreeNode:
    """A leaf (predicate None) or an internal split node.

    left holds rows where the predicate is false (missing cells route there),
    right holds rows where it is true.
    """

    count: int
    positives: int
    score: float
    predicate: SplitPredicate | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.predicate is None


def train_tree(
    dataset: Dataset,
    alpha: float,
    max_depth: int,
    min_leaf: int = 5,
    max_thresholds: int = 256,
) -> TreeNode:
    """Greedy recursive growth with the divergence criterion at fixed alpha.

    A candidate is admissible when both sides hold at least min_leaf rows.
    Growth stops at max_depth, at pure nodes, or when nothing is admissible.
    Ties go to the first candidate in enumeration order.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    if min_leaf < 1:
        raise ValueError("min_leaf must be positive")
    pos = dataset.positives
    if pos == 0 or pos == dataset.row_count:
        raise SingleClassError("training data holds a single label class")
    labels = dataset.labels

    def build(mask: np.ndarray, depth: int) -> TreeNode:
        n = int(np.count_nonzero(mask))
        p = int(labels[mask].sum())
        leaf = TreeNode(n, p, smoothed_score(p, n))
        if depth >= max_depth or p == 0 or p == n or n < 2 * min_leaf:
            return leaf
        candidates = [
            (pred, st)
            for pred, st in enumerate_split_stats(dataset, mask, max_thresholds)
            if min(st.n_true, st.n_false) >= min_leaf
        ]
        if not candidates:
            return leaf
        if alpha == 1.0:
            values = np.array([criterion_limit_alpha1(st) for _, st in candidates])
        else:
            values = divergence_values(candidates, alpha)
        pred = candidates[int(np.argmax(values))][0]
        outcome = pred.evaluate(dataset.column(pred.feature))
        right_mask = mask & outcome
        left_mask = mask & ~outcome
        return TreeNode(
            n,
            p,
            smoothed_score(p, n),
            pred,
            build(left_mask, depth + 1),
            build(right_mask, depth + 1),
        )

    return build(dataset.full_mask(), 0)


def tree_score(tree: TreeNode, row) -> float:
    """Route one row (mapping of feature -> value) to a leaf score."""
    node = tree
    while not node.is_leaf:
        node = node.right if node.predicate.evaluate_row(row) else node.left
    return node.score


def tree_leaves(tree: TreeNode) -> list[tuple[TreeNode, str]]:
    """Leaves in left-to-right order, each with its conjunctive path rule."""
    out: list[tuple[TreeNode, str]] = []

    def walk(node: TreeNode, terms: list[str]):
        if node.is_leaf:
            out.append((node, " AND ".join(terms) if terms else "(all rows)"))
            return
        walk(node.left, terms + [f"NOT({node.predicate.describe()})"])
        walk(node.right, terms + [node.predicate.describe()])

    walk(tree, [])
    return out


def tree_score_batch(tree: TreeNode, dataset: Dataset):
    """Scores plus leaf index (left-to-right order) for every dataset row."""
    for pred in _predicates(tree):
        try:
            col = dataset.column(pred.feature)
        except ValueError as exc:
            raise FeatureMismatchError(str(exc)) from None
        if not pred.matches_kind(col.kind):
            raise FeatureMismatchError(
                f"feature {pred.feature!r} is {col.kind} in the data but the "
                "model splits it with an incompatible relation"
            )
    scores = np.empty(dataset.row_count, dtype=np.float64)
    leaf_idx = np.empty(dataset.row_count, dtype=np.int64)
    counter = [0]

    def walk(node: TreeNode, mask: np.ndarray):
        if node.is_leaf:
            scores[mask] = node.score
            leaf_idx[mask] = counter[0]
            counter[0] += 1
            return
        outcome = node.predicate.evaluate(dataset.column(node.predicate.feature))
        walk(node.left, mask & ~outcome)
        walk(node.right, mask & outcome)

    walk(tree, dataset.full_mask())
    return scores, leaf_idx


def _predicates(tree: TreeNode) -> list[SplitPredicate]:
    if tree.is_leaf:
        return []
    return [tree.predicate] + _predicates(tree.left) + _predicates(tree.right)
