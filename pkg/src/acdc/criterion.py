"""Split scoring: the purity zoom factor and the alpha-divergence criterion.

A candidate split is scored by how far its empirical joint distribution sits
from a half-uniform reference that keeps the split marginal but knows nothing
about the label. For alpha > 1 the score decomposes into a PPV term and an
NPV term, each a zoom factor weighted by the corresponding side mass, so
raising alpha shifts preference from balanced cuts to cuts with a pure side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SplitPredicate, SplitStats
from .errors import DegenerateSplitError

LN2 = float(np.log(2.0))


def az_factor(p, alpha):
    """Zoom factor p**alpha + (1-p)**alpha of a binary distribution.

    Symmetric under p <-> 1-p, equals 1 everywhere at alpha=1, and at fixed
    alpha rewards dominance of either outcome. Accepts arrays for p.
    """
    if np.any(np.asarray(p) < 0) or np.any(np.asarray(p) > 1):
        raise ValueError("p must lie in [0, 1]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return p**alpha + (1.0 - p) ** alpha


@dataclass(frozen=True)
class CriterionDecomposition:
    ppv_term: float  # az_factor(PPV, alpha) * P(X=1)
    npv_term: float  # az_factor(NPV, alpha) * P(X=0)


@dataclass(frozen=True)
class CriterionValue:
    value: float
    alpha: float
    decomposition: CriterionDecomposition | None = None


def _divergence_terms(n11, n10, n01, n00, alpha):
    """Vectorized criterion kernel over count arrays (or scalars).

    Returns (value, ppv_term, npv_term). All arithmetic runs in float64 numpy
    ops so scalar and batched callers produce bit-identical values.
    """
    n11 = np.asarray(n11, dtype=np.float64)
    n10 = np.asarray(n10, dtype=np.float64)
    n01 = np.asarray(n01, dtype=np.float64)
    n00 = np.asarray(n00, dtype=np.float64)
    alpha = np.float64(alpha)
    n_true = n11 + n10
    n_false = n01 + n00
    n = n_true + n_false
    p1 = n_true / n
    p0 = n_false / n
    ppv_term = az_factor(n11 / n_true, alpha) * p1
    npv_term = az_factor(n00 / n_false, alpha) * p0
    value = (2.0 ** (alpha - 1.0) * (ppv_term + npv_term) - 1.0) / (
        alpha * (alpha - 1.0)
    )
    return value, ppv_term, npv_term


def _require_both_sides(stats: SplitStats) -> None:
    if stats.n_true == 0 or stats.n_false == 0:
        raise DegenerateSplitError(
            "split leaves one side empty; conditional probabilities are undefined"
        )


def acdc_divergence(stats: SplitStats, alpha: float) -> CriterionValue:
    """Divergence of the split's joint from the half-uniform reference.

    Nonnegative for alpha > 1, zero exactly when both sides have a 50/50
    label mix. Carries the PPV/NPV decomposition, whose sum ranks candidate
    splits identically to the divergence value at fixed alpha and node.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1 (use criterion_limit_alpha1 at 1)")
    _require_both_sides(stats)
    value, ppv_term, npv_term = _divergence_terms(
        stats.n11, stats.n10, stats.n01, stats.n00, alpha
    )
    return CriterionValue(
        float(value),
        float(alpha),
        CriterionDecomposition(float(ppv_term), float(npv_term)),
    )


def _binary_entropy(p: float) -> float:
    """Entropy in nats of (p, 1-p) with the 0*log(0) = 0 convention."""
    total = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            total -= q * np.log(q)
    return float(total)


def criterion_limit_alpha1(stats: SplitStats) -> float:
    """The alpha -> 1 limit of the divergence: ln(2) - H(Y|X) in nats.

    Maximal (= ln 2) iff both conditionals are deterministic; ranking
    candidates by it is the information-gain ranking, since H(Y) is constant
    for a fixed node.
    """
    _require_both_sides(stats)
    h_cond = stats.p_x1 * _binary_entropy(stats.ppv) + (
        1.0 - stats.p_x1
    ) * _binary_entropy(stats.false_positive_ratio)
    return LN2 - h_cond


def weighted_gini(stats: SplitStats) -> float:
    """Weighted child Gini impurity of the split.

    Minimizing it over a candidate set selects the same split as maximizing
    acdc_divergence at alpha=2, because 2p(1-p) = 1 - az_factor(p, 2).
    """
    _require_both_sides(stats)
    p_t = stats.true_positive_ratio
    p_f = stats.false_positive_ratio
    return stats.p_x1 * 2.0 * p_t * (1.0 - p_t) + (1.0 - stats.p_x1) * 2.0 * p_f * (
        1.0 - p_f
    )


def select_split(
    candidates: list[tuple[SplitPredicate, SplitStats]], alpha: float
) -> tuple[SplitPredicate, CriterionValue]:
    """Pick the candidate with the largest divergence at the given alpha.

    Degenerate candidates (an empty side) are skipped; ties go to the first
    candidate in enumeration order, which keeps training deterministic.
    """
    best: tuple[SplitPredicate, CriterionValue] | None = None
    for pred, stats in candidates:
        if stats.n_true == 0 or stats.n_false == 0:
            continue
        cv = acdc_divergence(stats, alpha)
        if best is None or cv.value > best[1].value:
            best = (pred, cv)
    if best is None:
        raise DegenerateSplitError("no non-degenerate candidate split")
    return best


def divergence_values(candidates, alpha) -> np.ndarray:
    """Divergence values for a list of (predicate, stats) pairs at once.

    Bit-identical to mapping acdc_divergence over the list; used by the
    training loops to score whole candidate sets per node.
    """
    if not candidates:
        return np.empty(0, dtype=np.float64)
    n11 = np.array([s.n11 for _, s in candidates], dtype=np.float64)
    n10 = np.array([s.n10 for _, s in candidates], dtype=np.float64)
    n01 = np.array([s.n01 for _, s in candidates], dtype=np.float64)
    n00 = np.array([s.n00 for _, s in candidates], dtype=np.float64)
    value, _, _ = _divergence_terms(n11, n10, n01, n00, alpha)
    return np.asarray(value, dtype=np.float64)
