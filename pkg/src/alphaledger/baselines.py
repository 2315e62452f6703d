"""Static and sequential multiple-testing baselines.

PCER (no correction), Bonferroni, a streaming Bonferroni variant with
geometric spending, Benjamini-Hochberg, the ForwardStop ordered-testing
rule (standing in for sequential FDR control), and the hold-out split
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

# ForwardStop maps p = 1 just inside the unit interval so -log(1-p) stays finite.
_P_ONE_GUARD = 1.0 - 1e-16


@dataclass(frozen=True)
class BatchDecision:
    """Per-hypothesis rejection flags and the thresholds applied."""

    rejected: tuple[bool, ...]
    threshold_used: tuple[float, ...]

    @property
    def n_rejected(self) -> int:
        return sum(self.rejected)

    def rejected_indices(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.rejected) if r)


def _check_pvalues(p_values: Sequence[float]) -> list[float]:
    ps = [float(p) for p in p_values]
    for p in ps:
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise DomainError(f"p-value out of [0, 1]: {p!r}")
    return ps


def pcer(p_values: Sequence[float], alpha: float) -> BatchDecision:
    """Per-comparison error rate: reject each p <= alpha, no correction."""
    ps = _check_pvalues(p_values)
    return BatchDecision(
        rejected=tuple(p <= alpha for p in ps),
        threshold_used=tuple(alpha for _ in ps),
    )


def bonferroni(p_values: Sequence[float], alpha: float) -> BatchDecision:
    """Reject p_i <= alpha / m; controls FWER at alpha."""
    ps = _check_pvalues(p_values)
    if not ps:
        raise DomainError("bonferroni requires at least one p-value")
    threshold = alpha / len(ps)
    return BatchDecision(
        rejected=tuple(p <= threshold for p in ps),
        threshold_used=tuple(threshold for _ in ps),
    )


def streaming_bonferroni(p_stream: Sequence[float], alpha: float) -> BatchDecision:
    """Reject the j-th hypothesis (1-based) iff p_j <= alpha * 2**-j.

    The spending series sums below alpha for any stream length, so FWER
    stays controlled without knowing the stream length upfront.
    """
    ps = _check_pvalues(p_stream)
    thresholds = tuple(alpha * 2.0**-j for j in range(1, len(ps) + 1))
    return BatchDecision(
        rejected=tuple(p <= t for p, t in zip(ps, thresholds)),
        threshold_used=thresholds,
    )


def benjamini_hochberg(p_values: Sequence[float], alpha: float) -> BatchDecision:
    """Benjamini-Hochberg step-up procedure controlling FDR at alpha.

    Finds the largest k with p_(k) <= (k/m) * alpha and rejects the
    hypotheses holding the k smallest p-values (ties broken by input
    position). Output order matches input order.
    """
    ps = _check_pvalues(p_values)
    m = len(ps)
    if m == 0:
        raise DomainError("benjamini_hochberg requires at least one p-value")
    order = sorted(range(m), key=lambda i: (ps[i], i))
    k_hat = 0
    for rank, i in enumerate(order, start=1):
        if ps[i] <= rank * alpha / m:
            k_hat = rank
    rejected = [False] * m
    thresholds = [0.0] * m
    for rank, i in enumerate(order, start=1):
        thresholds[i] = rank * alpha / m
        if rank <= k_hat:
            rejected[i] = True
    return BatchDecision(rejected=tuple(rejected), threshold_used=tuple(thresholds))


def forward_stop(p_stream: Sequence[float], alpha: float) -> BatchDecision:
    """ForwardStop: reject the longest prefix whose mean -log(1 - p) is <= alpha.

    Order-sensitive by construction: one early large p-value can push the
    running mean above alpha for good, blocking later small p-values.
    """
    ps = _check_pvalues(p_stream)
    k_hat = 0
    acc = 0.0
    for k, p in enumerate(ps, start=1):
        acc += -math.log1p(-min(p, _P_ONE_GUARD))
        if acc / k <= alpha:
            k_hat = k
    return BatchDecision(
        rejected=tuple(k <= k_hat for k in range(1, len(ps) + 1)),
        threshold_used=tuple(alpha for _ in ps),
    )


def holdout_test(p_explore: float, p_validate: float, alpha: float) -> bool:
    """Hold-out split rule: reject only if both halves reject at alpha."""
    _check_pvalues((p_explore, p_validate))
    return p_explore <= alpha and p_validate <= alpha


def holdout_false_rejection(alpha: float) -> float:
    """Probability the hold-out rule falsely rejects one true null: alpha**2."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha!r}")
    return alpha * alpha


def fwer_inflation(alpha: float, k: int) -> float:
    """Probability of at least one false rejection across k independent tests."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha!r}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k!r}")
    return 1.0 - (1.0 - alpha) ** k
