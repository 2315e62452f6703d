"""Statistical tests producing the p-values consumed by every ledger.

Welch's unequal-variance t test plus Pearson chi-squared tests for
homogeneity (two histograms) and goodness of fit (histogram against a
reference distribution). No continuity corrections are applied; small
expected cell counts are permitted but flagged on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError, SchemaError
from .special import chi2_sf, t_sf

WELCH_T_ONE_SIDED = "welch_t_one_sided"
WELCH_T_TWO_SIDED = "welch_t_two_sided"
CHI2_HOMOGENEITY = "chi2_homogeneity"
CHI2_GOF = "chi2_gof"

TEST_KINDS = (WELCH_T_ONE_SIDED, WELCH_T_TWO_SIDED, CHI2_HOMOGENEITY, CHI2_GOF)

# Expected cell counts below this are statistically shaky; flagged, not fatal.
LOW_EXPECTED_COUNT = 5.0


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single statistical test.

    ``group_stats`` carries ``(n, mean, variance)`` per group for t tests
    so the statistic can be re-derived under hypothetical sample sizes.
    """

    statistic: float
    df: float
    p_value: float
    support: int
    kind: str
    low_expected: bool = False
    group_stats: tuple[tuple[float, float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in TEST_KINDS:
            raise DomainError(f"unknown test kind {self.kind!r}")
        if not math.isfinite(self.statistic):
            raise DomainError("test statistic must be finite")
        if self.df < 1.0:
            raise DomainError(f"df must be >= 1, got {self.df!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p_value out of [0, 1]: {self.p_value!r}")
        if self.support < 2:
            raise DomainError(f"support must be >= 2, got {self.support!r}")


@dataclass(frozen=True)
class Histogram:
    """Ordered (label, count) bins of a single attribute."""

    bins: tuple[tuple[str, int], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> "Histogram":
        return cls(tuple((str(label), int(count)) for label, count in pairs))

    @classmethod
    def from_dict(cls, counts: dict) -> "Histogram":
        return cls.from_pairs(counts.items())

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.bins)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(count for _, count in self.bins)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def is_degenerate(self) -> bool:
        """True when no valid test can be built on this histogram."""
        return len(self.bins) < 2 or self.total == 0

    def to_dict(self) -> dict:
        return {label: count for label, count in self.bins}


def _as_floats(sample: Sequence[float], name: str) -> list[float]:
    values = [float(v) for v in sample]
    if len(values) < 2:
        raise DegenerateInputError(f"sample {name} needs at least 2 values")
    if any(not math.isfinite(v) for v in values):
        raise DomainError(f"sample {name} contains non-finite values")
    return values


def _mean_var(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var


def welch_statistic(
    na: float, mean_a: float, var_a: float, nb: float, mean_b: float, var_b: float
) -> tuple[float, float]:
    """Welch t statistic and Welch-Satterthwaite df from group summaries."""
    sa = var_a / na
    sb = var_b / nb
    se2 = sa + sb
    if se2 <= 0.0:
        raise DegenerateInputError("both samples have zero variance")
    statistic = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0))
    return statistic, max(df, 1.0)


def welch_t_test(
    a: Sequence[float], b: Sequence[float], alternative: str = WELCH_T_TWO_SIDED
) -> TestResult:
    """Welch's t test of mean(a) vs mean(b).

    ``alternative`` is ``welch_t_two_sided`` or ``welch_t_one_sided``
    (one-sided tests H1: mean(a) > mean(b)).
    """
    if alternative not in (WELCH_T_ONE_SIDED, WELCH_T_TWO_SIDED):
        raise DomainError(f"unknown alternative {alternative!r}")
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        if len(a) < 2 or len(b) < 2:
            raise DegenerateInputError("samples need at least 2 values each")
        na, nb = float(len(a)), float(len(b))
        mean_a, var_a = float(a.mean()), float(a.var(ddof=1))
        mean_b, var_b = float(b.mean()), float(b.var(ddof=1))
    else:
        xs = _as_floats(a, "a")
        ys = _as_floats(b, "b")
        na, nb = float(len(xs)), float(len(ys))
        mean_a, var_a = _mean_var(xs)
        mean_b, var_b = _mean_var(ys)
    statistic, df = welch_statistic(na, mean_a, var_a, nb, mean_b, var_b)
    if alternative == WELCH_T_ONE_SIDED:
        p = t_sf(statistic, df)
    else:
        p = min(1.0, 2.0 * t_sf(abs(statistic), df))
    return TestResult(
        statistic=statistic,
        df=df,
        p_value=p,
        support=int(na + nb),
        kind=alternative,
        group_stats=((na, mean_a, var_a), (nb, mean_b, var_b)),
    )


def _aligned_counts(a: Histogram, b: Histogram) -> tuple[list[str], list[int], list[int]]:
    labels = list(a.labels)
    if set(labels) != set(b.labels) or len(labels) != len(b.labels):
        raise SchemaError(f"bin labels differ: {a.labels!r} vs {b.labels!r}")
    b_map = dict(b.bins)
    return labels, list(a.counts), [b_map[label] for label in labels]


def _check_counts(h: Histogram, name: str) -> None:
    if any(c < 0 for c in h.counts):
        raise DomainError(f"histogram {name} has negative counts")
    if len(h.bins) < 2:
        raise DegenerateInputError(f"histogram {name} needs at least 2 bins")


def chi2_homogeneity(a: Histogram, b: Histogram) -> TestResult:
    """Pearson chi-squared test that two histograms share one distribution."""
    _check_counts(a, "a")
    _check_counts(b, "b")
    labels, ca, cb = _aligned_counts(a, b)
    total_a = sum(ca)
    total_b = sum(cb)
    n = total_a + total_b
    if total_a == 0 or total_b == 0:
        raise DegenerateInputError("each histogram needs a positive total")
    statistic = 0.0
    low_expected = False
    any_expected = False
    for i in range(len(labels)):
        col = ca[i] + cb[i]
        if col == 0:
            continue
        any_expected = True
        for count, row_total in ((ca[i], total_a), (cb[i], total_b)):
            expected = row_total * col / n
            if expected < LOW_EXPECTED_COUNT:
                low_expected = True
            statistic += (count - expected) ** 2 / expected
    if not any_expected:
        raise DegenerateInputError("all cells are zero")
    df = float(len(labels) - 1)
    return TestResult(
        statistic=statistic,
        df=df,
        p_value=chi2_sf(statistic, df),
        support=n,
        kind=CHI2_HOMOGENEITY,
        low_expected=low_expected,
    )


def chi2_goodness_of_fit(observed: Histogram, reference: Histogram) -> TestResult:
    """Pearson chi-squared test of observed counts against reference proportions."""
    _check_counts(observed, "observed")
    _check_counts(reference, "reference")
    labels, obs, ref = _aligned_counts(observed, reference)
    ref_total = sum(ref)
    obs_total = sum(obs)
    if ref_total == 0:
        raise DegenerateInputError("reference histogram is empty")
    if obs_total < 2:
        raise DegenerateInputError("observed histogram needs at least 2 data points")
    statistic = 0.0
    low_expected = False
    for i in range(len(labels)):
        proportion = ref[i] / ref_total
        if proportion == 0.0:
            if obs[i] > 0:
                raise DegenerateInputError(
                    f"bin {labels[i]!r} observed but has zero reference proportion"
                )
            continue
        expected = obs_total * proportion
        if expected < LOW_EXPECTED_COUNT:
            low_expected = True
        statistic += (obs[i] - expected) ** 2 / expected
    df = float(len(labels) - 1)
    return TestResult(
        statistic=statistic,
        df=df,
        p_value=chi2_sf(statistic, df),
        support=obs_total,
        kind=CHI2_GOF,
        low_expected=low_expected,
    )
