"""Monte-Carlo harness comparing multiple-testing procedures.

Each repetition draws a stream of two-sample comparisons (variance-1
normals; a configurable share of true nulls, the rest with mean
differences spread over an effect range), computes Welch p-values, runs
every configured procedure and tallies discoveries, false discoveries and
power. Per-repetition RNG streams come from a counter-based generator
keyed on (seed, run_index), so results never depend on worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import baselines
from .errors import ConfigError, ReplayError
from .dataset import Dataset, sample_rows
from .ledger import (
    Farsighted,
    Fixed,
    Hopeful,
    Hybrid,
    LedgerConfig,
    PolicyConfig,
    Support,
    run_stream,
)
from .session import evaluate_test_spec
from .stattests import WELCH_T_ONE_SIDED, WELCH_T_TWO_SIDED, welch_t_test

INVESTING_PROCEDURES = ("farsighted", "fixed", "hopeful", "hybrid", "support")
BATCH_PROCEDURES = ("pcer", "bonferroni", "bh")
STREAMING_PROCEDURES = ("streaming_bonferroni", "forward_stop")
ALL_PROCEDURES = BATCH_PROCEDURES + STREAMING_PROCEDURES + INVESTING_PROCEDURES

CSV_COLUMNS = (
    "procedure",
    "m",
    "null_prop",
    "sample_fraction",
    "avg_discoveries",
    "avg_discoveries_ci",
    "avg_fdr",
    "avg_fdr_ci",
    "avg_power",
    "avg_power_ci",
    "empirical_mfdr",
    "reps",
    "seed",
)


@dataclass(frozen=True)
class ProcedureSpec:
    """A procedure name plus parameters, e.g. fixed:gamma=10."""

    name: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if self.name not in ALL_PROCEDURES:
            raise ConfigError(
                f"unknown procedure {self.name!r}; expected one of {ALL_PROCEDURES}"
            )

    @classmethod
    def parse(cls, text: str) -> "ProcedureSpec":
        name, _, params_text = text.partition(":")
        params = []
        if params_text:
            for chunk in params_text.split(","):
                key, _, value = chunk.partition("=")
                if not key or not value:
                    raise ConfigError(f"bad procedure parameter {chunk!r} in {text!r}")
                params.append((key.strip(), float(value)))
        return cls(name=name.strip(), params=tuple(params))

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}({inner})"

    def param_dict(self) -> dict:
        return dict(self.params)

    def policy(self) -> PolicyConfig:
        params = self.param_dict()
        if self.name == "farsighted":
            return Farsighted(beta=params.get("beta", 0.25))
        if self.name == "fixed":
            return Fixed(gamma=params.get("gamma", 10.0))
        if self.name == "hopeful":
            return Hopeful(delta=params.get("delta", 10.0))
        if self.name == "hybrid":
            window = params.get("window")
            return Hybrid(
                epsilon=params.get("epsilon", 0.5),
                gamma=params.get("gamma", 10.0),
                delta=params.get("delta", 10.0),
                window=int(window) if window is not None else None,
            )
        if self.name == "support":
            return Support(psi=params.get("psi", 0.5), base=Fixed(params.get("gamma", 10.0)))
        raise ConfigError(f"{self.name!r} is not an alpha-investing procedure")


def default_procedures() -> tuple[ProcedureSpec, ...]:
    return (
        ProcedureSpec("pcer"),
        ProcedureSpec("bonferroni"),
        ProcedureSpec("bh"),
        ProcedureSpec("forward_stop"),
        ProcedureSpec("farsighted", (("beta", 0.25),)),
        ProcedureSpec("fixed", (("gamma", 10.0),)),
        ProcedureSpec("hopeful", (("delta", 10.0),)),
        ProcedureSpec("hybrid", (("epsilon", 0.5),)),
        ProcedureSpec("support", (("psi", 0.5),)),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Synthetic-stream experiment parameters."""

    m: int = 64
    null_proportion: float = 1.0
    n_per_group: int = 10
    effect_range: tuple[float, float] = (1.25, 5.0)
    sample_fraction: float = 1.0
    repetitions: int = 1000
    seed: int = 0
    alpha: float = 0.05
    eta: Optional[float] = None
    procedures: tuple[ProcedureSpec, ...] = field(default_factory=default_procedures)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m!r}")
        if not 0.0 <= self.null_proportion <= 1.0:
            raise ConfigError(f"null proportion must be in [0, 1], got {self.null_proportion!r}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions!r}")
        if self.effect_range[0] > self.effect_range[1]:
            raise ConfigError(f"effect range lo > hi: {self.effect_range!r}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ConfigError(f"sample fraction must be in (0, 1], got {self.sample_fraction!r}")
        if self.scaled_n() < 2:
            raise ConfigError(
                f"scaled per-group sample size {self.scaled_n()} is below 2"
            )

    def scaled_n(self) -> int:
        return round(self.n_per_group * self.sample_fraction)

    def mfdr_eta(self) -> float:
        return self.eta if self.eta is not None else 1.0 - self.alpha


@dataclass(frozen=True)
class StreamItem:
    p_value: float
    support_fraction: float
    is_true_null: bool


def _run_rng(seed: int, run_index: int, salt: int = 0) -> np.random.Generator:
    # Philox is counter-based and splittable: streams keyed on
    # (seed, run_index) are independent regardless of how work is sharded.
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence((seed, run_index, salt)).generate_state(2, np.uint64)))


def gen_stream(config: ExperimentConfig, run_index: int) -> list[StreamItem]:
    """One synthetic hypothesis stream, deterministic in (seed, run_index).

    True nulls are placed uniformly at random; false nulls receive mean
    differences at the midpoints of equal subdivisions of the effect
    range. Each hypothesis compares two variance-1 normal samples with a
    two-sided Welch t test.
    """
    n = config.scaled_n()
    rng = _run_rng(config.seed, run_index)
    m = config.m
    n_true = round(m * config.null_proportion)
    positions = rng.permutation(m)
    is_null = np.zeros(m, dtype=bool)
    is_null[positions[:n_true]] = True
    n_false = m - n_true
    lo, hi = config.effect_range
    effects = np.zeros(m)
    if n_false:
        spaced = lo + (np.arange(n_false) + 0.5) * (hi - lo) / n_false
        effects[~is_null] = spaced
    draws = rng.standard_normal((m, 2, n))
    items = []
    for j in range(m):
        a = draws[j, 0] + effects[j]
        b = draws[j, 1]
        result = welch_t_test(a, b, WELCH_T_TWO_SIDED)
        items.append(
            StreamItem(
                p_value=result.p_value,
                support_fraction=config.sample_fraction,
                is_true_null=bool(is_null[j]),
            )
        )
    return items


def _rejections(
    spec: ProcedureSpec,
    items: Sequence[StreamItem],
    alpha: float,
    eta: Optional[float] = None,
) -> list[bool]:
    ps = [item.p_value for item in items]
    if spec.name == "pcer":
        return list(baselines.pcer(ps, alpha).rejected)
    if spec.name == "bonferroni":
        return list(baselines.bonferroni(ps, alpha).rejected)
    if spec.name == "bh":
        return list(baselines.benjamini_hochberg(ps, alpha).rejected)
    if spec.name == "streaming_bonferroni":
        return list(baselines.streaming_bonferroni(ps, alpha).rejected)
    if spec.name == "forward_stop":
        return list(baselines.forward_stop(ps, alpha).rejected)
    ledger_config = LedgerConfig(alpha=alpha, eta=eta, policy=spec.policy())
    decisions = run_stream(
        ledger_config, [(item.p_value, item.support_fraction) for item in items]
    )
    return [d is not None and d.rejected for d in decisions]


@dataclass
class _Tally:
    discoveries: list[float] = field(default_factory=list)
    false_discoveries: list[float] = field(default_factory=list)
    fdr: list[float] = field(default_factory=list)
    power: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class RunMetrics:
    """Aggregated results for one procedure."""

    procedure: str
    avg_discoveries: float
    avg_discoveries_ci: float
    avg_fdr: float
    avg_fdr_ci: float
    avg_power: float
    avg_power_ci: float
    empirical_mfdr: float
    empirical_mfdr_ci: float
    mean_false_discoveries: float
    mean_false_discoveries_ci: float
    repetitions: int


def _ci_half_width(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return 1.96 * float(values.std(ddof=1)) / math.sqrt(len(values))


def _mfdr_and_ci(v: np.ndarray, r: np.ndarray, eta: float) -> tuple[float, float]:
    denom = float(r.mean()) + eta
    q = float(v.mean()) / denom
    n = len(v)
    if n < 2:
        return q, 0.0
    # Delta-method variance of mean(V) / (mean(R) + eta).
    var_v = float(v.var(ddof=1))
    var_r = float(r.var(ddof=1))
    cov = float(np.cov(v, r, ddof=1)[0, 1])
    var_q = (var_v - 2.0 * q * cov + q * q * var_r) / (n * denom * denom)
    return q, 1.96 * math.sqrt(max(var_q, 0.0))


def _evaluate_runs(config: ExperimentConfig, run_indices: Sequence[int]) -> dict:
    tallies = {spec.label: _Tally() for spec in config.procedures}
    for run_index in run_indices:
        items = gen_stream(config, run_index)
        n_false = sum(1 for item in items if not item.is_true_null)
        for spec in config.procedures:
            rejected = _rejections(spec, items, config.alpha, config.eta)
            r = sum(rejected)
            v = sum(1 for rej, item in zip(rejected, items) if rej and item.is_true_null)
            s = r - v
            tally = tallies[spec.label]
            tally.discoveries.append(float(r))
            tally.false_discoveries.append(float(v))
            tally.fdr.append(v / r if r > 0 else 0.0)
            tally.power.append(s / n_false if n_false > 0 else 0.0)
    return tallies


def run_experiment(config: ExperimentConfig) -> dict[str, RunMetrics]:
    """Run every configured procedure over every repetition.

    Returns a mapping from procedure label to metrics, in procedure
    order. Output is a deterministic function of the config alone.
    """
    indices = list(range(config.repetitions))
    if config.workers > 1 and config.repetitions > 1:
        chunks = np.array_split(indices, config.workers)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(
                pool.map(_evaluate_runs, [config] * len(chunks), [c.tolist() for c in chunks])
            )
        tallies = {spec.label: _Tally() for spec in config.procedures}
        for part in parts:  # chunks are ordered by run index
            for label, tally in part.items():
                tallies[label].discoveries.extend(tally.discoveries)
                tallies[label].false_discoveries.extend(tally.false_discoveries)
                tallies[label].fdr.extend(tally.fdr)
                tallies[label].power.extend(tally.power)
    else:
        tallies = _evaluate_runs(config, indices)

    eta = config.mfdr_eta()
    out: dict[str, RunMetrics] = {}
    for spec in config.procedures:
        tally = tallies[spec.label]
        r = np.asarray(tally.discoveries)
        v = np.asarray(tally.false_discoveries)
        fdr = np.asarray(tally.fdr)
        power = np.asarray(tally.power)
        mfdr, mfdr_ci = _mfdr_and_ci(v, r, eta)
        out[spec.label] = RunMetrics(
            procedure=spec.label,
            avg_discoveries=float(r.mean()),
            avg_discoveries_ci=_ci_half_width(r),
            avg_fdr=float(fdr.mean()),
            avg_fdr_ci=_ci_half_width(fdr),
            avg_power=float(power.mean()),
            avg_power_ci=_ci_half_width(power),
            empirical_mfdr=mfdr,
            empirical_mfdr_ci=mfdr_ci,
            mean_false_discoveries=float(v.mean()),
            mean_false_discoveries_ci=_ci_half_width(v),
            repetitions=config.repetitions,
        )
    return out


def metrics_to_csv(config: ExperimentConfig, metrics: dict[str, RunMetrics]) -> str:
    """Fixed-column CSV; identical configs yield bit-identical text."""
    lines = [",".join(CSV_COLUMNS)]
    for spec in config.procedures:
        m = metrics[spec.label]
        row = (
            m.procedure,
            str(config.m),
            _fmt(config.null_proportion),
            _fmt(config.sample_fraction),
            _fmt(m.avg_discoveries),
            _fmt(m.avg_discoveries_ci),
            _fmt(m.avg_fdr),
            _fmt(m.avg_fdr_ci),
            _fmt(m.avg_power),
            _fmt(m.avg_power_ci),
            _fmt(m.empirical_mfdr),
            str(config.repetitions),
            str(config.seed),
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return format(x, ".12g")


def theorem1_check(
    config: ExperimentConfig, subset_fraction: float
) -> dict[str, dict[str, float]]:
    """Empirical FDR of a random subset of each run's discoveries.

    Every discovery is kept independently with probability
    ``subset_fraction`` (independent of its p-value); runs with an empty
    subset contribute zero. Fraction 1.0 reproduces avg FDR exactly.
    """
    if not 0.0 < subset_fraction <= 1.0:
        raise ConfigError(f"subset fraction must be in (0, 1], got {subset_fraction!r}")
    subset_fdr = {spec.label: [] for spec in config.procedures}
    for run_index in range(config.repetitions):
        items = gen_stream(config, run_index)
        pick_rng = _run_rng(config.seed, run_index, salt=0x5B5E7)
        for spec in config.procedures:
            rejected = _rejections(spec, items, config.alpha, config.eta)
            indices = [i for i, rej in enumerate(rejected) if rej]
            if subset_fraction >= 1.0:
                chosen = indices
            else:
                mask = pick_rng.random(len(indices)) < subset_fraction
                chosen = [i for i, keep in zip(indices, mask) if keep]
            if not chosen:
                subset_fdr[spec.label].append(0.0)
                continue
            v = sum(1 for i in chosen if items[i].is_true_null)
            subset_fdr[spec.label].append(v / len(chosen))
    out = {}
    for spec in config.procedures:
        values = np.asarray(subset_fdr[spec.label])
        out[spec.label] = {
            "subset_fdr": float(values.mean()),
            "subset_fdr_ci": _ci_half_width(values),
            "se": float(values.std(ddof=1)) / math.sqrt(len(values)) if len(values) > 1 else 0.0,
        }
    return out


@dataclass(frozen=True)
class HoldoutPowerResult:
    power_full: float
    power_half: float
    power_holdout: float
    repetitions: int


def holdout_power_study(
    n_full: int = 500,
    mu_diff: float = 1.0,
    sigma: float = 4.0,
    alpha: float = 0.05,
    repetitions: int = 5000,
    seed: int = 0,
) -> HoldoutPowerResult:
    """Power of a one-sided Welch t test on the full data vs a hold-out split.

    Each repetition draws ``n_full`` records per group, tests the full
    samples, then splits each group into halves and requires both halves
    to reject (the hold-out rule).
    """
    n_half = n_full // 2
    hits_full = hits_half = hits_holdout = 0
    for run_index in range(repetitions):
        rng = _run_rng(seed, run_index, salt=0x401D)
        a = rng.standard_normal(n_full) * sigma + mu_diff
        b = rng.standard_normal(n_full) * sigma
        p_full = welch_t_test(a, b, WELCH_T_ONE_SIDED).p_value
        p1 = welch_t_test(a[:n_half], b[:n_half], WELCH_T_ONE_SIDED).p_value
        p2 = welch_t_test(a[n_half:], b[n_half:], WELCH_T_ONE_SIDED).p_value
        hits_full += p_full <= alpha
        hits_half += p1 <= alpha
        hits_holdout += baselines.holdout_test(p1, p2, alpha)
    return HoldoutPowerResult(
        power_full=hits_full / repetitions,
        power_half=hits_half / repetitions,
        power_holdout=hits_holdout / repetitions,
        repetitions=repetitions,
    )


# ---------------------------------------------------------------------------
# Workflow replay (real-data experiments).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkflowReport:
    decisions: tuple[str, ...]  # rejected | accepted | untested per item
    p_values: tuple[Optional[float], ...]
    labels: tuple[Optional[bool], ...]
    discoveries: int
    false_discoveries: Optional[int]
    fdr: Optional[float]
    power: Optional[float]

    def to_dict(self) -> dict:
        return {
            "decisions": list(self.decisions),
            "p_values": list(self.p_values),
            "labels": list(self.labels),
            "discoveries": self.discoveries,
            "false_discoveries": self.false_discoveries,
            "fdr": self.fdr,
            "power": self.power,
        }


def replay_workflow(
    dataset: Dataset,
    workflow: Sequence[dict],
    procedure: ProcedureSpec,
    alpha: float = 0.05,
    sample_fraction: float = 1.0,
    labels: Optional[Sequence[Optional[bool]]] = None,
    seed: int = 0,
    eta: Optional[float] = None,
) -> WorkflowReport:
    """Replay a recorded hypothesis workflow under one procedure.

    Workflow items are test specs (attribute/filters[, filters_b or
    link_filters][, kind]) optionally carrying a ``label`` ground truth.
    ``sample_fraction`` < 1 down-samples the dataset rows first. Items
    whose data is degenerate are reported untested and skipped by the
    procedure.
    """
    if labels is not None and len(labels) != len(workflow):
        raise ReplayError(
            f"{len(labels)} labels for {len(workflow)} workflow items"
        )
    data = sample_rows(dataset, sample_fraction, seed=seed) if sample_fraction < 1.0 else dataset
    p_values: list[Optional[float]] = []
    supports: list[Optional[int]] = []
    item_labels: list[Optional[bool]] = []
    for i, item in enumerate(workflow):
        test, _, _ = evaluate_test_spec(data, item)
        p_values.append(test.p_value if test else None)
        supports.append(test.support if test else None)
        if labels is not None:
            item_labels.append(labels[i])
        else:
            raw = item.get("label")
            item_labels.append(bool(raw) if raw is not None else None)

    testable = [i for i, p in enumerate(p_values) if p is not None]
    ps = [p_values[i] for i in testable]
    if procedure.name in BATCH_PROCEDURES + STREAMING_PROCEDURES:
        rejected_sub = (
            _rejections(procedure, [StreamItem(p, 1.0, False) for p in ps], alpha)
            if ps
            else []
        )
    else:
        ledger_config = LedgerConfig(alpha=alpha, eta=eta, policy=procedure.policy())
        fractions = [
            max(min((supports[i] or data.row_count) / max(data.row_count, 1), 1.0), 1e-12)
            for i in testable
        ]
        decisions = run_stream(ledger_config, list(zip(ps, fractions)))
        rejected_sub = [d is not None and d.rejected for d in decisions]

    decisions_out = ["untested"] * len(workflow)
    rejected_at = dict(zip(testable, rejected_sub))
    for i in testable:
        decisions_out[i] = "rejected" if rejected_at[i] else "accepted"

    discoveries = sum(1 for d in decisions_out if d == "rejected")
    have_labels = all(l is not None for l in item_labels) and len(item_labels) > 0
    false_discoveries = fdr = power = None
    if have_labels:
        v = sum(
            1 for d, l in zip(decisions_out, item_labels) if d == "rejected" and not l
        )
        s = discoveries - v
        n_true_effects = sum(1 for l in item_labels if l)
        false_discoveries = v
        fdr = v / discoveries if discoveries else 0.0
        power = s / n_true_effects if n_true_effects else 0.0
    return WorkflowReport(
        decisions=tuple(decisions_out),
        p_values=tuple(p_values),
        labels=tuple(item_labels),
        discoveries=discoveries,
        false_discoveries=false_discoveries,
        fdr=fdr,
        power=power,
    )
