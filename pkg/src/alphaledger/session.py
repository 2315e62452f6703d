"""Interactive hypothesis-tracking sessions.

A session owns a dataset, an alpha-investing ledger and an append-only
event log. Visualizations are turned into default hypotheses by three
heuristics:

1. no filters -> descriptive only, no hypothesis;
2. filters -> goodness-of-fit null "the filter makes no difference"
   against the whole-dataset distribution;
3. linked to a visualization of the same attribute with complementary
   filters -> homogeneity null between the two filtered distributions,
   superseding the rule-2 hypotheses derived from either visualization.

Every decision-bearing event triggers a deterministic re-fold of the
ledger over the surviving records, so rebuilding a session from its event
log always reproduces the exact state, and editing record k never changes
records before k.
"""

from __future__ import annotations

import json
import math
import re
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .dataset import (
    DEFAULT_BINS,
    Dataset,
    FilterPredicate,
    complementary_filters,
    group_values,
    histogram_of,
)
from .errors import (
    DegenerateInputError,
    NotFoundError,
    SchemaError,
    StateError,
)
from .ledger import (
    LedgerConfig,
    LedgerState,
    initial_state,
    ledger_step,
    next_budget,
    policy_to_dict,
)
from .special import chi2_sf, t_sf
from .stattests import (
    CHI2_GOF,
    CHI2_HOMOGENEITY,
    WELCH_T_ONE_SIDED,
    WELCH_T_TWO_SIDED,
    Histogram,
    TestResult,
    chi2_goodness_of_fit,
    chi2_homogeneity,
    welch_statistic,
    welch_t_test,
)

EXPLICIT = "explicit"

REJECTED = "rejected"
ACCEPTED = "accepted"
UNTESTED = "untested"
DESCRIPTIVE = "descriptive"

FLIP_CAP = 1e6
FLIP_REL_TOL = 1e-3


@dataclass(frozen=True)
class VisualizationSpec:
    """A histogram visualization: target attribute plus filters.

    ``linked_to`` names another visualization to compare against
    (heuristic rule 3); spatial gestures are a UI concern, the engine only
    sees the explicit link.
    """

    attribute: str
    filters: tuple[FilterPredicate, ...] = ()
    linked_to: Optional[str] = None
    id: Optional[str] = None
    bins: int = DEFAULT_BINS

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "attribute": self.attribute,
            "filters": [f.to_dict() for f in self.filters],
            "linked_to": self.linked_to,
            "bins": self.bins,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VisualizationSpec":
        try:
            attribute = data["attribute"]
        except (KeyError, TypeError):
            raise SchemaError(f"visualization needs an 'attribute': {data!r}") from None
        return cls(
            attribute=attribute,
            filters=tuple(FilterPredicate.from_dict(f) for f in data.get("filters", ())),
            linked_to=data.get("linked_to"),
            id=data.get("id"),
            bins=int(data.get("bins", DEFAULT_BINS)),
        )


@dataclass
class HypothesisRecord:
    """One tracked hypothesis and its current ledger outcome."""

    id: int
    description: str
    kind: Optional[str]
    source: dict
    p_value: Optional[float]
    support: Optional[int]
    support_fraction: Optional[float]
    budget: Optional[float] = None
    decision: str = UNTESTED
    starred: bool = False
    superseded_by: Optional[int] = None
    test: Optional[TestResult] = None
    warning: Optional[str] = None

    @property
    def in_ledger(self) -> bool:
        return (
            self.decision != DESCRIPTIVE
            and self.superseded_by is None
            and self.p_value is not None
        )

    @property
    def decided(self) -> bool:
        return self.decision in (REJECTED, ACCEPTED)


class Session:
    """Mutable session state; one logical writer per session."""

    def __init__(self, dataset: Dataset, config: LedgerConfig, session_id: Optional[str] = None):
        self.id = session_id or uuid.uuid4().hex[:12]
        self.dataset = dataset
        self.config = config
        self.events: list[dict] = []
        self.records: dict[int, HypothesisRecord] = {}
        self.order: list[int] = []
        self.visualizations: dict[str, VisualizationSpec] = {}
        self.ledger: LedgerState = initial_state(config)
        self._next_record_id = 1
        self._next_viz_id = 1
        self._version = 0
        self._flip_cache: dict = {}

    def record(self, record_id: int) -> HypothesisRecord:
        try:
            return self.records[record_id]
        except KeyError:
            raise NotFoundError(f"no hypothesis record {record_id!r}") from None

    def ordered_records(self) -> list[HypothesisRecord]:
        return [self.records[rid] for rid in self.order]


def create_session(
    dataset: Dataset, config: Optional[LedgerConfig] = None, session_id: Optional[str] = None
) -> Session:
    return Session(dataset, config or LedgerConfig(), session_id)


def _filters_text(filters: Sequence[FilterPredicate]) -> str:
    if not filters:
        return "all rows"
    parts = []
    for f in filters:
        if f.op == "equals":
            body = f"{f.column} = {f.value}"
        elif f.op == "in_set":
            body = f"{f.column} in {{{', '.join(str(v) for v in f.values or ())}}}"
        else:
            lo = "-inf" if f.lo is None else f"{f.lo:g}"
            hi = "inf" if f.hi is None else f"{f.hi:g}"
            body = f"{f.column} in [{lo}, {hi}]"
        parts.append(f"not({body})" if f.negated else body)
    return " & ".join(parts)


def _support_fraction(session: Session, support: Optional[int]) -> Optional[float]:
    if support is None or session.dataset.row_count == 0:
        return 1.0
    return max(min(support / session.dataset.row_count, 1.0), 1e-12)


# ---------------------------------------------------------------------------
# Test-spec evaluation (shared by explicit hypotheses, overrides and
# workflow replays).
# ---------------------------------------------------------------------------


def evaluate_test_spec(
    dataset: Dataset, spec: dict, bins_default: int = DEFAULT_BINS
) -> tuple[Optional[TestResult], str, Optional[str]]:
    """Evaluate one hypothesis spec against a dataset.

    Returns ``(test, description, warning)`` where ``test`` is None when
    the data is degenerate (warning says why). Spec forms:

    * ``{"p_value": p, ...}`` -- user-supplied p-value, no data access;
    * ``{"attribute", "filters", ["reference"], ["kind"]}`` -- goodness of
      fit of the filtered distribution against the whole dataset (or the
      supplied reference histogram);
    * ``{"attribute", "filters_a"/"filters", "filters_b"/"link_filters",
      ["kind"]}`` -- two-group comparison (chi-squared homogeneity by
      default, Welch t by override).
    """
    if "p_value" in spec:
        raise SchemaError("explicit p-value specs are evaluated by the caller")
    try:
        attribute = spec["attribute"]
    except (KeyError, TypeError):
        raise SchemaError(f"test spec needs an 'attribute': {spec!r}") from None
    bins = int(spec.get("bins", bins_default))
    filters_b_raw = spec.get("filters_b", spec.get("link_filters"))
    filters_a_raw = spec.get("filters_a", spec.get("filters", ()))
    filters_a = tuple(FilterPredicate.from_dict(f) for f in filters_a_raw)
    if filters_b_raw is not None:
        filters_b = tuple(FilterPredicate.from_dict(f) for f in filters_b_raw)
        kind = spec.get("kind", CHI2_HOMOGENEITY)
        return _evaluate_two_group(dataset, attribute, filters_a, filters_b, kind, bins)
    kind = spec.get("kind", CHI2_GOF)
    if kind != CHI2_GOF:
        raise SchemaError(f"single-group specs support only {CHI2_GOF!r}, got {kind!r}")
    reference = spec.get("reference")
    ref_hist = Histogram.from_dict(reference) if reference is not None else None
    return _evaluate_gof(dataset, attribute, filters_a, bins, ref_hist)


def _evaluate_gof(
    dataset: Dataset,
    attribute: str,
    filters: tuple[FilterPredicate, ...],
    bins: int,
    reference: Optional[Histogram] = None,
) -> tuple[Optional[TestResult], str, Optional[str]]:
    observed = histogram_of(dataset, attribute, filters, bins)
    ref = reference if reference is not None else histogram_of(dataset, attribute, (), bins)
    against = "the supplied reference" if reference is not None else "the overall distribution"
    description = (
        f"H0: {attribute} | {_filters_text(filters)} matches {against}; H1: it differs"
    )
    if observed.is_degenerate or ref.is_degenerate:
        return None, description, "degenerate histogram: no valid test"
    try:
        test = chi2_goodness_of_fit(observed, ref)
    except (DegenerateInputError, SchemaError) as exc:
        return None, description, str(exc)
    return test, description, None


def _evaluate_two_group(
    dataset: Dataset,
    attribute: str,
    filters_a: tuple[FilterPredicate, ...],
    filters_b: tuple[FilterPredicate, ...],
    kind: str,
    bins: int,
) -> tuple[Optional[TestResult], str, Optional[str]]:
    text_a = _filters_text(filters_a)
    text_b = _filters_text(filters_b)
    if kind in (WELCH_T_ONE_SIDED, WELCH_T_TWO_SIDED):
        description = (
            f"H0: mean {attribute} | {text_a} equals mean {attribute} | {text_b}; "
            f"H1: they differ"
        )
        a = group_values(dataset, attribute, filters_a)
        b = group_values(dataset, attribute, filters_b)
        if len(a) < 2 or len(b) < 2:
            return None, description, "too few rows in a group: no valid test"
        try:
            test = welch_t_test(a, b, kind)
        except DegenerateInputError as exc:
            return None, description, str(exc)
        return test, description, None
    if kind != CHI2_HOMOGENEITY:
        raise SchemaError(f"unknown two-group test kind {kind!r}")
    description = (
        f"H0: {attribute} | {text_a} and {attribute} | {text_b} share one distribution; "
        f"H1: they differ"
    )
    ha = histogram_of(dataset, attribute, filters_a, bins)
    hb = histogram_of(dataset, attribute, filters_b, bins)
    if ha.is_degenerate or hb.is_degenerate:
        return None, description, "degenerate histogram: no valid test"
    try:
        test = chi2_homogeneity(ha, hb)
    except (DegenerateInputError, SchemaError) as exc:
        return None, description, str(exc)
    return test, description, None


# ---------------------------------------------------------------------------
# Ledger replay.
# ---------------------------------------------------------------------------


def _replay_ledger(session: Session) -> None:
    """Re-fold the ledger over surviving records, in creation order.

    Pure recomputation: records whose inputs are untouched come out
    bit-identical, which is what makes prefix decisions immutable.
    """
    state = initial_state(session.config)
    for rec in session.ordered_records():
        if not rec.in_ledger:
            continue
        outcome, state = ledger_step(state, session.config, rec.p_value, rec.support_fraction)
        if outcome is None:
            rec.budget = None
            rec.decision = UNTESTED
            rec.starred = False
        else:
            rec.budget = outcome.budget
            rec.decision = REJECTED if outcome.rejected else ACCEPTED
    session.ledger = state
    session._version += 1
    session._flip_cache.clear()


def _new_record(session: Session, **kwargs) -> HypothesisRecord:
    record = HypothesisRecord(id=session._next_record_id, **kwargs)
    session._next_record_id += 1
    session.records[record.id] = record
    session.order.append(record.id)
    return record


# ---------------------------------------------------------------------------
# Session operations. Each validates, applies, then appends its event.
# ---------------------------------------------------------------------------


def record_visualization(
    session: Session, viz: VisualizationSpec
) -> Optional[HypothesisRecord]:
    """Register a visualization and derive its default hypothesis (rules 1-3).

    Returns the derived record, or None when the visualization is
    descriptive (rule 1). The hypothesis is tested through the session
    ledger immediately.
    """
    if viz.id is None:
        viz = VisualizationSpec(
            attribute=viz.attribute,
            filters=viz.filters,
            linked_to=viz.linked_to,
            id=f"v{session._next_viz_id}",
            bins=viz.bins,
        )
    result = _apply_visualization(session, viz)
    session.events.append({"type": "visualization", "viz": viz.to_dict()})
    return result


def _apply_visualization(
    session: Session, viz: VisualizationSpec
) -> Optional[HypothesisRecord]:
    session.dataset.column(viz.attribute)  # raises SchemaError for unknown columns
    for f in viz.filters:
        session.dataset.column(f.column)
    auto_id = re.fullmatch(r"v(\d+)", viz.id or "")
    if auto_id:
        session._next_viz_id = max(session._next_viz_id, int(auto_id.group(1)) + 1)
    session.visualizations[viz.id] = viz

    if not viz.filters and viz.linked_to is None:
        _new_record(
            session,
            description=f"distribution of {viz.attribute} (descriptive)",
            kind=None,
            source={"viz_ids": [viz.id], "attribute": viz.attribute},
            p_value=None,
            support=None,
            support_fraction=None,
            decision=DESCRIPTIVE,
        )
        session._version += 1
        session._flip_cache.clear()
        return None

    if viz.linked_to is not None:
        other = session.visualizations.get(viz.linked_to)
        if other is None:
            raise NotFoundError(f"linked visualization {viz.linked_to!r} not found")
        if other.attribute != viz.attribute:
            raise SchemaError(
                f"linked visualizations target different attributes: "
                f"{viz.attribute!r} vs {other.attribute!r}"
            )
        test, description, warning = _evaluate_two_group(
            session.dataset, viz.attribute, viz.filters, other.filters,
            CHI2_HOMOGENEITY, viz.bins,
        )
        record = _new_record(
            session,
            description=description,
            kind=CHI2_HOMOGENEITY,
            source={
                "viz_ids": [viz.id, other.id],
                "attribute": viz.attribute,
                "filters_a": [f.to_dict() for f in viz.filters],
                "filters_b": [f.to_dict() for f in other.filters],
            },
            p_value=test.p_value if test else None,
            support=test.support if test else None,
            support_fraction=_support_fraction(session, test.support) if test else None,
            test=test,
            warning=warning,
        )
        if complementary_filters(viz.filters, other.filters):
            involved = {viz.id, other.id}
            for rec in session.ordered_records():
                if (
                    rec.id != record.id
                    and rec.superseded_by is None
                    and rec.decision != DESCRIPTIVE
                    and involved.intersection(rec.source.get("viz_ids", ()))
                ):
                    rec.superseded_by = record.id
        _replay_ledger(session)
        return record

    test, description, warning = _evaluate_gof(
        session.dataset, viz.attribute, viz.filters, viz.bins
    )
    record = _new_record(
        session,
        description=description,
        kind=CHI2_GOF,
        source={
            "viz_ids": [viz.id],
            "attribute": viz.attribute,
            "filters": [f.to_dict() for f in viz.filters],
        },
        p_value=test.p_value if test else None,
        support=test.support if test else None,
        support_fraction=_support_fraction(session, test.support) if test else None,
        test=test,
        warning=warning,
    )
    _replay_ledger(session)
    return record


def add_hypothesis(session: Session, spec: dict) -> HypothesisRecord:
    """Add an explicit hypothesis (user-specified test or raw p-value)."""
    record = _apply_hypothesis(session, spec)
    session.events.append({"type": "hypothesis", "spec": spec})
    return record


def _resolve_spec(
    session: Session, spec: dict
) -> tuple[Optional[TestResult], str, Optional[str], Optional[float], Optional[int], str, dict]:
    """-> (test, description, warning, p_value, support, kind, source)."""
    if "p_value" in spec:
        p = float(spec["p_value"])
        if not 0.0 <= p <= 1.0:
            raise SchemaError(f"p_value out of [0, 1]: {p!r}")
        support = spec.get("support")
        description = spec.get("description", "user-supplied hypothesis")
        return (
            None,
            description,
            None,
            p,
            int(support) if support is not None else None,
            spec.get("kind", EXPLICIT),
            {"spec": spec},
        )
    test, description, warning = evaluate_test_spec(session.dataset, spec)
    description = spec.get("description", description)
    kind = test.kind if test else spec.get("kind", CHI2_GOF)
    return (
        test,
        description,
        warning,
        test.p_value if test else None,
        test.support if test else None,
        kind,
        {"spec": spec},
    )


def _apply_hypothesis(session: Session, spec: dict) -> HypothesisRecord:
    test, description, warning, p, support, kind, source = _resolve_spec(session, spec)
    record = _new_record(
        session,
        description=description,
        kind=kind,
        source=source,
        p_value=p,
        support=support,
        support_fraction=_support_fraction(session, support),
        test=test,
        warning=warning,
    )
    _replay_ledger(session)
    return record


def override_hypothesis(session: Session, record_id: int, spec: dict) -> HypothesisRecord:
    """Replace a record's test; the ledger replays from its position.

    Strictly earlier records never change; later budgets and decisions
    may. A spec of just ``{"kind": ...}`` re-tests the record's own data
    selections with the new test kind.
    """
    record = session.record(record_id)
    merged = _merge_override_spec(record, spec)
    _apply_override(session, record_id, merged)
    session.events.append({"type": "override", "record": record_id, "spec": merged})
    return session.record(record_id)


def _merge_override_spec(record: HypothesisRecord, spec: dict) -> dict:
    if "p_value" in spec or "attribute" in spec:
        return spec
    source_spec = dict(record.source.get("spec", {})) if "spec" in record.source else {}
    if not source_spec:
        source_spec = {
            k: v
            for k, v in record.source.items()
            if k in ("attribute", "filters", "filters_a", "filters_b")
        }
    if not source_spec or "attribute" not in source_spec:
        raise StateError(
            "override spec must carry 'p_value' or 'attribute' for records "
            "without stored data selections"
        )
    merged = dict(source_spec)
    merged.update(spec)
    return merged


def _apply_override(session: Session, record_id: int, spec: dict) -> None:
    record = session.records.get(record_id)
    if record is None:
        raise NotFoundError(f"no hypothesis record {record_id!r}")
    if "p_value" in spec:
        p = float(spec["p_value"])
        if not 0.0 <= p <= 1.0:
            raise SchemaError(f"p_value out of [0, 1]: {p!r}")
        support = spec.get("support", record.support)
        record.test = None
        record.kind = spec.get("kind", EXPLICIT)
        record.p_value = p
        record.support = int(support) if support is not None else None
        record.support_fraction = _support_fraction(session, record.support)
        record.description = spec.get("description", record.description)
        record.warning = None
    else:
        test, description, warning = evaluate_test_spec(session.dataset, spec)
        record.test = test
        record.kind = test.kind if test else spec.get("kind", record.kind)
        record.p_value = test.p_value if test else None
        record.support = test.support if test else None
        record.support_fraction = _support_fraction(session, record.support)
        record.description = spec.get("description", description)
        record.warning = warning
    if record.decision == DESCRIPTIVE and record.p_value is not None:
        # Overriding a deleted/descriptive record re-enters it in the ledger.
        record.decision = UNTESTED
    record.source = {"spec": spec, "viz_ids": record.source.get("viz_ids", [])}
    _replay_ledger(session)


def delete_hypothesis(session: Session, record_id: int) -> Session:
    """Remove a record from the ledger (it stays in the log as descriptive)."""
    session.record(record_id)
    _apply_delete(session, record_id)
    session.events.append({"type": "delete", "record": record_id})
    return session


def _apply_delete(session: Session, record_id: int) -> None:
    record = session.records.get(record_id)
    if record is None:
        raise NotFoundError(f"no hypothesis record {record_id!r}")
    record.decision = DESCRIPTIVE
    record.budget = None
    record.starred = False
    _replay_ledger(session)


def star_hypothesis(session: Session, record_id: int, on: bool) -> HypothesisRecord:
    """Toggle the star flag; only decided records can be starred."""
    record = session.record(record_id)
    if not record.decided:
        raise StateError(
            f"record {record_id} is {record.decision}; only decided records can be starred"
        )
    _apply_star(session, record_id, on)
    session.events.append({"type": "star", "record": record_id, "on": bool(on)})
    return record


def _apply_star(session: Session, record_id: int, on: bool) -> None:
    record = session.records.get(record_id)
    if record is None:
        raise NotFoundError(f"no hypothesis record {record_id!r}")
    if record.decided:
        record.starred = bool(on)
        session._version += 1


def star_selection_warning(session: Session) -> Optional[str]:
    """Warn when the starred discoveries are exactly the lowest-p ones.

    Subset FDR control requires selecting important discoveries
    independently of their p-values; cherry-picking the smallest p-values
    voids that guarantee.
    """
    discoveries = [
        r
        for r in session.ordered_records()
        if r.decision == REJECTED and r.superseded_by is None
    ]
    starred = [r for r in discoveries if r.starred]
    unstarred = [r for r in discoveries if not r.starred]
    if not starred or not unstarred:
        return None
    if max(r.p_value for r in starred) <= min(r.p_value for r in unstarred):
        return (
            "starred discoveries are exactly the lowest p-values; "
            "subset FDR control assumes selection independent of p-values"
        )
    return None


# ---------------------------------------------------------------------------
# Flip factors: how much data would change a decision.
# ---------------------------------------------------------------------------


def _chi2_p_scaled(test: TestResult, factor: float) -> float:
    return chi2_sf(test.statistic * factor, test.df)


def _chi2_p_mixed(test: TestResult, added: float) -> float:
    # Appending reference-shaped counts leaves the observed-minus-expected
    # deviations unchanged while scaling expectations by (1 + added).
    return chi2_sf(test.statistic / (1.0 + added), test.df)


def _t_p_scaled(test: TestResult, factor: float) -> float:
    (na, ma, va), (nb, mb, vb) = test.group_stats
    statistic, df = welch_statistic(na * factor, ma, va, nb * factor, mb, vb)
    if test.kind == WELCH_T_ONE_SIDED:
        return t_sf(statistic, df)
    return min(1.0, 2.0 * t_sf(abs(statistic), df))


def _t_p_mixed(test: TestResult, added: float) -> float:
    (na, ma, va), (nb, mb, vb) = test.group_stats
    pooled = (na * ma + nb * mb) / (na + nb)
    ma2 = (ma + added * pooled) / (1.0 + added)
    mb2 = (mb + added * pooled) / (1.0 + added)
    statistic, df = welch_statistic(na * (1 + added), ma2, va, nb * (1 + added), mb2, vb)
    if test.kind == WELCH_T_ONE_SIDED:
        return t_sf(statistic, df)
    return min(1.0, 2.0 * t_sf(abs(statistic), df))


def _search_scale_to_reject(p_of: Callable[[float], float], budget: float) -> Optional[float]:
    """Smallest factor c >= 1 with p(c) <= budget; None if > FLIP_CAP."""
    if p_of(1.0) <= budget:
        return 1.0
    lo, hi = 1.0, 1.0
    while hi < FLIP_CAP:
        hi = min(hi * 2.0, FLIP_CAP)
        if p_of(hi) <= budget:
            break
    if p_of(hi) > budget:
        return None
    while hi / lo > 1.0 + FLIP_REL_TOL:
        mid = math.sqrt(lo * hi)
        if p_of(mid) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def _search_mix_to_accept(p_of: Callable[[float], float], budget: float) -> Optional[float]:
    """Smallest added-data multiple c >= 0 with p(c) > budget; None if > FLIP_CAP."""
    if p_of(0.0) > budget:
        return 0.0
    lo, hi = 0.0, 1e-3
    while hi < FLIP_CAP and p_of(hi) <= budget:
        lo, hi = hi, min(hi * 2.0, FLIP_CAP)
    if p_of(hi) <= budget:
        return None
    while hi - lo > FLIP_REL_TOL * max(hi, 1e-9):
        mid = 0.5 * (lo + hi)
        if p_of(mid) > budget:
            hi = mid
        else:
            lo = mid
    return hi


def data_to_flip(session: Session, record_id: int, direction: str) -> Optional[float]:
    """Data multiplier needed to flip a record's decision.

    ``to_reject`` scales the observed data (same shape) until p falls to
    the budget the policy would assign right now; ``to_accept`` mixes in
    null-shaped data until p exceeds it. Returns None when the flip is
    unreachable within a factor of 1e6 (or the ledger is exhausted).
    """
    if direction not in ("to_reject", "to_accept"):
        raise StateError(f"unknown flip direction {direction!r}")
    record = session.record(record_id)
    if record.decision == DESCRIPTIVE:
        raise StateError("descriptive records have no decision to flip")
    if not record.decided:
        raise StateError(f"record {record_id} is {record.decision}; nothing to flip")
    if record.test is None or record.kind == EXPLICIT:
        raise StateError("flip factors need a chi-squared or t test record")

    cache_key = (record_id, direction, session._version)
    if cache_key in session._flip_cache:
        return session._flip_cache[cache_key]

    if session.ledger.exhausted:
        session._flip_cache[cache_key] = None
        return None
    budget = next_budget(session.ledger, session.config, record.support_fraction)

    test = record.test
    if direction == "to_reject":
        if record.decision == REJECTED:
            result: Optional[float] = 1.0
        elif test.kind in (CHI2_GOF, CHI2_HOMOGENEITY):
            result = _search_scale_to_reject(lambda c: _chi2_p_scaled(test, c), budget)
        else:
            result = _search_scale_to_reject(lambda c: _t_p_scaled(test, c), budget)
    else:
        if record.decision == ACCEPTED:
            result = 0.0
        elif test.kind in (CHI2_GOF, CHI2_HOMOGENEITY):
            result = _search_mix_to_accept(lambda c: _chi2_p_mixed(test, c), budget)
        else:
            result = _search_mix_to_accept(lambda c: _t_p_mixed(test, c), budget)
    session._flip_cache[cache_key] = result
    return result


# ---------------------------------------------------------------------------
# Summaries, event replay, persistence.
# ---------------------------------------------------------------------------


def record_to_dict(session: Session, record: HypothesisRecord, include_flips: bool = True) -> dict:
    flips: dict = {"flip_factor_to_reject": None, "flip_factor_to_accept": None}
    if (
        include_flips
        and record.decided
        and record.superseded_by is None
        and record.test is not None
        and record.kind != EXPLICIT
    ):
        flips["flip_factor_to_reject"] = data_to_flip(session, record.id, "to_reject")
        flips["flip_factor_to_accept"] = data_to_flip(session, record.id, "to_accept")
    return {
        "id": record.id,
        "description": record.description,
        "kind": record.kind,
        "p_value": record.p_value,
        "support": record.support,
        "budget": record.budget,
        "decision": record.decision,
        "starred": record.starred,
        "superseded_by": record.superseded_by,
        "statistic": record.test.statistic if record.test else None,
        "df": record.test.df if record.test else None,
        "warning": record.warning,
        **flips,
    }


def session_state(session: Session, include_flips: bool = True) -> dict:
    """JSON-able summary: config, current wealth and the full record list."""
    return {
        "id": session.id,
        "alpha": session.config.alpha,
        "eta": session.config.eta,
        "omega": session.config.omega,
        "policy": policy_to_dict(session.config.policy),
        "wealth": session.ledger.wealth,
        "exhausted": session.ledger.exhausted,
        "dataset": session.dataset.name,
        "row_count": session.dataset.row_count,
        "records": [
            record_to_dict(session, record, include_flips)
            for record in session.ordered_records()
        ],
    }


def apply_event(session: Session, event: dict) -> None:
    """Apply one logged event (used when rebuilding from an event log)."""
    kind = event.get("type")
    if kind == "visualization":
        viz = VisualizationSpec.from_dict(event["viz"])
        _apply_visualization(session, viz)
    elif kind == "hypothesis":
        _apply_hypothesis(session, event["spec"])
    elif kind == "override":
        _apply_override(session, event["record"], event["spec"])
    elif kind == "delete":
        _apply_delete(session, event["record"])
    elif kind == "star":
        _apply_star(session, event["record"], event["on"])
    else:
        raise SchemaError(f"unknown event type {kind!r}")
    session.events.append(event)


def rebuild_session(
    dataset: Dataset,
    config: LedgerConfig,
    events: Sequence[dict],
    session_id: Optional[str] = None,
) -> Session:
    """Replay an event log from scratch; reproduces the state exactly."""
    session = Session(dataset, config, session_id)
    for event in events:
        apply_event(session, dict(event))
    return session


def save_session(session: Session, path: Path) -> None:
    """Persist as JSON-lines: one config header line, then one event per line."""
    header = {
        "session": session.id,
        "dataset": session.dataset.name,
        "config": session.config.to_dict(),
    }
    lines = [json.dumps(header)] + [json.dumps(e) for e in session.events]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_session(path: Path, dataset_resolver: Callable[[str], Dataset]) -> Session:
    """Rebuild a persisted session; datasets are resolved by name."""
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    if not lines:
        raise SchemaError(f"empty session file {path}")
    header = json.loads(lines[0])
    dataset = dataset_resolver(header["dataset"])
    config = LedgerConfig.from_dict(header["config"])
    events = [json.loads(line) for line in lines[1:]]
    return rebuild_session(dataset, config, events, session_id=header.get("session"))
