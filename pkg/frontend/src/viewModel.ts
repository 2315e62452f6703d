/**
 * Pure projection of server JSON into what the UI renders.
 *
 * No decision logic lives here: every field is a direct mapping of the
 * API payload. Green marks a rejected null (a discovery), red an accepted
 * one; descriptive and untested records stay gray.
 */

import type { PolicyJson, RecordJson, SessionJson } from "./types.js";

export type DecisionColor = "green" | "red" | "gray";
export type EffectBand = "none" | "small" | "medium" | "large";

/** Configurable effect-size cutoffs (small / medium / large). */
export const EFFECT_THRESHOLDS = { small: 0.1, medium: 0.3, large: 0.5 };

export interface RecordView {
  id: number;
  description: string;
  kind: string | null;
  pValue: number | null;
  support: number | null;
  budget: number | null;
  decision: RecordJson["decision"];
  color: DecisionColor;
  starred: boolean;
  supersededBy: number | null;
  warning: string | null;
  flipToReject: number | null;
  flipToAccept: number | null;
  effectSize: number | null;
  effectBand: EffectBand;
}

export interface SessionViewModel {
  id: string;
  alpha: number;
  eta: number;
  wealth: number;
  exhausted: boolean;
  dataset: string;
  rowCount: number;
  policyLabel: string;
  alphaPercent: string;
  wealthPercent: string;
  records: RecordView[];
}

export function decisionColor(decision: RecordJson["decision"]): DecisionColor {
  if (decision === "rejected") return "green";
  if (decision === "accepted") return "red";
  return "gray";
}

export function policyLabel(policy: PolicyJson): string {
  const params = Object.entries(policy)
    .filter(([key, value]) => key !== "name" && value !== null)
    .map(([key, value]) => `${key}=${value}`)
    .join(", ");
  return params ? `${policy.name}(${params})` : policy.name;
}

export function formatPercent(x: number): string {
  const pct = 100 * x;
  const text = pct.toFixed(2).replace(/\.?0+$/, "");
  return `${text}%`;
}

/**
 * Effect size from the test summary: phi = sqrt(chi2 / n) for
 * chi-squared records, Cohen's d ~ 2t / sqrt(df) for t records.
 */
export function effectSize(record: RecordJson): number | null {
  if (record.statistic === null) return null;
  if (record.kind === "chi2_gof" || record.kind === "chi2_homogeneity") {
    if (!record.support) return null;
    return Math.sqrt(record.statistic / record.support);
  }
  if (record.kind === "welch_t_one_sided" || record.kind === "welch_t_two_sided") {
    if (!record.df) return null;
    return (2 * Math.abs(record.statistic)) / Math.sqrt(record.df);
  }
  return null;
}

export function effectBand(
  size: number | null,
  thresholds = EFFECT_THRESHOLDS,
): EffectBand {
  if (size === null || size < thresholds.small) return "none";
  if (size < thresholds.medium) return "small";
  if (size < thresholds.large) return "medium";
  return "large";
}

export function toRecordView(record: RecordJson): RecordView {
  const size = effectSize(record);
  return {
    id: record.id,
    description: record.description,
    kind: record.kind,
    pValue: record.p_value,
    support: record.support,
    budget: record.budget,
    decision: record.decision,
    color: decisionColor(record.decision),
    starred: record.starred,
    supersededBy: record.superseded_by,
    warning: record.warning,
    flipToReject: record.flip_factor_to_reject,
    flipToAccept: record.flip_factor_to_accept,
    effectSize: size,
    effectBand: effectBand(size),
  };
}

export function toViewModel(session: SessionJson): SessionViewModel {
  return {
    id: session.id,
    alpha: session.alpha,
    eta: session.eta,
    wealth: session.wealth,
    exhausted: session.exhausted,
    dataset: session.dataset,
    rowCount: session.row_count,
    policyLabel: policyLabel(session.policy),
    alphaPercent: formatPercent(session.alpha),
    wealthPercent: formatPercent(session.wealth),
    records: session.records.map(toRecordView),
  };
}

/**
 * Flip-cost squares: one square per unit of extra data, the last one a
 * half-square when the fractional part reaches 0.5. Absent factors render
 * nothing.
 */
export function flipSquares(factor: number | null | undefined): {
  full: number;
  half: number;
} {
  if (factor === null || factor === undefined) return { full: 0, half: 0 };
  const total = Math.ceil(factor);
  const half = factor % 1 >= 0.5 ? 1 : 0;
  return { full: total - half, half };
}
