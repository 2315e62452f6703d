/**
 * HTML-string renderers, kept pure so they are testable without a DOM.
 * app.ts owns the actual element updates and event wiring.
 */

import { flipSquares, type RecordView, type SessionViewModel } from "./viewModel.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function formatP(p: number | null): string {
  if (p === null) return "–";
  if (p === 0) return "0";
  return p < 0.001 ? p.toExponential(2) : p.toFixed(4);
}

export function renderSquares(factor: number | null, css: string): string {
  const { full, half } = flipSquares(factor);
  if (full + half === 0) {
    return factor === null ? `<span class="squares none">unreachable</span>` : "";
  }
  const capped = Math.min(full, 24); // keep huge factors readable
  const parts: string[] = [];
  for (let i = 0; i < capped; i++) parts.push(`<span class="square ${css}"></span>`);
  if (full > capped) parts.push(`<span class="squares more">+${full - capped}</span>`);
  if (half) parts.push(`<span class="square ${css} half"></span>`);
  return `<span class="squares" title="${factor?.toFixed(2)}x data">${parts.join("")}</span>`;
}

export function renderGauge(vm: SessionViewModel): string {
  const ratio = vm.alpha > 0 ? Math.max(0, Math.min(1, vm.wealth / vm.alpha)) : 0;
  const status = vm.exhausted
    ? `<span class="exhausted">wealth exhausted — stop exploring</span>`
    : "";
  return `
    <div class="gauge-label">FDR budget ${vm.alphaPercent} — remaining wealth ${vm.wealthPercent}</div>
    <div class="gauge-bar"><div class="gauge-fill" style="width:${(ratio * 100).toFixed(1)}%"></div></div>
    <div class="gauge-policy">policy: ${escapeHtml(vm.policyLabel)} · dataset: ${escapeHtml(vm.dataset)} (${vm.rowCount} rows)</div>
    ${status}`;
}

export function renderRecord(record: RecordView): string {
  const superseded = record.supersededBy !== null;
  const classes = ["record", record.color, superseded ? "superseded" : ""]
    .filter(Boolean)
    .join(" ");
  const star = record.starred ? "★" : "☆";
  const starButton =
    record.decision === "rejected" || record.decision === "accepted"
      ? `<button class="star" data-id="${record.id}" data-on="${!record.starred}">${star}</button>`
      : "";
  const effect =
    record.effectSize === null
      ? ""
      : `<span class="effect ${record.effectBand}" title="effect size ${record.effectSize.toFixed(3)}">${record.effectBand}</span>`;
  const flips =
    record.decision === "accepted"
      ? `<div class="fliprow">to reject: ${renderSquares(record.flipToReject, "red")}</div>`
      : record.decision === "rejected"
        ? `<div class="fliprow">to accept: ${renderSquares(record.flipToAccept, "blue")}</div>`
        : "";
  const warning = record.warning
    ? `<div class="record-warning">${escapeHtml(record.warning)}</div>`
    : "";
  const supersededNote = superseded
    ? `<div class="superseded-note">superseded by #${record.supersededBy}</div>`
    : "";
  return `
  <li class="${classes}" data-id="${record.id}">
    <div class="record-head">
      <span class="badge ${record.color}">${record.decision}</span>
      <span class="pvalue">p = ${formatP(record.pValue)}</span>
      <span class="budget">${record.budget === null ? "" : `α_j = ${record.budget.toExponential(2)}`}</span>
      ${effect}
      ${starButton}
      <button class="override" data-id="${record.id}">edit</button>
      <button class="delete" data-id="${record.id}">delete</button>
    </div>
    <div class="record-desc">${escapeHtml(record.description)}</div>
    ${flips}${warning}${supersededNote}
  </li>`;
}

export function renderRecordList(vm: SessionViewModel): string {
  if (vm.records.length === 0) {
    return `<li class="record empty">no hypotheses tracked yet</li>`;
  }
  return vm.records.map(renderRecord).join("\n");
}

export function renderBanner(message: string | null): string {
  return message ? `<div class="banner-error">${escapeHtml(message)}</div>` : "";
}
