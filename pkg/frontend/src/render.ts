import type { OutcomePayload, SimulateResponse } from "./types.js";

/**
 * Pure projections from server responses to displayable structures. The
 * client performs no simulation math: every number shown comes verbatim
 * from a response field (formatting only).
 */

export const OUTCOME_HEADERS = ["scenario", "peak (mg/dL)", "TIR (%)", "hypo (min)", "utility"];

export interface OutcomeTable {
  headers: string[];
  /** formatted cells, one row per outcome in response order */
  rows: string[][];
  /** untouched payload rows, for field-for-field contract checks */
  numeric: OutcomePayload[];
}

const fmt = (v: number) => (Number.isInteger(v) ? String(v) : v.toFixed(1));

export function outcomeTable(response: SimulateResponse): OutcomeTable {
  return {
    headers: [...OUTCOME_HEADERS],
    rows: response.outcomes.map((o) => [
      o.label,
      fmt(o.peak_mg_dl),
      fmt(o.tir_pct),
      fmt(o.hypo_min),
      fmt(o.utility),
    ]),
    numeric: response.outcomes.map((o) => ({ ...o })),
  };
}

/** Ranking exactly as the server returned it; the client never re-ranks. */
export function rankingList(response: SimulateResponse): string[] {
  return [...response.ranking];
}

export function tableHtml(table: OutcomeTable): string {
  const head = table.headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("");
  const body = table.rows
    .map((row) => `<tr>${row.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
    .join("");
  return `<table class="outcomes"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function rankingHtml(ranking: string[]): string {
  const items = ranking.map((label) => `<li>${escapeHtml(label)}</li>`).join("");
  return `<ol class="ranking">${items}</ol>`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
