import type { FeasibleRanges, ScenarioDraft } from "./types.js";

/** One client-side rule break, addressable to a specific draft field. */
export interface DraftViolation {
  draftIndex: number;
  field: string;
  message: string;
}

const RANGE_FIELDS = ["carbs_g", "activity_min", "activity_start_min"] as const;

/**
 * Client-side admissibility check. Mirrors the server's feasible ranges so
 * out-of-range drafts never reach the network; the server remains the
 * authority for anything subtler.
 */
export function validateDraft(
  draft: ScenarioDraft,
  index: number,
  ranges: FeasibleRanges,
): DraftViolation[] {
  const out: DraftViolation[] = [];
  if (!draft.label.trim()) {
    out.push({ draftIndex: index, field: "label", message: "label must not be empty" });
  }
  for (const field of RANGE_FIELDS) {
    const value = draft[field];
    if (!Number.isFinite(value)) {
      out.push({ draftIndex: index, field, message: `${field} must be a number` });
      continue;
    }
    const bounds = ranges[field];
    if (!bounds) continue;
    const [lo, hi] = bounds;
    if (value < lo || value > hi) {
      out.push({
        draftIndex: index,
        field,
        message: `${field} must be within [${lo}, ${hi}]`,
      });
    }
  }
  if (!(draft.duration_min > 0)) {
    out.push({ draftIndex: index, field: "duration_min", message: "duration must be positive" });
  }
  if (!Number.isInteger(draft.seed)) {
    out.push({ draftIndex: index, field: "seed", message: "seed must be an integer" });
  }
  return out;
}

export function validateDrafts(
  drafts: ScenarioDraft[],
  ranges: FeasibleRanges,
): DraftViolation[] {
  if (drafts.length === 0) {
    return [{ draftIndex: -1, field: "", message: "add at least one scenario" }];
  }
  const seen = new Set<string>();
  const out = drafts.flatMap((d, i) => validateDraft(d, i, ranges));
  drafts.forEach((d, i) => {
    const key = d.label.trim();
    if (key && seen.has(key)) {
      out.push({ draftIndex: i, field: "label", message: `duplicate label "${key}"` });
    }
    seen.add(key);
  });
  return out;
}
