import { describe, expect, it } from "vitest";

import { validateDraft, validateDrafts } from "../src/validation.js";
import type { FeasibleRanges, ScenarioDraft } from "../src/types.js";

import rangesFixture from "./fixtures/feasible_ranges.json";

const ranges = rangesFixture as unknown as FeasibleRanges;

const good: ScenarioDraft = {
  label: "baseline",
  carbs_g: 60,
  activity_min: 0,
  activity_start_min: 0,
  duration_min: 120,
  seed: 1,
};

describe("draft validation against server-published ranges", () => {
  it("accepts the published scenario triple", () => {
    const drafts = [
      good,
      { ...good, label: "reduced-carb", carbs_g: 30 },
      { ...good, label: "baseline-plus-walking", activity_min: 15 },
    ];
    expect(validateDrafts(drafts, ranges)).toEqual([]);
  });

  it("flags out-of-range carbohydrates with the offending field", () => {
    const violations = validateDraft({ ...good, carbs_g: 500 }, 0, ranges);
    expect(violations).toHaveLength(1);
    expect(violations[0]).toMatchObject({ draftIndex: 0, field: "carbs_g" });
  });

  it("flags negative values", () => {
    const violations = validateDraft({ ...good, carbs_g: -1 }, 2, ranges);
    expect(violations[0]).toMatchObject({ draftIndex: 2, field: "carbs_g" });
  });

  it("flags empty labels, duplicate labels, and bad seeds", () => {
    expect(validateDraft({ ...good, label: " " }, 0, ranges)[0].field).toBe("label");
    expect(validateDraft({ ...good, seed: 1.5 }, 0, ranges)[0].field).toBe("seed");
    const dupes = validateDrafts([good, { ...good }], ranges);
    expect(dupes.some((v) => v.field === "label" && v.draftIndex === 1)).toBe(true);
  });

  it("rejects an empty scenario list", () => {
    expect(validateDrafts([], ranges)).toHaveLength(1);
  });

  it("slider bounds mirror the served ranges", () => {
    expect(ranges.carbs_g).toEqual([0, 200]);
    expect(ranges.activity_min).toEqual([0, 60]);
    expect(ranges.activity_start_min).toEqual([0, 120]);
  });
});
