/**
 * Contract tests against recorded server fixtures: what the client renders
 * must equal the response payload field for field; the client never
 * re-ranks, re-computes, or rounds into its data model.
 */
import { describe, expect, it } from "vitest";

import { chartModel, lineChartSvg } from "../src/chart.js";
import { outcomeTable, rankingHtml, rankingList, tableHtml } from "../src/render.js";
import type { OverlayResponse, SimulateResponse } from "../src/types.js";

import overlayFixture from "./fixtures/overlay.json";
import simulateFixture from "./fixtures/simulate_tableiv.json";

const simulate = simulateFixture as unknown as SimulateResponse;
const overlay = overlayFixture as unknown as OverlayResponse;

describe("simulate contract (recorded outcome-triple fixture)", () => {
  it("ranking is rendered exactly as returned", () => {
    expect(rankingList(simulate)).toEqual(simulate.ranking);
    expect(simulate.ranking).toEqual(["reduced-carb", "baseline-plus-walking", "baseline"]);
    const html = rankingHtml(rankingList(simulate));
    const order = [...html.matchAll(/<li>([^<]+)<\/li>/g)].map((m) => m[1]);
    expect(order).toEqual(simulate.ranking);
  });

  it("outcome table equals the fixture payload field for field", () => {
    const table = outcomeTable(simulate);
    expect(table.numeric).toEqual(simulate.outcomes);
    expect(table.rows.length).toBe(simulate.outcomes.length);
    simulate.outcomes.forEach((o, i) => {
      expect(table.rows[i][0]).toBe(o.label);
    });
    const html = tableHtml(table);
    for (const o of simulate.outcomes) {
      expect(html).toContain(`<td>${o.label}</td>`);
    }
  });

  it("chart draws one line per scenario over the response grid", () => {
    const svg = lineChartSvg(simulate.trajectories, { band: [70, 140] });
    const lines = [...svg.matchAll(/<polyline data-label="([^"]+)"/g)].map((m) => m[1]);
    expect(lines).toEqual(simulate.trajectories.map((t) => t.label));
    expect(svg).toContain('class="tir-band"');
    const model = chartModel(simulate.trajectories, 720, 360);
    expect(model.xMin).toBe(0);
    expect(model.xMax).toBe(120);
    for (const [series, drawn] of simulate.trajectories.map((t, i) => [t, model.points[i]] as const)) {
      expect(drawn.path.length).toBe(series.t_min.length);
    }
  });
});

describe("overlay contract (recorded fixture)", () => {
  it("baseline counterfactual coincides with the observed window", () => {
    const byLabel = new Map(overlay.trajectories.map((t) => [t.label, t]));
    const baseline = byLabel.get("baseline")!;
    // the recorded window was 110,115,...,165: served verbatim
    expect(baseline.glucose).toEqual(
      Array.from({ length: 12 }, (_, i) => 110 + 5 * i),
    );
  });

  it("reduced-carb overlay sits at or below observed within the window", () => {
    const byLabel = new Map(overlay.trajectories.map((t) => [t.label, t]));
    const baseline = byLabel.get("baseline")!;
    const reduced = byLabel.get("reduced-carb")!;
    reduced.glucose.forEach((g, i) => expect(g).toBeLessThanOrEqual(baseline.glucose[i] + 1e-9));
  });
});
