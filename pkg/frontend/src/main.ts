import { ApiClient, ApiRequestError } from "./api.js";
import { legendHtml, lineChartSvg } from "./chart.js";
import { outcomeTable, rankingHtml, tableHtml, escapeHtml } from "./render.js";
import { SessionState } from "./state.js";
import type { FeasibleRanges, ScenarioDraft } from "./types.js";

const api = new ApiClient("");

const DEFAULT_DRAFTS: ScenarioDraft[] = [
  { label: "baseline", carbs_g: 60, activity_min: 0, activity_start_min: 0, duration_min: 120, seed: 1 },
  { label: "reduced-carb", carbs_g: 30, activity_min: 0, activity_start_min: 0, duration_min: 120, seed: 2 },
  { label: "baseline-plus-walking", carbs_g: 60, activity_min: 15, activity_start_min: 0, duration_min: 120, seed: 3 },
];

const SLIDER_SPEC: { field: "carbs_g" | "activity_min" | "activity_start_min"; title: string }[] = [
  { field: "carbs_g", title: "carbohydrates (g)" },
  { field: "activity_min", title: "activity (min)" },
  { field: "activity_start_min", title: "activity start (min)" },
];

let state: SessionState;
let overlayDatasetId: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function draftRowHtml(i: number, draft: ScenarioDraft, ranges: FeasibleRanges): string {
  const sliders = SLIDER_SPEC.map(({ field, title }) => {
    const [lo, hi] = ranges[field] ?? [0, 100];
    const value = draft[field];
    return `
      <label class="slider">
        <span>${title}: <output id="out-${field}-${i}">${value}</output></span>
        <input type="range" id="in-${field}-${i}" min="${lo}" max="${hi}" step="1" value="${value}"
               oninput="document.getElementById('out-${field}-${i}').value = this.value">
        <span class="violation" id="violation-${field}-${i}"></span>
      </label>`;
  }).join("");
  return `
    <fieldset class="draft" id="draft-${i}">
      <legend><input type="text" id="in-label-${i}" value="${escapeHtml(draft.label)}" size="22">
        <span class="violation" id="violation-label-${i}"></span></legend>
      ${sliders}
      <label class="seed">seed <input type="number" id="in-seed-${i}" value="${draft.seed}" step="1"
        ><span class="violation" id="violation-seed-${i}"></span></label>
    </fieldset>`;
}

function readDrafts(): ScenarioDraft[] {
  const drafts: ScenarioDraft[] = [];
  for (let i = 0; ; i++) {
    const label = document.getElementById(`in-label-${i}`) as HTMLInputElement | null;
    if (!label) break;
    drafts.push({
      label: label.value,
      carbs_g: Number((el<HTMLInputElement>(`in-carbs_g-${i}`)).value),
      activity_min: Number((el<HTMLInputElement>(`in-activity_min-${i}`)).value),
      activity_start_min: Number((el<HTMLInputElement>(`in-activity_start_min-${i}`)).value),
      duration_min: 120,
      seed: Number((el<HTMLInputElement>(`in-seed-${i}`)).value),
    });
  }
  return drafts;
}

function clearViolations(): void {
  document.querySelectorAll(".violation").forEach((n) => (n.textContent = ""));
}

function showViolation(draftIndex: number, field: string, message: string): void {
  const slot = document.getElementById(`violation-${field}-${draftIndex}`);
  if (slot) slot.textContent = message;
  else banner(`scenario ${draftIndex + 1}: ${message}`);
}

function banner(message: string): void {
  const zone = el<HTMLDivElement>("banners");
  const node = document.createElement("div");
  node.className = "banner";
  node.innerHTML = `<span>${escapeHtml(message)}</span><button>dismiss</button>`;
  node.querySelector("button")!.addEventListener("click", () => node.remove());
  zone.appendChild(node);
}

function renderResponse(): void {
  const response = state.lastResponse;
  if (!response) return;
  const band: [number, number] | undefined =
    typeof response.params.tir_low === "number" && typeof response.params.tir_high === "number"
      ? [response.params.tir_low, response.params.tir_high]
      : undefined;
  el<HTMLDivElement>("chart").innerHTML =
    lineChartSvg(response.trajectories, { band }) + legendHtml(response.trajectories);
  el<HTMLDivElement>("outcomes").innerHTML = tableHtml(outcomeTable(response));
  el<HTMLDivElement>("ranking").innerHTML =
    "<h3>ranked interventions</h3>" + rankingHtml([...response.ranking]);
}

async function onSimulate(): Promise<void> {
  clearViolations();
  const drafts = readDrafts();
  const params: Record<string, number> = {};
  const baseline = Number(el<HTMLInputElement>("in-baseline").value);
  if (Number.isFinite(baseline)) params.baseline_glucose = baseline;
  if (el<HTMLInputElement>("in-noise").checked) params.noise_sigma = 5.0;

  const button = el<HTMLButtonElement>("simulate");
  button.disabled = true;
  try {
    const result = await state.submit(drafts, params);
    if (result.kind === "blocked") {
      for (const v of result.violations) showViolation(v.draftIndex, v.field, v.message);
    } else if (result.kind === "rejected") {
      for (const v of result.violations) {
        const idx = drafts.findIndex((d) => d.label === v.scenario);
        showViolation(idx, v.variable, `server: value ${v.value} outside [${v.bound[0]}, ${v.bound[1]}]`);
      }
    } else if (result.kind === "failed") {
      banner(result.message);
    } else if (result.kind === "ok") {
      renderResponse();
    }
    // stale results are dropped silently; a newer request owns the screen
  } finally {
    button.disabled = false;
  }
}

async function onUploadCgm(files: FileList | null): Promise<void> {
  if (!files || files.length === 0) return;
  const file = files[0];
  try {
    const text = await file.text();
    const kind = file.name.endsWith(".xml") ? "cgm-xml" : "cgm-csv";
    const created = await api.uploadDataset(kind, file.name, text);
    overlayDatasetId = created.dataset_id;
    el<HTMLSpanElement>("overlay-dataset").textContent = `${file.name} (${created.dataset_id})`;
  } catch (err) {
    banner(err instanceof Error ? err.message : String(err));
  }
}

async function onOverlay(): Promise<void> {
  clearViolations();
  if (!overlayDatasetId) {
    banner("upload a CGM window first");
    return;
  }
  const anchor = el<HTMLInputElement>("in-anchor").value.trim();
  if (!anchor) {
    banner("enter an anchor timestamp (ISO-8601, inside the window)");
    return;
  }
  try {
    const response = await api.overlay({
      cgm_dataset_id: overlayDatasetId,
      anchor,
      scenarios: readDrafts(),
    });
    el<HTMLDivElement>("chart").innerHTML =
      lineChartSvg(response.trajectories) + legendHtml(response.trajectories);
    el<HTMLDivElement>("outcomes").innerHTML =
      `<p>counterfactual overlay on ${escapeHtml(response.patient_id)} ` +
      `(window start ${escapeHtml(response.window_start)}); the baseline line is the observed data</p>`;
    el<HTMLDivElement>("ranking").innerHTML = "";
  } catch (err) {
    if (err instanceof ApiRequestError) banner(`${err.body.code}: ${err.body.message}`);
    else banner(err instanceof Error ? err.message : String(err));
  }
}

async function boot(): Promise<void> {
  let ranges: FeasibleRanges;
  try {
    ranges = await api.getFeasibleRanges();
  } catch (err) {
    banner(`could not load feasible ranges: ${err instanceof Error ? err.message : err}`);
    ranges = { carbs_g: [0, 200], activity_min: [0, 60], activity_start_min: [0, 120] };
  }
  state = new SessionState(api, ranges);
  el<HTMLDivElement>("drafts").innerHTML = DEFAULT_DRAFTS.map((d, i) =>
    draftRowHtml(i, d, ranges),
  ).join("");
  el<HTMLButtonElement>("simulate").addEventListener("click", () => void onSimulate());
  el<HTMLButtonElement>("overlay-run").addEventListener("click", () => void onOverlay());
  el<HTMLInputElement>("in-cgm-file").addEventListener("change", (e) =>
    void onUploadCgm((e.target as HTMLInputElement).files),
  );
}

document.addEventListener("DOMContentLoaded", () => void boot());
