/** Payload shapes mirroring the server's published /api/v1 schemas. */

export interface ScenarioDraft {
  label: string;
  carbs_g: number;
  activity_min: number;
  activity_start_min: number;
  duration_min: number;
  seed: number;
}

/** Variable name -> [lo, hi], fetched from /api/v1/feasible-ranges at load. */
export type FeasibleRanges = Record<string, [number, number]>;

export interface TrajectoryPayload {
  label: string;
  t_min: number[];
  glucose: number[];
}

export interface OutcomePayload {
  label: string;
  peak_mg_dl: number;
  tir_pct: number;
  hypo_min: number;
  utility: number;
}

export interface SimulateResponse {
  params: Record<string, number>;
  trajectories: TrajectoryPayload[];
  outcomes: OutcomePayload[];
  ranking: string[];
}

export interface OverlayResponse {
  patient_id: string;
  window_start: string;
  params: Record<string, number>;
  trajectories: TrajectoryPayload[];
}

export interface ServerViolation {
  scenario?: string;
  variable: string;
  value: number;
  bound: [number, number];
}

export interface ApiErrorBody {
  code: "bad_request" | "not_found" | "validation_failed" | "internal";
  message: string;
  details?: unknown;
}

export interface SimulateRequest {
  scenarios: ScenarioDraft[];
  response_params?: Record<string, number>;
  weights?: Record<string, number>;
}

export interface OverlayRequest {
  cgm_dataset_id: string;
  anchor: string;
  scenarios: ScenarioDraft[];
  response_params?: Record<string, number>;
}
