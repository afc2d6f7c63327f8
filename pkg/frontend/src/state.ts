import type { ApiClient } from "./api.js";
import { ApiRequestError } from "./api.js";
import type {
  FeasibleRanges,
  ScenarioDraft,
  ServerViolation,
  SimulateRequest,
  SimulateResponse,
} from "./types.js";
import { validateDrafts, type DraftViolation } from "./validation.js";

export type SubmitResult =
  | { kind: "blocked"; violations: DraftViolation[] }
  | { kind: "ok"; response: SimulateResponse }
  | { kind: "stale" }
  | { kind: "rejected"; status: number; violations: ServerViolation[]; message: string }
  | { kind: "failed"; message: string };

/**
 * Scenario-building session. Client-side validation gates every submit (an
 * invalid draft list never produces a network call) and responses are
 * sequence-numbered so an out-of-order reply can never overwrite a newer
 * one.
 */
export class SessionState {
  drafts: ScenarioDraft[] = [];
  lastResponse: SimulateResponse | null = null;
  private sequence = 0;

  constructor(
    private readonly api: Pick<ApiClient, "simulate">,
    readonly ranges: FeasibleRanges,
  ) {}

  get inFlight(): boolean {
    return this.pending > 0;
  }
  private pending = 0;

  async submit(
    drafts: ScenarioDraft[],
    responseParams?: Record<string, number>,
  ): Promise<SubmitResult> {
    const violations = validateDrafts(drafts, this.ranges);
    if (violations.length > 0) {
      return { kind: "blocked", violations };
    }
    const mySeq = ++this.sequence;
    const body: SimulateRequest = { scenarios: drafts };
    if (responseParams && Object.keys(responseParams).length > 0) {
      body.response_params = responseParams;
    }
    this.pending += 1;
    try {
      const response = await this.api.simulate(body);
      if (mySeq !== this.sequence) {
        return { kind: "stale" };
      }
      this.lastResponse = response;
      return { kind: "ok", response };
    } catch (err) {
      if (mySeq !== this.sequence) {
        return { kind: "stale" };
      }
      if (err instanceof ApiRequestError && err.body.code === "validation_failed") {
        return {
          kind: "rejected",
          status: err.status,
          violations: (err.body.details as ServerViolation[]) ?? [],
          message: err.body.message,
        };
      }
      return { kind: "failed", message: err instanceof Error ? err.message : String(err) };
    } finally {
      this.pending -= 1;
    }
  }
}
