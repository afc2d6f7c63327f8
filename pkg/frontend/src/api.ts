import type {
  ApiErrorBody,
  FeasibleRanges,
  OverlayRequest,
  OverlayResponse,
  SimulateRequest,
  SimulateResponse,
} from "./types.js";

/** Thrown for any non-2xx response; carries the parsed error body. */
export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.message || `request failed with status ${status}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const payload = await resp.json();
  if (!resp.ok) {
    throw new ApiRequestError(resp.status, payload as ApiErrorBody);
  }
  return payload as T;
}

function post<T>(url: string, body: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  getFeasibleRanges(): Promise<FeasibleRanges> {
    return request(`${this.base}/api/v1/feasible-ranges`);
  }

  simulate(body: SimulateRequest): Promise<SimulateResponse> {
    return post(`${this.base}/api/v1/simulate`, body);
  }

  overlay(body: OverlayRequest): Promise<OverlayResponse> {
    return post(`${this.base}/api/v1/overlay`, body);
  }

  uploadDataset(kind: string, name: string, content: string): Promise<{ dataset_id: string }> {
    return post(`${this.base}/api/v1/datasets`, { kind, name, content });
  }
}
