/** Typed client for the careflow HTTP API.

Concurrent identical requests are deduplicated per (method, path, body):
the second caller awaits the first caller's in-flight promise instead of
issuing another request. Error responses become ApiError with the server's
message, field hint, and error id; a network-level failure surfaces as
status 0 so the caller can offer a retry.
*/

import type {
  BandType,
  DailySummary,
  ErrorBody,
  FitArrivalsResponse,
  FitLosResponse,
  ReportResponse,
  RunRecord,
  ScenarioEntry,
  SubmitRunResponse,
  SweepResponse,
  ValidateResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly field?: string;
  readonly errorId?: string;

  constructor(status: number, message: string, field?: string, errorId?: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.field = field;
    this.errorId = errorId;
  }

  /** True when the request never reached the server; worth a retry button. */
  get isNetwork(): boolean {
    return this.status === 0;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

interface Exchange<T> {
  raw: string;
  data: T;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly inflight = new Map<string, Promise<Exchange<unknown>>>();

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  /** Number of requests currently on the wire (after dedup). */
  get inflightCount(): number {
    return this.inflight.size;
  }

  private exchange<T>(method: string, path: string, body?: unknown): Promise<Exchange<T>> {
    const payload = body === undefined ? undefined : JSON.stringify(body);
    const key = `${method} ${path} ${payload ?? ""}`;
    const pending = this.inflight.get(key);
    if (pending) {
      return pending as Promise<Exchange<T>>;
    }
    const work = this.send<T>(method, path, payload).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, work as Promise<Exchange<unknown>>);
    return work;
  }

  private async send<T>(method: string, path: string, payload?: string): Promise<Exchange<T>> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: payload === undefined ? undefined : { "content-type": "application/json" },
        body: payload,
      });
    } catch (cause) {
      throw new ApiError(0, `network failure: ${(cause as Error).message}`);
    }
    const raw = await response.text();
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      let field: string | undefined;
      let errorId: string | undefined;
      try {
        const parsed = JSON.parse(raw) as ErrorBody;
        message = parsed.error.message;
        field = parsed.error.field;
        errorId = parsed.error.id;
      } catch {
        // non-JSON error body; keep the status-line message
      }
      throw new ApiError(response.status, message, field, errorId);
    }
    try {
      return { raw, data: JSON.parse(raw) as T };
    } catch {
      throw new ApiError(response.status, "server returned invalid JSON");
    }
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await this.exchange<{ status: string; version: string }>("GET", "/api/health")).data;
  }

  async fitLos(csv: string, tolerance?: number): Promise<FitLosResponse> {
    const body: Record<string, unknown> = { csv };
    if (tolerance !== undefined) body.tolerance = tolerance;
    return (await this.exchange<FitLosResponse>("POST", "/api/fit-los", body)).data;
  }

  async fitArrivals(counts: number[], family?: string): Promise<FitArrivalsResponse> {
    const body: Record<string, unknown> = { counts };
    if (family !== undefined) body.family = family;
    return (await this.exchange<FitArrivalsResponse>("POST", "/api/fit-arrivals", body)).data;
  }

  async submitRun(config: unknown): Promise<SubmitRunResponse> {
    return (await this.exchange<SubmitRunResponse>("POST", "/api/runs", config)).data;
  }

  async listRuns(): Promise<RunRecord[]> {
    return (await this.exchange<{ runs: RunRecord[] }>("GET", "/api/runs")).data.runs;
  }

  async getRun(runId: string): Promise<RunRecord> {
    return (await this.exchange<RunRecord>("GET", `/api/runs/${encodeURIComponent(runId)}`)).data;
  }

  async getDaily(runId: string, band: BandType, alpha?: number): Promise<DailySummary> {
    const query = new URLSearchParams({ band });
    if (alpha !== undefined) query.set("alpha", String(alpha));
    return (
      await this.exchange<DailySummary>(
        "GET",
        `/api/runs/${encodeURIComponent(runId)}/daily?${query}`,
      )
    ).data;
  }

  /** The raw body is kept verbatim: the evaluation table must show exactly
  what the report endpoint returned, so its source of truth is the bytes. */
  async getReport(
    runId: string,
    strategies: string,
    cost?: string,
  ): Promise<{ raw: string; data: ReportResponse }> {
    const query = new URLSearchParams({ strategies });
    if (cost !== undefined && cost !== "") query.set("cost", cost);
    return this.exchange<ReportResponse>(
      "GET",
      `/api/runs/${encodeURIComponent(runId)}/report?${query}`,
    );
  }

  async sweep(args: {
    run_id: string;
    caregiver_type: string;
    k_min?: number;
    k_max?: number;
    cost?: unknown;
  }): Promise<SweepResponse> {
    return (await this.exchange<SweepResponse>("POST", "/api/sweep", args)).data;
  }

  async validateRun(runId: string, csv: string): Promise<ValidateResponse> {
    return (
      await this.exchange<ValidateResponse>(
        "POST",
        `/api/runs/${encodeURIComponent(runId)}/validate`,
        { csv },
      )
    ).data;
  }

  async saveScenario(payload: unknown): Promise<{ saved: ScenarioEntry }> {
    return (await this.exchange<{ saved: ScenarioEntry }>("POST", "/api/scenarios", payload)).data;
  }

  async listScenarios(): Promise<ScenarioEntry[]> {
    return (await this.exchange<{ scenarios: ScenarioEntry[] }>("GET", "/api/scenarios")).data
      .scenarios;
  }
}
