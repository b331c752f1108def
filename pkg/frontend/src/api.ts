/**
 * Typed client for the fairsteer session API.
 *
 * Long operations (train, iterate) return a job handle; `waitForJob` polls
 * until the job reaches a terminal state. Errors follow the service's
 * `{"error": code, "detail": text}` envelope and surface as `ApiError` so
 * callers can show the engine's message verbatim.
 */

import type {
  CanonicalTree,
  EditAction,
  JobHandle,
  JobPayload,
  LogReport,
  MetricsPayload,
  NodeSamplesPayload,
  SimulateRequest,
  TrainRequest,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }

  /** True for "another job is already running on this session". */
  get busy(): boolean {
    return this.status === 409;
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export interface WaitOptions {
  intervalMs?: number;
  onProgress?: (job: JobPayload) => void;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    contentType = "application/json",
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": contentType };
      init.body =
        contentType === "application/json" ? JSON.stringify(body) : (body as BodyInit);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let code = `http_${response.status}`;
      let detail = response.statusText || "request failed";
      try {
        const parsed = (await response.json()) as {
          error?: string;
          detail?: unknown;
        };
        if (parsed.error) code = parsed.error;
        if (parsed.detail !== undefined) {
          detail =
            typeof parsed.detail === "string"
              ? parsed.detail
              : JSON.stringify(parsed.detail);
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions");
  }

  uploadLog(sessionId: string, xes: string | Blob): Promise<LogReport> {
    return this.request(
      "POST",
      `/sessions/${sessionId}/log`,
      xes,
      "application/xml",
    );
  }

  simulate(sessionId: string, body: SimulateRequest = {}): Promise<LogReport> {
    return this.request("POST", `/sessions/${sessionId}/simulate`, body);
  }

  train(sessionId: string, body: TrainRequest = {}): Promise<JobHandle> {
    return this.request("POST", `/sessions/${sessionId}/train`, body);
  }

  iterate(
    sessionId: string,
    edits: EditAction[],
    options: { epochs?: number; changed_only?: boolean } = {},
  ): Promise<JobHandle> {
    return this.request("POST", `/sessions/${sessionId}/iterate`, {
      edits,
      ...options,
    });
  }

  getJob(jobId: string): Promise<JobPayload> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  /** Poll a job until done/failed; resolves with the terminal payload. */
  async waitForJob(jobId: string, options: WaitOptions = {}): Promise<JobPayload> {
    const interval = options.intervalMs ?? 700;
    for (;;) {
      const job = await this.getJob(jobId);
      options.onProgress?.(job);
      if (job.status === "done" || job.status === "failed") return job;
      await sleep(interval);
    }
  }

  getTree(sessionId: string): Promise<CanonicalTree> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }

  getNodeSamples(
    sessionId: string,
    nodeId: number,
    limit = 10,
  ): Promise<NodeSamplesPayload> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/tree/node/${nodeId}/samples?limit=${limit}`,
    );
  }

  getMetrics(sessionId: string): Promise<MetricsPayload> {
    return this.request("GET", `/sessions/${sessionId}/metrics`);
  }

  exportSession(sessionId: string): Promise<object> {
    return this.request("GET", `/sessions/${sessionId}/export`);
  }
}
