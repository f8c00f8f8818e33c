import type {
  DepthEdits,
  JobResponse,
  SimReport,
  StatusResponse,
  SubmitResponse,
} from "./types";

/** Minimal slice of fetch the client needs; tests inject a fake. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function body(resp: { status: number; json(): Promise<unknown> }): Promise<unknown> {
  let parsed: unknown;
  try {
    parsed = await resp.json();
  } catch {
    parsed = null;
  }
  if (resp.status >= 400) {
    const msg =
      parsed && typeof parsed === "object" && "error" in parsed
        ? String((parsed as { error: unknown }).error)
        : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, msg);
  }
  return parsed;
}

/** Typed wrapper over the server's five JSON routes. */
export class Api {
  constructor(private readonly fetchFn: FetchLike) {}

  async getStatus(): Promise<StatusResponse> {
    return (await body(await this.fetchFn("/status"))) as StatusResponse;
  }

  async getReport(): Promise<SimReport> {
    return (await body(await this.fetchFn("/report"))) as SimReport;
  }

  async submitDepths(edits: DepthEdits): Promise<SubmitResponse> {
    const resp = await this.fetchFn("/fifos/depths", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ depths: edits }),
    });
    return (await body(resp)) as SubmitResponse;
  }

  async getJob(jobId: number): Promise<JobResponse> {
    return (await body(await this.fetchFn(`/jobs/${jobId}`))) as JobResponse;
  }
}
