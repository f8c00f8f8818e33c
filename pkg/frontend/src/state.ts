import { Api, ApiError } from "./api";
import { parseDepthInput } from "./fifos";
import type { SimReport, StatusResponse } from "./types";

export type Phase = "booting" | "ready" | "failed";

const POLL_MS = 1000;

function defaultSleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/**
 * Client state: boots against /status, holds the current report, and turns
 * depth edits into server jobs. Every number displayed comes out of a
 * server response stored here. Rapid edits ride a single job: the server
 * coalesces submissions while one is pending (same job id back), and this
 * store never runs more than one poll loop.
 */
export class Store {
  phase: Phase = "booting";
  status: StatusResponse | null = null;
  report: SimReport | null = null;
  bootError: string | null = null;
  jobError: string | null = null;
  readonly dirty = new Set<number>();
  readonly fieldErrors = new Map<number, string>();

  /** Counters the contract tests assert on. */
  readonly metrics = { posts: 0, jobsSeen: new Set<number>(), pollLoops: 0 };

  private latestJob: number | null = null;
  private pollingJob: number | null = null;
  private pollPromise: Promise<void> | null = null;

  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: Api,
    private readonly opts: { pollMs?: number; sleep?: (ms: number) => Promise<void> } = {},
  ) {}

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  private sleep(): Promise<void> {
    return (this.opts.sleep ?? defaultSleep)(this.opts.pollMs ?? POLL_MS);
  }

  /** Poll /status until the pipeline finishes, then load the report. */
  async boot(): Promise<void> {
    for (;;) {
      try {
        this.status = await this.api.getStatus();
      } catch (err) {
        this.bootError = err instanceof Error ? err.message : String(err);
        this.phase = "failed";
        this.notify();
        return;
      }
      this.notify();
      if (this.status.stage === "error") {
        this.bootError = this.status.error ?? "pipeline failed";
        this.phase = "failed";
        this.notify();
        return;
      }
      if (this.status.stage === "done") break;
      await this.sleep();
    }
    this.report = await this.api.getReport();
    this.phase = "ready";
    this.notify();
  }

  /**
   * Commit one depth field. Parse/validation problems and server 400/404s
   * land in fieldErrors for inline display; an accepted edit marks the row
   * dirty until the job that carries it completes.
   */
  async editDepth(fifoId: number, raw: string): Promise<void> {
    let depth: number | null;
    try {
      depth = parseDepthInput(raw);
    } catch (err) {
      this.fieldErrors.set(fifoId, (err as Error).message);
      this.notify();
      return;
    }
    let jobId: number;
    try {
      this.metrics.posts += 1;
      const resp = await this.api.submitDepths({ [String(fifoId)]: depth });
      jobId = resp.job;
    } catch (err) {
      const msg = err instanceof ApiError ? err.message : String(err);
      this.fieldErrors.set(fifoId, msg);
      this.notify();
      return;
    }
    this.fieldErrors.delete(fifoId);
    this.dirty.add(fifoId);
    this.metrics.jobsSeen.add(jobId);
    this.latestJob = jobId;
    this.notify();
    if (this.pollingJob === null) {
      const p = this.pollUntilSettled(jobId).finally(() => {
        if (this.pollPromise === p) this.pollPromise = null;
      });
      this.pollPromise = p;
    }
    // else: the running loop will chase latestJob when its job finishes
  }

  /** Resolves once no recalculation job is in flight. */
  async idle(): Promise<void> {
    while (this.pollPromise) {
      await this.pollPromise;
    }
  }

  private async pollUntilSettled(jobId: number): Promise<void> {
    this.metrics.pollLoops += 1;
    this.pollingJob = jobId;
    try {
      for (;;) {
        const job = await this.api.getJob(jobId);
        if (job.state === "done") {
          if (job.report) this.report = job.report;
          this.jobError = null;
        } else if (job.state === "error") {
          this.jobError = job.error ?? "recalculation failed";
        } else {
          await this.sleep();
          continue;
        }
        if (this.latestJob !== null && this.latestJob !== jobId) {
          jobId = this.latestJob; // a newer edit opened another job
          this.pollingJob = jobId;
          this.notify();
          continue;
        }
        this.dirty.clear();
        this.notify();
        return;
      }
    } finally {
      this.pollingJob = null;
    }
  }
}
