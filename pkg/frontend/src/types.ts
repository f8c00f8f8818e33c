/** Wire types for the report server. Shapes mirror the JSON it actually
 * sends; the contract tests hold them against recorded responses. */

export interface LatencyNode {
  path: string;
  function: string;
  start_cycle: number | null;
  end_cycle: number | null;
  latency: number | null;
  min_latency: number;
  children: LatencyNode[];
}

export interface FifoReportRow {
  id: number;
  name: string;
  depth: number | null;
  observed: number;
  optimal: number;
  writes: number;
  reads: number;
}

export interface DeadlockRow {
  call: string;
  function: string;
  kind: string;
  resource: number;
  resource_name: string;
  waits_for?: string;
  stage?: number;
  cycle?: number;
}

export interface DeadlockInfo {
  blocked: DeadlockRow[];
  wait_for: Record<string, string[]>;
  cycle: DeadlockRow[];
}

export interface SimReport {
  format_version: number;
  top: string;
  total_latency: number | null;
  min_total_latency: number;
  deadlock: DeadlockInfo | null;
  tree: LatencyNode;
  fifos: FifoReportRow[];
  axi_ports: unknown[];
}

export interface StatusResponse {
  stage: string; // loading | executing | parsing | simulating | done | error
  timings: Record<string, number>;
  error: string | null;
  total_latency?: number | null;
}

export interface SubmitResponse {
  job: number;
  coalesced: boolean;
}

export interface JobResponse {
  id: number;
  state: string; // pending | running | done | error
  timings: Record<string, number>;
  report?: SimReport;
  error?: string;
}

/** Depth edits as the server accepts them: fifo id -> depth, null = unbounded. */
export type DepthEdits = Record<string, number | null>;
