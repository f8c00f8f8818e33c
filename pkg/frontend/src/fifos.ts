import type { SimReport } from "./types";

/** One row of the FIFO table, ready to render. Values come straight from
 * the report; `dirty`/`error` are local edit state. */
export interface FifoVM {
  id: number;
  name: string;
  depthText: string;
  observed: number;
  optimal: number;
  dirty: boolean;
  error: string | null;
}

export function depthToText(depth: number | null): string {
  return depth === null ? "unbounded" : String(depth);
}

/** Parse a depth field. Accepts a positive integer or "unbounded"
 * (also "", "inf", "∞"). Throws with a message fit for inline display. */
export function parseDepthInput(raw: string): number | null {
  const text = raw.trim().toLowerCase();
  if (text === "" || text === "unbounded" || text === "inf" || text === "∞") {
    return null;
  }
  if (!/^\d+$/.test(text)) {
    throw new Error("depth must be a positive integer or \"unbounded\"");
  }
  return parseInt(text, 10);
}

export function fifoRows(
  report: SimReport,
  dirty: ReadonlySet<number>,
  errors: ReadonlyMap<number, string>,
): FifoVM[] {
  return report.fifos.map((f) => ({
    id: f.id,
    name: f.name,
    depthText: depthToText(f.depth),
    observed: f.observed,
    optimal: f.optimal,
    dirty: dirty.has(f.id),
    error: errors.get(f.id) ?? null,
  }));
}
