import type { LatencyNode } from "./types";

/** One visible row of the overview tree. All numbers are copied verbatim
 * from the server report — nothing here computes a latency. */
export interface TreeRow {
  path: string;
  fn: string;
  level: number;
  latency: number | null;
  minLatency: number;
  startCycle: number | null;
  endCycle: number | null;
  hasChildren: boolean;
  expanded: boolean;
}

export function allPaths(node: LatencyNode): string[] {
  const out: string[] = [node.path];
  for (const child of node.children) out.push(...allPaths(child));
  return out;
}

/** Flatten the report tree into rows, descending only into expanded nodes. */
export function flattenTree(
  node: LatencyNode,
  expanded: ReadonlySet<string>,
  level = 0,
): TreeRow[] {
  const isExpanded = expanded.has(node.path);
  const rows: TreeRow[] = [
    {
      path: node.path,
      fn: node.function,
      level,
      latency: node.latency,
      minLatency: node.min_latency,
      startCycle: node.start_cycle,
      endCycle: node.end_cycle,
      hasChildren: node.children.length > 0,
      expanded: isExpanded,
    },
  ];
  if (isExpanded) {
    for (const child of node.children) {
      rows.push(...flattenTree(child, expanded, level + 1));
    }
  }
  return rows;
}

export function formatCycles(value: number | null): string {
  return value === null ? "—" : String(value);
}
