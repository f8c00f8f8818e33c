import { FifoVM } from "./fifos";
import { flattenTree, formatCycles } from "./tree";
import type { SimReport, StatusResponse } from "./types";

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderStatus(
  container: HTMLElement,
  phase: string,
  status: StatusResponse | null,
  bootError: string | null,
): void {
  container.textContent = "";
  if (phase === "ready") {
    container.style.display = "none";
    return;
  }
  container.style.display = "";
  if (phase === "failed") {
    container.append(el("div", "error", `pipeline failed: ${bootError ?? "unknown error"}`));
    return;
  }
  container.append(el("div", "stage", `pipeline: ${status?.stage ?? "connecting"}…`));
  for (const [name, seconds] of Object.entries(status?.timings ?? {})) {
    container.append(el("div", "timing", `${name}: ${seconds.toFixed(2)} s`));
  }
}

export function renderDeadlock(container: HTMLElement, report: SimReport): void {
  container.textContent = "";
  if (!report.deadlock) {
    container.style.display = "none";
    return;
  }
  container.style.display = "";
  container.append(el("div", "deadlock-title", "Deadlock detected"));
  for (const row of report.deadlock.cycle) {
    container.append(
      el(
        "div",
        "deadlock-row",
        `${row.call} (${row.function}) blocked on ${row.kind} ${row.resource_name}` +
          (row.waits_for ? ` — waiting for ${row.waits_for}` : ""),
      ),
    );
  }
}

export function renderTree(
  container: HTMLElement,
  report: SimReport,
  expanded: Set<string>,
  onToggle: (path: string) => void,
): void {
  container.textContent = "";
  const table = el("table", "tree") as HTMLTableElement;
  const head = table.createTHead().insertRow();
  for (const title of ["call", "latency", "min latency", "cycles"]) {
    head.append(el("th", undefined, title));
  }
  const tbody = table.createTBody();
  for (const row of flattenTree(report.tree, expanded)) {
    const tr = tbody.insertRow();
    const name = tr.insertCell();
    name.style.paddingLeft = `${row.level * 1.4}em`;
    if (row.hasChildren) {
      const btn = el("button", "toggle", row.expanded ? "▾" : "▸");
      btn.addEventListener("click", () => onToggle(row.path));
      name.append(btn);
    }
    name.append(el("span", "fn", ` ${row.fn}`));
    tr.insertCell().textContent = formatCycles(row.latency);
    tr.insertCell().textContent = String(row.minLatency);
    tr.insertCell().textContent =
      row.startCycle !== null
        ? `${row.startCycle}..${formatCycles(row.endCycle)}`
        : "—";
    if (row.latency === null) tr.className = "blocked";
  }
  container.append(table);
}

export function renderFifos(
  container: HTMLElement,
  rows: FifoVM[],
  onCommit: (fifoId: number, value: string) => void,
): void {
  container.textContent = "";
  const table = el("table", "fifos") as HTMLTableElement;
  const head = table.createTHead().insertRow();
  for (const title of ["name", "depth", "observed", "optimal", ""]) {
    head.append(el("th", undefined, title));
  }
  const tbody = table.createTBody();
  for (const row of rows) {
    const tr = tbody.insertRow();
    tr.insertCell().textContent = row.name;
    const depthCell = tr.insertCell();
    const input = el("input") as HTMLInputElement;
    input.value = row.depthText;
    input.disabled = row.dirty;
    input.addEventListener("change", () => onCommit(row.id, input.value));
    input.addEventListener("keydown", (ev) => {
      if ((ev as KeyboardEvent).key === "Enter") input.blur();
    });
    depthCell.append(input);
    if (row.error) depthCell.append(el("div", "field-error", row.error));
    tr.insertCell().textContent = String(row.observed);
    tr.insertCell().textContent = String(row.optimal);
    tr.insertCell().textContent = row.dirty ? "recalculating…" : "";
    if (row.dirty) tr.className = "dirty";
  }
  container.append(table);
}
