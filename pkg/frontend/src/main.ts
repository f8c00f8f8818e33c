import { Api } from "./api";
import { fifoRows } from "./fifos";
import { renderDeadlock, renderFifos, renderStatus, renderTree } from "./render";
import { Store } from "./state";
import { allPaths } from "./tree";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

const api = new Api((url, init) => window.fetch(url, init));
const store = new Store(api);

const statusEl = byId("status");
const deadlockEl = byId("deadlock");
const treeEl = byId("tree");
const fifosEl = byId("fifos");
const totalEl = byId("total");

const expanded = new Set<string>();
let expandedSeeded = false;

function render(): void {
  renderStatus(statusEl, store.phase, store.status, store.bootError);
  const report = store.report;
  if (!report) return;
  if (!expandedSeeded) {
    for (const path of allPaths(report.tree)) expanded.add(path);
    expandedSeeded = true;
  }
  totalEl.textContent =
    report.total_latency === null
      ? `top ${report.top}: deadlocked (minimum ${report.min_total_latency} cycles)`
      : `top ${report.top}: ${report.total_latency} cycles (minimum ${report.min_total_latency})`;
  renderDeadlock(deadlockEl, report);
  renderTree(treeEl, report, expanded, (path) => {
    if (expanded.has(path)) expanded.delete(path);
    else expanded.add(path);
    render();
  });
  renderFifos(fifosEl, fifoRows(report, store.dirty, store.fieldErrors), (id, value) => {
    void store.editDepth(id, value);
  });
  if (store.jobError) {
    totalEl.textContent += ` — recalculation failed: ${store.jobError}`;
  }
}

store.subscribe(render);
void store.boot();
