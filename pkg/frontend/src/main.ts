/** Browser entry point: wires search, pivoting, filters, and dashboards. */

import { ApiClient } from "./api.js";
import {
  inventoryTable,
  productVersionTable,
  severityPanel,
  trendChart,
  vendorSeverityPanel,
  vendorTacticHeatmap,
  emptyState,
} from "./dashboards.js";
import { renderExplorer, renderSearchResults } from "./panels.js";
import { Filters, PivotState, initialState, pivot, withFilters } from "./state.js";
import { decodeView, encodeView } from "./url.js";

const client = new ApiClient("");

let state: PivotState = initialState();
let activeReport: string | null = null;
let pivotSeq = 0; // last-write-wins across overlapping pivots
let reportSeq = 0;

const explorerHost = document.getElementById("explorer-host")!;
const dashboardHost = document.getElementById("dashboard-host")!;
const searchInput = document.getElementById("search-input") as HTMLInputElement;
const searchResults = document.getElementById("search-results")!;
const yearsInput = document.getElementById("years-input") as HTMLInputElement;
const latestInput = document.getElementById("latest-input") as HTMLInputElement;

function syncHash(): void {
  const hash = encodeView({
    nodeId: state.focused?.id ?? null,
    report: activeReport,
    filters: state.filters,
  });
  if (window.location.hash !== hash) {
    history.replaceState(null, "", hash);
  }
}

function renderExplorerHost(): void {
  explorerHost.replaceChildren(renderExplorer(state, doPivot));
}

async function doPivot(nodeId: string): Promise<void> {
  const seq = ++pivotSeq;
  const next = await pivot(client, state, nodeId);
  if (seq !== pivotSeq) return; // superseded by a newer pivot
  state = next;
  renderExplorerHost();
  syncHash();
}

async function runSearch(): Promise<void> {
  const query = searchInput.value.trim();
  if (!query) {
    searchResults.replaceChildren();
    return;
  }
  const data = await client.searchEntries(query);
  searchResults.replaceChildren(renderSearchResults(data.matches, (id) => {
    searchResults.replaceChildren();
    void doPivot(id);
  }));
}

function currentFilterParams(): { years?: string; latest?: boolean } {
  return {
    years: state.filters.years ?? undefined,
    latest: state.filters.latestOnly || undefined,
  };
}

async function buildReport(kind: string): Promise<HTMLElement> {
  const filters = currentFilterParams();
  switch (kind) {
    case "inventory":
      return inventoryTable(await client.inventoryReport(filters));
    case "trends":
      return trendChart(await client.trendsReport(filters));
    case "severity":
      return severityPanel(await client.severityReport(filters));
    case "vendor-tactics": {
      const vendors = promptVendors();
      return vendors.length
        ? vendorTacticHeatmap(await client.vendorTacticsReport(vendors))
        : emptyState("vendor exposure (set vendors first)");
    }
    case "vendor-severity": {
      const vendors = promptVendors();
      return vendors.length
        ? vendorSeverityPanel(await client.vendorSeverityReport(vendors))
        : emptyState("vendor severity (set vendors first)");
    }
    case "product-versions": {
      const vendor = vendorInput().value.trim();
      const product = productInput().value.trim();
      return vendor && product
        ? productVersionTable(
            await client.productVersionsReport(vendor, product))
        : emptyState("product versions (set vendor and product first)");
    }
    default:
      return emptyState(kind);
  }
}

function vendorInput(): HTMLInputElement {
  return document.getElementById("vendor-input") as HTMLInputElement;
}

function productInput(): HTMLInputElement {
  return document.getElementById("product-input") as HTMLInputElement;
}

function promptVendors(): string[] {
  return vendorInput().value.split(",").map((v) => v.trim()).filter(Boolean);
}

async function showReport(kind: string): Promise<void> {
  activeReport = kind;
  const seq = ++reportSeq;
  const element = await buildReport(kind);
  if (seq !== reportSeq) return;
  dashboardHost.replaceChildren(element);
  syncHash();
}

function applyFilterInputs(): void {
  state = withFilters(state, {
    years: yearsInput.value.trim() || null,
    latestOnly: latestInput.checked,
  });
  syncHash();
  if (activeReport) void showReport(activeReport);
}

async function restoreFromHash(): Promise<void> {
  const view = decodeView(window.location.hash);
  state = withFilters(state, view.filters);
  yearsInput.value = view.filters.years ?? "";
  latestInput.checked = view.filters.latestOnly;
  if (view.nodeId) await doPivot(view.nodeId);
  if (view.report) await showReport(view.report);
}

function wire(): void {
  searchInput.addEventListener("input", () => void runSearch());
  yearsInput.addEventListener("change", applyFilterInputs);
  latestInput.addEventListener("change", applyFilterInputs);
  for (const button of document.querySelectorAll("[data-report]")) {
    button.addEventListener("click", () =>
      void showReport((button as HTMLElement).dataset.report!));
  }
  window.addEventListener("hashchange", () => void restoreFromHash());
  renderExplorerHost();
  void restoreFromHash();
}

wire();
