/**
 * Explorer panels: breadcrumb bar, focused-entry card, and the neighbor
 * bands above and below the focus. Layers stack vertically so a pivot
 * reads as moving up or down the schema.
 */

import { NodePayload, SearchMatch } from "./api.js";
import { PivotState } from "./state.js";

const LAYER_CLASSES: Record<string, string> = {
  Tactic: "layer-tactic",
  Technique: "layer-technique",
  AttackPattern: "layer-pattern",
  Weakness: "layer-weakness",
  Vulnerability: "layer-vulnerability",
  AffectedProductConfiguration: "layer-configuration",
};

export type PivotHandler = (nodeId: string) => void;

function el(tag: string, className?: string, text?: string): HTMLElement {
  const element = document.createElement(tag);
  if (className) element.className = className;
  if (text !== undefined) element.textContent = text;
  return element;
}

function nodeChip(nodeId: string, onPivot: PivotHandler): HTMLElement {
  const chip = el("button", "node-chip", nodeId);
  chip.setAttribute("data-node-id", nodeId);
  chip.addEventListener("click", () => onPivot(nodeId));
  return chip;
}

export function renderBreadcrumb(
  state: PivotState,
  onPivot: PivotHandler,
): HTMLElement {
  const nav = el("nav", "breadcrumb");
  const list = el("ol");
  for (const crumb of state.breadcrumb) {
    const item = el("li");
    item.appendChild(nodeChip(crumb, onPivot));
    list.appendChild(item);
  }
  nav.appendChild(list);
  return nav;
}

export function renderErrorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}

function neighborBand(
  label: string,
  className: string,
  ids: string[],
  onPivot: PivotHandler,
): HTMLElement {
  const band = el("div", `neighbor-band ${className}`);
  band.appendChild(el("h4", undefined, label));
  if (ids.length === 0) {
    band.appendChild(el("p", "band-empty", "none"));
    return band;
  }
  const chips = el("div", "chips");
  for (const id of ids) chips.appendChild(nodeChip(id, onPivot));
  band.appendChild(chips);
  return band;
}

function focusCard(node: NodePayload): HTMLElement {
  const card = el("div", `focus-card ${LAYER_CLASSES[node.kind] ?? ""}`);
  card.appendChild(el("span", "focus-kind", node.kind));
  card.appendChild(el("h2", "focus-id", node.id));
  card.appendChild(el("p", "focus-name", node.name));
  const props = Object.entries(node.properties);
  if (props.length > 0) {
    const dl = el("dl", "focus-properties");
    for (const [key, value] of props) {
      dl.appendChild(el("dt", undefined, key));
      dl.appendChild(el("dd", undefined, value));
    }
    card.appendChild(dl);
  }
  return card;
}

export function renderExplorer(
  state: PivotState,
  onPivot: PivotHandler,
): HTMLElement {
  const root = el("div", "explorer");
  if (state.error !== null) {
    root.appendChild(renderErrorBanner(state.error));
  }
  root.appendChild(renderBreadcrumb(state, onPivot));
  if (state.focused === null) {
    root.appendChild(el("p", "explorer-hint",
      "Search for an entry to start exploring."));
    return root;
  }
  root.appendChild(
    neighborBand("up the layers", "band-up", state.upPanel, onPivot));
  root.appendChild(focusCard(state.focused));
  root.appendChild(
    neighborBand("down the layers", "band-down", state.downPanel, onPivot));
  return root;
}

export function renderSearchResults(
  matches: SearchMatch[],
  onPivot: PivotHandler,
): HTMLElement {
  const box = el("div", "search-results");
  if (matches.length === 0) {
    box.appendChild(el("p", "band-empty", "no matches"));
    return box;
  }
  for (const match of matches) {
    const row = el("div", "search-row");
    row.appendChild(nodeChip(match.id, onPivot));
    row.appendChild(el("span", "search-kind", match.kind));
    row.appendChild(el("span", "search-name", match.name));
    box.appendChild(row);
  }
  return box;
}
