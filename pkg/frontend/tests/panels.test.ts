import { describe, expect, it } from "vitest";

import { renderExplorer, renderSearchResults } from "../src/panels.js";
import { initialState, pivot } from "../src/state.js";
import { CHROME_126, WALK, replayClient } from "./helpers.js";

describe("explorer rendering", () => {
  it("renders the full walk as breadcrumb chips in order", async () => {
    const client = replayClient();
    let state = initialState();
    for (const nodeId of WALK) state = await pivot(client, state, nodeId);
    const view = renderExplorer(state, () => {});
    const crumbs = [...view.querySelectorAll(".breadcrumb .node-chip")]
      .map((chip) => chip.textContent);
    expect(crumbs).toEqual(WALK);
  });

  it("shows the focused card with kind, id, and properties", async () => {
    const client = replayClient();
    const state = await pivot(client, initialState(), CHROME_126);
    const view = renderExplorer(state, () => {});
    expect(view.querySelector(".focus-id")?.textContent).toBe(CHROME_126);
    expect(view.querySelector(".focus-kind")?.textContent)
      .toBe("AffectedProductConfiguration");
    expect(view.querySelector(".focus-card")?.className)
      .toContain("layer-configuration");
    const dd = [...view.querySelectorAll(".focus-properties dd")]
      .map((d) => d.textContent);
    expect(dd).toContain("10.0.648.126");
  });

  it("up and down bands hold clickable neighbor chips", async () => {
    const client = replayClient();
    const state = await pivot(client, initialState(), "CVE-2011-1185");
    const clicked: string[] = [];
    const view = renderExplorer(state, (id) => clicked.push(id));
    const upChips = [...view.querySelectorAll(".band-up .node-chip")];
    expect(upChips.map((chip) => chip.textContent))
      .toEqual(["CWE-200", "CWE-264"]);
    (upChips[1] as HTMLButtonElement).click();
    expect(clicked).toEqual(["CWE-264"]);
  });

  it("renders the error banner without losing the previous focus", async () => {
    const client = replayClient();
    let state = await pivot(client, initialState(), "TA0003");
    state = await pivot(client, state, "NOPE");
    const view = renderExplorer(state, () => {});
    expect(view.querySelector(".error-banner")).not.toBeNull();
    expect(view.querySelector(".focus-id")?.textContent).toBe("TA0003");
  });

  it("shows a hint before anything is focused", () => {
    const view = renderExplorer(initialState(), () => {});
    expect(view.querySelector(".explorer-hint")).not.toBeNull();
  });
});

describe("search results", () => {
  it("lists matches and pivots on click", () => {
    const clicked: string[] = [];
    const box = renderSearchResults(
      [{ id: "TA0003", kind: "Tactic", name: "Persistence" }],
      (id) => clicked.push(id));
    const chip = box.querySelector(".node-chip") as HTMLButtonElement;
    chip.click();
    expect(clicked).toEqual(["TA0003"]);
    expect(box.querySelector(".search-name")?.textContent).toBe("Persistence");
  });

  it("says so when nothing matches", () => {
    const box = renderSearchResults([], () => {});
    expect(box.textContent).toContain("no matches");
  });
});
