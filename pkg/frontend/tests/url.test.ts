import { describe, expect, it } from "vitest";

import { decodeView, encodeView } from "../src/url.js";
import { CHROME_126 } from "./helpers.js";

describe("shareable view URLs", () => {
  it("round-trips a focused node with filters", () => {
    const view = {
      nodeId: "TA0003",
      report: null,
      filters: { years: "2011:2011", latestOnly: true },
    };
    const hash = encodeView(view);
    expect(hash).toBe("#/node/TA0003?years=2011%3A2011&latest=1");
    expect(decodeView(hash)).toEqual(view);
  });

  it("round-trips a configuration id with escapes", () => {
    const view = {
      nodeId: CHROME_126,
      report: null,
      filters: { years: null, latestOnly: false },
    };
    expect(decodeView(encodeView(view))).toEqual(view);
  });

  it("round-trips a report view", () => {
    const view = {
      nodeId: null,
      report: "severity",
      filters: { years: "1999:2020", latestOnly: false },
    };
    expect(decodeView(encodeView(view))).toEqual(view);
  });

  it("decodes an empty hash to the blank view", () => {
    expect(decodeView("")).toEqual({
      nodeId: null,
      report: null,
      filters: { years: null, latestOnly: false },
    });
    expect(decodeView("#/")).toEqual(decodeView(""));
  });
});
