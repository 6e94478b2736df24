/**
 * Shareable views: the focused node, active filters, and selected report
 * round-trip through the URL hash, e.g.
 *
 *   #/node/TA0003?years=2011:2011&latest=1
 *   #/report/severity?years=1999:2020
 */

import { Filters } from "./state.js";

export interface View {
  nodeId: string | null;
  report: string | null;
  filters: Filters;
}

export function encodeView(view: View): string {
  let path = "#/";
  if (view.nodeId !== null) {
    path += `node/${encodeURIComponent(view.nodeId)}`;
  } else if (view.report !== null) {
    path += `report/${encodeURIComponent(view.report)}`;
  }
  const params = new URLSearchParams();
  if (view.filters.years) params.set("years", view.filters.years);
  if (view.filters.latestOnly) params.set("latest", "1");
  const query = params.toString();
  return query ? `${path}?${query}` : path;
}

export function decodeView(hash: string): View {
  const view: View = {
    nodeId: null,
    report: null,
    filters: { years: null, latestOnly: false },
  };
  const trimmed = hash.replace(/^#\/?/, "");
  if (!trimmed) return view;
  const [path, query = ""] = trimmed.split("?", 2);
  const segments = path.split("/");
  if (segments[0] === "node" && segments.length > 1) {
    view.nodeId = decodeURIComponent(segments.slice(1).join("/"));
  } else if (segments[0] === "report" && segments.length > 1) {
    view.report = decodeURIComponent(segments[1]);
  }
  const params = new URLSearchParams(query);
  view.filters.years = params.get("years");
  view.filters.latestOnly = params.get("latest") === "1";
  return view;
}
