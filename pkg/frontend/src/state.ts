/**
 * Pivot state: the analyst's current focus, the walk that led there, and
 * the live neighbor panels above and below.
 *
 * A pivot transition fetches the node and both neighbor panels, then
 * extends the breadcrumb only when the new focus is adjacent to the
 * current one (so the breadcrumb is always a connected walk in the
 * graph); jumping somewhere unconnected, e.g. from a search hit, starts
 * a fresh walk. A failed lookup surfaces as an error banner and leaves
 * the rest of the state untouched.
 */

import { ApiClient, NodePayload, RequestFailed } from "./api.js";

export interface Filters {
  years: string | null; // "YYYY" or "YYYY:YYYY"
  latestOnly: boolean;
}

export interface PivotState {
  focused: NodePayload | null;
  breadcrumb: string[];
  upPanel: string[];
  downPanel: string[];
  filters: Filters;
  error: string | null;
}

export function initialState(filters?: Partial<Filters>): PivotState {
  return {
    focused: null,
    breadcrumb: [],
    upPanel: [],
    downPanel: [],
    filters: { years: null, latestOnly: false, ...filters },
    error: null,
  };
}

export function isAdjacentToFocus(state: PivotState, nodeId: string): boolean {
  return state.upPanel.includes(nodeId) || state.downPanel.includes(nodeId);
}

export async function pivot(
  client: ApiClient,
  state: PivotState,
  nodeId: string,
): Promise<PivotState> {
  let focused: NodePayload;
  try {
    focused = await client.node(nodeId);
  } catch (error) {
    if (error instanceof RequestFailed && error.isNotFound) {
      return { ...state, error: error.message };
    }
    throw error;
  }
  const [upPanel, downPanel] = await Promise.all([
    client.neighbors(nodeId, "up"),
    client.neighbors(nodeId, "down"),
  ]);
  const extendsWalk = state.focused === null || isAdjacentToFocus(state, nodeId);
  const breadcrumb = extendsWalk ? [...state.breadcrumb, nodeId] : [nodeId];
  return {
    focused,
    breadcrumb,
    upPanel,
    downPanel,
    filters: state.filters,
    error: null,
  };
}

export function withFilters(state: PivotState, filters: Partial<Filters>): PivotState {
  return { ...state, filters: { ...state.filters, ...filters } };
}

/**
 * Re-check the walk invariant against the live graph: every consecutive
 * breadcrumb pair must be neighbors, and the last crumb must be the
 * focused node.
 */
export async function breadcrumbIsConnectedWalk(
  client: ApiClient,
  state: PivotState,
): Promise<boolean> {
  const crumbs = state.breadcrumb;
  if (crumbs.length === 0) return state.focused === null;
  if (state.focused === null || crumbs[crumbs.length - 1] !== state.focused.id) {
    return false;
  }
  for (let i = 0; i + 1 < crumbs.length; i += 1) {
    const around = await client.neighbors(crumbs[i], "both");
    if (!around.includes(crumbs[i + 1])) return false;
  }
  return true;
}
