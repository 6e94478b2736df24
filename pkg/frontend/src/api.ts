/**
 * Typed client for the threat-graph query service.
 *
 * Every route answers with an envelope; `ok` responses carry `data`,
 * errors carry a machine-readable code plus message. The client unwraps
 * envelopes and throws RequestFailed for error envelopes, so callers
 * deal in payloads only. The fetch function is injectable so tests can
 * replay recorded envelopes.
 */

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface Envelope<T> {
  status: "ok" | "error";
  data?: T;
  error?: ApiErrorBody;
  truncated: boolean;
  elapsed_ms: number;
}

export interface NodePayload {
  id: string;
  kind: string;
  name: string;
  properties: Record<string, string>;
}

export interface SearchMatch {
  id: string;
  kind: string;
  name: string;
}

export interface SearchData {
  matches: SearchMatch[];
  count: number;
  total: number;
  next_cursor?: number;
}

export interface PathsData {
  paths: string[][];
  count: number;
  next_cursor?: number;
}

export interface InventoryRecord {
  t: "inventory";
  kind: string;
  entries: number;
  median_links: number;
  min_links: number;
  max_links: number;
  range: number;
  floaters: number;
}

export interface TrendRecord {
  t: "trend";
  year: number;
  cves: number;
  pct_tactic: number;
  pct_pattern: number;
  pct_no_weakness: number;
}

export interface SeverityYearRecord {
  t: "severity";
  year: number;
  unlinked: number;
  operational: number;
  total: number;
  zero_score_unlinked_fraction: number;
  missing_scores: number;
}

export interface SeverityData {
  years: SeverityYearRecord[];
  totals: { unlinked: number; operational: number; total: number };
}

export interface VendorTacticRecord {
  t: "vendor_tactic";
  vendor: string;
  tactic: string;
  count: number;
}

export interface ProductVersionRecord {
  t: "product_version";
  version: string;
  tactics: number;
  techniques: number;
  patterns: number;
  weaknesses: number;
  vulnerabilities: number;
}

export type VendorSeverityData = Record<string, number[]>;

export type Direction = "up" | "down" | "both";

export interface FilterParams {
  years?: string;
  latest?: boolean;
}

export class RequestFailed extends Error {
  constructor(
    readonly httpStatus: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "RequestFailed";
  }

  get isNotFound(): boolean {
    return this.httpStatus === 404;
  }
}

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string) => Promise<FetchResponse>;

function defaultFetch(url: string): Promise<FetchResponse> {
  return fetch(url);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  private async get<T>(
    path: string,
    params: Record<string, string> = {},
  ): Promise<{ data: T; truncated: boolean }> {
    const names = Object.keys(params).sort();
    const query = names
      .map((name) => `${name}=${encodeURIComponent(params[name])}`)
      .join("&");
    const url = this.baseUrl + path + (query ? `?${query}` : "");
    const response = await this.fetchFn(url);
    const body = (await response.json()) as Envelope<T>;
    if (body.status !== "ok" || body.data === undefined) {
      const error = body.error ?? { code: "unknown", message: "request failed" };
      throw new RequestFailed(response.status, error.code, error.message);
    }
    return { data: body.data, truncated: body.truncated };
  }

  async node(id: string): Promise<NodePayload> {
    const { data } = await this.get<NodePayload>(
      `/nodes/${encodeURIComponent(id)}`,
    );
    return data;
  }

  async neighbors(id: string, direction: Direction): Promise<string[]> {
    const { data } = await this.get<string[]>(
      `/nodes/${encodeURIComponent(id)}/neighbors`,
      { direction },
    );
    return data;
  }

  async paths(
    from: string,
    toKind: string,
    filters: FilterParams = {},
  ): Promise<{ data: PathsData; truncated: boolean }> {
    return this.get<PathsData>("/paths", {
      from,
      to: toKind,
      ...filterQuery(filters),
    });
  }

  async searchEntries(q: string): Promise<SearchData> {
    const { data } = await this.get<SearchData>("/search", { q });
    return data;
  }

  async inventoryReport(filters: FilterParams = {}): Promise<InventoryRecord[]> {
    const { data } = await this.get<InventoryRecord[]>(
      "/reports/inventory",
      filterQuery(filters),
    );
    return data;
  }

  async trendsReport(filters: FilterParams = {}): Promise<TrendRecord[]> {
    const { data } = await this.get<TrendRecord[]>(
      "/reports/trends",
      filterQuery(filters),
    );
    return data;
  }

  async severityReport(filters: FilterParams = {}): Promise<SeverityData> {
    const { data } = await this.get<SeverityData>(
      "/reports/severity",
      filterQuery(filters),
    );
    return data;
  }

  async vendorTacticsReport(vendors: string[]): Promise<VendorTacticRecord[]> {
    const { data } = await this.get<VendorTacticRecord[]>(
      "/reports/vendor-tactics",
      { vendors: vendors.join(",") },
    );
    return data;
  }

  async vendorSeverityReport(vendors: string[]): Promise<VendorSeverityData> {
    const { data } = await this.get<VendorSeverityData>(
      "/reports/vendor-severity",
      { vendors: vendors.join(",") },
    );
    return data;
  }

  async productVersionsReport(
    vendor: string,
    product: string,
  ): Promise<ProductVersionRecord[]> {
    const { data } = await this.get<ProductVersionRecord[]>(
      "/reports/product-versions",
      { vendor, product },
    );
    return data;
  }
}

function filterQuery(filters: FilterParams): Record<string, string> {
  const params: Record<string, string> = {};
  if (filters.years) params.years = filters.years;
  if (filters.latest) params.latest = "true";
  return params;
}
