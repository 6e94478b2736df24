/**
 * Replay recorded service envelopes. Each key is "path?sorted-query"
 * with decoded values, mirroring frontend/scripts/record_payloads.py.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient, Envelope, FetchLike } from "../src/api.js";

interface Recording {
  http_status: number;
  body: Envelope<unknown>;
}

const fixturePath = join(
  dirname(fileURLToPath(import.meta.url)), "fixtures", "payloads.json");
export const recordings: Record<string, Recording> =
  JSON.parse(readFileSync(fixturePath, "utf-8"));

export function keyOf(url: string): string {
  const parsed = new URL(url, "http://replay.test");
  const path = decodeURIComponent(parsed.pathname);
  const names = [...new Set(parsed.searchParams.keys())].sort();
  const query = names
    .map((name) => `${name}=${parsed.searchParams.get(name)}`)
    .join("&");
  return query ? `${path}?${query}` : path;
}

export function replayFetch(): FetchLike {
  return async (url: string) => {
    const key = keyOf(url);
    const recording = recordings[key];
    if (!recording) {
      throw new Error(`no recorded payload for ${key}`);
    }
    return {
      status: recording.http_status,
      json: async () => recording.body,
    };
  };
}

export function replayClient(): ApiClient {
  return new ApiClient("", replayFetch());
}

export function recordedData<T>(key: string): T {
  const recording = recordings[key];
  if (!recording) throw new Error(`no recorded payload for ${key}`);
  return recording.body.data as T;
}

export const CHROME_126 = "cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*";

export const WALK = [
  "TA0003",
  "T1574",
  "T1574.010",
  "CAPEC-17",
  "CWE-264",
  "CVE-2011-1185",
  CHROME_126,
];
