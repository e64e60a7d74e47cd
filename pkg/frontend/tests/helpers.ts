import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf8")) as T;
}

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

export interface StubRoute {
  $status: number;
  body: unknown;
}

/** A fetch stub that replays fixture bodies and records every request.
 * Route values are response bodies; wrap in {$status, body} for non-200s. */
export function stubFetch(
  routes: Record<string, StubRoute | unknown>,
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    const key = `${init?.method ?? "GET"} ${url.split("?")[0]}`;
    if (!(key in routes)) {
      throw new Error(`no stub for ${key}`);
    }
    const route = routes[key];
    const enveloped = route !== null && typeof route === "object"
      && "$status" in (route as object);
    const status = enveloped ? (route as StubRoute).$status : 200;
    const body = enveloped ? (route as StubRoute).body : route;
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

export function requestBody(call: RecordedCall): unknown {
  return JSON.parse((call.init?.body as string) ?? "null");
}
