/** Shared test scaffolding: fixture loading and a scriptable fetch stub. */

import type { FetchLike } from "../src/api";
import type { CanonicalTree } from "../src/types";

import tree1Raw from "./fixtures/tree_1.json";
import tree7Raw from "./fixtures/tree_7.json";
import tree100Raw from "./fixtures/tree_100.json";

export const tree1 = tree1Raw as unknown as CanonicalTree;
export const tree7 = tree7Raw as unknown as CanonicalTree;
export const tree100 = tree100Raw as unknown as CanonicalTree;

/** Deep copy so tests can mutate fixtures freely. */
export function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export interface StubCall {
  method: string;
  path: string;
  body: unknown;
}

export type RouteHandler = (
  call: StubCall,
) => { status?: number; json: unknown } | undefined;

/**
 * fetch stub: tries handlers in order until one claims the call.
 * Records every call for later inspection.
 */
export function makeFetch(handlers: RouteHandler[]): {
  fetch: FetchLike;
  calls: StubCall[];
} {
  const calls: StubCall[] = [];
  const fetchImpl: FetchLike = async (input, init) => {
    const call: StubCall = {
      method: init?.method ?? "GET",
      path: input,
      body:
        typeof init?.body === "string" && init.body.startsWith("{")
          ? JSON.parse(init.body)
          : init?.body,
    };
    calls.push(call);
    for (const handler of handlers) {
      const result = handler(call);
      if (result !== undefined) {
        const status = result.status ?? 200;
        return {
          ok: status >= 200 && status < 300,
          status,
          statusText: `status ${status}`,
          json: async () => clone(result.json),
        } as unknown as Response;
      }
    }
    throw new Error(`unstubbed request: ${call.method} ${call.path}`);
  };
  return { fetch: fetchImpl, calls };
}

/** Route helper matching an exact method + path. */
export function route(
  method: string,
  path: string,
  respond: (call: StubCall) => { status?: number; json: unknown },
): RouteHandler {
  return (call) =>
    call.method === method && call.path === path ? respond(call) : undefined;
}
