// Runtime validation of API payloads. The renderer refuses to draw from a
// payload that fails here; the failing field path goes into the error banner.

import type { TracePayload } from "./types.js";

export type ValidationResult =
  | { ok: true; value: TracePayload }
  | { ok: false; path: string; message: string };

class SchemaError extends Error {
  constructor(
    public path: string,
    message: string,
  ) {
    super(message);
  }
}

function fail(path: string, message: string): never {
  throw new SchemaError(path, message);
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function requireString(v: unknown, path: string): string {
  if (typeof v !== "string") fail(path, `expected string, got ${typeof v}`);
  return v;
}

function requireNumber(v: unknown, path: string): number {
  if (typeof v !== "number" || Number.isNaN(v)) fail(path, `expected number, got ${typeof v}`);
  return v;
}

function requireArray(v: unknown, path: string): unknown[] {
  if (!Array.isArray(v)) fail(path, `expected array, got ${typeof v}`);
  return v;
}

function checkMoney(v: unknown, path: string): void {
  if (!isRecord(v)) fail(path, "expected a money object");
  requireNumber(v.amount, `${path}.amount`);
  requireString(v.currency, `${path}.currency`);
}

function checkItinerary(v: unknown, path: string): void {
  if (v === null) return;
  if (!isRecord(v)) fail(path, "expected an itinerary object or null");
  const visits = requireArray(v.visits, `${path}.visits`);
  visits.forEach((visit, i) => {
    const tuple = requireArray(visit, `${path}.visits[${i}]`);
    if (tuple.length !== 3) fail(`${path}.visits[${i}]`, "expected [poi_id, start, end]");
    requireString(tuple[0], `${path}.visits[${i}][0]`);
    requireNumber(tuple[1], `${path}.visits[${i}][1]`);
    requireNumber(tuple[2], `${path}.visits[${i}][2]`);
  });
  checkMoney(v.total_cost, `${path}.total_cost`);
  requireNumber(v.total_utility, `${path}.total_utility`);
}

function checkChain(v: unknown, path: string): void {
  if (v === null) return;
  if (!isRecord(v)) fail(path, "expected a chain object or null");
  for (const component of ["spatial", "temporal", "practical"] as const) {
    const steps = requireArray(v[component], `${path}.${component}`);
    steps.forEach((step, i) => {
      if (!isRecord(step)) fail(`${path}.${component}[${i}]`, "expected a step object");
      requireString(step.text, `${path}.${component}[${i}].text`);
      requireArray(step.refs ?? [], `${path}.${component}[${i}].refs`);
    });
  }
}

function checkInstance(v: unknown, path: string): void {
  if (v === null) return;
  if (!isRecord(v)) fail(path, "expected an instance object or null");
  const candidates = requireArray(v.candidates, `${path}.candidates`);
  candidates.forEach((c, i) => {
    if (!isRecord(c)) fail(`${path}.candidates[${i}]`, "expected a POI object");
    requireString(c.id, `${path}.candidates[${i}].id`);
    requireString(c.name, `${path}.candidates[${i}].name`);
    if (!isRecord(c.location)) fail(`${path}.candidates[${i}].location`, "expected a location");
    requireNumber(c.location.lat, `${path}.candidates[${i}].location.lat`);
    requireNumber(c.location.lon, `${path}.candidates[${i}].location.lon`);
  });
  if (v.budget !== null && v.budget !== undefined) checkMoney(v.budget, `${path}.budget`);
  requireNumber(v.group_size, `${path}.group_size`);
}

function checkEvents(v: unknown, path: string): void {
  const events = requireArray(v, path);
  events.forEach((pair, i) => {
    const tuple = requireArray(pair, `${path}[${i}]`);
    if (tuple.length !== 2) fail(`${path}[${i}]`, "expected a [call, response] pair");
    const call = tuple[0];
    const resp = tuple[1];
    if (!isRecord(call)) fail(`${path}[${i}][0]`, "expected a tool call");
    requireString(call.tool, `${path}[${i}][0].tool`);
    requireString(call.request_id, `${path}[${i}][0].request_id`);
    if (!isRecord(resp)) fail(`${path}[${i}][1]`, "expected a tool response");
    requireString(resp.status, `${path}[${i}][1].status`);
  });
}

export function validateTrace(payload: unknown): ValidationResult {
  try {
    if (!isRecord(payload)) fail("$", "payload is not an object");
    requireString(payload.outcome, "outcome");
    if (!isRecord(payload.query_spec)) fail("query_spec", "expected an object");
    checkChain(payload.chain ?? null, "chain");
    checkEvents(payload.events ?? [], "events");
    checkInstance(payload.instance ?? null, "instance");
    checkItinerary(payload.itinerary ?? null, "itinerary");
    requireArray(payload.verdicts ?? [], "verdicts");
    requireArray(payload.summary ?? [], "summary");
    return { ok: true, value: payload as unknown as TracePayload };
  } catch (err) {
    if (err instanceof SchemaError) {
      return { ok: false, path: err.path, message: err.message };
    }
    throw err;
  }
}
