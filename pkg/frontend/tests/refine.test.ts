import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it, vi } from "vitest";

import { makeApi } from "../src/api.js";
import { emptyForm, RefinementFormError, submitRefinement, validateRefinement } from "../src/refine.js";
import type { TracePayload } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function fixture(name: string): TracePayload {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8"));
}

const SESSION = "fixture-session";
const EXCLUDED: string = JSON.parse(readFileSync(join(here, "fixtures", "refine_meta.json"), "utf-8")).excluded;

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function recordedFetch(payload: TracePayload) {
  const calls: { url: string; body: unknown }[] = [];
  const fetchImpl = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
    calls.push({ url: String(url), body: init?.body ? JSON.parse(String(init.body)) : null });
    return jsonResponse(payload);
  });
  return { fetchImpl, calls };
}

describe("validateRefinement", () => {
  it("rejects lock+exclude overlap before any request", () => {
    const check = validateRefinement({ ...emptyForm, lock: ["a"], exclude: ["a", "b"] });
    expect(check).toEqual({ ok: false, message: "cannot lock and exclude the same POI: a" });
  });

  it("rejects an empty form", () => {
    expect(validateRefinement({ ...emptyForm })).toMatchObject({ ok: false });
  });

  it("builds a wire body from a valid form", () => {
    const check = validateRefinement({
      newBudgetMinor: 8000,
      lock: ["b", "a"],
      exclude: ["c"],
      shiftWindow: [600, 1200],
    });
    expect(check).toEqual({
      ok: true,
      body: { new_budget: 8000, lock: ["a", "b"], exclude: ["c"], shift_window: [600, 1200] },
    });
  });
});

describe("submitRefinement round-trip", () => {
  it("excluding a visited POI yields a feasible plan without it", async () => {
    const refined = fixture("trace_refined_exclude.json");
    const { fetchImpl, calls } = recordedFetch(refined);
    const api = makeApi("http://backend", fetchImpl);

    const view = await submitRefinement(api, SESSION, { ...emptyForm, exclude: [EXCLUDED] });
    expect(calls).toEqual([
      { url: `http://backend/sessions/${SESSION}/refine`, body: { exclude: [EXCLUDED] } },
    ]);
    if (view.kind !== "session") throw new Error("expected a session view");
    expect(view.visits.map((v) => v.poiId)).not.toContain(EXCLUDED);
    expect(view.visits.length).toBeGreaterThan(0);
    expect(view.badges).toEqual([{ kind: "feasible", label: "feasible" }]);
  });

  it("resubmitting the identical refinement renders the identical view", async () => {
    const refined = fixture("trace_refined_exclude.json");
    const api = makeApi("http://backend", recordedFetch(refined).fetchImpl);
    const first = await submitRefinement(api, SESSION, { ...emptyForm, exclude: [EXCLUDED] });
    const second = await submitRefinement(api, SESSION, { ...emptyForm, exclude: [EXCLUDED] });
    expect(second).toEqual(first);
  });

  it("never issues a request when the form is contradictory", async () => {
    const { fetchImpl } = recordedFetch(fixture("trace_complete.json"));
    const api = makeApi("http://backend", fetchImpl);
    await expect(
      submitRefinement(api, SESSION, { ...emptyForm, lock: ["x"], exclude: ["x"] }),
    ).rejects.toBeInstanceOf(RefinementFormError);
    expect(fetchImpl).not.toHaveBeenCalled();
  });

  it("renders the infeasible-lock response as its explicit state", async () => {
    const api = makeApi("http://backend", recordedFetch(fixture("trace_infeasible_lock.json")).fetchImpl);
    const view = await submitRefinement(api, SESSION, { ...emptyForm, lock: ["nyc-empire-state"], newBudgetMinor: 1000 });
    if (view.kind !== "session") throw new Error("expected a session view");
    expect(view.badges.map((b) => b.kind)).toContain("infeasible-lock");
    expect(view.lockExplanations[0]?.poiId).toBe("nyc-empire-state");
  });
});
