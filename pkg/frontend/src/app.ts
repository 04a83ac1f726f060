// Browser bootstrap: wires the query form, the session view, and the
// refinement form to the API. The only state that survives a reload is the
// session id in the URL hash; everything else re-renders from server truth.

import { makeApi, ApiError } from "./api.js";
import { drawMap, projectPoints } from "./map.js";
import { renderSession, viewToHtml, type RenderResult } from "./render.js";
import { emptyForm, submitRefinement, RefinementFormError, type RefinementForm } from "./refine.js";
import type { TracePayload } from "./types.js";

const api = makeApi("");

let inFlight = false; // at most one mutation per session at a time
let lastTrace: TracePayload | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function sessionIdFromHash(): string | null {
  const hash = window.location.hash.replace(/^#/, "");
  return hash || null;
}

function setControlsDisabled(disabled: boolean): void {
  for (const control of document.querySelectorAll<HTMLButtonElement>("button, input, select")) {
    control.disabled = disabled;
  }
}

function show(view: RenderResult, trace: TracePayload | null): void {
  el("view").innerHTML = viewToHtml(view);
  lastTrace = trace;
  const canvas = el<HTMLCanvasElement>("map");
  if (trace?.instance && view.kind === "session") {
    const visitedIds = view.visits.map((v) => v.poiId);
    drawMap(canvas, projectPoints(trace.instance, visitedIds, canvas.width, canvas.height));
  } else {
    canvas.getContext("2d")?.clearRect(0, 0, canvas.width, canvas.height);
  }
}

function showMessage(message: string): void {
  el("flash").textContent = message;
}

async function loadSession(sessionId: string): Promise<void> {
  try {
    const trace = await api.getTrace(sessionId);
    show(renderSession(sessionId, trace), trace);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      showMessage(`session ${sessionId} is unknown to the server`);
      return;
    }
    throw err;
  }
}

async function guarded(action: () => Promise<void>): Promise<void> {
  if (inFlight) return;
  inFlight = true;
  setControlsDisabled(true);
  showMessage("");
  try {
    await action();
  } catch (err) {
    if (err instanceof RefinementFormError) showMessage(err.message);
    else if (err instanceof ApiError) showMessage(`server rejected the request: ${JSON.stringify(err.body)}`);
    else showMessage(String(err));
  } finally {
    inFlight = false;
    setControlsDisabled(false);
  }
}

function refinementFormFromInputs(): RefinementForm {
  const parseIds = (raw: string) =>
    raw
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
  const budgetRaw = el<HTMLInputElement>("refine-budget").value.trim();
  const windowRaw = el<HTMLInputElement>("refine-window").value.trim();
  let shiftWindow: [number, number] | null = null;
  if (windowRaw) {
    const [a, b] = windowRaw.split("-").map((v) => Number.parseInt(v.trim(), 10));
    shiftWindow = [a ?? 0, b ?? 0];
  }
  return {
    ...emptyForm,
    newBudgetMinor: budgetRaw ? Math.round(Number.parseFloat(budgetRaw) * 100) : null,
    lock: parseIds(el<HTMLInputElement>("refine-lock").value),
    exclude: parseIds(el<HTMLInputElement>("refine-exclude").value),
    shiftWindow,
  };
}

export function boot(): void {
  el("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void guarded(async () => {
      const query = el<HTMLInputElement>("query-text").value;
      const image = el<HTMLInputElement>("query-image").value || null;
      const created = await api.createSession(query, image);
      window.location.hash = created.session_id;
      await loadSession(created.session_id);
    });
  });

  el("refine-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void guarded(async () => {
      const sessionId = sessionIdFromHash();
      if (!sessionId) {
        showMessage("start or open a session first");
        return;
      }
      const view = await submitRefinement(api, sessionId, refinementFormFromInputs());
      const trace = await api.getTrace(sessionId);
      show(view, trace);
    });
  });

  window.addEventListener("hashchange", () => {
    const sessionId = sessionIdFromHash();
    if (sessionId) void guarded(() => loadSession(sessionId));
  });

  const initial = sessionIdFromHash();
  if (initial) void guarded(() => loadSession(initial));
}

if (typeof document !== "undefined") {
  boot();
}
