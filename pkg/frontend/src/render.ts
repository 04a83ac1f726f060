// Pure rendering: payload in, view structure (and HTML string) out.
// Everything shown comes from the API payload; the client never recomputes
// costs or feasibility.

import { validateTrace } from "./schema.js";
import type { ChainRecord, TracePayload } from "./types.js";

export interface VisitCard {
  poiId: string;
  name: string;
  start: number;
  end: number;
  startLabel: string;
  endLabel: string;
  costMinor: number;
  currency: string;
  lockNote: string | null;
}

export interface BudgetMeter {
  spentMinor: number;
  capMinor: number | null;
  fraction: number | null; // spent / cap, null when no cap
  label: string;
}

export interface ChainPanel {
  heading: "spatial" | "temporal" | "practical";
  steps: string[];
}

export interface TimelineEntry {
  step: number;
  tool: string;
  requestId: string;
  status: string;
}

export interface Badge {
  kind: "feasible" | "violations" | "no-plan" | "incomplete" | "infeasible-lock" | "clarification";
  label: string;
}

export interface SessionView {
  kind: "session";
  sessionId: string;
  outcome: string;
  queryEcho: string;
  badges: Badge[];
  chainPanels: ChainPanel[];
  toolTimeline: TimelineEntry[];
  visits: VisitCard[];
  budget: BudgetMeter;
  verdicts: string[];
  unresolved: string[];
  lockExplanations: { poiId: string; message: string }[];
  summary: string[];
}

export interface ErrorBanner {
  kind: "error";
  sessionId: string;
  path: string;
  message: string;
}

export type RenderResult = SessionView | ErrorBanner;

export function minutesLabel(minutes: number): string {
  const h = Math.floor(minutes / 60);
  const m = minutes % 60;
  return `${String(h).padStart(2, "0")}:${String(m).padStart(2, "0")}`;
}

export function moneyLabel(minor: number, currency: string): string {
  return `${(minor / 100).toFixed(2)} ${currency}`;
}

function chainPanels(chain: ChainRecord | null): ChainPanel[] {
  if (chain === null) return [];
  return (["spatial", "temporal", "practical"] as const).map((heading) => ({
    heading,
    steps: chain[heading].map((s) => s.text),
  }));
}

function lastLockedIds(payload: TracePayload): string[] {
  let locked: string[] = [];
  for (const refinement of payload.refinements ?? []) {
    const lock = refinement["lock"];
    locked = Array.isArray(lock) ? (lock as string[]) : [];
  }
  return locked;
}

function badgesFor(payload: TracePayload): Badge[] {
  const badges: Badge[] = [];
  if (payload.outcome === "clarification-needed") {
    badges.push({ kind: "clarification", label: "needs clarification" });
    return badges;
  }
  if (payload.outcome === "incomplete") {
    badges.push({ kind: "incomplete", label: "incomplete: unresolved needs remain" });
  }
  if (payload.outcome === "infeasible-lock") {
    badges.push({ kind: "infeasible-lock", label: "locked POIs cannot fit the constraints" });
    return badges;
  }
  if (payload.itinerary !== null) {
    if (payload.itinerary.visits.length === 0) {
      badges.push({ kind: "no-plan", label: "no feasible plan under the current constraints" });
    } else if (payload.verdicts.length === 0) {
      badges.push({ kind: "feasible", label: "feasible" });
    } else {
      badges.push({ kind: "violations", label: `${payload.verdicts.length} constraint violations` });
    }
  }
  return badges;
}

export function renderSession(sessionId: string, payload: unknown): RenderResult {
  const checked = validateTrace(payload);
  if (!checked.ok) {
    return { kind: "error", sessionId, path: checked.path, message: checked.message };
  }
  const trace = checked.value;
  const names = new Map<string, string>();
  const prices = new Map<string, number>();
  let currency = "USD";
  const groupSize = trace.instance?.group_size ?? 1;
  for (const poi of trace.instance?.candidates ?? []) {
    names.set(poi.id, poi.name);
    prices.set(poi.id, poi.price.amount);
    currency = poi.price.currency;
  }

  const locked = lastLockedIds(trace);
  const lockExplanations =
    trace.outcome === "infeasible-lock"
      ? locked.map((poiId) => ({
          poiId,
          message: `${names.get(poiId) ?? poiId} cannot be kept: no plan satisfies the locked POIs under the current constraints`,
        }))
      : [];

  const visits = (trace.itinerary?.visits ?? [])
    .slice()
    .sort((a, b) => a[1] - b[1])
    .map(([poiId, start, end]) => ({
      poiId,
      name: names.get(poiId) ?? poiId,
      start,
      end,
      startLabel: minutesLabel(start),
      endLabel: minutesLabel(end),
      costMinor: (prices.get(poiId) ?? 0) * groupSize,
      currency,
      lockNote: locked.includes(poiId) ? "locked" : null,
    }));

  const spent = trace.itinerary?.total_cost.amount ?? 0;
  const cap = trace.instance?.budget?.amount ?? trace.query_spec.budget?.amount ?? null;
  const budget: BudgetMeter = {
    spentMinor: spent,
    capMinor: cap,
    fraction: cap === null || cap === 0 ? null : spent / cap,
    label:
      cap === null
        ? `${moneyLabel(spent, currency)} spent (no budget cap)`
        : `${moneyLabel(spent, currency)} of ${moneyLabel(cap, currency)}`,
  };

  return {
    kind: "session",
    sessionId,
    outcome: trace.outcome,
    queryEcho: trace.query_spec.free_text,
    badges: badgesFor(trace),
    chainPanels: chainPanels(trace.chain),
    toolTimeline: trace.events.map(([call, resp], i) => ({
      step: i,
      tool: call.tool,
      requestId: call.request_id,
      status: resp.status,
    })),
    visits,
    budget,
    verdicts: trace.verdicts,
    unresolved: (trace.unresolved ?? []).map((need) => need.join(" ")),
    lockExplanations,
    summary: trace.summary,
  };
}

function escapeHtml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function viewToHtml(view: RenderResult): string {
  if (view.kind === "error") {
    return [
      `<div class="error-banner" role="alert">`,
      `  <strong>cannot render this session</strong>`,
      `  <div>field <code>${escapeHtml(view.path)}</code>: ${escapeHtml(view.message)}</div>`,
      `</div>`,
    ].join("\n");
  }
  const lines: string[] = [];
  lines.push(`<header class="session" data-session="${escapeHtml(view.sessionId)}">`);
  lines.push(`  <h1>session ${escapeHtml(view.sessionId)}</h1>`);
  lines.push(`  <p class="query-echo">${escapeHtml(view.queryEcho)}</p>`);
  for (const badge of view.badges) {
    lines.push(`  <span class="badge badge-${badge.kind}">${escapeHtml(badge.label)}</span>`);
  }
  lines.push(`</header>`);

  lines.push(`<section class="budget"><div class="meter-label">${escapeHtml(view.budget.label)}</div>`);
  if (view.budget.fraction !== null) {
    const pct = Math.min(100, Math.round(view.budget.fraction * 100));
    lines.push(`  <div class="meter"><div class="meter-fill" style="width:${pct}%"></div></div>`);
  }
  lines.push(`</section>`);

  lines.push(`<section class="itinerary">`);
  if (view.visits.length === 0) {
    lines.push(`  <p class="empty-state">no visits scheduled</p>`);
  }
  for (const v of view.visits) {
    const lock = v.lockNote ? ` <span class="lock-note">${escapeHtml(v.lockNote)}</span>` : "";
    lines.push(
      `  <article class="visit-card" data-poi="${escapeHtml(v.poiId)}">` +
        `${v.startLabel}-${v.endLabel} <strong>${escapeHtml(v.name)}</strong> ` +
        `(${escapeHtml(moneyLabel(v.costMinor, v.currency))})${lock}</article>`,
    );
  }
  for (const explanation of view.lockExplanations) {
    lines.push(
      `  <article class="visit-card locked-infeasible" data-poi="${escapeHtml(explanation.poiId)}">` +
        `<span class="inline-error">${escapeHtml(explanation.message)}</span></article>`,
    );
  }
  lines.push(`</section>`);

  lines.push(`<section class="chain">`);
  for (const panel of view.chainPanels) {
    lines.push(`  <details class="chain-panel" open><summary>${panel.heading}</summary><ol>`);
    for (const step of panel.steps) {
      lines.push(`    <li>${escapeHtml(step)}</li>`);
    }
    lines.push(`  </ol></details>`);
  }
  lines.push(`</section>`);

  lines.push(`<section class="timeline"><ol>`);
  for (const entry of view.toolTimeline) {
    lines.push(
      `  <li class="tool-${escapeHtml(entry.tool)} status-${escapeHtml(entry.status)}">` +
        `t${entry.step} ${escapeHtml(entry.tool)} [${escapeHtml(entry.status)}]</li>`,
    );
  }
  lines.push(`</ol></section>`);

  if (view.unresolved.length > 0) {
    lines.push(`<section class="unresolved"><h2>unresolved needs</h2><ul>`);
    for (const need of view.unresolved) {
      lines.push(`  <li>${escapeHtml(need)}</li>`);
    }
    lines.push(`</ul></section>`);
  }

  if (view.verdicts.length > 0) {
    lines.push(`<section class="verdicts"><h2>constraint violations</h2><ul>`);
    for (const verdict of view.verdicts) {
      lines.push(`  <li>${escapeHtml(verdict)}</li>`);
    }
    lines.push(`</ul></section>`);
  }

  lines.push(`<section class="summary"><ul>`);
  for (const line of view.summary) {
    lines.push(`  <li>${escapeHtml(line)}</li>`);
  }
  lines.push(`</ul></section>`);
  return lines.join("\n");
}
