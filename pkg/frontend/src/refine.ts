// Refinement form handling: client-side contradiction checks happen before
// any request; the view afterwards comes only from the server response.

import type { ApiClient } from "./api.js";
import { renderSession, type RenderResult } from "./render.js";
import type { RefineBody } from "./types.js";

export interface RefinementForm {
  newBudgetMinor: number | null;
  lock: string[];
  exclude: string[];
  shiftWindow: [number, number] | null;
}

export const emptyForm: RefinementForm = {
  newBudgetMinor: null,
  lock: [],
  exclude: [],
  shiftWindow: null,
};

export type FormCheck = { ok: true; body: RefineBody } | { ok: false; message: string };

export function validateRefinement(form: RefinementForm): FormCheck {
  const both = form.lock.filter((id) => form.exclude.includes(id));
  if (both.length > 0) {
    return { ok: false, message: `cannot lock and exclude the same POI: ${both.join(", ")}` };
  }
  if (form.newBudgetMinor !== null && (!Number.isInteger(form.newBudgetMinor) || form.newBudgetMinor < 0)) {
    return { ok: false, message: "budget must be a non-negative integer amount in minor units" };
  }
  if (form.shiftWindow !== null) {
    const [start, end] = form.shiftWindow;
    if (start > end) return { ok: false, message: "day window start must not exceed its end" };
  }
  const body: RefineBody = {};
  if (form.newBudgetMinor !== null) body.new_budget = form.newBudgetMinor;
  if (form.lock.length > 0) body.lock = [...form.lock].sort();
  if (form.exclude.length > 0) body.exclude = [...form.exclude].sort();
  if (form.shiftWindow !== null) body.shift_window = form.shiftWindow;
  if (Object.keys(body).length === 0) {
    return { ok: false, message: "the refinement form is empty" };
  }
  return { ok: true, body };
}

export class RefinementFormError extends Error {}

/** POST the refinement and re-render from the server's trace. Optimistic
 * updates are deliberately impossible: the only path to a view is the
 * response payload. */
export async function submitRefinement(
  api: ApiClient,
  sessionId: string,
  form: RefinementForm,
): Promise<RenderResult> {
  const checked = validateRefinement(form);
  if (!checked.ok) throw new RefinementFormError(checked.message);
  const trace = await api.refine(sessionId, checked.body);
  return renderSession(sessionId, trace);
}
