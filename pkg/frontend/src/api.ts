// Thin HTTP client over the session API. The fetch implementation is
// injectable so tests can substitute recorded payloads.

import type { RefineBody, TracePayload } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export interface ApiClient {
  createSession(query: string, image: string | null): Promise<{ session_id: string; outcome: string }>;
  getTrace(sessionId: string): Promise<TracePayload>;
  refine(sessionId: string, body: RefineBody): Promise<TracePayload>;
}

async function parse(resp: Response): Promise<unknown> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) throw new ApiError(resp.status, body);
  return body;
}

export function makeApi(baseUrl: string, fetchImpl: typeof fetch = fetch): ApiClient {
  const url = (path: string) => `${baseUrl.replace(/\/$/, "")}${path}`;
  return {
    async createSession(query, image) {
      const resp = await fetchImpl(url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ query, image }),
      });
      return (await parse(resp)) as { session_id: string; outcome: string };
    },
    async getTrace(sessionId) {
      const resp = await fetchImpl(url(`/sessions/${sessionId}/trace`));
      return (await parse(resp)) as TracePayload;
    },
    async refine(sessionId, body) {
      const resp = await fetchImpl(url(`/sessions/${sessionId}/refine`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      return (await parse(resp)) as TracePayload;
    },
  };
}
