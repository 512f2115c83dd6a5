// Typed client for the session service /v1 API. Every number the
// console displays comes from these responses; the client never
// computes utilities itself.

export type WarningDoc = {
  kind: "PREVALENT_INCONSISTENCY" | "REGRET_RISK" | "SUSPECT_ITEM";
  message: string;
  subject: string[];
  evidence: Record<string, unknown>;
  directive: "CONFIRM" | "INFORM" | "HIGHLIGHT";
};

export type OfferResponse = {
  choice_set_id: string;
  items: string[];
  warnings: WarningDoc[];
  plan?: {
    choice_set: string[];
    predicted_winner: string;
    safety: Record<string, unknown>;
    alternatives_considered: number;
  };
};

export type SubmitResponse = {
  warnings: WarningDoc[];
  committed: boolean;
  observation?: number;
};

export type EstimateDoc = {
  catalog: string[];
  labels?: Record<string, string> | null;
  entries: number[][];
  margin: number;
  violated: unknown[];
};

export type ReportDoc = {
  flags: Array<Record<string, unknown>>;
  regret_risk: number;
  suspects: Array<{ item: string; n_users: number; lift: number }>;
};

export type HistoryEntry = {
  index: number;
  space: string[];
  chosen: string;
  at: string;
  retracted: boolean;
  rating?: number;
};

export type MatrixDoc = {
  catalog: string[];
  labels?: Record<string, string>;
  entries: number[][];
};

export type AnalyzeResponse = { table: Record<string, number>; winner: string };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const headers = init?.body ? { "content-type": "application/json" } : undefined;
  const response = await globalThis.fetch(`${base}${path}`, { headers, ...init });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const code = typeof body.code === "string" ? body.code : "http_error";
    const message = typeof body.message === "string" ? body.message : response.statusText;
    throw new ApiError(response.status, code, message);
  }
  return body as T;
}

export class SessionApi {
  constructor(readonly base: string = "") {}

  createSession(
    catalog: string[],
    labels?: Record<string, string>,
    config?: Record<string, unknown>,
  ): Promise<{ session_id: string; config: Record<string, unknown> }> {
    return request(this.base, "/v1/sessions", {
      method: "POST",
      body: JSON.stringify({ catalog, labels, config }),
    });
  }

  offerItems(sessionId: string, items: string[]): Promise<OfferResponse> {
    return request(this.base, `/v1/sessions/${sessionId}/choice-sets`, {
      method: "POST",
      body: JSON.stringify({ items }),
    });
  }

  offerAdaptive(
    sessionId: string,
    pool: string[],
    k: number,
    required?: string[],
    protect?: string,
  ): Promise<OfferResponse> {
    return request(this.base, `/v1/sessions/${sessionId}/choice-sets`, {
      method: "POST",
      body: JSON.stringify({ pool, k, required, protect }),
    });
  }

  submitChoice(
    sessionId: string,
    choiceSetId: string,
    chosen: string,
    commit: boolean,
  ): Promise<SubmitResponse> {
    return request(this.base, `/v1/sessions/${sessionId}/choices`, {
      method: "POST",
      body: JSON.stringify({ choice_set_id: choiceSetId, chosen, commit }),
    });
  }

  retract(sessionId: string, observation: number): Promise<{ ok: boolean }> {
    return request(this.base, `/v1/sessions/${sessionId}/retractions`, {
      method: "POST",
      body: JSON.stringify({ observation }),
    });
  }

  getEstimate(sessionId: string): Promise<EstimateDoc> {
    return request(this.base, `/v1/sessions/${sessionId}/estimate`);
  }

  getReport(sessionId: string): Promise<ReportDoc> {
    return request(this.base, `/v1/sessions/${sessionId}/report`);
  }

  getHistory(sessionId: string): Promise<{ observations: HistoryEntry[] }> {
    return request(this.base, `/v1/sessions/${sessionId}/history`);
  }

  analyze(matrix: MatrixDoc, space: string[]): Promise<AnalyzeResponse> {
    return request(this.base, "/v1/analyze", {
      method: "POST",
      body: JSON.stringify({ matrix, space }),
    });
  }
}
