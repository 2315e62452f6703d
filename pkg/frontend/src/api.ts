/** Thin typed client for the session service. */

import type { DatasetInfoJson, FlipJson, RecordJson, SessionJson } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { "content-type": "application/json" },
      ...init,
    });
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly base: string) {}

  private url(path: string): string {
    return `${this.base.replace(/\/$/, "")}${path}`;
  }

  createSession(body: {
    dataset: string;
    alpha?: number;
    eta?: number;
    policy?: Record<string, unknown>;
    id?: string;
  }): Promise<SessionJson> {
    return request(this.url("/sessions"), { method: "POST", body: JSON.stringify(body) });
  }

  getSession(id: string): Promise<SessionJson> {
    return request(this.url(`/sessions/${id}`));
  }

  postVisualization(
    id: string,
    viz: Record<string, unknown>,
  ): Promise<{ descriptive: boolean; record: RecordJson | null; wealth: number }> {
    return request(this.url(`/sessions/${id}/visualizations`), {
      method: "POST",
      body: JSON.stringify(viz),
    });
  }

  addHypothesis(
    id: string,
    spec: Record<string, unknown>,
  ): Promise<{ record: RecordJson; wealth: number }> {
    return request(this.url(`/sessions/${id}/hypotheses`), {
      method: "POST",
      body: JSON.stringify(spec),
    });
  }

  override(
    id: string,
    recordId: number,
    spec: Record<string, unknown>,
  ): Promise<{ record: RecordJson; wealth: number }> {
    return request(this.url(`/sessions/${id}/hypotheses/${recordId}`), {
      method: "PUT",
      body: JSON.stringify(spec),
    });
  }

  remove(id: string, recordId: number): Promise<SessionJson> {
    return request(this.url(`/sessions/${id}/hypotheses/${recordId}`), {
      method: "DELETE",
    });
  }

  star(
    id: string,
    recordId: number,
    on: boolean,
  ): Promise<{ record: RecordJson; warning: string | null }> {
    return request(this.url(`/sessions/${id}/hypotheses/${recordId}/star`), {
      method: "POST",
      body: JSON.stringify({ on }),
    });
  }

  flip(id: string, recordId: number, direction: "to_reject" | "to_accept"): Promise<FlipJson> {
    return request(this.url(`/sessions/${id}/hypotheses/${recordId}/flip?direction=${direction}`));
  }

  datasetInfo(name: string): Promise<DatasetInfoJson> {
    return request(this.url(`/datasets/${name}`));
  }
}
