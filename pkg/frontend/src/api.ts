// Thin typed client for the session service. One method per route.

import type {
  ActionResponse,
  BotStepResponse,
  ModelEntry,
  PosteriorDoc,
  StateDoc,
  TrainReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.base + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    let parsed: unknown = text;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      // non-JSON body (e.g. the log download) stays a string
    }
    if (!res.ok) {
      const detail =
        parsed && typeof parsed === "object" && "detail" in parsed
          ? (parsed as { detail: unknown }).detail
          : parsed;
      throw new ApiError(res.status, detail);
    }
    return parsed as T;
  }

  createSession(scenario: string, model?: string, seed?: number) {
    const body: Record<string, unknown> = { scenario };
    if (model) body.model = model;
    if (seed !== undefined) body.seed = seed;
    return this.request<{ id: string; state: StateDoc }>("POST", "/sessions", body);
  }

  state(sessionId: string) {
    return this.request<StateDoc>("GET", `/sessions/${sessionId}/state`);
  }

  posterior(sessionId: string) {
    return this.request<PosteriorDoc>("GET", `/sessions/${sessionId}/posterior`);
  }

  action(sessionId: string, skill: string, target: string) {
    return this.request<ActionResponse>("POST", `/sessions/${sessionId}/action`, {
      skill,
      target,
    });
  }

  botStep(sessionId: string, mode: "argmax" | "sample") {
    return this.request<BotStepResponse>("POST", `/sessions/${sessionId}/bot-step`, {
      mode,
    });
  }

  train(sessionIds: string[], pseudocount: number) {
    return this.request<{ model: string; report: TrainReport }>("POST", "/train", {
      sessions: sessionIds,
      pseudocount,
    });
  }

  models() {
    return this.request<ModelEntry[]>("GET", "/models");
  }

  downloadLog(sessionId: string) {
    return this.request<string>("GET", `/sessions/${sessionId}/log`);
  }
}
