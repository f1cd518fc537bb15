// Session controller: owns the current state/posterior documents, enforces a
// single in-flight mutating request, and re-renders everything from server
// responses (non-optimistic by design).

import { ApiClient, ApiError } from "./api.js";
import { el, renderBoard, renderDruidPanel, renderGrid, renderPosterior } from "./render.js";
import type { BotMode, PosteriorDoc, StateDoc, TrainReport } from "./types.js";

export interface AppOptions {
  /** ms between showing the bot's posterior and applying its action. */
  revealDelayMs?: number;
  /** ms between auto-steps. */
  autoIntervalMs?: number;
}

export class PlayApp {
  sessionId: string | null = null;
  state: StateDoc | null = null;
  posterior: PosteriorDoc | null = null;
  botMode: BotMode = "off";
  modelId = "default";
  lastReport: TrainReport | null = null;
  notice = "";

  private mutating = false;
  private autoTimer: ReturnType<typeof setInterval> | null = null;
  private readonly revealDelayMs: number;
  autoIntervalMs: number;

  constructor(
    readonly api: ApiClient,
    readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    this.revealDelayMs = options.revealDelayMs ?? 350;
    this.autoIntervalMs = options.autoIntervalMs ?? 900;
  }

  async newSession(scenario: string, model?: string): Promise<void> {
    this.stopAuto();
    const doc = await this.api.createSession(scenario, model ?? this.modelId);
    this.sessionId = doc.id;
    this.state = doc.state;
    this.posterior = null;
    this.notice = "";
    this.render();
  }

  async refreshState(): Promise<void> {
    if (!this.sessionId) return;
    this.state = await this.api.state(this.sessionId);
    this.render();
  }

  async refreshPosterior(): Promise<void> {
    if (!this.sessionId) return;
    this.posterior = await this.api.posterior(this.sessionId);
    this.render();
  }

  /** Human turn: POST the clicked cell, re-render from the response. */
  async playTurn(skill: string, target: string): Promise<void> {
    if (!this.sessionId || !this.state || this.mutating) return;
    if (this.state.status !== "running") return;
    this.mutating = true;
    try {
      const res = await this.api.action(this.sessionId, skill, target);
      this.state = res.state;
      this.notice = "";
      this.render();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.notice = `stale cell: (${skill}, ${target}) is no longer legal`;
        await this.refreshStateAndFlash(skill, target);
      } else if (err instanceof ApiError && err.status === 410) {
        this.notice = "session finished";
        await this.refreshState();
      } else {
        throw err;
      }
    } finally {
      this.mutating = false;
    }
  }

  private async refreshStateAndFlash(skill: string, target: string): Promise<void> {
    await this.refreshState();
    const cell = this.root.querySelector<HTMLElement>(
      `td[data-skill="${skill}"][data-target="${target}"]`,
    );
    cell?.classList.add("flash");
  }

  /** One bot turn: show the posterior that justified the choice first,
   * then apply the returned state after the reveal delay. */
  async botStep(): Promise<boolean> {
    if (!this.sessionId || !this.state || this.mutating) return false;
    if (this.state.status !== "running" || this.botMode === "off") return false;
    this.mutating = true;
    try {
      const res = await this.api.botStep(this.sessionId, this.botMode);
      this.posterior = res.posterior;
      this.notice = `bot: ${res.action.skill} on ${res.action.target}`;
      this.render();
      await sleep(this.revealDelayMs);
      this.state = res.state;
      this.render();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const detail = err.detail as { idle?: boolean; posterior?: PosteriorDoc };
        this.notice = "bot waits";
        if (detail && detail.posterior) this.posterior = detail.posterior;
        await this.refreshState();
        return true;
      }
      if (err instanceof ApiError && err.status === 410) {
        this.notice = "session finished";
        this.stopAuto();
        await this.refreshState();
        return false;
      }
      throw err;
    } finally {
      this.mutating = false;
    }
  }

  setBotMode(mode: BotMode): void {
    this.botMode = mode;
    if (mode === "off") this.stopAuto();
    this.render();
  }

  startAuto(): void {
    if (this.autoTimer || this.botMode === "off") return;
    this.autoTimer = setInterval(() => {
      void this.botStep();
      if (this.state && this.state.status !== "running") this.stopAuto();
    }, this.autoIntervalMs);
    this.render();
  }

  stopAuto(): void {
    if (this.autoTimer) {
      clearInterval(this.autoTimer);
      this.autoTimer = null;
    }
  }

  get autoRunning(): boolean {
    return this.autoTimer !== null;
  }

  /** Train a model from this session's log and select it for the next game. */
  async trainFromSession(pseudocount: number): Promise<string | null> {
    if (!this.sessionId) return null;
    try {
      const res = await this.api.train([this.sessionId], pseudocount);
      this.lastReport = res.report;
      this.modelId = res.model;
      this.notice =
        `trained ${res.model}: ${res.report.records} records, ` +
        `persistence ${res.report.learned_persistence.toFixed(3)}`;
      this.render();
      return res.model;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.notice = "nothing to train on: play at least one action";
        this.render();
        return null;
      }
      throw err;
    }
  }

  render(): void {
    if (!this.state) return;
    this.root.replaceChildren();

    const status = el("div", "status-line");
    status.append(
      el("span", "tick", `tick ${this.state.tick}`),
      el("span", "model-tag", `model ${this.state.model}`),
    );
    if (this.state.status === "finished") {
      const banner = el("div", `banner ${this.state.outcome}`);
      banner.textContent =
        this.state.outcome === "win" ? "victory" : `fight over: ${this.state.outcome}`;
      status.append(banner);
    }
    if (this.notice) status.append(el("span", "notice", this.notice));
    this.root.append(status);

    this.root.append(renderBoard(this.state));
    this.root.append(renderDruidPanel(this.state));
    this.root.append(
      renderGrid(this.state, this.posterior, {
        onPlay: (skill, target) => void this.playTurn(skill, target),
      }),
    );
    if (this.posterior) this.root.append(renderPosterior(this.posterior));
  }
}

function sleep(ms: number): Promise<void> {
  if (ms <= 0) return Promise.resolve();
  return new Promise((resolve) => setTimeout(resolve, ms));
}
