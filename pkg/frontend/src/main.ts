// Bootstrap: toolbar wiring around the PlayApp controller.

import { ApiClient } from "./api.js";
import { PlayApp } from "./app.js";
import { el } from "./render.js";
import type { BotMode } from "./types.js";

function option(value: string, label?: string): HTMLOptionElement {
  const node = document.createElement("option");
  node.value = value;
  node.textContent = label ?? value;
  return node;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const toolbar = document.getElementById("toolbar")!;
  const arena = document.getElementById("arena")!;
  const app = new PlayApp(api, arena);

  const scenarioPick = document.createElement("select");
  scenarioPick.id = "scenario-pick";
  scenarioPick.append(option("A", "setup A"), option("B", "setup B"));

  const modelPick = document.createElement("select");
  modelPick.id = "model-pick";

  async function refreshModels(): Promise<void> {
    const models = await api.models();
    modelPick.replaceChildren();
    for (const m of models) {
      const label = m.records === null ? m.id : `${m.id} (${m.records} records)`;
      modelPick.append(option(m.id, label));
    }
    modelPick.value = app.modelId;
  }

  const newButton = el("button", undefined, "new session");
  newButton.id = "new-session";
  newButton.addEventListener("click", () => {
    void app.newSession(scenarioPick.value, modelPick.value);
  });

  const botPick = document.createElement("select");
  botPick.id = "bot-mode";
  botPick.append(option("off"), option("argmax"), option("sample"));
  botPick.addEventListener("change", () => {
    app.setBotMode(botPick.value as BotMode);
  });

  const stepButton = el("button", undefined, "bot step");
  stepButton.id = "bot-step";
  stepButton.addEventListener("click", () => void app.botStep());

  const autoButton = el("button", undefined, "auto");
  autoButton.id = "bot-auto";
  autoButton.addEventListener("click", () => {
    if (app.autoRunning) {
      app.stopAuto();
      autoButton.textContent = "auto";
    } else {
      app.startAuto();
      autoButton.textContent = "stop";
    }
  });

  const interval = document.createElement("input");
  interval.id = "auto-interval";
  interval.type = "range";
  interval.min = "200";
  interval.max = "3000";
  interval.step = "100";
  interval.value = String(app.autoIntervalMs);
  interval.title = "auto interval (ms)";
  interval.addEventListener("change", () => {
    app.autoIntervalMs = Number(interval.value);
    if (app.autoRunning) {
      app.stopAuto();
      app.startAuto();
    }
  });

  const posteriorButton = el("button", undefined, "show posterior");
  posteriorButton.id = "show-posterior";
  posteriorButton.addEventListener("click", () => void app.refreshPosterior());

  const pseudo = document.createElement("input");
  pseudo.id = "pseudocount";
  pseudo.type = "number";
  pseudo.min = "0";
  pseudo.step = "0.5";
  pseudo.value = "1";
  pseudo.title = "pseudocount";

  const trainButton = el("button", undefined, "train from session");
  trainButton.id = "train";
  trainButton.addEventListener("click", async () => {
    const model = await app.trainFromSession(Number(pseudo.value));
    if (model) {
      await refreshModels();
      modelPick.value = model;
    }
  });

  const logLink = el("button", undefined, "download log");
  logLink.id = "download-log";
  logLink.addEventListener("click", () => {
    if (app.sessionId) window.open(`/sessions/${app.sessionId}/log`, "_blank");
  });

  toolbar.append(
    scenarioPick, modelPick, newButton,
    el("span", "sep"), botPick, stepButton, autoButton, interval,
    el("span", "sep"), posteriorButton,
    el("span", "sep"), pseudo, trainButton, logLink,
  );

  await refreshModels();
  await app.newSession(scenarioPick.value);
}

void boot();
