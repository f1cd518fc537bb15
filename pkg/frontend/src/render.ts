// DOM builders for the board, the action grid, and the posterior panel.
// Everything renders from server documents; no optimistic state.

import {
  CLASS_ICONS,
  DELTA_ARROWS,
  SKILLS,
  ZONES,
  barWidth,
  legalKey,
  legalSet,
  pairHeatMap,
  pct,
  resistBadges,
} from "./format.js";
import type { PosteriorDoc, StateDoc } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBoard(state: StateDoc): HTMLElement {
  const board = el("div", "board");
  for (const c of state.characters) {
    const card = el("div", `card ${c.ally ? "ally" : "foe"}`);
    card.dataset.id = c.id;
    if (c.imminent_death) card.classList.add("dying");

    const head = el("div", "card-head");
    head.append(
      el("span", "class-icon", CLASS_ICONS[c.class] ?? "?"),
      el("span", "name", c.id),
      el("span", "delta", DELTA_ARROWS[c.delta_hp] ?? "?"),
    );
    if (c.imminent_death) head.append(el("span", "skull", "☠️"));
    card.append(head);

    const hpBar = el("div", "hp-bar");
    const fill = el("div", "hp-fill");
    fill.style.width = barWidth(c.hp / c.hp_max);
    hpBar.append(fill, el("span", "hp-label", `${c.hp}/${c.hp_max} (L${c.hp_level})`));
    card.append(hpBar);

    const zones = el("div", "zone-band");
    for (const zone of ZONES) {
      const seg = el("span", "zone-seg", zone === c.distance ? zone : "");
      if (zone === c.distance) seg.classList.add("here");
      zones.append(seg);
    }
    card.append(zones);

    const badges = el("div", "badges");
    for (const b of resistBadges(c.resists)) {
      badges.append(el("span", `badge resist-${b}`, b));
    }
    if (state.prev_target === c.id) badges.append(el("span", "badge prev", "prev"));
    card.append(badges);
    board.append(card);
  }
  return board;
}

export function renderDruidPanel(state: StateDoc): HTMLElement {
  const panel = el("div", "druid-panel");
  if (!state.druid) return panel;
  const mana = el("div", "mana-bar");
  const fill = el("div", "mana-fill");
  fill.style.width = barWidth(state.druid.mana / state.druid.mana_max);
  mana.append(
    fill,
    el("span", "mana-label", `mana ${state.druid.mana}/${state.druid.mana_max}`),
  );
  panel.append(mana);
  const cds = el("div", "cooldowns");
  for (const [skill, ticks] of Object.entries(state.druid.cooldowns)) {
    cds.append(el("span", "badge cooldown", `${skill} ${ticks}`));
  }
  panel.append(cds);
  return panel;
}

export interface GridCallbacks {
  onPlay: (skill: string, target: string) => void;
}

export function renderGrid(
  state: StateDoc,
  posterior: PosteriorDoc | null,
  callbacks: GridCallbacks,
): HTMLElement {
  const legal = legalSet(state.legal);
  const heat = posterior ? pairHeatMap(posterior.top_pairs) : new Map<string, number>();
  const table = el("table", "grid");
  const head = el("tr");
  head.append(el("th", "corner", "skill \\ target"));
  for (const c of state.characters) {
    head.append(el("th", c.ally ? "ally" : "foe", c.id));
  }
  table.append(head);
  for (const skill of SKILLS) {
    const row = el("tr");
    row.append(el("th", "skill-name", skill));
    for (const c of state.characters) {
      const key = legalKey(skill, c.id);
      const cell = el("td", "cell");
      cell.dataset.skill = skill;
      cell.dataset.target = c.id;
      const enabled = legal.has(key) && state.status === "running";
      if (enabled) {
        cell.classList.add("enabled");
        const alpha = heat.get(key) ?? 0;
        if (alpha > 0) {
          cell.style.background = `rgba(120, 90, 220, ${(0.15 + 0.5 * alpha).toFixed(3)})`;
        }
        cell.addEventListener("click", () => callbacks.onPlay(skill, c.id));
      } else {
        cell.classList.add("disabled");
      }
      row.append(cell);
    }
    table.append(row);
  }
  return table;
}

export function renderPosterior(doc: PosteriorDoc): HTMLElement {
  const panel = el("div", "posterior");
  const targets = el("div", "posterior-targets");
  targets.append(el("h3", undefined, "target posterior"));
  for (const id of doc.targets) {
    const p = doc.target_probs[id] ?? 0;
    const row = el("div", "bar-row");
    row.dataset.target = id;
    const bar = el("div", "bar");
    bar.style.width = barWidth(p);
    row.append(el("span", "bar-label", id), bar, el("span", "bar-value", pct(p)));
    targets.append(row);
  }
  panel.append(targets);

  const skills = el("div", "posterior-skills");
  for (const target of doc.top_targets) {
    const dist = doc.skills_by_target[target];
    if (!dist) continue;
    const block = el("div", "skill-block");
    block.dataset.target = target;
    block.append(el("h4", undefined, `skills | ${target}`));
    for (const skill of SKILLS) {
      const p = dist[skill] ?? 0;
      const row = el("div", "bar-row");
      row.dataset.skill = skill;
      const bar = el("div", "bar skill");
      bar.style.width = barWidth(p);
      row.append(el("span", "bar-label", skill), bar, el("span", "bar-value", pct(p)));
      block.append(row);
    }
    skills.append(block);
  }
  panel.append(skills);

  const pairs = el("div", "posterior-pairs");
  pairs.append(el("h3", undefined, "top pairs"));
  const list = el("ol");
  for (const pair of doc.top_pairs) {
    list.append(
      el("li", "pair", `${pair.target} × ${pair.skill} — ${pct(pair.prob)}`),
    );
  }
  pairs.append(list);
  panel.append(pairs);
  return panel;
}
