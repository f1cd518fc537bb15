// Pure presentation helpers, kept DOM-free so they unit-test in node.

import type { LegalPair, PairProb } from "./types.js";

export const SKILLS = [
  "small_heal",
  "big_heal",
  "HOT",
  "poison_abol",
  "malediction_abol",
  "buff_armor",
  "regen_mana",
  "small_dd",
  "big_dd",
  "DOT",
  "debuff_armor",
  "root",
] as const;

export const CLASS_ICONS: Record<string, string> = {
  Tank: "\u{1F6E1}", // shield
  Contact: "⚔️", // crossed swords
  Ranged: "\u{1F3F9}", // bow
  Healer: "✚", // heavy cross
};

export const DELTA_ARROWS: Record<string, string> = {
  minus: "↓",
  zero: "·",
  plus: "↑",
};

export const ZONES = ["Contact", "Close", "Far", "VeryFar"] as const;

/** "0.3052" -> "30.5%"; values below the display grain render as "0%". */
export function pct(p: number): string {
  const value = p * 100;
  if (value > 0 && value < 0.1) return "<0.1%";
  return `${value.toFixed(1)}%`;
}

/** Probability to a CSS percentage width, clamped to [0, 100]. */
export function barWidth(p: number): string {
  const w = Math.max(0, Math.min(100, p * 100));
  return `${w.toFixed(2)}%`;
}

export function legalKey(skill: string, target: string): string {
  return `${skill}|${target}`;
}

export function legalSet(legal: LegalPair[]): Set<string> {
  return new Set(legal.map(([skill, target]) => legalKey(skill, target)));
}

/** Joint probabilities normalized against the grid maximum for the heat overlay. */
export function heatAlpha(prob: number, maxProb: number): number {
  if (maxProb <= 0 || prob <= 0) return 0;
  return Math.min(1, prob / maxProb);
}

export function pairHeatMap(pairs: PairProb[]): Map<string, number> {
  const map = new Map<string, number>();
  const max = pairs.length ? Math.max(...pairs.map((p) => p.prob)) : 0;
  for (const pair of pairs) {
    map.set(legalKey(pair.skill, pair.target), heatAlpha(pair.prob, max));
  }
  return map;
}

/** Resist value to badge letters: "FireIce" -> ["F", "I"]. */
export function resistBadges(resists: string): string[] {
  if (resists === "Nothing") return [];
  if (resists === "All") return ["F", "I", "N"];
  const out: string[] = [];
  if (resists.includes("Fire")) out.push("F");
  if (resists.includes("Ice")) out.push("I");
  if (resists.includes("Nat")) out.push("N");
  return out;
}

export function sortedTargetProbs(
  probs: Record<string, number>,
  order: string[],
): Array<[string, number]> {
  return order.map((id) => [id, probs[id] ?? 0]);
}
