import { describe, expect, it } from "vitest";

import {
  SKILLS,
  barWidth,
  heatAlpha,
  legalKey,
  legalSet,
  pairHeatMap,
  pct,
  resistBadges,
  sortedTargetProbs,
} from "../src/format.js";
import type { LegalPair } from "../src/types.js";

describe("pct", () => {
  it("rounds to one decimal", () => {
    expect(pct(0.305197)).toBe("30.5%");
    expect(pct(1)).toBe("100.0%");
    expect(pct(0)).toBe("0.0%");
  });

  it("marks sub-grain probabilities instead of rounding to zero", () => {
    expect(pct(0.0004)).toBe("<0.1%");
  });
});

describe("barWidth", () => {
  it("clamps to [0, 100]", () => {
    expect(barWidth(0.5)).toBe("50.00%");
    expect(barWidth(-1)).toBe("0.00%");
    expect(barWidth(2)).toBe("100.00%");
  });
});

describe("legal sets", () => {
  const legal: LegalPair[] = [
    ["small_dd", "Lich"],
    ["small_heal", "MT"],
  ];

  it("keys by skill and target", () => {
    const set = legalSet(legal);
    expect(set.has(legalKey("small_dd", "Lich"))).toBe(true);
    expect(set.has(legalKey("small_dd", "MT"))).toBe(false);
  });
});

describe("heat overlay", () => {
  it("normalizes against the maximum", () => {
    expect(heatAlpha(0.2, 0.4)).toBe(0.5);
    expect(heatAlpha(0, 0.4)).toBe(0);
    expect(heatAlpha(0.4, 0)).toBe(0);
  });

  it("maps pairs by cell key", () => {
    const map = pairHeatMap([
      { target: "MT", skill: "big_heal", prob: 0.3 },
      { target: "Lich", skill: "small_dd", prob: 0.15 },
    ]);
    expect(map.get(legalKey("big_heal", "MT"))).toBe(1);
    expect(map.get(legalKey("small_dd", "Lich"))).toBe(0.5);
  });
});

describe("resistBadges", () => {
  it("splits combined values", () => {
    expect(resistBadges("Nothing")).toEqual([]);
    expect(resistBadges("FireIce")).toEqual(["F", "I"]);
    expect(resistBadges("IceNat")).toEqual(["I", "N"]);
    expect(resistBadges("Nature")).toEqual(["N"]);
    expect(resistBadges("All")).toEqual(["F", "I", "N"]);
  });
});

describe("skills", () => {
  it("lists the twelve druid skills in domain order", () => {
    expect(SKILLS).toHaveLength(12);
    expect(SKILLS[0]).toBe("small_heal");
    expect(SKILLS[11]).toBe("root");
  });
});

describe("sortedTargetProbs", () => {
  it("preserves roster order and defaults missing ids to zero", () => {
    const rows = sortedTargetProbs({ a: 0.7, b: 0.3 }, ["b", "a", "c"]);
    expect(rows).toEqual([
      ["b", 0.3],
      ["a", 0.7],
      ["c", 0],
    ]);
  });
});
