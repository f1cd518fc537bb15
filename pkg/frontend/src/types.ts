// Documents exactly as the session service emits them. The UI renders these
// verbatim: no probability or game-rule math happens client-side.

export type LegalPair = [skill: string, target: string];

export interface CharacterDoc {
  id: string;
  ally: boolean;
  class: string;
  resists: string;
  hp: number;
  hp_max: number;
  distance_m: number;
  hp_level: number;
  distance: string;
  delta_hp: "minus" | "zero" | "plus";
  imminent_death: boolean;
}

export interface DruidDoc {
  id: string;
  mana: number;
  mana_max: number;
  cooldowns: Record<string, number>;
}

export interface StateDoc {
  session: string;
  tick: number;
  status: "running" | "finished";
  outcome: string | null;
  model: string;
  prev_target: string | null;
  characters: CharacterDoc[];
  druid: DruidDoc | null;
  legal: LegalPair[];
  replay_ok?: boolean;
}

export interface PairProb {
  target: string;
  skill: string;
  prob: number;
}

export interface PosteriorDoc {
  targets: string[];
  target_probs: Record<string, number>;
  top_targets: string[];
  skills_by_target: Record<string, Record<string, number> | null>;
  top_pairs: PairProb[];
  legal: LegalPair[];
}

export interface ActionResponse {
  events: EventDoc[];
  state: StateDoc;
}

export interface BotStepResponse {
  action: { skill: string; target: string };
  posterior: PosteriorDoc;
  events: EventDoc[];
  state: StateDoc;
}

export interface EventDoc {
  type: string;
  source?: string;
  target?: string;
  skill?: string;
  name?: string;
  amount?: number;
  [key: string]: unknown;
}

export interface TrainReport {
  records: number;
  pseudocount: number;
  coverage: Record<string, number>;
  persistence_observations: number;
  learned_persistence: number;
}

export interface ModelEntry {
  id: string;
  records: number | null;
}

export type BotMode = "off" | "argmax" | "sample";
