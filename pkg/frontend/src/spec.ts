// Pending-scenario state. The override list IS the source of truth: sliders
// mirror it, export serializes it verbatim, and import replaces it, so
// export/import round-trips bit for bit.

import type {
  ModelPayload,
  ModelRule,
  Override,
  PremiseLiteral,
  ScenarioSpec,
} from "./types.js";

export interface PendingState {
  name: string;
  overrides: Override[];
  crisisLikelihood: number | null;
}

export function emptyState(name = "scenario"): PendingState {
  return { name, overrides: [], crisisLikelihood: null };
}

export function exportSpec(state: PendingState): ScenarioSpec {
  return {
    name: state.name,
    overrides: state.overrides.map((o) => ({ ...o })),
    crisis_likelihood: state.crisisLikelihood,
  };
}

export function importSpec(spec: ScenarioSpec): PendingState {
  return {
    name: spec.name,
    overrides: spec.overrides.map((o) => ({ ...o })),
    crisisLikelihood: spec.crisis_likelihood ?? null,
  };
}

function without(overrides: Override[], ruleId: string, action?: Override["action"]): Override[] {
  return overrides.filter(
    (o) => !(o.rule_id === ruleId && (action === undefined || o.action === action))
  );
}

/** Slider moved: pin the rule at explicit points, or drop the override when
 * it returns to the baseline value. */
export function setPoints(
  state: PendingState,
  ruleId: string,
  points: number,
  baselinePoints: number
): PendingState {
  const overrides = without(state.overrides, ruleId);
  if (points !== baselinePoints) {
    overrides.push({ rule_id: ruleId, action: "set_points", points });
  }
  return { ...state, overrides };
}

export function setDisabled(state: PendingState, ruleId: string, disabled: boolean): PendingState {
  const overrides = without(state.overrides, ruleId);
  if (disabled) {
    overrides.push({ rule_id: ruleId, action: "disable" });
  }
  return { ...state, overrides };
}

export function setPremise(
  state: PendingState,
  ruleId: string,
  premise: PremiseLiteral[] | null
): PendingState {
  const overrides = without(state.overrides, ruleId, "set_premise");
  if (premise !== null && premise.length > 0) {
    overrides.push({ rule_id: ruleId, action: "set_premise", premise });
  }
  return { ...state, overrides };
}

export function setCrisisLikelihood(state: PendingState, q: number | null): PendingState {
  return { ...state, crisisLikelihood: q };
}

export function reset(state: PendingState): PendingState {
  return emptyState(state.name);
}

export function hasOverrides(state: PendingState): boolean {
  return state.overrides.length > 0;
}

/** Control-state points implied by the pending overrides (display only:
 * risk numbers always come from the service). */
export function effectivePoints(state: PendingState, rule: ModelRule): number {
  let points = rule.points;
  for (const o of state.overrides) {
    if (o.rule_id !== rule.id) continue;
    if (o.action === "disable") points = 0;
    else if (o.action === "set_points" && o.points !== undefined) points = o.points;
    else if (o.action === "scale_points" && o.factor !== undefined) points = points * o.factor;
  }
  return points;
}

export function isDisabled(state: PendingState, ruleId: string): boolean {
  let disabled = false;
  for (const o of state.overrides) {
    if (o.rule_id !== ruleId) continue;
    if (o.action === "disable") disabled = true;
    else if (o.action === "set_points" || o.action === "scale_points") disabled = false;
  }
  return disabled;
}

export function premiseOverride(state: PendingState, ruleId: string): PremiseLiteral[] | null {
  for (const o of state.overrides) {
    if (o.rule_id === ruleId && o.action === "set_premise" && o.premise) return o.premise;
  }
  return null;
}

export interface ClientValidation {
  ok: boolean;
  problems: string[];
}

/** Cheap pre-flight checks (finite numbers, known rule ids); the service
 * remains the authority and reports field-level errors on 400. */
export function validateAgainstModel(state: PendingState, model: ModelPayload): ClientValidation {
  const known = new Set(model.rules.map((r) => r.id));
  const problems: string[] = [];
  for (const o of state.overrides) {
    if (!known.has(o.rule_id)) problems.push(`unknown rule id ${o.rule_id}`);
    if (o.action === "set_points" && !(o.points !== undefined && Number.isFinite(o.points))) {
      problems.push(`${o.rule_id}: points must be a finite number`);
    }
    if (o.action === "scale_points" && !(o.factor !== undefined && Number.isFinite(o.factor))) {
      problems.push(`${o.rule_id}: factor must be a finite number`);
    }
    if (o.action === "set_premise" && (!o.premise || o.premise.length === 0)) {
      problems.push(`${o.rule_id}: premise must be non-empty`);
    }
  }
  const q = state.crisisLikelihood;
  if (q !== null && !(Number.isFinite(q) && q >= 0 && q <= 1)) {
    problems.push("crisis likelihood must lie in [0, 1]");
  }
  return { ok: problems.length === 0, problems };
}

/** Parse a premise editor string like "dti>=43 & !cscore<706" into literals
 * ("!" negates the expected bit). Returns null for an empty editor. */
export function parsePremiseText(text: string): PremiseLiteral[] | null {
  const trimmed = text.trim();
  if (trimmed === "") return null;
  return trimmed.split("&").map((part) => {
    const token = part.trim();
    if (token.startsWith("!")) return { feature: token.slice(1).trim(), expected: false };
    return { feature: token, expected: true };
  });
}

export function premiseText(premise: PremiseLiteral[] | null): string {
  if (premise === null) return "";
  return premise.map((l) => (l.expected ? l.feature : `!${l.feature}`)).join(" & ");
}
