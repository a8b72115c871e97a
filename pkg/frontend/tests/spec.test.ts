import { describe, expect, it } from "vitest";

import {
  effectivePoints,
  emptyState,
  exportSpec,
  hasOverrides,
  importSpec,
  isDisabled,
  parsePremiseText,
  premiseText,
  reset,
  setCrisisLikelihood,
  setDisabled,
  setPoints,
  setPremise,
  validateAgainstModel,
} from "../src/spec.js";
import { buildRuleRows } from "../src/view.js";
import { modelPayload, spec } from "./helpers.js";

const model = modelPayload();
const r01 = model.rules.find((r) => r.id === "R-01")!;

describe("pending state", () => {
  it("slider values mirror the pending overrides exactly", () => {
    let state = emptyState();
    state = setPoints(state, "R-01", -3.5, r01.points);
    expect(state.overrides).toEqual([
      { rule_id: "R-01", action: "set_points", points: -3.5 },
    ]);
    const row = buildRuleRows(model, state).find((r) => r.id === "R-01")!;
    expect(row.sliderPoints).toBe(-3.5);
    expect(row.edited).toBe(true);
  });

  it("returning a slider to baseline removes the override", () => {
    let state = emptyState();
    state = setPoints(state, "R-01", -3.5, r01.points);
    state = setPoints(state, "R-01", r01.points, r01.points);
    expect(state.overrides).toEqual([]);
    expect(hasOverrides(state)).toBe(false);
  });

  it("disable zeroes the displayed points and greys the row", () => {
    let state = emptyState();
    state = setDisabled(state, "R-01", true);
    const row = buildRuleRows(model, state).find((r) => r.id === "R-01")!;
    expect(row.disabled).toBe(true);
    expect(row.sliderPoints).toBe(0);
    state = setDisabled(state, "R-01", false);
    expect(isDisabled(state, "R-01")).toBe(false);
  });

  it("reset restores every baseline", () => {
    let state = emptyState();
    state = setPoints(state, "R-01", 1.0, r01.points);
    state = setDisabled(state, "R-13", true);
    state = setCrisisLikelihood(state, 0.4);
    state = reset(state);
    expect(state.overrides).toEqual([]);
    expect(state.crisisLikelihood).toBeNull();
    const rows = buildRuleRows(model, state);
    for (const row of rows) {
      expect(row.sliderPoints).toBe(row.baselinePoints);
      expect(row.edited).toBe(false);
    }
  });

  it("imported scale_points overrides display as scaled slider values", () => {
    const state = importSpec(spec("scale_r13"));
    const r13 = model.rules.find((r) => r.id === "R-13")!;
    expect(effectivePoints(state, r13)).toBeCloseTo(r13.points * 2, 12);
  });

  it("premise overrides round-trip through the editor text", () => {
    const premise = parsePremiseText("dti>=43 & !cscore<706");
    expect(premise).toEqual([
      { feature: "dti>=43", expected: true },
      { feature: "cscore<706", expected: false },
    ]);
    let state = emptyState();
    state = setPremise(state, "R-01", premise);
    expect(premiseText(premise)).toBe("dti>=43 & !cscore<706");
    const again = exportSpec(state).overrides[0];
    expect(again).toEqual({ rule_id: "R-01", action: "set_premise", premise });
    expect(parsePremiseText("  ")).toBeNull();
  });

  it("validation flags unknown ids and non-finite numbers", () => {
    let state = emptyState();
    state = setPoints(state, "R-99", 1.0, 0.0);
    state.overrides.push({ rule_id: "R-01", action: "set_points", points: Number.NaN });
    state = setCrisisLikelihood(state, 1.5);
    const check = validateAgainstModel(state, model);
    expect(check.ok).toBe(false);
    expect(check.problems.join(" ")).toMatch(/R-99/);
    expect(check.problems.join(" ")).toMatch(/finite/);
    expect(check.problems.join(" ")).toMatch(/likelihood/);
  });

  it("export and re-import reproduce identical control state", () => {
    let state = emptyState("stress");
    state = setPoints(state, "R-01", -4.0, r01.points);
    state = setDisabled(state, "R-07", true);
    state = setCrisisLikelihood(state, 0.25);
    const roundTripped = importSpec(exportSpec(state));
    expect(roundTripped).toEqual(state);
    expect(exportSpec(roundTripped)).toEqual(exportSpec(state));
  });
});
