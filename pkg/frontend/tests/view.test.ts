import { describe, expect, it } from "vitest";

import { emptyState, importSpec } from "../src/spec.js";
import { buildRuleRows, snapshotDiff } from "../src/view.js";
import type { Snapshot } from "../src/types.js";
import { modelPayload, report, spec } from "./helpers.js";

const model = modelPayload();

describe("rule table view", () => {
  it("keeps the served impact order with the intercept pinned last", () => {
    const rows = buildRuleRows(model, emptyState());
    expect(rows).toHaveLength(16);
    expect(rows[rows.length - 1]!.isIntercept).toBe(true);
    const impacts = rows.slice(0, -1).map((r) => r.impact);
    expect(impacts).toEqual([...impacts].sort((a, b) => b - a));
  });

  it("shows the published low-score rule at its -1.98 points", () => {
    const rows = buildRuleRows(model, emptyState());
    const r01 = rows.find((r) => r.id === "R-01")!;
    expect(r01.baselinePoints).toBeCloseTo(-1.98, 9);
    expect(r01.sliderPoints).toBeCloseTo(-1.98, 9);
    expect(r01.label).toBe("cscore < 706");
  });

  it("tooltip weight is the logistic transform of the slider points", () => {
    const rows = buildRuleRows(model, emptyState());
    for (const row of rows) {
      expect(row.impliedWeight).toBeCloseTo(
        1 / (1 + Math.exp(row.sliderPoints / model.scale_a)),
        12
      );
    }
  });

  it("a disabled rule reads 0 points", () => {
    const state = importSpec(spec("disable_r01"));
    const row = buildRuleRows(model, state).find((r) => r.id === "R-01")!;
    expect(row.disabled).toBe(true);
    expect(row.sliderPoints).toBe(0);
  });
});

describe("snapshot comparison", () => {
  const snapA: Snapshot = { name: "A", spec: spec("noop"), report: report("noop") };
  const snapB: Snapshot = {
    name: "B",
    spec: spec("disable_r01"),
    report: report("disable_r01"),
  };

  it("identical snapshots diff to zero everywhere", () => {
    const rows = snapshotDiff(snapA, { ...snapA, name: "A2" });
    expect(rows.length).toBeGreaterThan(0);
    for (const row of rows) {
      expect(row.delta).toBe(0);
    }
  });

  it("disabling the low-score rule concentrates the delta in its band", () => {
    const rows = snapshotDiff(snapA, snapB);
    const byBand = new Map(rows.map((r) => [r.band, r.delta!]));
    const lowBand = Math.abs(byBand.get("cscore<706")!);
    const highBand = Math.abs(byBand.get("cscore>=706")!);
    expect(lowBand).toBeGreaterThan(0);
    // R-01 only triggers below the cut, so the other band moves far less
    expect(lowBand).toBeGreaterThan(10 * highBand);
  });

  it("any pair of three snapshots is comparable", () => {
    const snapC: Snapshot = { name: "C", spec: spec("scale_r13"), report: report("scale_r13") };
    const snaps = [snapA, snapB, snapC];
    for (const x of snaps) {
      for (const y of snaps) {
        const rows = snapshotDiff(x, y);
        expect(rows.every((r) => typeof r.band === "string")).toBe(true);
      }
    }
  });

  it("deltas are pure differences of served numbers", () => {
    const rows = snapshotDiff(snapA, snapB);
    const overall = rows.find((r) => r.band === "all")!;
    expect(overall.delta).toBe(
      snapB.report.overall.scenario! - snapA.report.overall.scenario!
    );
  });
});
