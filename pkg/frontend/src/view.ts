// Pure view-model builders. Every risk number in these structures is a
// verbatim value from a service payload; the only client-side arithmetic is
// differences between served numbers (snapshot compare) and the slider's
// implied-weight tooltip, which is control state, not a risk estimate.

import {
  PendingState,
  effectivePoints,
  isDisabled,
  premiseOverride,
  premiseText,
} from "./spec.js";
import type {
  ModelPayload,
  RuleDelta,
  ScenarioBandRow,
  ScenarioReport,
  Snapshot,
} from "./types.js";

export interface RuleRowView {
  id: string;
  label: string;
  baselinePoints: number;
  sliderPoints: number;
  disabled: boolean;
  premiseEditorText: string;
  premiseEdited: boolean;
  impliedWeight: number;
  coverage: number;
  impact: number;
  isIntercept: boolean;
  edited: boolean;
}

/** Rows in server order: sorted by impact with the intercept pinned last. */
export function buildRuleRows(model: ModelPayload, state: PendingState): RuleRowView[] {
  return model.rules.map((rule) => {
    const points = effectivePoints(state, rule);
    const disabled = isDisabled(state, rule.id);
    const premise = premiseOverride(state, rule.id);
    const shown = disabled ? 0 : points;
    return {
      id: rule.id,
      label: rule.label,
      baselinePoints: rule.points,
      sliderPoints: shown,
      disabled,
      premiseEditorText: premiseText(premise),
      premiseEdited: premise !== null,
      impliedWeight: 1 / (1 + Math.exp(shown / model.scale_a)),
      coverage: rule.coverage,
      impact: rule.impact,
      isIntercept: rule.is_intercept,
      edited:
        disabled || premise !== null || points !== rule.points,
    };
  });
}

export interface BandCell {
  band: string;
  count: number;
  observed: number | null;
  base: number | null;
  corrected: number | null;
  scenario: number | null;
  expected: number | null;
}

/** Band table rows straight from the report (overall row first). */
export function buildBandTable(report: ScenarioReport): BandCell[] {
  const rows: ScenarioBandRow[] = [report.overall, ...report.bands];
  return rows.map((row) => ({ ...row }));
}

export function buildDeltaTable(report: ScenarioReport): RuleDelta[] {
  return report.rule_deltas.map((row) => ({ ...row }));
}

export interface SnapshotDiffRow {
  band: string;
  a: number | null;
  b: number | null;
  delta: number | null;
}

/** Compare two stored snapshots band by band without re-querying. */
export function snapshotDiff(a: Snapshot, b: Snapshot): SnapshotDiffRow[] {
  const rowsA = new Map(buildBandTable(a.report).map((row) => [row.band, row]));
  const rowsB = new Map(buildBandTable(b.report).map((row) => [row.band, row]));
  const bands = [...new Set([...rowsA.keys(), ...rowsB.keys()])];
  return bands.map((band) => {
    const va = rowsA.get(band)?.scenario ?? null;
    const vb = rowsB.get(band)?.scenario ?? null;
    return {
      band,
      a: va,
      b: vb,
      delta: va !== null && vb !== null ? vb - va : null,
    };
  });
}

/** True when the applied spec has no overrides: scenario = corrected. */
export function scenarioEqualsCorrected(report: ScenarioReport): boolean {
  return report.rule_deltas.every((row) => row.delta === 0);
}
