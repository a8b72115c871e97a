// Wire types of the /v1 JSON API. Field names match the service payloads
// exactly; the UI renders these numbers as served and never recomputes them.

export interface ModelRule {
  id: string;
  label: string;
  weight: number;
  points: number;
  coverage: number;
  impact: number;
  is_intercept: boolean;
}

export interface ModelPayload {
  scale_a: number;
  mode: string;
  n_records: number;
  band_variable: string | null;
  band_cuts: number[];
  rules: ModelRule[];
}

export type OverrideAction = "set_points" | "scale_points" | "disable" | "set_premise";

export interface PremiseLiteral {
  feature: string;
  expected: boolean;
}

export interface Override {
  rule_id: string;
  action: OverrideAction;
  points?: number;
  factor?: number;
  premise?: PremiseLiteral[];
}

export interface ScenarioSpec {
  name: string;
  overrides: Override[];
  crisis_likelihood: number | null;
}

export interface ScenarioBandRow {
  band: string;
  count: number;
  observed: number | null;
  base: number | null;
  corrected: number | null;
  scenario: number | null;
  expected: number | null;
}

export interface RuleDelta {
  rule_id: string;
  label: string;
  baseline_points: number;
  scenario_points: number;
  delta: number;
}

export interface ScenarioReport {
  name: string;
  crisis_likelihood: number | null;
  overall: ScenarioBandRow;
  band_variable: string | null;
  bands: ScenarioBandRow[];
  rule_deltas: RuleDelta[];
}

export interface FieldError {
  field: string;
  message: string;
}

export interface Snapshot {
  name: string;
  spec: ScenarioSpec;
  report: ScenarioReport;
}
