import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import type { ModelPayload, ScenarioReport, ScenarioSpec } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export const modelPayload = (): ModelPayload => loadFixture<ModelPayload>("model.json");
export const spec = (name: string): ScenarioSpec => loadFixture<ScenarioSpec>(`spec_${name}.json`);
export const report = (name: string): ScenarioReport =>
  loadFixture<ScenarioReport>(`report_${name}.json`);
