import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ScenarioSubmitter } from "../src/submit.js";
import type { ScenarioReport, ScenarioSpec } from "../src/types.js";

function specNamed(name: string): ScenarioSpec {
  return { name, overrides: [], crisis_likelihood: null };
}

function reportFor(spec: ScenarioSpec): ScenarioReport {
  return {
    name: spec.name,
    crisis_likelihood: spec.crisis_likelihood,
    overall: {
      band: "all", count: 1, observed: null, base: 0.1, corrected: 0.1,
      scenario: 0.1, expected: null,
    },
    band_variable: null,
    bands: [],
    rule_deltas: [],
  };
}

describe("debounced single-flight submission", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("rapid scheduling collapses into one trailing request", async () => {
    const posted: string[] = [];
    const submitter = new ScenarioSubmitter(
      async (spec) => {
        posted.push(spec.name);
        return reportFor(spec);
      },
      { onReport: () => {}, onError: () => {} }
    );
    for (let i = 0; i < 10; i++) {
      submitter.schedule(specNamed(`v${i}`));
      vi.advanceTimersByTime(50); // quicker than the 300 ms debounce
    }
    vi.advanceTimersByTime(400);
    await vi.runAllTimersAsync();
    expect(posted).toEqual(["v9"]); // only the final position was submitted
  });

  it("keeps at most one request in flight and always submits the last spec", async () => {
    let inflight = 0;
    let peak = 0;
    const posted: string[] = [];
    let release: (() => void) | null = null;
    const submitter = new ScenarioSubmitter(
      (spec) =>
        new Promise<ScenarioReport>((resolve) => {
          posted.push(spec.name);
          inflight += 1;
          peak = Math.max(peak, inflight);
          release = () => {
            inflight -= 1;
            resolve(reportFor(spec));
          };
        }),
      { onReport: () => {}, onError: () => {} },
      10
    );
    submitter.schedule(specNamed("first"));
    await vi.advanceTimersByTimeAsync(20); // first request now in flight
    submitter.schedule(specNamed("second"));
    submitter.schedule(specNamed("third"));
    await vi.advanceTimersByTimeAsync(20); // debounce fired while busy
    expect(posted).toEqual(["first"]);
    release!();
    await vi.runAllTimersAsync();
    release!();
    await vi.runAllTimersAsync();
    expect(posted).toEqual(["first", "third"]); // newest pending won
    expect(peak).toBe(1);
  });

  it("renders only the newest completed report", async () => {
    const rendered: string[] = [];
    const submitter = new ScenarioSubmitter(
      async (spec) => reportFor(spec),
      { onReport: (report) => rendered.push(report.name), onError: () => {} },
      10
    );
    submitter.schedule(specNamed("a"));
    await vi.runAllTimersAsync();
    submitter.schedule(specNamed("b"));
    await vi.runAllTimersAsync();
    expect(rendered).toEqual(["a", "b"]);
  });

  it("failures surface through onError and do not wedge the queue", async () => {
    const errors: string[] = [];
    const rendered: string[] = [];
    let fail = true;
    const submitter = new ScenarioSubmitter(
      async (spec) => {
        if (fail) throw new Error("boom");
        return reportFor(spec);
      },
      {
        onReport: (report) => rendered.push(report.name),
        onError: (error) => errors.push(String(error)),
      },
      10
    );
    submitter.schedule(specNamed("broken"));
    await vi.runAllTimersAsync();
    expect(errors).toHaveLength(1);
    fail = false;
    submitter.schedule(specNamed("recovered"));
    await vi.runAllTimersAsync();
    expect(rendered).toEqual(["recovered"]);
  });
});
