// Debounced single-flight scenario submission.
//
// Rapid slider motion collapses into one trailing-edge request per quiet
// 300 ms; while a request is in flight the newest pending spec waits and is
// submitted on completion, so the final control position always reaches the
// service. Responses are applied in submission order, and a response is
// dropped if a newer one has already been applied.

import type { ScenarioReport, ScenarioSpec } from "./types.js";

export interface SubmitCallbacks {
  onReport: (report: ScenarioReport, spec: ScenarioSpec) => void;
  onError: (error: unknown, spec: ScenarioSpec) => void;
}

export class ScenarioSubmitter {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: ScenarioSpec | null = null;
  private inflight = false;
  private issued = 0;
  private applied = 0;

  constructor(
    private post: (spec: ScenarioSpec) => Promise<ScenarioReport>,
    private callbacks: SubmitCallbacks,
    private debounceMs = 300
  ) {}

  /** Queue a spec; only the newest queued spec is ever submitted. */
  schedule(spec: ScenarioSpec): void {
    this.pending = spec;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.flush();
    }, this.debounceMs);
  }

  /** Submit immediately, bypassing the debounce (used for initial load). */
  submitNow(spec: ScenarioSpec): void {
    this.pending = spec;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    void this.flush();
  }

  get busy(): boolean {
    return this.inflight;
  }

  private async flush(): Promise<void> {
    if (this.inflight || this.pending === null) return;
    const spec = this.pending;
    this.pending = null;
    const id = ++this.issued;
    this.inflight = true;
    try {
      const report = await this.post(spec);
      if (id > this.applied) {
        this.applied = id;
        this.callbacks.onReport(report, spec);
      }
    } catch (error) {
      this.callbacks.onError(error, spec);
    } finally {
      this.inflight = false;
      if (this.pending !== null) void this.flush();
    }
  }
}
