// Scenario-explorer bootstrap: wires the store, the debounced submitter and
// the DOM together. All displayed risk numbers originate in service payloads.

import { ApiClient, ApiError } from "./api.js";
import {
  PendingState,
  emptyState,
  exportSpec,
  hasOverrides,
  importSpec,
  parsePremiseText,
  reset,
  setCrisisLikelihood,
  setDisabled,
  setPoints,
  setPremise,
  validateAgainstModel,
} from "./spec.js";
import { ScenarioSubmitter } from "./submit.js";
import type { ModelPayload, ScenarioReport, ScenarioSpec, Snapshot } from "./types.js";
import {
  buildBandTable,
  buildDeltaTable,
  buildRuleRows,
  scenarioEqualsCorrected,
  snapshotDiff,
} from "./view.js";
import {
  renderBandChart,
  renderBandTable,
  renderClusters,
  renderDeltaTable,
  renderRuleTable,
  renderSnapshotDiff,
  renderSnapshotPicker,
  renderStatus,
  type BannerState,
} from "./render.js";

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

interface App {
  model: ModelPayload;
  state: PendingState;
  lastReport: ScenarioReport | null;
  appliedSpec: ScenarioSpec | null;
  snapshots: Snapshot[];
  banner: BannerState | null;
  busy: boolean;
}

async function boot(): Promise<void> {
  const baseInput = must("api-base") as HTMLInputElement;
  const params = new URLSearchParams(location.search);
  baseInput.value = params.get("api") ?? `${location.protocol}//${location.host}`;
  if (baseInput.value.startsWith("file:")) baseInput.value = "http://127.0.0.1:8000";
  let client = new ApiClient(baseInput.value);

  const app: App = {
    model: await client.model(),
    state: emptyState(),
    lastReport: null,
    appliedSpec: null,
    snapshots: [],
    banner: null,
    busy: false,
  };

  const submitter = new ScenarioSubmitter(
    (spec) => client.scenario(spec),
    {
      onReport: (report, spec) => {
        app.lastReport = report;
        app.appliedSpec = spec;
        app.banner = null;
        app.busy = false;
        paint();
      },
      onError: (error) => {
        app.busy = false;
        if (error instanceof ApiError && error.status === 400) {
          app.banner = { kind: "error", text: `invalid scenario: ${error.message}` };
        } else {
          app.banner = { kind: "error", text: `service unreachable (${String(error)}); retry below` };
        }
        paint(); // last good report stays on screen
      },
    }
  );

  function submit(debounced = true): void {
    const check = validateAgainstModel(app.state, app.model);
    if (!check.ok) {
      app.banner = { kind: "error", text: check.problems.join("; ") };
      paint();
      return;
    }
    app.busy = true;
    const spec = exportSpec(app.state);
    if (debounced) submitter.schedule(spec);
    else submitter.submitNow(spec);
    paint();
  }

  const handlers = {
    onPoints: (ruleId: string, points: number, baseline: number) => {
      app.state = setPoints(app.state, ruleId, points, baseline);
      submit();
    },
    onDisable: (ruleId: string, disabled: boolean) => {
      app.state = setDisabled(app.state, ruleId, disabled);
      submit();
    },
    onPremise: (ruleId: string, text: string) => {
      app.state = setPremise(app.state, ruleId, parsePremiseText(text));
      submit();
    },
    onResetRule: (ruleId: string, baseline: number) => {
      app.state = setPoints(app.state, ruleId, baseline, baseline);
      app.state = setPremise(app.state, ruleId, null);
      submit();
    },
  };

  const qSlider = must("q-slider") as HTMLInputElement;
  const qEnabled = must("q-enabled") as HTMLInputElement;
  const qValue = must("q-value");
  function syncQ(): void {
    const q = qEnabled.checked ? Number(qSlider.value) : null;
    app.state = setCrisisLikelihood(app.state, q);
    qValue.textContent = q === null ? "off" : q.toFixed(2);
    submit();
  }
  qSlider.addEventListener("input", syncQ);
  qEnabled.addEventListener("change", syncQ);

  must("reset").addEventListener("click", () => {
    app.state = reset(app.state);
    qEnabled.checked = false;
    qValue.textContent = "off";
    submit(false);
  });

  must("retry").addEventListener("click", () => submit(false));

  must("export").addEventListener("click", () => {
    const blob = new Blob([JSON.stringify(exportSpec(app.state), null, 2)], {
      type: "application/json",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `${app.state.name || "scenario"}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  });

  (must("import") as HTMLInputElement).addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const spec = JSON.parse(await file.text()) as ScenarioSpec;
      app.state = importSpec(spec);
      qEnabled.checked = app.state.crisisLikelihood !== null;
      if (app.state.crisisLikelihood !== null) {
        qSlider.value = String(app.state.crisisLikelihood);
        qValue.textContent = app.state.crisisLikelihood.toFixed(2);
      } else {
        qValue.textContent = "off";
      }
      submit(false);
    } catch (error) {
      app.banner = { kind: "error", text: `spec import failed: ${String(error)}` };
      paint();
    }
    input.value = "";
  });

  must("snapshot").addEventListener("click", () => {
    if (!app.lastReport || !app.appliedSpec) return;
    const name = (must("snapshot-name") as HTMLInputElement).value || `snapshot ${app.snapshots.length + 1}`;
    app.snapshots.push({ name, spec: app.appliedSpec, report: app.lastReport });
    paint();
  });

  const clustersMin = must("clusters-min") as HTMLInputElement;
  must("clusters-load").addEventListener("click", async () => {
    try {
      const payload = await client.clusters(Number(clustersMin.value), 2);
      renderClusters(must("clusters"), payload.quality);
    } catch (error) {
      app.banner = { kind: "error", text: `clusters failed: ${String(error)}` };
      paint();
    }
  });

  baseInput.addEventListener("change", () => {
    client = new ApiClient(baseInput.value);
    void client.model().then((model) => {
      app.model = model;
      submit(false);
    });
  });

  function paint(): void {
    renderRuleTable(must("rules"), buildRuleRows(app.model, app.state), handlers);
    const statuses: BannerState[] = [];
    if (app.banner) statuses.push(app.banner);
    if (app.busy) statuses.push({ kind: "busy", text: "evaluating…" });
    if (!hasOverrides(app.state) && app.lastReport && scenarioEqualsCorrected(app.lastReport)) {
      statuses.push({ kind: "badge", text: "scenario = corrected" });
    }
    renderStatus(must("status"), statuses);
    if (app.lastReport) {
      const bands = buildBandTable(app.lastReport);
      renderBandTable(must("bands"), bands);
      renderBandChart(must("chart"), bands);
      renderDeltaTable(must("deltas"), buildDeltaTable(app.lastReport));
    }
    renderSnapshotPicker(must("snapshot-picker"), app.snapshots, (ai, bi) => {
      const a = app.snapshots[ai];
      const b = app.snapshots[bi];
      if (a && b) renderSnapshotDiff(must("snapshot-diff"), a.name, b.name, snapshotDiff(a, b));
    });
  }

  submit(false);
}

boot().catch((error) => {
  const status = document.getElementById("status");
  if (status) {
    status.textContent = `failed to reach the service: ${String(error)} — check the API base URL`;
    status.className = "status error";
  }
});
