// DOM layer: renders view-models into the page and forwards control events.
// No business logic here; everything displayable comes from view.ts.

import { exact, pct, pts, signed } from "./format.js";
import type { ClusterQualityRow } from "./api.js";
import type { RuleRowView, BandCell, SnapshotDiffRow } from "./view.js";
import type { RuleDelta, Snapshot } from "./types.js";

export interface RuleRowHandlers {
  onPoints: (ruleId: string, points: number, baseline: number) => void;
  onDisable: (ruleId: string, disabled: boolean) => void;
  onPremise: (ruleId: string, text: string) => void;
  onResetRule: (ruleId: string, baseline: number) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRuleTable(
  container: HTMLElement,
  rows: RuleRowView[],
  handlers: RuleRowHandlers
): void {
  container.replaceChildren();
  const table = el("table", { class: "rules" });
  const head = el("tr");
  for (const title of ["Rule", "Definition", "Points", "Adjust", "ψ", "Coverage", "Impact", ""]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", { class: row.disabled ? "rule disabled" : "rule" });
    tr.appendChild(el("td", {}, row.id));

    const def = el("td");
    const defText = el("span", {}, row.label);
    def.appendChild(defText);
    if (!row.isIntercept) {
      const editor = el("input", {
        class: "premise",
        placeholder: "premise override, e.g. dti>=43 & cscore<706",
        value: row.premiseEditorText,
        title: "comma rules: feature names joined with &, prefix ! to negate",
      });
      editor.addEventListener("change", () => handlers.onPremise(row.id, editor.value));
      def.appendChild(editor);
      if (row.premiseEdited) def.appendChild(el("span", { class: "badge" }, "premise edited"));
    }
    tr.appendChild(def);

    const pointsCell = el("td", { class: "num", title: exact(row.sliderPoints) });
    pointsCell.textContent = pts(row.disabled ? 0 : row.sliderPoints);
    tr.appendChild(pointsCell);

    const control = el("td");
    const span = Math.max(3, Math.abs(row.baselinePoints) * 2.5);
    const slider = el("input", {
      type: "range",
      min: String(-span),
      max: String(span),
      step: "0.01",
      value: String(row.sliderPoints),
    });
    slider.disabled = row.disabled;
    slider.addEventListener("input", () =>
      handlers.onPoints(row.id, Number(slider.value), row.baselinePoints)
    );
    control.appendChild(slider);
    if (!row.isIntercept) {
      const toggle = el("input", { type: "checkbox", title: "disable rule (zero points)" });
      toggle.checked = row.disabled;
      toggle.addEventListener("change", () => handlers.onDisable(row.id, toggle.checked));
      control.appendChild(toggle);
    }
    if (row.edited) {
      const undo = el("button", { class: "mini", title: "restore baseline" }, "↺");
      undo.addEventListener("click", () => handlers.onResetRule(row.id, row.baselinePoints));
      control.appendChild(undo);
    }
    tr.appendChild(control);

    tr.appendChild(el("td", { class: "num", title: exact(row.impliedWeight) }, row.impliedWeight.toFixed(4)));
    tr.appendChild(el("td", { class: "num", title: exact(row.coverage) }, pct(row.coverage, 1)));
    tr.appendChild(el("td", { class: "num", title: exact(row.impact) }, row.impact.toFixed(3)));
    tr.appendChild(
      el("td", {}, row.edited ? "✱" : "")
    );
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderBandTable(container: HTMLElement, rows: BandCell[]): void {
  container.replaceChildren();
  const table = el("table", { class: "bands" });
  const head = el("tr");
  for (const title of ["Band", "Count", "Observed", "Base (M1)", "Corrected", "Scenario", "Expected"]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.appendChild(el("td", {}, row.band));
    tr.appendChild(el("td", { class: "num" }, String(row.count)));
    for (const value of [row.observed, row.base, row.corrected, row.scenario, row.expected]) {
      tr.appendChild(el("td", { class: "num", title: exact(value) }, pct(value)));
    }
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderBandChart(container: HTMLElement, rows: BandCell[]): void {
  container.replaceChildren();
  const bands = rows.filter((r) => r.band !== "all");
  if (bands.length === 0) return;
  const series: Array<[keyof BandCell, string]> = [
    ["observed", "#444444"],
    ["base", "#8093f1"],
    ["corrected", "#43aa8b"],
    ["scenario", "#f3722c"],
  ];
  const values = bands.flatMap((b) =>
    series.map(([key]) => (b[key] as number | null) ?? 0)
  );
  const peak = Math.max(...values, 1e-9);
  const width = 640;
  const height = 220;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height + 40}`);
  svg.setAttribute("class", "chart");
  const groupWidth = width / bands.length;
  const barWidth = (groupWidth * 0.7) / series.length;
  bands.forEach((band, gi) => {
    series.forEach(([key, color], si) => {
      const value = (band[key] as number | null) ?? 0;
      const h = (value / peak) * height;
      const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      rect.setAttribute("x", String(gi * groupWidth + groupWidth * 0.15 + si * barWidth));
      rect.setAttribute("y", String(height - h));
      rect.setAttribute("width", String(barWidth * 0.9));
      rect.setAttribute("height", String(h));
      rect.setAttribute("fill", color);
      const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
      title.textContent = `${band.band} ${key}: ${exact(band[key] as number | null)}`;
      rect.appendChild(title);
      svg.appendChild(rect);
    });
    const label = document.createElementNS("http://www.w3.org/2000/svg", "text");
    label.setAttribute("x", String(gi * groupWidth + groupWidth / 2));
    label.setAttribute("y", String(height + 16));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "chart-label");
    label.textContent = band.band;
    svg.appendChild(label);
  });
  container.appendChild(svg);
}

export function renderDeltaTable(container: HTMLElement, rows: RuleDelta[]): void {
  container.replaceChildren();
  const table = el("table", { class: "deltas" });
  const head = el("tr");
  for (const title of ["Rule", "Definition", "Baseline", "Scenario", "Δ points"]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", { class: row.delta !== 0 ? "changed" : "" });
    tr.appendChild(el("td", {}, row.rule_id));
    tr.appendChild(el("td", {}, row.label));
    tr.appendChild(el("td", { class: "num", title: exact(row.baseline_points) }, pts(row.baseline_points)));
    tr.appendChild(el("td", { class: "num", title: exact(row.scenario_points) }, pts(row.scenario_points)));
    tr.appendChild(el("td", { class: "num", title: exact(row.delta) }, signed(row.delta)));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderClusters(container: HTMLElement, rows: ClusterQualityRow[]): void {
  container.replaceChildren();
  const table = el("table", { class: "clusters" });
  const head = el("tr");
  for (const title of ["Rules", "Support", "Predicted", "Observed", "Gap", "Refine with"]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.appendChild(el("td", {}, row.rule_ids.join(" + ")));
    tr.appendChild(el("td", { class: "num", title: exact(row.support) }, pct(row.support, 1)));
    tr.appendChild(el("td", { class: "num", title: exact(row.predicted_rate) }, pct(row.predicted_rate)));
    tr.appendChild(el("td", { class: "num", title: exact(row.observed_rate) }, pct(row.observed_rate)));
    tr.appendChild(el("td", { class: "num", title: exact(row.gap) }, pct(row.gap)));
    tr.appendChild(el("td", {}, row.suggestion ?? "–"));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderSnapshotDiff(
  container: HTMLElement,
  nameA: string,
  nameB: string,
  rows: SnapshotDiffRow[]
): void {
  container.replaceChildren();
  const table = el("table", { class: "diff" });
  const head = el("tr");
  for (const title of ["Band", `${nameA} scenario`, `${nameB} scenario`, "Δ"]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.appendChild(el("td", {}, row.band));
    tr.appendChild(el("td", { class: "num", title: exact(row.a) }, pct(row.a)));
    tr.appendChild(el("td", { class: "num", title: exact(row.b) }, pct(row.b)));
    tr.appendChild(el("td", { class: "num", title: exact(row.delta) }, row.delta === null ? "–" : pct(row.delta)));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderSnapshotPicker(
  container: HTMLElement,
  snapshots: Snapshot[],
  onCompare: (a: number, b: number) => void
): void {
  container.replaceChildren();
  if (snapshots.length < 2) {
    container.appendChild(el("span", { class: "hint" }, "save two snapshots to compare"));
    return;
  }
  const selectA = el("select");
  const selectB = el("select");
  snapshots.forEach((snap, i) => {
    selectA.appendChild(el("option", { value: String(i) }, snap.name));
    selectB.appendChild(el("option", { value: String(i) }, snap.name));
  });
  selectB.selectedIndex = snapshots.length - 1;
  const button = el("button", {}, "compare");
  button.addEventListener("click", () =>
    onCompare(Number(selectA.value), Number(selectB.value))
  );
  container.append(selectA, el("span", {}, " vs "), selectB, button);
}

export interface BannerState {
  kind: "error" | "busy" | "ok" | "badge";
  text: string;
}

export function renderStatus(container: HTMLElement, states: BannerState[]): void {
  container.replaceChildren();
  for (const state of states) {
    container.appendChild(el("span", { class: `status ${state.kind}` }, state.text));
  }
}
