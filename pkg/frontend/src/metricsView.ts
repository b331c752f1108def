/**
 * Per-iteration metrics comparison table.
 *
 * Every number shown comes straight from the metrics payload — the UI
 * formats but never recomputes. Rows after iteration 0 carry deltas
 * against iteration 0; deltas that are zero at display precision are
 * omitted entirely.
 */

import type { MetricsPayload, MetricsRow } from "./types";

export const METRIC_COLUMNS: Array<{
  key: "accuracy" | "macro_precision" | "macro_recall" | "macro_f1" | "fidelity";
  label: string;
}> = [
  { key: "accuracy", label: "accuracy" },
  { key: "macro_precision", label: "precision" },
  { key: "macro_recall", label: "recall" },
  { key: "macro_f1", label: "F1" },
  { key: "fidelity", label: "fidelity" },
];

export const DECREASE_NOTE =
  "Metrics are computed against the original labels, so after an edit " +
  "performance may appear to decrease — the model is no longer " +
  "reproducing the bias those labels contain.";

export function fmtMetric(value: number): string {
  return value.toFixed(4);
}

export function fmtDelta(value: number): string {
  const sign = value >= 0 ? "+" : "−";
  return `${sign}${Math.abs(value).toFixed(4)}`;
}

function parityLabel(row: MetricsRow, index: number): string {
  const entry = row.parity[index];
  if (entry === undefined) return `probe ${index}`;
  return `gap: ${entry.probe.target_class} by ${entry.probe.attribute}`;
}

function metricCell(
  value: number,
  baseline: number | null,
  name: string,
  iteration: number,
): HTMLTableCellElement {
  const td = document.createElement("td");
  td.dataset.metric = name;
  td.dataset.iteration = String(iteration);
  const span = document.createElement("span");
  span.className = "value";
  span.textContent = fmtMetric(value);
  td.appendChild(span);
  if (baseline !== null && fmtMetric(value) !== fmtMetric(baseline)) {
    const delta = document.createElement("span");
    const diff = value - baseline;
    delta.className = `delta ${diff > 0 ? "up" : "down"}`;
    delta.textContent = fmtDelta(diff);
    td.appendChild(delta);
  }
  return td;
}

/** Render the table into `container`; returns the number of data rows. */
export function renderMetrics(
  container: HTMLElement,
  payload: MetricsPayload,
): number {
  const table = document.createElement("table");
  table.className = "metrics-table";
  table.dataset.testid = "metrics-table";

  const probeCount = payload.history[0]?.parity.length ?? 0;

  const thead = document.createElement("thead");
  const headRow = document.createElement("tr");
  const headers = [
    "iteration",
    ...METRIC_COLUMNS.map((c) => c.label),
    ...Array.from({ length: probeCount }, (_, i) =>
      payload.history[0] !== undefined
        ? parityLabel(payload.history[0], i)
        : `probe ${i}`,
    ),
  ];
  for (const text of headers) {
    const th = document.createElement("th");
    th.textContent = text;
    if (text !== "iteration") th.title = DECREASE_NOTE;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = document.createElement("tbody");
  const baseline = payload.history[0] ?? null;
  for (const row of payload.history) {
    const tr = document.createElement("tr");
    tr.dataset.iteration = String(row.iteration);

    const iterTd = document.createElement("td");
    iterTd.className = "iteration";
    iterTd.textContent = String(row.iteration);
    tr.appendChild(iterTd);

    const isBaseline = baseline === null || row.iteration === baseline.iteration;
    for (const column of METRIC_COLUMNS) {
      tr.appendChild(
        metricCell(
          row[column.key],
          isBaseline ? null : baseline[column.key],
          column.key,
          row.iteration,
        ),
      );
    }
    row.parity.forEach((entry, index) => {
      const baseGap =
        isBaseline || baseline.parity[index] === undefined
          ? null
          : baseline.parity[index]!.gap;
      const td = metricCell(entry.gap, baseGap, `parity_${index}`, row.iteration);
      td.title =
        `P(${entry.probe.target_class} | ${entry.probe.attribute} = ` +
        `${entry.probe.groups[0]}) = ${fmtMetric(entry.group_rates[0] ?? 0)}, ` +
        `${entry.probe.groups[1]} = ${fmtMetric(entry.group_rates[1] ?? 0)}`;
      tr.appendChild(td);
    });

    tbody.appendChild(tr);
  }
  table.appendChild(tbody);

  const note = document.createElement("p");
  note.className = "metrics-note";
  note.textContent = DECREASE_NOTE;

  container.replaceChildren(table, note);
  return payload.history.length;
}
