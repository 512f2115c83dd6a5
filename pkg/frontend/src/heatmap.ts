// Estimate heatmap: diverging color scale centered at 0 (blue negative,
// white zero, red positive). Scaling the colors is presentation only;
// the displayed numbers are the server's.

import type { EstimateDoc } from "./api.js";

export function divergingColor(value: number, absMax: number): string {
  if (absMax <= 0 || value === 0) return "rgb(255,255,255)";
  const t = Math.max(-1, Math.min(1, value / absMax));
  const other = Math.round(255 * (1 - Math.abs(t)));
  return t > 0 ? `rgb(255,${other},${other})` : `rgb(${other},${other},255)`;
}

export function absMaxEntry(entries: number[][]): number {
  let m = 0;
  for (const row of entries) {
    for (const v of row) m = Math.max(m, Math.abs(v));
  }
  return m;
}

export function renderHeatmap(doc: EstimateDoc): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "heatmap";

  const chip = document.createElement("span");
  chip.className = "chip" + (doc.margin > 0 ? " chip-ok" : " chip-warn");
  chip.dataset.role = "margin-chip";
  chip.textContent = `margin ${String(doc.margin)}`;
  wrap.appendChild(chip);

  const table = document.createElement("table");
  table.dataset.role = "estimate-heatmap";
  const scale = absMaxEntry(doc.entries);

  const head = document.createElement("tr");
  head.appendChild(document.createElement("th"));
  for (const id of doc.catalog) {
    const th = document.createElement("th");
    th.textContent = id;
    head.appendChild(th);
  }
  table.appendChild(head);

  doc.entries.forEach((row, i) => {
    const tr = document.createElement("tr");
    const label = document.createElement("th");
    label.textContent = doc.catalog[i];
    tr.appendChild(label);
    for (const value of row) {
      const td = document.createElement("td");
      td.textContent = String(value);
      td.style.backgroundColor = divergingColor(value, scale);
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  wrap.appendChild(table);
  return wrap;
}
