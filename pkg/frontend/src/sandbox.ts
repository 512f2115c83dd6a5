// Guided reversal demo: the pair space first, then the festival joins.
// Both utility tables and both winners are fetched from /v1/analyze;
// the caption only compares the two server-returned winners.

import { SessionApi } from "./api.js";
import type { AnalyzeResponse, MatrixDoc } from "./api.js";
import { el } from "./components.js";
import { SANDBOX_FIXTURES } from "./fixtures.js";

export type SandboxOutcome = {
  pair: AnalyzeResponse;
  full: AnalyzeResponse;
  caption: string;
};

export function describeChange(
  pairWinner: string,
  fullWinner: string,
  added: string,
  labelOf: (id: string) => string,
): string {
  if (fullWinner === pairWinner) {
    return `Adding ${labelOf(added)} changes nothing: ${labelOf(pairWinner)} stays the pick.`;
  }
  if (fullWinner === added) {
    return `The new option ${labelOf(added)} wins the enlarged set itself.`;
  }
  return `The pick flips from ${labelOf(pairWinner)} to ${labelOf(fullWinner)} even though ${labelOf(added)} is not chosen.`;
}

export class SandboxView {
  constructor(
    readonly api: SessionApi,
    readonly root: HTMLElement,
  ) {}

  async run(fixtureName: string): Promise<SandboxOutcome> {
    const fixture = SANDBOX_FIXTURES[fixtureName];
    if (!fixture) throw new Error(`unknown fixture ${fixtureName}`);
    const pair = await this.api.analyze(fixture, ["H", "R"]);
    const full = await this.api.analyze(fixture, ["H", "R", "F"]);
    const labelOf = (id: string) => fixture.labels?.[id] ?? id;
    const caption = describeChange(pair.winner, full.winner, "F", labelOf);
    return { pair, full, caption };
  }

  async render(fixtureName: string): Promise<void> {
    const outcome = await this.run(fixtureName);
    const fixture = SANDBOX_FIXTURES[fixtureName];
    this.root.textContent = "";

    const picker = el("div", { class: "fixture-picker" });
    for (const name of Object.keys(SANDBOX_FIXTURES)) {
      const btn = el(
        "button",
        { class: "btn" + (name === fixtureName ? " btn-active" : ""), "data-fixture": name },
        name,
      );
      btn.addEventListener("click", () => void this.render(name));
      picker.appendChild(btn);
    }
    this.root.appendChild(picker);

    this.root.appendChild(this.stage("Offered: club and restaurant", outcome.pair, fixture));
    this.root.appendChild(this.stage("The festival joins the set", outcome.full, fixture));
    this.root.appendChild(el("p", { class: "caption", "data-role": "caption" }, outcome.caption));
  }

  private stage(title: string, analysis: AnalyzeResponse, fixture: MatrixDoc): HTMLElement {
    const box = el("div", { class: "stage" });
    box.appendChild(el("h3", {}, title));
    const list = el("ul", { class: "utilities" });
    for (const [id, value] of Object.entries(analysis.table)) {
      const row = el("li", { "data-item": id });
      const name = fixture.labels?.[id] ?? id;
      row.textContent = `${name}: ${String(value)}`;
      if (id === analysis.winner) {
        row.classList.add("winner");
        row.appendChild(el("span", { class: "badge" }, "picked"));
      }
      list.appendChild(row);
    }
    box.appendChild(list);
    return box;
  }
}
