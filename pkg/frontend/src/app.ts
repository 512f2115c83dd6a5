// The live session console: offer sets, pick with confirm-gating,
// retract, and watch the learned estimate.

import { ApiError, SessionApi } from "./api.js";
import type { WarningDoc } from "./api.js";
import { banner, confirmModal, el, historyRow, itemCard, toast } from "./components.js";
import { renderHeatmap } from "./heatmap.js";
import {
  MutationQueue,
  SessionViewState,
  decideAfterDryRun,
  emptyState,
  highlightedItems,
  informWarnings,
} from "./state.js";

export class ConsoleApp {
  readonly state: SessionViewState = emptyState();
  private readonly mutations = new MutationQueue();

  constructor(
    readonly api: SessionApi,
    readonly root: HTMLElement,
  ) {}

  label(id: string): string {
    return this.state.labels[id] ?? id;
  }

  async createSession(catalog: string[], labels: Record<string, string>): Promise<void> {
    const created = await this.api.createSession(catalog, labels);
    this.state.sessionId = created.session_id;
    this.state.catalog = catalog;
    this.state.labels = labels;
    this.state.offer = null;
    this.state.banners = [];
    await this.refreshDerived();
    this.render();
  }

  async offer(items: string[]): Promise<void> {
    const sid = this.requireSession();
    const response = await this.mutations.run(() => this.api.offerItems(sid, items));
    this.state.offer = {
      choiceSetId: response.choice_set_id,
      items: response.items,
      highlighted: highlightedItems(response.warnings),
    };
    this.state.banners = informWarnings(response.warnings);
    this.render();
  }

  async offerAdaptive(pool: string[], k: number, protect?: string): Promise<void> {
    const sid = this.requireSession();
    const response = await this.mutations.run(() =>
      this.api.offerAdaptive(sid, pool, k, protect ? [protect] : [], protect),
    );
    this.state.offer = {
      choiceSetId: response.choice_set_id,
      items: response.items,
      highlighted: highlightedItems(response.warnings),
    };
    this.state.banners = informWarnings(response.warnings);
    this.render();
  }

  // The choice flow: dry run first; CONFIRM warnings interpose a modal
  // and only an explicit "choose anyway" commits. Nothing is recorded
  // until the commit round-trip succeeds.
  async pick(item: string): Promise<void> {
    const sid = this.requireSession();
    const offer = this.state.offer;
    if (!offer) throw new Error("no pending offer");
    try {
      const outcome = await this.mutations.run(async () => {
        const dry = await this.api.submitChoice(sid, offer.choiceSetId, item, false);
        const decision = decideAfterDryRun(dry.warnings);
        if (decision.action === "needs-confirmation") {
          const verdict = await confirmModal(this.root, decision.confirmations);
          if (verdict === "reconsider") return { committed: false, warnings: dry.warnings };
        }
        const committed = await this.api.submitChoice(sid, offer.choiceSetId, item, true);
        return { committed: true, warnings: committed.warnings };
      });
      if (outcome.committed) {
        this.state.offer = null;
        this.state.banners = informWarnings(outcome.warnings as WarningDoc[]);
        await this.refreshDerived();
      }
      this.render();
    } catch (error) {
      this.surfaceError(error);
    }
  }

  async retract(index: number): Promise<void> {
    const sid = this.requireSession();
    try {
      await this.mutations.run(() => this.api.retract(sid, index));
      await this.refreshDerived();
      this.render();
    } catch (error) {
      this.surfaceError(error);
    }
  }

  async refreshDerived(): Promise<void> {
    const sid = this.requireSession();
    const [estimate, report, history] = await Promise.all([
      this.api.getEstimate(sid),
      this.api.getReport(sid),
      this.api.getHistory(sid),
    ]);
    this.state.estimate = estimate;
    this.state.report = report;
    this.state.history = history.observations;
  }

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error("create a session first");
    return this.state.sessionId;
  }

  private surfaceError(error: unknown): void {
    const host = this.root.querySelector<HTMLElement>("[data-role=toasts]");
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String((error as Error)?.message ?? error);
    if (host) toast(host, message);
    else console.error(message);
  }

  render(): void {
    const s = this.state;
    this.root.textContent = "";

    const toasts = el("div", { class: "toasts", "data-role": "toasts" });
    this.root.appendChild(toasts);

    if (!s.sessionId) {
      this.root.appendChild(el("p", { class: "hint" }, "No session yet."));
      return;
    }
    this.root.appendChild(
      el("p", { class: "session-line", "data-role": "session-id" }, `session ${s.sessionId}`),
    );

    const banners = el("div", { class: "banners", "data-role": "banners" });
    s.banners.forEach((w, i) => {
      banners.appendChild(
        banner(w, () => {
          s.banners.splice(i, 1);
          this.render();
        }),
      );
    });
    this.root.appendChild(banners);

    const offerBox = el("div", { class: "offer", "data-role": "offer" });
    if (s.offer) {
      offerBox.appendChild(el("h3", {}, "On offer"));
      const cards = el("div", { class: "cards" });
      for (const id of s.offer.items) {
        cards.appendChild(
          itemCard(id, this.label(id), s.offer.highlighted.has(id), (picked) => {
            void this.pick(picked);
          }),
        );
      }
      offerBox.appendChild(cards);
    } else {
      offerBox.appendChild(el("p", { class: "hint" }, "Nothing on offer."));
    }
    this.root.appendChild(offerBox);

    const historyBox = el("div", { class: "history", "data-role": "history" });
    historyBox.appendChild(el("h3", {}, "History"));
    const list = el("ul", {});
    for (const entry of s.history) {
      list.appendChild(
        historyRow(entry, (id) => this.label(id), (index) => void this.retract(index)),
      );
    }
    historyBox.appendChild(list);
    this.root.appendChild(historyBox);

    const estimateBox = el("div", { class: "estimate", "data-role": "estimate" });
    estimateBox.appendChild(el("h3", {}, "Learned matrix"));
    if (s.estimate) estimateBox.appendChild(renderHeatmap(s.estimate));
    if (s.report) {
      estimateBox.appendChild(
        el(
          "p",
          { class: "hint", "data-role": "regret-line" },
          `regret risk ${String(s.report.regret_risk)}`,
        ),
      );
    }
    this.root.appendChild(estimateBox);
  }
}
