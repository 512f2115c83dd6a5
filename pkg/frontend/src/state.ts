// Session view state and the warning-gating rules. All state is a
// projection of service responses; nothing here invents numbers.

import type { EstimateDoc, HistoryEntry, ReportDoc, WarningDoc } from "./api.js";

export type PendingOffer = {
  choiceSetId: string;
  items: string[];
  highlighted: Set<string>;
};

export type SessionViewState = {
  sessionId: string | null;
  catalog: string[];
  labels: Record<string, string>;
  offer: PendingOffer | null;
  banners: WarningDoc[];
  history: HistoryEntry[];
  estimate: EstimateDoc | null;
  report: ReportDoc | null;
  busy: boolean;
};

export function emptyState(): SessionViewState {
  return {
    sessionId: null,
    catalog: [],
    labels: {},
    offer: null,
    banners: [],
    history: [],
    estimate: null,
    report: null,
    busy: false,
  };
}

// The one rule the console must never break: a CONFIRM warning always
// interposes a modal before commit.
export function confirmWarnings(warnings: WarningDoc[]): WarningDoc[] {
  return warnings.filter((w) => w.directive === "CONFIRM");
}

export function informWarnings(warnings: WarningDoc[]): WarningDoc[] {
  return warnings.filter((w) => w.directive === "INFORM");
}

export function highlightedItems(warnings: WarningDoc[]): Set<string> {
  const out = new Set<string>();
  for (const w of warnings) {
    if (w.directive === "HIGHLIGHT") {
      for (const item of w.subject) out.add(item);
    }
  }
  return out;
}

export type ChoiceDecision =
  | { action: "commit" }
  | { action: "needs-confirmation"; confirmations: WarningDoc[] };

// Decide what a dry-run response means for the flow. Pure so it can be
// tested exhaustively: there is no path to an immediate commit while a
// CONFIRM warning is present.
export function decideAfterDryRun(warnings: WarningDoc[]): ChoiceDecision {
  const confirmations = confirmWarnings(warnings);
  if (confirmations.length > 0) {
    return { action: "needs-confirmation", confirmations };
  }
  return { action: "commit" };
}

// Serializes mutations: at most one in flight per session tab, later
// ones queue behind it. Optimistic UI is impossible by construction
// because results only exist once the server answered.
export class MutationQueue {
  private tail: Promise<unknown> = Promise.resolve();

  run<T>(task: () => Promise<T>): Promise<T> {
    const next = this.tail.then(task, task);
    this.tail = next.catch(() => undefined);
    return next;
  }
}
