// Small DOM builders shared by the console and the sandbox.

import type { HistoryEntry, WarningDoc } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function itemCard(
  id: string,
  label: string,
  highlighted: boolean,
  onPick: (id: string) => void,
): HTMLElement {
  const card = el("button", { class: "card", "data-item": id });
  card.appendChild(el("span", { class: "card-label" }, label));
  if (highlighted) {
    card.classList.add("card-suspect");
    card.appendChild(el("span", { class: "badge", "data-role": "suspect-badge" }, "caution"));
  }
  card.addEventListener("click", () => onPick(id));
  return card;
}

export function banner(warning: WarningDoc, onDismiss: () => void): HTMLElement {
  const node = el("div", { class: "banner", "data-kind": warning.kind });
  node.appendChild(el("span", {}, warning.message));
  const close = el("button", { class: "banner-close" }, "dismiss");
  close.addEventListener("click", onDismiss);
  node.appendChild(close);
  return node;
}

export function toast(container: HTMLElement, message: string): void {
  const node = el("div", { class: "toast", role: "alert" }, message);
  container.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

export type ModalChoice = "choose-anyway" | "reconsider";

// The CONFIRM modal: shows the exact warning messages and resolves only
// on an explicit decision. Committing without this resolving to
// "choose-anyway" is impossible.
export function confirmModal(
  host: HTMLElement,
  warnings: WarningDoc[],
): Promise<ModalChoice> {
  return new Promise((resolve) => {
    const overlay = el("div", { class: "modal-overlay", "data-role": "confirm-modal" });
    const box = el("div", { class: "modal" });
    box.appendChild(el("h3", {}, "Please confirm"));
    for (const w of warnings) {
      box.appendChild(el("p", { class: "modal-message" }, w.message));
    }
    const actions = el("div", { class: "modal-actions" });
    const anyway = el("button", { class: "btn btn-danger", "data-role": "choose-anyway" }, "Choose anyway");
    const back = el("button", { class: "btn", "data-role": "reconsider" }, "Reconsider");
    anyway.addEventListener("click", () => {
      overlay.remove();
      resolve("choose-anyway");
    });
    back.addEventListener("click", () => {
      overlay.remove();
      resolve("reconsider");
    });
    actions.appendChild(back);
    actions.appendChild(anyway);
    box.appendChild(actions);
    overlay.appendChild(box);
    host.appendChild(overlay);
  });
}

export function historyRow(
  entry: HistoryEntry,
  labelOf: (id: string) => string,
  onRetract: (index: number) => void,
): HTMLElement {
  const row = el("li", { class: "history-row", "data-index": String(entry.index) });
  const text = `${labelOf(entry.chosen)} from {${entry.space.map(labelOf).join(", ")}}`;
  row.appendChild(el("span", { class: entry.retracted ? "history-retracted" : "" }, text));
  if (entry.retracted) {
    row.appendChild(el("span", { class: "badge" }, "retracted"));
  } else {
    const btn = el("button", { class: "btn btn-small", "data-role": "retract" }, "retract");
    btn.addEventListener("click", () => onRetract(entry.index));
    row.appendChild(btn);
  }
  return row;
}
