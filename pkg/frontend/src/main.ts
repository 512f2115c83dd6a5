// Entry point: wires the console and sandbox views into the page.

import { SessionApi } from "./api.js";
import { ConsoleApp } from "./app.js";
import { el } from "./components.js";
import { SandboxView } from "./sandbox.js";

const DEFAULT_CATALOG = ["H", "R", "F"];
const DEFAULT_LABELS: Record<string, string> = {
  H: "Hank's (live music club)",
  R: "Local restaurant",
  F: "Music festival",
};

export function mount(root: HTMLElement, api = new SessionApi()): ConsoleApp {
  root.textContent = "";

  const header = el("header", { class: "topbar" });
  header.appendChild(el("h1", {}, "ctxchoice console"));
  const tabs = el("nav", {});
  const consoleTab = el("button", { class: "btn btn-active", "data-tab": "console" }, "Session");
  const sandboxTab = el("button", { class: "btn", "data-tab": "sandbox" }, "Sandbox");
  tabs.appendChild(consoleTab);
  tabs.appendChild(sandboxTab);
  header.appendChild(tabs);
  root.appendChild(header);

  const controls = el("div", { class: "controls", "data-role": "controls" });
  const startBtn = el("button", { class: "btn", "data-role": "start-session" }, "Start demo session");
  const offerPairBtn = el("button", { class: "btn", "data-role": "offer-pair" }, "Offer club + restaurant");
  const offerFullBtn = el("button", { class: "btn", "data-role": "offer-full" }, "Offer all three");
  const offerAdaptiveBtn = el(
    "button",
    { class: "btn", "data-role": "offer-adaptive" },
    "Adaptive offer (protect restaurant)",
  );
  controls.append(startBtn, offerPairBtn, offerFullBtn, offerAdaptiveBtn);
  root.appendChild(controls);

  const consolePane = el("main", { class: "pane", "data-pane": "console" });
  const sandboxPane = el("main", { class: "pane hidden", "data-pane": "sandbox" });
  root.appendChild(consolePane);
  root.appendChild(sandboxPane);

  const app = new ConsoleApp(api, consolePane);
  const sandbox = new SandboxView(api, sandboxPane);
  app.render();

  startBtn.addEventListener("click", () => {
    void app.createSession(DEFAULT_CATALOG, DEFAULT_LABELS);
  });
  offerPairBtn.addEventListener("click", () => void app.offer(["H", "R"]));
  offerFullBtn.addEventListener("click", () => void app.offer(["H", "R", "F"]));
  offerAdaptiveBtn.addEventListener("click", () => void app.offerAdaptive(DEFAULT_CATALOG, 2, "R"));

  consoleTab.addEventListener("click", () => {
    consoleTab.classList.add("btn-active");
    sandboxTab.classList.remove("btn-active");
    consolePane.classList.remove("hidden");
    sandboxPane.classList.add("hidden");
  });
  sandboxTab.addEventListener("click", () => {
    sandboxTab.classList.add("btn-active");
    consoleTab.classList.remove("btn-active");
    sandboxPane.classList.remove("hidden");
    consolePane.classList.add("hidden");
    void sandbox.render("strong festival gain");
  });

  return app;
}

declare global {
  interface Window {
    ctxchoiceApp?: ConsoleApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.ctxchoiceApp = mount(document.getElementById("app") as HTMLElement);
}
