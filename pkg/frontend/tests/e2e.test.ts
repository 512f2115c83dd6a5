// @vitest-environment happy-dom
// @vitest-environment-options {"url": "http://127.0.0.1:8917"}
//
// End-to-end smoke: a scripted browser session against a real service
// process, with the page on the service origin exactly as in production
// (the built bundle is served statically by the service). Builds
// R-dominance over six picks, then picks the club from the enlarged
// set, which must interpose the CONFIRM modal with the exact warning
// text before anything is committed; confirming commits, and retracting
// refreshes the learned-matrix heatmap.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, expect, it } from "vitest";

import { SessionApi } from "../src/api.js";
import { mount } from "../src/main.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitFor(
  predicate: () => boolean | Promise<boolean>,
  what: string,
  timeoutMs = 15_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "ctxchoice-e2e-"));
  server = spawn(
    "python3",
    [
      "-c",
      "import uvicorn; from ctxchoice.service import create_app; " +
        `uvicorn.run(create_app(data_dir=${JSON.stringify(dataDir)}), ` +
        `host='127.0.0.1', port=${PORT}, log_level='warning')`,
    ],
    { stdio: "ignore" },
  );
  await waitFor(async () => {
    try {
      const res = await fetch(`${BASE}/v1/sessions/probe/estimate`);
      return res.status === 404;
    } catch {
      return false;
    }
  }, "service to come up");
}, 30_000);

afterAll(() => {
  server?.kill();
});

function q<T extends HTMLElement>(root: HTMLElement, selector: string): T {
  const node = root.querySelector<T>(selector);
  if (!node) throw new Error(`missing ${selector}`);
  return node;
}

function historyCount(root: HTMLElement): number {
  return root.querySelectorAll("[data-role=history] li").length;
}

it(
  "runs the dominance -> confirm -> retract journey",
  async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = mount(root, new SessionApi(BASE));

    q(root, "[data-role=start-session]").click();
    await waitFor(() => root.querySelector("[data-role=session-id]") !== null, "session");

    // six consistent restaurant picks from {club, restaurant}
    for (let round = 0; round < 6; round++) {
      q(root, "[data-role=offer-pair]").click();
      await waitFor(
        () => root.querySelectorAll("[data-role=offer] .card").length === 2,
        `offer ${round}`,
      );
      q(root, "[data-item=R]").click();
      await waitFor(() => historyCount(root) === round + 1, `commit ${round}`);
      // a consistent pick never sees the modal
      expect(root.querySelector("[data-role=confirm-modal]")).toBeNull();
    }

    // the festival joins; picking the club contradicts R-dominance
    q(root, "[data-role=offer-full]").click();
    await waitFor(
      () => root.querySelectorAll("[data-role=offer] .card").length === 3,
      "full offer",
    );
    q(root, "[data-item=H]").click();
    await waitFor(
      () => root.querySelector("[data-role=confirm-modal]") !== null,
      "confirm modal",
    );
    const modal = q(root, "[data-role=confirm-modal]");
    expect(modal.querySelector(".modal-message")?.textContent).toBe(
      "Are you sure you want Hank's (live music club)? You normally choose " +
        "Local restaurant when Local restaurant and Hank's (live music club) " +
        "are offered together (6 of 6 past choices).",
    );
    // nothing was committed while the modal is open
    expect(historyCount(root)).toBe(6);

    q<HTMLButtonElement>(root, "[data-role=choose-anyway]").click();
    await waitFor(() => historyCount(root) === 7, "confirmed commit");
    expect(root.querySelector("[data-role=confirm-modal]")).toBeNull();

    const heatmapBefore = q(root, "[data-role=estimate-heatmap]").innerHTML;
    const riskBefore = q(root, "[data-role=regret-line]").textContent;

    // retract the contested choice; the heatmap and risk line refresh
    const lastRow = root.querySelector("[data-index='6'] [data-role=retract]");
    expect(lastRow).not.toBeNull();
    (lastRow as HTMLButtonElement).click();
    await waitFor(
      () => root.querySelector("[data-index='6'] [data-role=retract]") === null,
      "retraction to land",
    );
    expect(q(root, "[data-role=regret-line]").textContent).not.toBe(riskBefore);
    expect(q(root, "[data-role=estimate-heatmap]").innerHTML).not.toBe(heatmapBefore);

    const history = await app.api.getHistory(app.state.sessionId as string);
    expect(history.observations[6].retracted).toBe(true);
  },
  60_000,
);
