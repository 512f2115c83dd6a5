import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, SessionApi } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("SessionApi", () => {
  it("shapes the submit request body", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ warnings: [], committed: true }));
    vi.stubGlobal("fetch", fetchMock);
    const api = new SessionApi("http://svc");
    await api.submitChoice("s1", "cs-1", "H", true);
    expect(fetchMock).toHaveBeenCalledWith(
      "http://svc/v1/sessions/s1/choices",
      expect.objectContaining({ method: "POST" }),
    );
    const body = JSON.parse(fetchMock.mock.calls[0][1].body as string);
    expect(body).toEqual({ choice_set_id: "cs-1", chosen: "H", commit: true });
  });

  it("surfaces service errors with their machine code", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(
        jsonResponse({ code: "not_found", message: "unknown session", details: {} }, 404),
      ),
    );
    const api = new SessionApi();
    const error = await api.getEstimate("nope").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(404);
    expect(error.code).toBe("not_found");
  });

  it("sends matrices to the analyze endpoint untouched", async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValue(jsonResponse({ table: { H: 5.0 }, winner: "H" }));
    vi.stubGlobal("fetch", fetchMock);
    const api = new SessionApi();
    const matrix = { catalog: ["H"], entries: [[5]] };
    const result = await api.analyze(matrix, ["H"]);
    expect(result.winner).toBe("H");
    const body = JSON.parse(fetchMock.mock.calls[0][1].body as string);
    expect(body.matrix).toEqual(matrix);
    expect(body.space).toEqual(["H"]);
  });
});
