import { describe, expect, it } from "vitest";

import { ApiError, ConflictError, StudioClient, type FetchLike } from "../src/api.js";
import { Studio } from "../src/studio.js";
import { crossRefDiagnostic, orderingModel } from "./fixtures.js";

interface Call {
  url: string;
  method: string;
  body: any;
}

function fakeServer(responses: { status: number; body: any }[]) {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body) : null,
    });
    const next = responses.shift();
    if (!next) throw new Error("unexpected request " + url);
    return { status: next.status, json: async () => next.body };
  };
  return { calls, fetchImpl };
}

const snapshot = { revision: 3, text: "domain Ordering {}", model: orderingModel };

describe("StudioClient", () => {
  it("sends the revision with repair requests", async () => {
    const { calls, fetchImpl } = fakeServer([
      { status: 200, body: { ...snapshot, revision: 4, diagnostics: [] } },
    ]);
    const client = new StudioClient("http://x", fetchImpl);
    const result = await client.applyRepair(
      "Order.Order.customer",
      "S3",
      "use-id-reference",
      3
    );
    expect(calls[0].url).toBe("http://x/api/repairs");
    expect(calls[0].body).toEqual({
      subject: "Order.Order.customer",
      ruleId: "S3",
      repairId: "use-id-reference",
      revision: 3,
    });
    expect(result.revision).toBe(4);
  });

  it("turns a 409 into ConflictError carrying the server revision", async () => {
    const { fetchImpl } = fakeServer([
      { status: 409, body: { detail: { error: "stale revision", currentRevision: 7 } } },
    ]);
    const client = new StudioClient("http://x", fetchImpl);
    const err = await client.putModel("domain D {}", 2).catch((e) => e);
    expect(err).toBeInstanceOf(ConflictError);
    expect(err.currentRevision).toBe(7);
  });

  it("turns other failures into ApiError with the status", async () => {
    const { fetchImpl } = fakeServer([
      { status: 422, body: { detail: { error: "parse failure" } } },
    ]);
    const client = new StudioClient("http://x", fetchImpl);
    const err = await client.putModel("nonsense", 3).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
  });
});

describe("Studio", () => {
  it("loads a snapshot and renders badges for current diagnostics", async () => {
    const { fetchImpl } = fakeServer([
      { status: 200, body: snapshot },
      { status: 200, body: { revision: 3, diagnostics: [crossRefDiagnostic] } },
    ]);
    const studio = new Studio(new StudioClient("http://x", fetchImpl));
    const state = await studio.load();
    expect(state.status).toBe("ready");
    expect(state.revision).toBe(3);
    expect(state.svg).toContain('data-rule="S3"');
  });

  it("advances its revision after a successful repair", async () => {
    const { calls, fetchImpl } = fakeServer([
      { status: 200, body: snapshot },
      { status: 200, body: { revision: 3, diagnostics: [crossRefDiagnostic] } },
      { status: 200, body: { ...snapshot, revision: 4, diagnostics: [] } },
    ]);
    const studio = new Studio(new StudioClient("http://x", fetchImpl));
    await studio.load();
    const state = await studio.applyRepair("Order.Order.customer", "S3", "use-id-reference");
    expect(calls[2].body.revision).toBe(3);
    expect(state.revision).toBe(4);
    expect(state.diagnostics).toEqual([]);
    expect(state.svg).not.toContain('data-rule="S3"');
  });

  it("flips to reloadRequired when the server rejects a stale revision", async () => {
    const { fetchImpl } = fakeServer([
      { status: 200, body: snapshot },
      { status: 200, body: { revision: 3, diagnostics: [] } },
      { status: 409, body: { detail: { error: "stale revision", currentRevision: 9 } } },
      { status: 200, body: { ...snapshot, revision: 9 } },
      { status: 200, body: { revision: 9, diagnostics: [] } },
    ]);
    const studio = new Studio(new StudioClient("http://x", fetchImpl));
    await studio.load();
    const conflicted = await studio.saveText("domain Ordering {}");
    expect(conflicted.status).toBe("reloadRequired");
    expect(conflicted.conflictRevision).toBe(9);
    // The model the user was looking at is kept on screen until they reload.
    expect(conflicted.model).toEqual(orderingModel);
    const reloaded = await studio.load();
    expect(reloaded.status).toBe("ready");
    expect(reloaded.revision).toBe(9);
  });
});
