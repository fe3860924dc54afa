import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

describe("ApiClient", () => {
  const calls: { url: string; init?: RequestInit }[] = [];

  function stubFetch(status: number, payload: unknown) {
    calls.length = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async (url: string, init?: RequestInit) => {
        calls.push({ url, init });
        return new Response(status === 204 ? null : JSON.stringify(payload), {
          status,
          headers: { "Content-Type": "application/json" },
        });
      }),
    );
  }

  beforeEach(() => {
    vi.unstubAllGlobals();
  });

  it("posts rewrite requests with workspace and explain", async () => {
    stubFetch(200, { sql: "SELECT 1 FROM t", rewritten: false });
    const client = new ApiClient("http://svc");
    await client.rewrite("SELECT 1 FROM t", "analytics", true);
    expect(calls[0]?.url).toBe("http://svc/api/v1/rewrite");
    expect(JSON.parse(calls[0]?.init?.body as string)).toEqual({
      sql: "SELECT 1 FROM t",
      workspace: "analytics",
      explain: true,
    });
  });

  it("treats a warning as failed validation (fail-open contract)", async () => {
    stubFetch(200, { sql: "junk", rewritten: false, warning: "no parse" });
    const client = new ApiClient();
    expect(await client.validateSql("junk")).toBe(false);
  });

  it("treats warning-free responses as valid SQL", async () => {
    stubFetch(200, { sql: "SELECT a FROM t", rewritten: false });
    const client = new ApiClient();
    expect(await client.validateSql("SELECT a FROM t")).toBe(true);
  });

  it("does not call the server for empty input", async () => {
    stubFetch(200, {});
    const client = new ApiClient();
    expect(await client.validateSql("   ")).toBe(false);
    expect(calls).toHaveLength(0);
  });

  it("surfaces structured errors", async () => {
    stubFetch(400, { error: "invalid rule", detail: "unbound variable 'y'" });
    const client = new ApiClient();
    await expect(
      client.createRule({ pattern: "<x>", replacement: "<y>" }),
    ).rejects.toThrowError(ApiError);
    await client
      .createRule({ pattern: "<x>", replacement: "<y>" })
      .catch((error: ApiError) => {
        expect(error.status).toBe(400);
        expect(error.detail).toContain("unbound variable");
      });
  });

  it("encodes workspace filters on rule listings", async () => {
    stubFetch(200, []);
    const client = new ApiClient();
    await client.listRules("my workspace");
    expect(calls[0]?.url).toBe("/api/v1/rules?workspace=my%20workspace");
  });

  it("handles 204 deletes", async () => {
    stubFetch(204, null);
    const client = new ApiClient();
    await expect(client.deleteRule(4)).resolves.toBeUndefined();
    expect(calls[0]?.init?.method).toBe("DELETE");
  });
});
