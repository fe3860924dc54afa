// Scripted end-to-end run against the real rewriting service: paste the
// running-example pair, receive the suggested rule card, accept it, verify
// it landed in the rule base, and rewrite the original query in the try
// panel.  Spawns the Python service as a subprocess.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";

const TWEET_ORIGINAL =
  'SELECT SUM(1) AS "cnt:tweets", "state_name" AS "state_name" FROM "tweets" ' +
  "WHERE STRPOS(LOWER(\"content\"), 'covid') > 0 GROUP BY 2";
const TWEET_REWRITTEN =
  'SELECT SUM(1) AS "cnt:tweets", "state_name" AS "state_name" FROM "tweets" ' +
  "WHERE \"content\" ILIKE '%covid%' GROUP BY 2";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;

async function until(check: () => boolean | Promise<boolean>, ms = 30_000): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (await check()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 120));
  }
  throw new Error("condition not reached in time");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "sqlrewrite-ui-"));
  const configPath = join(dir, "config.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      listen_addr: `127.0.0.1:${PORT}`,
      store_path: join(dir, "store.json"),
    }),
  );
  server = spawn(
    "python3",
    ["-m", "sqlrewrite.cli", "serve", "--config", configPath],
    { cwd: join(__dirname, "..", ".."), stdio: "ignore" },
  );
  await until(async () => {
    try {
      const response = await fetch(`${BASE}/api/v1/rules`);
      return response.ok;
    } catch {
      return false;
    }
  });
});

afterAll(() => {
  server?.kill();
});

function textarea(selector: string): HTMLTextAreaElement {
  return document.querySelector(selector) as HTMLTextAreaElement;
}

function setValue(area: HTMLTextAreaElement, value: string): void {
  area.value = value;
  area.dispatchEvent(new Event("change"));
}

describe("UI flow against the live service", () => {
  it("paste pair -> suggested card -> accept -> rule stored -> try panel rewrites", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const client = new ApiClient(BASE);
    const app = new App(document.getElementById("app")!, client);
    await app.start();

    setValue(textarea(".example .original"), TWEET_ORIGINAL);
    setValue(textarea(".example .rewritten"), TWEET_REWRITTEN);
    await until(() => !(document.querySelector("#suggest") as HTMLButtonElement).disabled);

    (document.querySelector("#suggest") as HTMLButtonElement).click();
    await until(() => document.querySelector(".card") !== null, 60_000);

    const pattern = textarea(".card .card-pattern").value;
    const replacement = textarea(".card .card-replacement").value;
    expect(pattern).toBe("STRPOS(LOWER(<v1>), '<v2>') > 0");
    expect(replacement).toBe("<v1> ILIKE '%<v2>%'");
    expect(document.querySelector(".card .card-meta")?.textContent).toContain(
      "covers examples #1",
    );

    (document.querySelector(".card .accept") as HTMLButtonElement).click();
    await until(async () => (await client.listRules()).length === 1);

    const rules = await client.listRules();
    expect(rules[0]?.pattern).toBe(pattern);
    expect(rules[0]?.replacement).toBe(replacement);

    await until(() => document.querySelector("#try-sql") !== null);
    setValue(textarea("#try-sql"), TWEET_ORIGINAL);
    (document.querySelector("#try-run") as HTMLButtonElement).click();
    await until(
      () => (document.querySelector("#try-output")?.textContent ?? "").includes("ILIKE"),
    );
    expect(document.querySelector("#try-output")?.textContent).toBe(TWEET_REWRITTEN);
    const step = document.querySelector("#try-trace .trace-step");
    expect(step?.getAttribute("data-rule-id")).toBe(String(rules[0]?.id));
  });
});
