// DOM wiring for the two panels: the suggestion workbench and the rule
// manager with its live try-a-query panel.

import { ApiClient, ApiError, RuleJson, WorkspaceJson } from "./api.js";
import { ExampleDraft, SuggestionCard, WorkbenchState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export class App {
  readonly state = new WorkbenchState();
  private rules: RuleJson[] = [];
  private workspaces: WorkspaceJson[] = [];

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  async start(): Promise<void> {
    this.root.innerHTML = "";
    this.root.append(
      el("h1", {}, ["Query rewriting workbench"]),
      el("section", { id: "workbench" }),
      el("section", { id: "manager" }),
    );
    this.state.addExample();
    await this.refreshWorkspaces();
    await this.refreshRules();
    this.renderWorkbench();
    this.renderManager();
  }

  // -- workbench ------------------------------------------------------------

  renderWorkbench(): void {
    const section = this.root.querySelector("#workbench")!;
    section.innerHTML = "";
    section.append(el("h2", {}, ["Examples"]));
    for (const draft of this.state.examples) {
      section.append(this.exampleRow(draft));
    }
    const addButton = el("button", { id: "add-example" }, ["Add example"]);
    addButton.addEventListener("click", () => {
      this.state.addExample();
      this.renderWorkbench();
    });
    const strategy = el("select", { id: "strategy" });
    for (const option of ["mpn:4000", "mpn:200", "khn:2", "khn:3", "bf"]) {
      strategy.append(el("option", { value: option }, [option]));
    }
    const suggestButton = el("button", { id: "suggest" }, [
      "Suggest rules",
    ]) as HTMLButtonElement;
    suggestButton.disabled = !this.state.canSuggest();
    suggestButton.addEventListener("click", () => void this.runSuggest());
    section.append(
      el("div", { class: "controls" }, [addButton, strategy, suggestButton]),
      el("div", { id: "suggest-status" }),
      el("div", { id: "cards" }),
    );
    this.renderCards();
  }

  private exampleRow(draft: ExampleDraft): HTMLElement {
    const row = el("div", { class: "example", "data-id": String(draft.id) });
    const original = el("textarea", {
      class: "original",
      placeholder: "original query",
    }) as HTMLTextAreaElement;
    original.value = draft.original;
    const rewritten = el("textarea", {
      class: "rewritten",
      placeholder: "desired rewritten query",
    }) as HTMLTextAreaElement;
    rewritten.value = draft.rewritten;

    const status = (ok: boolean | null) =>
      ok === null ? "unchecked" : ok ? "ok" : "invalid";
    const badge = el("span", { class: "badge" }, [
      `${status(draft.originalOk)} / ${status(draft.rewrittenOk)}`,
    ]);

    const validate = async () => {
      draft.original = original.value;
      draft.rewritten = rewritten.value;
      [draft.originalOk, draft.rewrittenOk] = await Promise.all([
        this.api.validateSql(draft.original),
        this.api.validateSql(draft.rewritten),
      ]);
      this.renderWorkbench();
    };
    original.addEventListener("change", () => void validate());
    rewritten.addEventListener("change", () => void validate());

    const remove = el("button", { class: "remove" }, ["Remove"]);
    remove.addEventListener("click", () => {
      this.state.removeExample(draft.id);
      this.renderWorkbench();
    });
    row.append(original, rewritten, badge, remove);
    return row;
  }

  async runSuggest(): Promise<void> {
    const section = this.root.querySelector("#suggest-status")!;
    const strategy = (
      this.root.querySelector("#strategy") as HTMLSelectElement
    ).value;
    section.textContent = "suggesting...";
    try {
      const report = await this.api.suggest(
        this.state.examples.map((draft) => ({
          original: draft.original,
          rewritten: draft.rewritten,
        })),
        strategy,
      );
      this.state.setCards(report.rules);
      const stats = report.stats;
      section.textContent =
        `explored ${stats.candidates_explored} candidates in ` +
        `${stats.iterations} iterations, total length ` +
        `${stats.total_dl_before.toFixed(2)} -> ${stats.total_dl_after.toFixed(2)} ` +
        `(${stats.wall_time_ms} ms)`;
    } catch (error) {
      section.textContent =
        error instanceof ApiError ? `suggestion failed: ${error.detail}` : String(error);
    }
    this.renderCards();
  }

  renderCards(): void {
    const host = this.root.querySelector("#cards");
    if (!host) {
      return;
    }
    host.innerHTML = "";
    this.state.cards.forEach((card, index) => {
      host.append(this.cardView(card, index));
    });
  }

  private cardView(card: SuggestionCard, index: number): HTMLElement {
    const pattern = el("textarea", { class: "card-pattern" }) as HTMLTextAreaElement;
    pattern.value = card.pattern;
    pattern.addEventListener("change", () => {
      card.pattern = pattern.value;
    });
    const replacement = el("textarea", {
      class: "card-replacement",
    }) as HTMLTextAreaElement;
    replacement.value = card.replacement;
    replacement.addEventListener("change", () => {
      card.replacement = replacement.value;
    });

    const covered = (card.rule.covers ?? [])
      .map((pairIndex) => `#${pairIndex + 1}`)
      .join(", ");
    const meta = el("div", { class: "card-meta" }, [
      `length ${card.rule.dl?.toFixed(3) ?? "?"} - covers examples ${covered || "none"}`,
    ]);

    const accept = el("button", { class: "accept" }, [
      card.accepted ? "Accepted" : "Accept",
    ]) as HTMLButtonElement;
    accept.disabled = card.accepted;
    accept.addEventListener("click", () => void this.acceptCard(card, index));

    const error = el("div", { class: "card-error" }, [card.error ?? ""]);
    return el("div", { class: "card", "data-index": String(index) }, [
      meta,
      pattern,
      el("span", { class: "arrow" }, ["-->"]),
      replacement,
      accept,
      error,
    ]);
  }

  async acceptCard(card: SuggestionCard, index: number): Promise<void> {
    try {
      await this.api.createRule({
        name: card.rule.name || `suggested-${index + 1}`,
        pattern: card.pattern,
        replacement: card.replacement,
        constraints: card.rule.constraints,
        actions: card.rule.actions,
        priority: card.rule.priority,
        workspace: card.rule.workspace || "default",
      });
      card.accepted = true;
      card.error = null;
      await this.refreshRules();
      this.renderManager();
    } catch (error) {
      // A 400 for hand-edited invalid syntax stays on the card, unsaved.
      card.accepted = false;
      card.error = error instanceof ApiError ? error.detail : String(error);
    }
    this.renderCards();
  }

  // -- rule manager -----------------------------------------------------------

  async refreshRules(): Promise<void> {
    this.rules = await this.api.listRules();
  }

  async refreshWorkspaces(): Promise<void> {
    this.workspaces = await this.api.listWorkspaces();
  }

  private orderedRules(): RuleJson[] {
    return [...this.rules].sort(
      (a, b) => b.priority - a.priority || a.id - b.id,
    );
  }

  renderManager(): void {
    const section = this.root.querySelector("#manager");
    if (!section) {
      return;
    }
    section.innerHTML = "";
    section.append(el("h2", {}, ["Rules"]));
    const table = el("table", { id: "rule-table" });
    const head = el("tr", {}, []);
    for (const caption of ["id", "name", "rule", "priority", "workspace", "enabled", ""]) {
      head.append(el("th", {}, [caption]));
    }
    table.append(head);
    const ordered = this.orderedRules();
    ordered.forEach((rule, position) => {
      table.append(this.ruleRow(rule, position, ordered));
    });
    section.append(table);
    section.append(this.tryPanel());
  }

  private ruleRow(rule: RuleJson, position: number, ordered: RuleJson[]): HTMLElement {
    const row = el("tr", { class: "rule", "data-rule-id": String(rule.id) });
    row.append(
      el("td", {}, [String(rule.id)]),
      el("td", {}, [rule.name]),
      el("td", { class: "rule-text" }, [`${rule.pattern} --> ${rule.replacement}`]),
    );

    const priority = el("td", {}, [String(rule.priority)]);
    const up = el("button", { class: "up" }, ["^"]) as HTMLButtonElement;
    up.disabled = position === 0;
    up.addEventListener("click", () => void this.moveAbove(rule, ordered[position - 1]!));
    priority.append(" ", up);
    row.append(priority);

    const workspaceSelect = el("select", { class: "workspace" }) as HTMLSelectElement;
    for (const workspace of this.workspaces) {
      const option = el("option", { value: workspace.id }, [workspace.id]);
      workspaceSelect.append(option);
    }
    workspaceSelect.value = rule.workspace;
    workspaceSelect.addEventListener("change", () =>
      void this.patchRule(rule.id, { workspace: workspaceSelect.value }),
    );
    row.append(el("td", {}, [workspaceSelect]));

    const enabled = el("input", { type: "checkbox", class: "enabled" }) as HTMLInputElement;
    enabled.checked = rule.enabled;
    enabled.addEventListener("change", () =>
      void this.patchRule(rule.id, { enabled: enabled.checked }),
    );
    row.append(el("td", {}, [enabled]));

    const remove = el("button", { class: "delete" }, ["Delete"]);
    remove.addEventListener("click", () => void this.removeRule(rule.id));
    row.append(el("td", {}, [remove]));
    return row;
  }

  /** Reorder by priority: lift the rule just above its upstairs neighbor. */
  async moveAbove(rule: RuleJson, neighbor: RuleJson): Promise<void> {
    await this.patchRule(rule.id, { priority: neighbor.priority + 1 });
  }

  async patchRule(id: number, patch: Partial<RuleJson>): Promise<void> {
    await this.api.updateRule(id, patch);
    await this.refreshRules();
    this.renderManager();
  }

  async removeRule(id: number): Promise<void> {
    await this.api.deleteRule(id);
    await this.refreshRules();
    this.renderManager();
  }

  // -- try panel ----------------------------------------------------------------

  private tryPanel(): HTMLElement {
    const panel = el("div", { id: "try-panel" }, [el("h2", {}, ["Try a query"])]);
    const input = el("textarea", { id: "try-sql" }) as HTMLTextAreaElement;
    const workspaceSelect = el("select", { id: "try-workspace" }) as HTMLSelectElement;
    for (const workspace of this.workspaces) {
      workspaceSelect.append(el("option", { value: workspace.id }, [workspace.id]));
    }
    const button = el("button", { id: "try-run" }, ["Rewrite"]);
    const output = el("pre", { id: "try-output" });
    const traceHost = el("div", { id: "try-trace" });
    button.addEventListener("click", async () => {
      const response = await this.api.rewrite(
        input.value,
        workspaceSelect.value || "default",
        true,
      );
      output.textContent = response.warning
        ? `${response.sql}\n-- warning: ${response.warning}`
        : response.sql;
      traceHost.innerHTML = "";
      const steps = response.trace?.steps ?? [];
      if (!steps.length) {
        traceHost.append(el("div", { class: "trace-step" }, ["passthrough (no rule fired)"]));
      }
      for (const step of steps) {
        traceHost.append(
          el("div", { class: "trace-step", "data-rule-id": String(step.rule_id) }, [
            `rule ${step.rule_id}: ${step.before} => ${step.after}`,
          ]),
        );
      }
    });
    panel.append(input, workspaceSelect, button, output, traceHost);
    return panel;
  }
}
