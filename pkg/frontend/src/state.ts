// Client-side state: example drafts persist across suggestion rounds so a
// user can refine intentions and re-suggest without retyping.

import type { SuggestedRuleJson } from "./api.js";

export interface ExampleDraft {
  id: number;
  original: string;
  rewritten: string;
  originalOk: boolean | null; // null = not validated yet
  rewrittenOk: boolean | null;
}

export interface SuggestionCard {
  rule: SuggestedRuleJson;
  pattern: string; // editable copies; POSTed verbatim unless edited
  replacement: string;
  accepted: boolean;
  error: string | null;
}

export class WorkbenchState {
  examples: ExampleDraft[] = [];
  cards: SuggestionCard[] = [];
  private nextId = 1;

  addExample(original = "", rewritten = ""): ExampleDraft {
    const draft: ExampleDraft = {
      id: this.nextId++,
      original,
      rewritten,
      originalOk: null,
      rewrittenOk: null,
    };
    this.examples.push(draft);
    return draft;
  }

  removeExample(id: number): void {
    this.examples = this.examples.filter((draft) => draft.id !== id);
  }

  /** Suggest is allowed only when every draft passed server-side parsing. */
  canSuggest(): boolean {
    return (
      this.examples.length > 0 &&
      this.examples.every(
        (draft) => draft.originalOk === true && draft.rewrittenOk === true,
      )
    );
  }

  setCards(rules: SuggestedRuleJson[]): void {
    this.cards = rules.map((rule) => ({
      rule,
      pattern: rule.pattern,
      replacement: rule.replacement,
      accepted: false,
      error: null,
    }));
  }
}
