// Typed client for the rewriting service. The UI holds no rewriting logic:
// every SQL transformation, validation, and score shown on screen comes from
// these endpoints.

export interface RuleJson {
  id: number;
  name: string;
  pattern: string;
  constraints: string[];
  replacement: string;
  actions: string[];
  priority: number;
  workspace: string;
  enabled: boolean;
}

export interface SuggestedRuleJson extends RuleJson {
  dl?: number;
  covers?: number[];
}

export interface SuggestStats {
  candidates_explored: number;
  iterations: number;
  total_dl_before: number;
  total_dl_after: number;
  wall_time_ms: number;
}

export interface SuggestReport {
  rules: SuggestedRuleJson[];
  stats: SuggestStats;
}

export interface TraceStep {
  rule_id: number;
  before: string;
  after: string;
}

export interface Trace {
  steps: TraceStep[];
  terminated_by: string;
}

export interface RewriteResponse {
  sql: string;
  rewritten: boolean;
  warning?: string;
  trace?: Trace;
}

export interface WorkspaceJson {
  id: string;
  name: string;
  dialect: string;
  schema_path: string | null;
  rule_ids?: number[];
}

export interface PairBody {
  original: string;
  rewritten: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    detail = body.detail ?? body.error ?? JSON.stringify(body);
  } catch {
    // keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  rewrite(sql: string, workspace = "default", explain = false): Promise<RewriteResponse> {
    return this.request("POST", "/api/v1/rewrite", { sql, workspace, explain });
  }

  /** Server-side SQL validation: the rewrite endpoint is fail-open and
   * flags unparseable statements with a warning instead of an error. */
  async validateSql(sql: string, workspace = "default"): Promise<boolean> {
    if (!sql.trim()) {
      return false;
    }
    const response = await this.rewrite(sql, workspace, false);
    return response.warning === undefined;
  }

  suggest(pairs: PairBody[], strategy = ""): Promise<SuggestReport> {
    return this.request("POST", "/api/v1/suggest", { pairs, strategy });
  }

  listRules(workspace?: string): Promise<RuleJson[]> {
    const suffix = workspace ? `?workspace=${encodeURIComponent(workspace)}` : "";
    return this.request("GET", `/api/v1/rules${suffix}`);
  }

  createRule(rule: Partial<RuleJson> & { pattern: string; replacement: string }): Promise<RuleJson> {
    return this.request("POST", "/api/v1/rules", rule);
  }

  updateRule(id: number, patch: Partial<RuleJson>): Promise<RuleJson> {
    return this.request("PUT", `/api/v1/rules/${id}`, patch);
  }

  deleteRule(id: number): Promise<void> {
    return this.request("DELETE", `/api/v1/rules/${id}`);
  }

  listWorkspaces(): Promise<WorkspaceJson[]> {
    return this.request("GET", "/api/v1/workspaces");
  }

  createWorkspace(id: string, name?: string): Promise<WorkspaceJson> {
    return this.request("POST", "/api/v1/workspaces", { id, name: name ?? id });
  }
}
