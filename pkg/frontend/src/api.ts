/** Typed client for the hub HTTP API.
 *
 * Every response the dashboard renders comes from here; views never invent
 * state. All mutations funnel through a single gate that refuses to build a
 * request without a full MFA session token, so no UI path can write to the
 * hub while logged out or half-authenticated.
 */

export const SCHEMA_VERSION = "hub.api.v1";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  reasons: string[];
  problems: string[];

  constructor(status: number, message: string, reasons: string[] = [], problems: string[] = []) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.reasons = reasons;
    this.problems = problems;
  }

  get needsStepUp(): boolean {
    return this.reasons.includes("mfa_incomplete");
  }

  get credentialExpired(): boolean {
    return this.reasons.includes("credential_expired") || this.status === 403 && /expired/.test(this.message);
  }
}

/** Thrown before any network I/O when a mutation is attempted with no session. */
export class AuthRequiredError extends Error {
  constructor() {
    super("not signed in: complete the password and code steps first");
    this.name = "AuthRequiredError";
  }
}

export interface LoginStep {
  status: string;
  challenge_id?: string;
  session_token?: string;
  reason?: string;
}

export interface StateDoc {
  type: "numeric" | "boolean" | "light";
  value?: number | boolean;
  unit?: string;
  on?: boolean;
  intensity?: number;
  color?: number[];
  updated_at: string;
  updated_by: string;
}

export interface EntityDoc {
  id: string;
  name: string;
  kind: string;
  location_id: string | null;
  enabled: boolean;
  attributes: Record<string, unknown>;
  state: StateDoc | null;
}

export interface LocationDoc {
  id: string;
  name: string;
  latitude: number | null;
  longitude: number | null;
  sharing_enabled: boolean;
  created_at: string;
  retention_days: number;
}

export interface RuleDoc {
  schema: string;
  id: string;
  name: string;
  enabled: boolean;
  version: number;
  trigger: Record<string, unknown>;
  conditions: Record<string, unknown>[];
  actions: Record<string, unknown>[];
}

export interface ConditionOutcomeDoc {
  index: number;
  outcome: "true" | "false" | "unavailable";
}

export interface TriggerReportDoc {
  rule_id: string;
  triggered: boolean;
  reason: string;
  evaluated_at: string;
  conditions: ConditionOutcomeDoc[];
  actions_that_would_fire: Record<string, unknown>[];
}

export interface LogRecordDoc {
  seq: number;
  ts: string;
  event_type: string;
  entity_id: string | null;
  actor: string;
  details: Record<string, string>;
}

export interface LogPage {
  records: LogRecordDoc[];
  next_after_seq: number | null;
}

export interface PanelWidgetDoc {
  entity_id: string;
  row: number;
  col: number;
  widget_type: string;
  window_seconds: number;
}

export interface PanelDoc {
  id: string;
  name: string;
  widgets: PanelWidgetDoc[];
}

export interface PanelCell {
  entity_id: string;
  name: string;
  kind: string;
  enabled: boolean;
  row: number;
  col: number;
  widget_type: string;
  state: StateDoc | null;
  mean?: number | null;
  sample_count?: number;
  window_seconds?: number;
}

export interface LogQuery {
  from?: string;
  to?: string;
  type?: string;
  entity_id?: string;
  after_seq?: number;
  limit?: number;
}

export interface Download {
  filename: string;
  mediaType: string;
  bytes: Uint8Array;
}

function queryString(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") {
      search.set(key, String(value));
    }
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

export class HubClient {
  private fetchFn: FetchLike;
  private base: string;
  session: string | null = null;
  user: string | null = null;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  // -- plumbing --------------------------------------------------------------

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.session) {
      headers["X-Session-Token"] = this.session;
    }
    return headers;
  }

  private raise(status: number, doc: Record<string, unknown>): never {
    const reasons = Array.isArray(doc.reasons) ? (doc.reasons as string[]) : [];
    const problems = Array.isArray(doc.problems) ? (doc.problems as string[]) : [];
    // reasons ride along in the message so any surface that shows it
    // (status line, dry-run panel) names why the hub said no
    const text = String(doc.error ?? status);
    const message = reasons.length ? `${text} (${reasons.join(", ")})` : text;
    throw new ApiError(status, message, reasons, problems);
  }

  private async parse(res: Response): Promise<Record<string, unknown>> {
    const doc = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      this.raise(res.status, doc);
    }
    return doc;
  }

  private async get(path: string): Promise<Record<string, unknown>> {
    const res = await this.fetchFn(this.base + path, { method: "GET", headers: this.headers() });
    return this.parse(res);
  }

  /** The only way a write leaves the client. Refuses without a session. */
  private async mutate(
    method: "POST" | "PUT" | "DELETE",
    path: string,
    body?: unknown,
  ): Promise<Record<string, unknown>> {
    if (!this.session) {
      throw new AuthRequiredError();
    }
    const res = await this.fetchFn(this.base + path, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return this.parse(res);
  }

  /** Auth endpoints are the one session-less POST surface; everything else mutates.
   * A rejected or locked sign-in step arrives as 4xx with the step document in
   * the body, so only a real error envelope raises here.
   */
  private async authPost(path: string, body: unknown): Promise<Record<string, unknown>> {
    const res = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(body),
    });
    const doc = (await res.json()) as Record<string, unknown>;
    if (!res.ok && doc.error !== undefined) {
      this.raise(res.status, doc);
    }
    return doc;
  }

  // -- auth --------------------------------------------------------------------

  /** Step one: password. Never yields a session by itself. */
  async login(userId: string, password: string): Promise<LoginStep> {
    const doc = (await this.authPost("/api/auth/login", {
      user_id: userId,
      password,
    })) as unknown as LoginStep;
    this.user = userId;
    return doc;
  }

  /** Step two: the rotating code. Only success here arms the session. */
  async completeMfa(challengeId: string, code: string): Promise<LoginStep> {
    const doc = (await this.authPost("/api/auth/mfa", {
      challenge_id: challengeId,
      code,
    })) as unknown as LoginStep;
    if (doc.session_token) {
      this.session = doc.session_token;
    }
    return doc;
  }

  async stepUp(code: string): Promise<boolean> {
    const doc = await this.authPost("/api/auth/step_up", { code });
    return Boolean(doc.restored);
  }

  async changePassword(userId: string, oldPassword: string, newPassword: string): Promise<void> {
    await this.authPost("/api/auth/password", {
      user_id: userId,
      old_password: oldPassword,
      new_password: newPassword,
    });
  }

  async logout(): Promise<void> {
    await this.authPost("/api/auth/logout", {});
    this.session = null;
    this.user = null;
  }

  // -- entities ------------------------------------------------------------------

  async listEntities(): Promise<EntityDoc[]> {
    const doc = await this.get("/api/entities");
    return doc.items as EntityDoc[];
  }

  async createEntity(body: {
    name: string;
    kind: string;
    location_id?: string | null;
    attributes?: Record<string, unknown>;
  }): Promise<EntityDoc> {
    return (await this.mutate("POST", "/api/entities", body)) as unknown as EntityDoc;
  }

  async setState(entityId: string, value: number | boolean, unit = ""): Promise<StateDoc> {
    const doc = await this.mutate("POST", `/api/entities/${entityId}/state`, { value, unit });
    return doc.state as StateDoc;
  }

  async setLight(entityId: string, intensity: number, color?: number[]): Promise<StateDoc> {
    const body: Record<string, unknown> = { intensity };
    if (color) {
      body.color = color;
    }
    const doc = await this.mutate("POST", `/api/entities/${entityId}/light`, body);
    return doc.state as StateDoc;
  }

  async setEnabled(entityId: string, enabled: boolean, password = ""): Promise<EntityDoc> {
    const doc = await this.mutate("POST", `/api/entities/${entityId}/enabled`, {
      enabled,
      password,
    });
    return doc as unknown as EntityDoc;
  }

  // -- locations ---------------------------------------------------------------------

  async listLocations(): Promise<LocationDoc[]> {
    const doc = await this.get("/api/locations");
    return doc.items as LocationDoc[];
  }

  async createLocation(body: {
    name: string;
    map_point?: [number, number];
    latitude?: number;
    longitude?: number;
    retention_days?: number;
  }): Promise<LocationDoc> {
    return (await this.mutate("POST", "/api/locations", body)) as unknown as LocationDoc;
  }

  async deleteLocation(locationId: string): Promise<void> {
    await this.mutate("DELETE", `/api/locations/${locationId}`);
  }

  async setSharing(locationId: string, enabled: boolean): Promise<LocationDoc> {
    const doc = await this.mutate("POST", `/api/locations/${locationId}/sharing`, { enabled });
    return doc as unknown as LocationDoc;
  }

  async purgeLocations(): Promise<number> {
    const doc = await this.mutate("POST", "/api/locations/purge", {});
    return Number(doc.purged);
  }

  // -- automations --------------------------------------------------------------------

  async listAutomations(): Promise<RuleDoc[]> {
    const doc = await this.get("/api/automations");
    return doc.items as RuleDoc[];
  }

  async createAutomation(rule: Record<string, unknown>): Promise<RuleDoc> {
    return (await this.mutate("POST", "/api/automations", rule)) as unknown as RuleDoc;
  }

  async updateAutomation(ruleId: string, rule: Record<string, unknown>): Promise<RuleDoc> {
    return (await this.mutate("PUT", `/api/automations/${ruleId}`, rule)) as unknown as RuleDoc;
  }

  async deleteAutomation(ruleId: string): Promise<void> {
    await this.mutate("DELETE", `/api/automations/${ruleId}`);
  }

  async setAutomationEnabled(ruleId: string, enabled: boolean): Promise<RuleDoc> {
    const doc = await this.mutate("POST", `/api/automations/${ruleId}/enabled`, { enabled });
    return doc as unknown as RuleDoc;
  }

  async dryRun(
    ruleId: string,
    probe: { entity_id: string; value: number | boolean; unit?: string },
  ): Promise<TriggerReportDoc> {
    const doc = await this.mutate("POST", `/api/automations/${ruleId}/dry_run`, probe);
    return doc as unknown as TriggerReportDoc;
  }

  // -- logs ------------------------------------------------------------------------------

  async queryLogs(query: LogQuery = {}): Promise<LogPage> {
    const doc = await this.get(
      "/api/logs" +
        queryString({
          from: query.from,
          to: query.to,
          type: query.type,
          entity_id: query.entity_id,
          after_seq: query.after_seq,
          limit: query.limit,
        }),
    );
    return doc as unknown as LogPage;
  }

  /** Raw export bytes, untouched. The download must be exactly what the hub sent. */
  async exportLogs(query: { from?: string; to?: string; fmt?: string } = {}): Promise<Download> {
    const res = await this.fetchFn(
      this.base + "/api/logs/export" + queryString(query as Record<string, string | undefined>),
      { method: "GET", headers: this.headers() },
    );
    if (!res.ok) {
      this.raise(res.status, (await res.json()) as Record<string, unknown>);
    }
    const disposition = res.headers.get("content-disposition") ?? "";
    const match = /filename="([^"]+)"/.exec(disposition);
    return {
      filename: match ? match[1]! : "hub-log-export.jsonl",
      mediaType: res.headers.get("content-type") ?? "application/octet-stream",
      bytes: new Uint8Array(await res.arrayBuffer()),
    };
  }

  async setRetention(maxAgeDays: number | null): Promise<number | null> {
    const doc = await this.mutate("PUT", "/api/logs/retention", { max_age_days: maxAgeDays });
    return doc.max_age_days as number | null;
  }

  async purgeLogs(): Promise<number> {
    const doc = await this.mutate("POST", "/api/logs/purge", {});
    return Number(doc.purged);
  }

  // -- panels ----------------------------------------------------------------------------

  async listPanels(): Promise<PanelDoc[]> {
    const doc = await this.get("/api/panels");
    return doc.items as PanelDoc[];
  }

  async createPanel(name: string, widgets: Partial<PanelWidgetDoc>[]): Promise<PanelDoc> {
    return (await this.mutate("POST", "/api/panels", { name, widgets })) as unknown as PanelDoc;
  }

  async updatePanel(
    panelId: string,
    name: string,
    widgets: Partial<PanelWidgetDoc>[],
  ): Promise<PanelDoc> {
    return (await this.mutate("PUT", `/api/panels/${panelId}`, {
      name,
      widgets,
    })) as unknown as PanelDoc;
  }

  async deletePanel(panelId: string): Promise<void> {
    await this.mutate("DELETE", `/api/panels/${panelId}`);
  }

  async panelData(panelId: string): Promise<{ as_of: string; cells: PanelCell[] }> {
    const doc = await this.get(`/api/panels/${panelId}/data`);
    return doc as unknown as { as_of: string; cells: PanelCell[] };
  }

  // -- misc -------------------------------------------------------------------------------

  async listServices(): Promise<string[]> {
    const doc = await this.get("/api/services");
    return doc.items as string[];
  }

  async health(): Promise<{ time: string; degraded: boolean; version: string }> {
    const doc = await this.get("/api/health");
    return doc as unknown as { time: string; degraded: boolean; version: string };
  }
}

/** One row per privileged write the UI can issue.
 *
 * Mirrors the hub's privileged-route manifest; the test suite holds the two
 * lists equal so a new write endpoint cannot appear without a catalogued,
 * session-gated client method.
 */
export interface MutationRow {
  method: "POST" | "PUT" | "DELETE";
  template: string;
  invoke: (client: HubClient) => Promise<unknown>;
}

export const MUTATION_CATALOG: MutationRow[] = [
  {
    method: "POST",
    template: "/api/automations",
    invoke: (c) =>
      c.createAutomation({
        schema: "hub.rule.v1",
        id: "rule-sweep",
        name: "sweep",
        enabled: true,
        version: 1,
        trigger: { type: "state_change", entity_id: "ent-1" },
        conditions: [],
        actions: [{ type: "notify", recipient_role: "user", message_template: "x" }],
      }),
  },
  {
    method: "PUT",
    template: "/api/automations/{rule_id}",
    invoke: (c) =>
      c.updateAutomation("rule-1", {
        schema: "hub.rule.v1",
        name: "sweep",
        enabled: true,
        version: 1,
        trigger: { type: "state_change", entity_id: "ent-1" },
        conditions: [],
        actions: [{ type: "notify", recipient_role: "user", message_template: "x" }],
      }),
  },
  { method: "DELETE", template: "/api/automations/{rule_id}", invoke: (c) => c.deleteAutomation("rule-1") },
  {
    method: "POST",
    template: "/api/automations/{rule_id}/dry_run",
    invoke: (c) => c.dryRun("rule-1", { entity_id: "ent-1", value: 1 }),
  },
  {
    method: "POST",
    template: "/api/automations/{rule_id}/enabled",
    invoke: (c) => c.setAutomationEnabled("rule-1", true),
  },
  { method: "POST", template: "/api/entities", invoke: (c) => c.createEntity({ name: "x", kind: "temperature" }) },
  {
    method: "POST",
    template: "/api/entities/{entity_id}/enabled",
    invoke: (c) => c.setEnabled("ent-1", false),
  },
  {
    method: "POST",
    template: "/api/entities/{entity_id}/light",
    invoke: (c) => c.setLight("ent-1", 50, [1, 2, 3]),
  },
  { method: "POST", template: "/api/entities/{entity_id}/state", invoke: (c) => c.setState("ent-1", 1) },
  { method: "POST", template: "/api/locations", invoke: (c) => c.createLocation({ name: "x" }) },
  { method: "POST", template: "/api/locations/purge", invoke: (c) => c.purgeLocations() },
  { method: "DELETE", template: "/api/locations/{location_id}", invoke: (c) => c.deleteLocation("loc-1") },
  {
    method: "POST",
    template: "/api/locations/{location_id}/sharing",
    invoke: (c) => c.setSharing("loc-1", true),
  },
  { method: "PUT", template: "/api/logs/retention", invoke: (c) => c.setRetention(30) },
  { method: "POST", template: "/api/logs/purge", invoke: (c) => c.purgeLogs() },
  { method: "POST", template: "/api/panels", invoke: (c) => c.createPanel("x", []) },
  { method: "PUT", template: "/api/panels/{panel_id}", invoke: (c) => c.updatePanel("panel-1", "x", []) },
  { method: "DELETE", template: "/api/panels/{panel_id}", invoke: (c) => c.deletePanel("panel-1") },
];
