/** Automations: rule list with pencil edit, a document editor, and the
 * dry-run tester. The tester renders the hub's report verbatim: per-condition
 * outcomes, the reason, and the actions that would fire.
 */

import { ApiError, type HubClient, type RuleDoc, type TriggerReportDoc } from "../api.js";
import { escapeHtml } from "../format.js";
import { styleFor } from "../palette.js";
import type { Notify } from "./entity-cards.js";

const BLANK_RULE = {
  schema: "hub.rule.v1",
  name: "new rule",
  enabled: true,
  version: 1,
  trigger: { type: "state_change", entity_id: "", to_value: null, from_value: null },
  conditions: [],
  actions: [{ type: "notify", recipient_role: "user", message_template: "rule fired: {value}" }],
};

function outcomeBadge(key: string, word: string): string {
  const style = styleFor(key);
  return (
    `<span class="badge outcome-${key}" data-state-key="${key}"` +
    ` data-state-color="${style.color}" data-state-glyph="${escapeHtml(style.glyph)}"` +
    ` style="background-color: ${style.color};">` +
    `<span class="glyph" aria-hidden="true">${escapeHtml(style.glyph)}</span> ${word}</span>`
  );
}

export class RuleEditor {
  private client: HubClient;
  private notify: Notify;
  private refresh: () => Promise<void>;
  private container: HTMLElement | null = null;
  private lastRendered = "";
  private editingId: string | null = null;

  constructor(client: HubClient, refresh: () => Promise<void>, notify: Notify) {
    this.client = client;
    this.refresh = refresh;
    this.notify = notify;
  }

  mount(container: HTMLElement): void {
    this.container = container;
    container.addEventListener("click", (event) => {
      const button = (event.target as HTMLElement | null)?.closest?.(
        "button[data-action]",
      ) as HTMLElement | null;
      if (button) {
        void this.handle(button);
      }
    });
  }

  render(rules: RuleDoc[]): void {
    if (!this.container) {
      return;
    }
    const fingerprint = JSON.stringify(rules) + "|" + (this.editingId ?? "");
    if (fingerprint === this.lastRendered) {
      return;
    }
    this.lastRendered = fingerprint;
    const doc = this.container.ownerDocument;
    const editorText = doc.getElementById("rule-editor-text") as HTMLTextAreaElement | null;
    const keepText = editorText?.value;
    const rows = rules
      .map(
        (rule) => `
        <li class="rule-row" data-rule-id="${rule.id}">
          <strong>${escapeHtml(rule.name)}</strong>
          <span class="version">v${rule.version}</span>
          ${outcomeBadge(rule.enabled ? "active" : "disabled", rule.enabled ? "enabled" : "disabled")}
          <button type="button" class="pencil" data-action="edit-rule" data-audio-cue="edit-rule">
            <span class="glyph" aria-hidden="true">✎</span>
            <span class="desc">Edit: open this rule in the editor below</span>
          </button>
          <button type="button" data-action="toggle-rule" data-audio-cue="toggle-enabled"
                  aria-pressed="${rule.enabled}">
            <span class="desc">${rule.enabled ? "Disable" : "Enable"} this rule</span>
          </button>
          <button type="button" data-action="delete-rule" data-audio-cue="delete-item">
            <span class="desc">Delete this rule permanently</span>
          </button>
        </li>`,
      )
      .join("");
    this.container.innerHTML = `
      <ul class="rule-list">${rows}</ul>
      <div class="card editor-card">
        <h3>${this.editingId ? `Editing ${this.editingId}` : "New rule"}</h3>
        <label for="rule-editor-text">Rule document</label>
        <textarea id="rule-editor-text" rows="14" spellcheck="false"
                  data-audio-cue="save-rule"></textarea>
        <button type="button" data-action="blank-rule" data-audio-cue="edit-rule">
          <span class="desc">Start over with a blank rule template</span>
        </button>
        <button type="button" data-action="save-rule" data-audio-cue="save-rule">
          <span class="desc">Save: send this rule document to the hub</span>
        </button>
      </div>
      <div class="card tester-card">
        <h3>Dry-run tester</h3>
        <p class="hint">Evaluates a rule against a pretend reading. Nothing is committed.</p>
        <label for="dry-rule-id">Rule to test</label>
        <select id="dry-rule-id" data-audio-cue="dry-run">
          ${rules.map((r) => `<option value="${r.id}">${escapeHtml(r.name)} (${r.id})</option>`).join("")}
        </select>
        <label for="dry-entity-id">Entity the pretend reading comes from</label>
        <input type="text" id="dry-entity-id" data-audio-cue="dry-run">
        <label for="dry-value">Pretend value (number, or true/false)</label>
        <input type="text" id="dry-value" data-audio-cue="dry-run">
        <label for="dry-unit">Unit, if any</label>
        <input type="text" id="dry-unit" data-audio-cue="dry-run">
        <button type="button" data-action="run-dry" data-audio-cue="dry-run">
          <span class="desc">Test rule: run the dry evaluation and show the report</span>
        </button>
        <div id="dry-report" aria-live="polite"></div>
      </div>`;
    const restored = doc.getElementById("rule-editor-text") as HTMLTextAreaElement;
    if (this.editingId !== null) {
      const editing = rules.find((r) => r.id === this.editingId);
      restored.value = editing ? JSON.stringify(editing, null, 2) : keepText ?? "";
    } else {
      restored.value = keepText || JSON.stringify(BLANK_RULE, null, 2);
    }
  }

  renderReport(report: TriggerReportDoc): void {
    const doc = this.container!.ownerDocument;
    const target = doc.getElementById("dry-report")!;
    const outcomes = report.conditions
      .map(
        (c) =>
          `<li>condition ${c.index + 1}: ${outcomeBadge(c.outcome, c.outcome)}</li>`,
      )
      .join("");
    const reason = report.reason
      ? `<p class="reason">reason: <strong>${escapeHtml(report.reason)}</strong></p>`
      : "";
    const actions = report.actions_that_would_fire.length
      ? `<pre class="actions">${escapeHtml(JSON.stringify(report.actions_that_would_fire, null, 2))}</pre>`
      : `<p class="actions-none">no actions would fire</p>`;
    target.innerHTML = `
      <div class="dry-report" data-rule-id="${report.rule_id}">
        <p>Would fire: ${outcomeBadge(report.triggered ? "true" : "false", report.triggered ? "yes" : "no")}</p>
        ${reason}
        <ol class="outcomes">${outcomes}</ol>
        ${actions}
        <p class="evaluated-at">evaluated at ${escapeHtml(report.evaluated_at)}</p>
      </div>`;
  }

  renderError(error: unknown): void {
    const doc = this.container!.ownerDocument;
    const target = doc.getElementById("dry-report")!;
    const message = error instanceof Error ? error.message : String(error);
    const problems =
      error instanceof ApiError && error.problems.length
        ? `<ul class="problems">${error.problems.map((p) => `<li>${escapeHtml(p)}</li>`).join("")}</ul>`
        : "";
    target.innerHTML = `
      <div class="dry-error" role="alert">
        <p class="verbatim">${escapeHtml(message)}</p>
        ${problems}
        <p class="hint">The hub rejected this request. Fix the value above and try again.</p>
      </div>`;
  }

  private async handle(button: HTMLElement): Promise<void> {
    const action = button.getAttribute("data-action")!;
    const row = button.closest("[data-rule-id]") as HTMLElement | null;
    const ruleId = row?.getAttribute("data-rule-id") ?? "";
    const doc = this.container!.ownerDocument;
    try {
      if (action === "edit-rule" && row) {
        this.editingId = ruleId;
        this.lastRendered = "";
        await this.refresh();
      } else if (action === "blank-rule") {
        this.editingId = null;
        (doc.getElementById("rule-editor-text") as HTMLTextAreaElement).value = JSON.stringify(
          BLANK_RULE,
          null,
          2,
        );
        const heading = this.container!.querySelector(".editor-card h3");
        if (heading) {
          heading.textContent = "New rule";
        }
      } else if (action === "save-rule") {
        const text = (doc.getElementById("rule-editor-text") as HTMLTextAreaElement).value;
        let parsed: Record<string, unknown>;
        try {
          parsed = JSON.parse(text) as Record<string, unknown>;
        } catch {
          this.notify("the rule document is not valid JSON", true);
          return;
        }
        if (this.editingId) {
          await this.client.updateAutomation(this.editingId, parsed);
          this.notify(`rule ${this.editingId} saved`);
        } else {
          const created = await this.client.createAutomation(parsed);
          this.editingId = created.id;
          this.notify(`rule ${created.id} created`);
        }
        await this.refresh();
      } else if (action === "toggle-rule" && row) {
        const current = button.getAttribute("aria-pressed") === "true";
        await this.client.setAutomationEnabled(ruleId, !current);
        this.notify(`rule ${current ? "disabled" : "enabled"}`);
        await this.refresh();
      } else if (action === "delete-rule" && row) {
        await this.client.deleteAutomation(ruleId);
        if (this.editingId === ruleId) {
          this.editingId = null;
        }
        this.notify("rule deleted");
        await this.refresh();
      } else if (action === "run-dry") {
        const id = (doc.getElementById("dry-rule-id") as HTMLSelectElement).value;
        const entityId = (doc.getElementById("dry-entity-id") as HTMLInputElement).value.trim();
        const rawValue = (doc.getElementById("dry-value") as HTMLInputElement).value.trim();
        const unit = (doc.getElementById("dry-unit") as HTMLInputElement).value.trim();
        let value: number | boolean;
        if (rawValue === "true" || rawValue === "false") {
          value = rawValue === "true";
        } else {
          value = Number(rawValue);
        }
        try {
          const report = await this.client.dryRun(id, { entity_id: entityId, value, unit });
          this.renderReport(report);
        } catch (error) {
          this.renderError(error);
        }
      }
    } catch (error) {
      this.notify(error instanceof Error ? error.message : String(error), true);
    }
  }
}
