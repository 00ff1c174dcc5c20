/** Event log: period picker, filters, retention control, and a download
 * button that saves exactly the bytes the hub exports.
 */

import type { Download, HubClient, LogPage } from "../api.js";
import { escapeHtml, timeText } from "../format.js";
import type { Notify } from "./entity-cards.js";

const EVENT_TYPES = [
  "",
  "state_change",
  "panel_off",
  "motion_detected",
  "rule_fired",
  "dry_run",
  "alert",
  "security",
  "config_change",
];

export class LogViewer {
  private client: HubClient;
  private notify: Notify;
  private container: HTMLElement | null = null;
  private page: LogPage | null = null;
  private rendered = false;

  constructor(client: HubClient, notify: Notify) {
    this.client = client;
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

  render(): void {
    if (!this.container || this.rendered) {
      this.renderRows();
      return;
    }
    this.rendered = true;
    this.container.innerHTML = `
      <div class="card">
        <h3>Search the log</h3>
        <label for="log-from">Period start</label>
        <input type="datetime-local" id="log-from" data-audio-cue="query-logs">
        <label for="log-to">Period end</label>
        <input type="datetime-local" id="log-to" data-audio-cue="query-logs">
        <label for="log-type">Event type, blank for all</label>
        <select id="log-type" data-audio-cue="query-logs">
          ${EVENT_TYPES.map((t) => `<option value="${t}">${t || "all events"}</option>`).join("")}
        </select>
        <label for="log-entity">Entity id, blank for all</label>
        <input type="text" id="log-entity" data-audio-cue="query-logs">
        <button type="button" data-action="search" data-audio-cue="query-logs">
          <span class="desc">Search: list the events in this period</span>
        </button>
        <label for="log-format">Download format</label>
        <select id="log-format" data-audio-cue="download-log">
          <option value="lines">line-delimited records</option>
          <option value="csv">CSV table</option>
        </select>
        <button type="button" data-action="download" data-audio-cue="download-log">
          <span class="desc">Download: save this period exactly as the hub exports it</span>
        </button>
      </div>
      <div class="card">
        <h3>Retention</h3>
        <label for="log-retention">Keep events for this many days, blank for forever</label>
        <input type="number" id="log-retention" step="any" min="0" data-audio-cue="set-retention">
        <button type="button" data-action="retention" data-audio-cue="set-retention">
          <span class="desc">Apply retention: set how long events are kept</span>
        </button>
        <button type="button" data-action="purge" data-audio-cue="purge-logs">
          <span class="desc">Purge now: drop events older than the retention age</span>
        </button>
      </div>
      <div id="log-rows" aria-live="polite"></div>`;
    this.renderRows();
  }

  private renderRows(): void {
    if (!this.container) {
      return;
    }
    const target = this.container.ownerDocument.getElementById("log-rows");
    if (!target) {
      return;
    }
    if (!this.page) {
      target.innerHTML = `<p class="hint">No search yet. Pick a period and press Search.</p>`;
      return;
    }
    const rows = this.page.records
      .map(
        (r) => `
        <tr>
          <td>${r.seq}</td>
          <td>${escapeHtml(timeText(r.ts))}</td>
          <td>${escapeHtml(r.event_type)}</td>
          <td>${escapeHtml(r.entity_id ?? "")}</td>
          <td>${escapeHtml(r.actor)}</td>
          <td><code>${escapeHtml(JSON.stringify(r.details))}</code></td>
        </tr>`,
      )
      .join("");
    const more = this.page.next_after_seq
      ? `<button type="button" data-action="more" data-audio-cue="query-logs">
           <span class="desc">Load more: fetch the next page of this period</span>
         </button>`
      : "";
    target.innerHTML = `
      <div class="table-wrap">
      <table class="log-table">
        <caption>${this.page.records.length} event${this.page.records.length === 1 ? "" : "s"}</caption>
        <thead><tr><th>#</th><th>when</th><th>type</th><th>entity</th><th>actor</th><th>details</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      </div>${more}`;
  }

  private query(): { from?: string; to?: string; type?: string; entity_id?: string } {
    const doc = this.container!.ownerDocument;
    const value = (id: string) => (doc.getElementById(id) as HTMLInputElement | null)?.value ?? "";
    const from = value("log-from");
    const to = value("log-to");
    const type = value("log-type");
    const entity = value("log-entity");
    const query: { from?: string; to?: string; type?: string; entity_id?: string } = {};
    if (from) {
      query.from = from + (from.length === 16 ? ":00+00:00" : "");
    }
    if (to) {
      query.to = to + (to.length === 16 ? ":00+00:00" : "");
    }
    if (type) {
      query.type = type;
    }
    if (entity) {
      query.entity_id = entity;
    }
    return query;
  }

  /** Fetches the export for the current period; bytes pass through untouched. */
  async prepareDownload(): Promise<Download> {
    const doc = this.container!.ownerDocument;
    const fmt = (doc.getElementById("log-format") as HTMLSelectElement).value;
    const { from, to } = this.query();
    return this.client.exportLogs({ from, to, fmt });
  }

  private saveToDisk(download: Download): void {
    const doc = this.container!.ownerDocument;
    const view = doc.defaultView as (Window & { URL?: typeof URL; Blob?: typeof Blob }) | null;
    if (!view?.URL?.createObjectURL || !view.Blob) {
      return; // nothing to hand the file to outside a real browser
    }
    const blob = new view.Blob([download.bytes as BlobPart], { type: download.mediaType });
    const url = view.URL.createObjectURL(blob);
    const anchor = doc.createElement("a");
    anchor.href = url;
    anchor.download = download.filename;
    doc.body.appendChild(anchor);
    anchor.click();
    anchor.remove();
    view.URL.revokeObjectURL?.(url);
  }

  private async handle(button: HTMLElement): Promise<void> {
    const action = button.getAttribute("data-action")!;
    const doc = this.container!.ownerDocument;
    try {
      if (action === "search") {
        this.page = await this.client.queryLogs(this.query());
        this.renderRows();
      } else if (action === "more" && this.page?.next_after_seq) {
        const next = await this.client.queryLogs({
          ...this.query(),
          after_seq: this.page.next_after_seq,
        });
        this.page = {
          records: [...this.page.records, ...next.records],
          next_after_seq: next.next_after_seq,
        };
        this.renderRows();
      } else if (action === "download") {
        const download = await this.prepareDownload();
        this.saveToDisk(download);
        this.notify(`downloaded ${download.filename} (${download.bytes.length} bytes)`);
      } else if (action === "retention") {
        const raw = (doc.getElementById("log-retention") as HTMLInputElement).value;
        const days = raw === "" ? null : Number(raw);
        const applied = await this.client.setRetention(days);
        this.notify(applied === null ? "events kept forever" : `events kept ${applied} days`);
      } else if (action === "purge") {
        const purged = await this.client.purgeLogs();
        this.notify(`purged ${purged} event${purged === 1 ? "" : "s"}`);
      }
    } catch (error) {
      this.notify(error instanceof Error ? error.message : String(error), true);
    }
  }
}
