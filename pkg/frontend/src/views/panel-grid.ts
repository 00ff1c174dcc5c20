/** Custom panels: saved widget layouts over live entity data. */

import type { EntityDoc, HubClient, PanelCell, PanelDoc } from "../api.js";
import { escapeHtml, stateText } from "../format.js";
import type { Notify } from "./entity-cards.js";

export class PanelGrid {
  private client: HubClient;
  private notify: Notify;
  private refresh: () => Promise<void>;
  private container: HTMLElement | null = null;
  private lastRendered = "";
  private data = new Map<string, { as_of: string; cells: PanelCell[] }>();

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

  /** Pulls per-panel data; called alongside the snapshot refresh. */
  async loadData(panels: PanelDoc[]): Promise<void> {
    const fresh = new Map<string, { as_of: string; cells: PanelCell[] }>();
    for (const panel of panels) {
      try {
        fresh.set(panel.id, await this.client.panelData(panel.id));
      } catch {
        // a panel referencing a deleted entity just renders empty
      }
    }
    this.data = fresh;
    this.lastRendered = "";
  }

  render(panels: PanelDoc[], entities: EntityDoc[]): void {
    if (!this.container) {
      return;
    }
    const fingerprint = JSON.stringify([panels, Array.from(this.data.entries())]);
    if (fingerprint === this.lastRendered) {
      return;
    }
    this.lastRendered = fingerprint;
    const options = entities
      .map((e) => `<option value="${e.id}">${escapeHtml(e.name)}</option>`)
      .join("");
    const blocks = panels
      .map((panel) => {
        const data = this.data.get(panel.id);
        const cells = (data?.cells ?? [])
          .map((cell) => {
            const body =
              cell.widget_type === "aggregate"
                ? cell.mean === null || cell.mean === undefined
                  ? "no samples in window"
                  : `mean ${cell.mean} over ${cell.sample_count} sample${cell.sample_count === 1 ? "" : "s"}`
                : escapeHtml(stateText(cell.state));
            return `<div class="panel-cell" style="grid-row: ${cell.row + 1}; grid-column: ${
              cell.col + 1
            };"><strong>${escapeHtml(cell.name)}</strong><span>${body}</span></div>`;
          })
          .join("");
        return `
          <section class="card panel-card" data-panel-id="${panel.id}">
            <h3>${escapeHtml(panel.name)}</h3>
            <p class="as-of">as of ${escapeHtml(data?.as_of ?? "not loaded")}</p>
            <div class="panel-cells">${cells}</div>
            <button type="button" data-action="delete-panel" data-audio-cue="delete-item">
              <span class="desc">Delete this panel layout</span>
            </button>
          </section>`;
      })
      .join("");
    this.container.innerHTML = `
      <div class="card">
        <h3>New panel</h3>
        <label for="panel-name">Panel name</label>
        <input type="text" id="panel-name" data-audio-cue="save-panel">
        <label for="panel-entity">Entity to show</label>
        <select id="panel-entity" data-audio-cue="save-panel">${options}</select>
        <label for="panel-widget-type">Widget</label>
        <select id="panel-widget-type" data-audio-cue="save-panel">
          <option value="entity">live state</option>
          <option value="aggregate">3-day average</option>
        </select>
        <button type="button" data-action="create-panel" data-audio-cue="save-panel">
          <span class="desc">Create panel: save this layout</span>
        </button>
      </div>
      <div class="panel-list">${blocks}</div>`;
  }

  private async handle(button: HTMLElement): Promise<void> {
    const action = button.getAttribute("data-action")!;
    const doc = this.container!.ownerDocument;
    try {
      if (action === "create-panel") {
        const name = (doc.getElementById("panel-name") as HTMLInputElement).value.trim();
        const entity = (doc.getElementById("panel-entity") as HTMLSelectElement).value;
        const widgetType = (doc.getElementById("panel-widget-type") as HTMLSelectElement).value;
        await this.client.createPanel(name, [
          { entity_id: entity, row: 0, col: 0, widget_type: widgetType },
        ]);
        this.notify(`panel "${name}" created`);
      } else if (action === "delete-panel") {
        const card = button.closest("[data-panel-id]") as HTMLElement;
        await this.client.deletePanel(card.getAttribute("data-panel-id")!);
        this.notify("panel deleted");
      }
      await this.refresh();
    } catch (error) {
      this.notify(error instanceof Error ? error.message : String(error), true);
    }
  }
}
