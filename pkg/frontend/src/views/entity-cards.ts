/** Entity cards: one card per device, state rendered strictly from API docs. */

import type { EntityDoc, HubClient } from "../api.js";
import { escapeHtml, stateKey, stateText, timeText } from "../format.js";
import { rgbCss, styleFor } from "../palette.js";

export type Notify = (message: string, isError?: boolean) => void;

const KINDS = ["temperature", "co", "smoke", "motion", "light", "heater", "lock", "button"];

function chip(key: string): string {
  const style = styleFor(key);
  return (
    `<span class="state-chip" data-state-key="${key}" data-state-color="${style.color}"` +
    ` data-state-glyph="${escapeHtml(style.glyph)}" style="background-color: ${style.color};">` +
    `<span class="glyph" aria-hidden="true">${escapeHtml(style.glyph)}</span></span>` +
    `<span class="state-word">${style.label}</span>`
  );
}

function lightControls(entity: EntityDoc): string {
  const id = entity.id;
  const intensity = entity.state?.type === "light" ? entity.state.intensity ?? 0 : 0;
  const color = entity.state?.type === "light" ? entity.state.color ?? [255, 255, 255] : [255, 255, 255];
  const hex =
    "#" + color.map((c) => Math.max(0, Math.min(255, c)).toString(16).padStart(2, "0")).join("");
  return `
    <label for="${id}-intensity">Brightness, 0 to 100</label>
    <input type="number" id="${id}-intensity" min="0" max="100" value="${intensity}"
           data-audio-cue="set-light">
    <label for="${id}-color">Light color</label>
    <input type="color" id="${id}-color" value="${hex}" data-audio-cue="set-light">
    <button type="button" data-action="apply-light" data-audio-cue="set-light">
      <span class="desc">Apply light: send this brightness and color to the hub</span>
    </button>`;
}

function numericControls(entity: EntityDoc): string {
  const id = entity.id;
  const value = entity.state?.type === "numeric" ? String(entity.state.value) : "";
  const unit = entity.state?.type === "numeric" ? entity.state.unit ?? "" : "";
  return `
    <label for="${id}-value">New value</label>
    <input type="number" id="${id}-value" step="any" value="${escapeHtml(value)}"
           data-audio-cue="set-state">
    <label for="${id}-unit">Unit</label>
    <input type="text" id="${id}-unit" value="${escapeHtml(unit)}" data-audio-cue="set-state">
    <button type="button" data-action="set-numeric" data-audio-cue="set-state">
      <span class="desc">Set value: commit this reading to the hub</span>
    </button>`;
}

function booleanControls(entity: EntityDoc): string {
  const onWord = entity.kind === "lock" ? "Lock" : "On";
  const offWord = entity.kind === "lock" ? "Unlock" : "Off";
  return `
    <button type="button" data-action="bool-true" data-audio-cue="set-state">
      <span class="desc">${onWord}: set this device to ${onWord.toLowerCase()}</span>
    </button>
    <button type="button" data-action="bool-false" data-audio-cue="set-state">
      <span class="desc">${offWord}: set this device to ${offWord.toLowerCase()}</span>
    </button>`;
}

function enableControls(entity: EntityDoc): string {
  if (entity.enabled) {
    return `
      <button type="button" data-action="disable" data-audio-cue="toggle-enabled">
        <span class="desc">Disable: stop accepting readings from this device</span>
      </button>`;
  }
  return `
    <label for="${entity.id}-password">Your password, required to re-enable</label>
    <input type="password" id="${entity.id}-password" data-audio-cue="toggle-enabled"
           autocomplete="current-password">
    <button type="button" data-action="enable" data-audio-cue="toggle-enabled">
      <span class="desc">Re-enable: bring this device back with password approval</span>
    </button>`;
}

export class EntityCards {
  private client: HubClient;
  private notify: Notify;
  private refresh: () => Promise<void>;
  private container: HTMLElement | null = null;
  private lastRendered = "";

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

  render(entities: EntityDoc[]): void {
    if (!this.container) {
      return;
    }
    const fingerprint = JSON.stringify(entities);
    if (fingerprint === this.lastRendered) {
      return;
    }
    this.lastRendered = fingerprint;
    const cards = entities.map((entity) => this.card(entity)).join("");
    this.container.innerHTML = `
      <div class="card add-card">
        <h3>Add a device</h3>
        <label for="new-entity-name">Device name</label>
        <input type="text" id="new-entity-name" data-audio-cue="add-entity">
        <label for="new-entity-kind">Device kind</label>
        <select id="new-entity-kind" data-audio-cue="add-entity">
          ${KINDS.map((k) => `<option value="${k}">${k}</option>`).join("")}
        </select>
        <button type="button" data-action="add-entity" data-audio-cue="add-entity">
          <span class="desc">Add device: register it with the hub</span>
        </button>
      </div>
      <div class="card-grid">${cards}</div>`;
  }

  private card(entity: EntityDoc): string {
    const key = stateKey(entity, entity.state);
    const isLight = entity.kind === "light";
    const lightColor =
      isLight && entity.state?.type === "light" && entity.state.color
        ? rgbCss(entity.state.color)
        : null;
    const icon = lightColor
      ? `<span class="light-icon" data-role="light-color" style="background-color: ${lightColor};"
               aria-hidden="true"></span>`
      : "";
    let controls = "";
    if (!entity.enabled) {
      controls = enableControls(entity);
    } else if (isLight) {
      controls = lightControls(entity) + enableControls(entity);
    } else if (entity.kind === "motion" || entity.kind === "lock" || entity.kind === "button") {
      controls = booleanControls(entity) + enableControls(entity);
    } else {
      controls = numericControls(entity) + enableControls(entity);
    }
    const meta = entity.state
      ? `updated by ${escapeHtml(entity.state.updated_by)} at ${timeText(entity.state.updated_at)}`
      : "no readings recorded";
    return `
      <article class="card entity-card" data-entity-id="${entity.id}" data-kind="${entity.kind}">
        <header>${chip(key)} ${icon}<h3>${escapeHtml(entity.name)}</h3>
          <span class="kind">${entity.kind}</span></header>
        <p class="state-text">${escapeHtml(stateText(entity.state))}</p>
        <p class="state-meta">${meta}</p>
        <div class="controls">${controls}</div>
      </article>`;
  }

  private input(card: HTMLElement, suffix: string): HTMLInputElement | null {
    const id = card.getAttribute("data-entity-id");
    return card.ownerDocument.getElementById(`${id}-${suffix}`) as HTMLInputElement | null;
  }

  private async handle(button: HTMLElement): Promise<void> {
    const action = button.getAttribute("data-action")!;
    const card = button.closest("[data-entity-id]") as HTMLElement | null;
    const entityId = card?.getAttribute("data-entity-id") ?? "";
    try {
      if (action === "add-entity") {
        const doc = this.container!.ownerDocument;
        const name = (doc.getElementById("new-entity-name") as HTMLInputElement).value.trim();
        const kind = (doc.getElementById("new-entity-kind") as HTMLSelectElement).value;
        await this.client.createEntity({ name, kind });
        this.notify(`added ${kind} "${name}"`);
      } else if (action === "apply-light" && card) {
        const intensity = Number(this.input(card, "intensity")!.value);
        const hex = this.input(card, "color")!.value.replace("#", "");
        const color = [0, 2, 4].map((i) => parseInt(hex.slice(i, i + 2), 16));
        await this.client.setLight(entityId, intensity, color);
        this.notify("light updated");
      } else if (action === "set-numeric" && card) {
        const value = Number(this.input(card, "value")!.value);
        const unit = this.input(card, "unit")!.value;
        await this.client.setState(entityId, value, unit);
        this.notify("value committed");
      } else if (action === "bool-true" && card) {
        await this.client.setState(entityId, true);
        this.notify("switched on");
      } else if (action === "bool-false" && card) {
        await this.client.setState(entityId, false);
        this.notify("switched off");
      } else if (action === "disable" && card) {
        await this.client.setEnabled(entityId, false);
        this.notify("device disabled");
      } else if (action === "enable" && card) {
        const password = this.input(card, "password")?.value ?? "";
        await this.client.setEnabled(entityId, true, password);
        this.notify("device re-enabled");
      }
      await this.refresh();
    } catch (error) {
      this.notify(error instanceof Error ? error.message : String(error), true);
    }
  }
}
