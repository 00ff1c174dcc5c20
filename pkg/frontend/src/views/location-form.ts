/** Locations: the list, the add form, and the interactive map.
 *
 * Clicking the map fills the latitude/longitude inputs with exactly the
 * values the hub computes for that map point, so what the resident sees is
 * what gets stored.
 */

import type { HubClient, LocationDoc } from "../api.js";
import { escapeHtml } from "../format.js";
import { DEFAULT_BOUNDS, interpolate, type MapBounds } from "../geo.js";
import type { Notify } from "./entity-cards.js";

export class LocationForm {
  bounds: MapBounds;
  private client: HubClient;
  private notify: Notify;
  private refresh: () => Promise<void>;
  private container: HTMLElement | null = null;
  private lastRendered = "";

  constructor(
    client: HubClient,
    refresh: () => Promise<void>,
    notify: Notify,
    bounds: MapBounds = DEFAULT_BOUNDS,
  ) {
    this.client = client;
    this.refresh = refresh;
    this.notify = notify;
    this.bounds = bounds;
  }

  mount(container: HTMLElement): void {
    this.container = container;
    container.addEventListener("click", (event) => {
      const target = event.target as HTMLElement | null;
      const mapButton = target?.closest?.("#location-map") as HTMLElement | null;
      if (mapButton) {
        this.handleMapClick(event as MouseEvent, mapButton);
        return;
      }
      const button = target?.closest?.("button[data-action]") as HTMLElement | null;
      if (button) {
        void this.handle(button);
      }
    });
  }

  render(locations: LocationDoc[]): void {
    if (!this.container) {
      return;
    }
    const fingerprint = JSON.stringify(locations);
    if (fingerprint === this.lastRendered) {
      return;
    }
    this.lastRendered = fingerprint;
    const rows = locations
      .map(
        (loc) => `
        <li class="location-row" data-location-id="${loc.id}">
          <strong>${escapeHtml(loc.name)}</strong>
          <span class="coords">${loc.latitude ?? "?"}, ${loc.longitude ?? "?"}</span>
          <span class="retention">kept ${loc.retention_days} days</span>
          <button type="button" data-action="toggle-sharing" data-audio-cue="toggle-sharing"
                  aria-pressed="${loc.sharing_enabled}">
            <span class="desc">Sharing ${loc.sharing_enabled ? "on" : "off"}: press to turn it ${
              loc.sharing_enabled ? "off" : "on"
            }</span>
          </button>
          <button type="button" data-action="delete-location" data-audio-cue="delete-item">
            <span class="desc">Delete this location and its stored position</span>
          </button>
        </li>`,
      )
      .join("");
    this.container.innerHTML = `
      <div class="card">
        <h3>Add a location</h3>
        <label for="location-name">Location name</label>
        <input type="text" id="location-name" data-audio-cue="add-location">
        <button type="button" id="location-map" class="map-pick" data-audio-cue="map-pick"
                aria-describedby="map-help">
          <span class="desc" id="map-help">Map: click a spot to fill the latitude and longitude
            fields below with that position</span>
          <span class="map-face" aria-hidden="true"></span>
        </button>
        <label for="location-lat">Latitude</label>
        <input type="number" id="location-lat" step="any" data-audio-cue="add-location">
        <label for="location-lon">Longitude</label>
        <input type="number" id="location-lon" step="any" data-audio-cue="add-location">
        <label for="location-retention">Days to keep this location</label>
        <input type="number" id="location-retention" step="any" min="0" value="30"
               data-audio-cue="add-location">
        <button type="button" data-action="add-location" data-audio-cue="add-location">
          <span class="desc">Add location: store it on the hub</span>
        </button>
        <button type="button" data-action="purge-locations" data-audio-cue="purge-logs">
          <span class="desc">Purge: remove locations older than their retention period</span>
        </button>
      </div>
      <ul class="location-list">${rows}</ul>`;
  }

  /** Map click: normalized coordinates -> interpolated lat/lon -> form fields. */
  pickPoint(x: number, y: number): void {
    const point = interpolate(this.bounds, x, y);
    const doc = this.container!.ownerDocument;
    (doc.getElementById("location-lat") as HTMLInputElement).value = String(point.latitude);
    (doc.getElementById("location-lon") as HTMLInputElement).value = String(point.longitude);
  }

  private handleMapClick(event: MouseEvent, mapButton: HTMLElement): void {
    const rect = mapButton.getBoundingClientRect();
    if (!rect.width || !rect.height) {
      return; // no layout information (non-graphical test environments)
    }
    const x = Math.min(1, Math.max(0, (event.clientX - rect.left) / rect.width));
    // screen y grows downward; map y grows northward
    const y = Math.min(1, Math.max(0, 1 - (event.clientY - rect.top) / rect.height));
    this.pickPoint(x, y);
  }

  private async handle(button: HTMLElement): Promise<void> {
    const action = button.getAttribute("data-action")!;
    const row = button.closest("[data-location-id]") as HTMLElement | null;
    const locationId = row?.getAttribute("data-location-id") ?? "";
    const doc = this.container!.ownerDocument;
    try {
      if (action === "add-location") {
        const name = (doc.getElementById("location-name") as HTMLInputElement).value.trim();
        const lat = (doc.getElementById("location-lat") as HTMLInputElement).value;
        const lon = (doc.getElementById("location-lon") as HTMLInputElement).value;
        const retention = (doc.getElementById("location-retention") as HTMLInputElement).value;
        const body: Parameters<HubClient["createLocation"]>[0] = { name };
        if (lat !== "" && lon !== "") {
          body.latitude = Number(lat);
          body.longitude = Number(lon);
        }
        if (retention !== "") {
          body.retention_days = Number(retention);
        }
        await this.client.createLocation(body);
        this.notify(`added location "${name}"`);
      } else if (action === "toggle-sharing" && row) {
        const current = button.getAttribute("aria-pressed") === "true";
        await this.client.setSharing(locationId, !current);
        this.notify(`sharing ${current ? "disabled" : "enabled"}`);
      } else if (action === "delete-location" && row) {
        await this.client.deleteLocation(locationId);
        this.notify("location deleted");
      } else if (action === "purge-locations") {
        const purged = await this.client.purgeLocations();
        this.notify(`purged ${purged} expired location${purged === 1 ? "" : "s"}`);
      }
      await this.refresh();
    } catch (error) {
      this.notify(error instanceof Error ? error.message : String(error), true);
    }
  }
}
