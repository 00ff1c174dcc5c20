/** Snapshot store + polling loop.
 *
 * Views render only what is in the latest snapshot, which holds raw API
 * documents. Nothing in here synthesizes state; a failed refresh keeps the
 * previous snapshot and records the error for the shell to show.
 */

import type { EntityDoc, HubClient, LocationDoc, PanelDoc, RuleDoc } from "./api.js";

export const DEFAULT_POLL_MS = 2000;

export interface Snapshot {
  entities: EntityDoc[];
  locations: LocationDoc[];
  automations: RuleDoc[];
  panels: PanelDoc[];
  services: string[];
  fetchedAt: number;
}

export class DashStore {
  client: HubClient;
  snapshot: Snapshot = {
    entities: [],
    locations: [],
    automations: [],
    panels: [],
    services: [],
    fetchedAt: 0,
  };
  lastError: string | null = null;
  private listeners: Array<(snapshot: Snapshot) => void> = [];

  constructor(client: HubClient) {
    this.client = client;
  }

  subscribe(listener: (snapshot: Snapshot) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  async refresh(): Promise<void> {
    try {
      const [entities, locations, automations, panels, services] = await Promise.all([
        this.client.listEntities(),
        this.client.listLocations(),
        this.client.listAutomations(),
        this.client.listPanels(),
        this.client.listServices(),
      ]);
      this.snapshot = { entities, locations, automations, panels, services, fetchedAt: Date.now() };
      this.lastError = null;
    } catch (error) {
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    } finally {
      for (const listener of this.listeners) {
        listener(this.snapshot);
      }
    }
  }
}

export class Poller {
  intervalMs: number;
  private tick: () => Promise<void>;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(tick: () => Promise<void>, intervalMs: number = DEFAULT_POLL_MS) {
    this.tick = tick;
    this.intervalMs = intervalMs;
  }

  get running(): boolean {
    return this.timer !== null;
  }

  start(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.tick().catch(() => {
        // refresh errors land in DashStore.lastError; keep polling
      });
    }, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
