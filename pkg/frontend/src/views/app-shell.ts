/** The shell: sign-in flow, navigation, status line, settings, and the five
 * screens. Mutations that come back "mfa_incomplete" pop the step-up form
 * instead of retrying, so a downgraded session can never slip a write through.
 */

import { ApiError, AuthRequiredError, type HubClient } from "../api.js";
import { AudioCueHost } from "../audio.js";
import { escapeHtml } from "../format.js";
import { DashStore, DEFAULT_POLL_MS, Poller } from "../store.js";
import { renderTutorial } from "../tutorials.js";
import { EntityCards } from "./entity-cards.js";
import { LocationForm } from "./location-form.js";
import { LogViewer } from "./log-viewer.js";
import { PanelGrid } from "./panel-grid.js";
import { RuleEditor } from "./rule-editor.js";

const SCREENS = [
  ["entities", "Devices"],
  ["locations", "Locations"],
  ["automations", "Automations"],
  ["logs", "Event log"],
  ["panels", "Panels"],
] as const;

export class AppShell {
  client: HubClient;
  store: DashStore;
  poller: Poller;
  audio: AudioCueHost;
  cards: EntityCards;
  locations: LocationForm;
  rules: RuleEditor;
  logs: LogViewer;
  panels: PanelGrid;
  private container: HTMLElement | null = null;
  private challengeId: string | null = null;

  constructor(client: HubClient, pollMs: number = DEFAULT_POLL_MS) {
    this.client = client;
    this.store = new DashStore(client);
    this.poller = new Poller(() => this.refresh(), pollMs);
    this.audio = new AudioCueHost();
    const notify = (message: string, isError = false) => this.showStatus(message, isError);
    const refresh = () => this.refresh();
    this.cards = new EntityCards(client, refresh, notify);
    this.locations = new LocationForm(client, refresh, notify);
    this.rules = new RuleEditor(client, refresh, notify);
    this.logs = new LogViewer(client, notify);
    this.panels = new PanelGrid(client, refresh, notify);
  }

  mount(container: HTMLElement): void {
    this.container = container;
    const doc = container.ownerDocument;
    container.innerHTML = `
      <header class="topbar">
        <h1>Home hub</h1>
        <p id="status-line" role="alert" aria-live="assertive"></p>
        <div id="audio-slot"></div>
        <button type="button" id="sign-out" data-audio-cue="sign-out" hidden>
          <span class="desc">Sign out and end this session</span>
        </button>
      </header>
      <section id="auth" class="card" data-auth-stage="password">
        <h2>Sign in</h2>
        <form id="login-form">
          <label for="login-user">Your user name</label>
          <input type="text" id="login-user" autocomplete="username" data-audio-cue="sign-in">
          <label for="login-password">Your password</label>
          <input type="password" id="login-password" autocomplete="current-password"
                 data-audio-cue="sign-in">
          <button type="submit" id="login-submit" data-audio-cue="sign-in">
            <span class="desc">Sign in: check the password, then ask for your code</span>
          </button>
        </form>
        <form id="mfa-form" hidden>
          <label for="mfa-code">The 6-digit code from your authenticator</label>
          <input type="text" id="mfa-code" inputmode="numeric" autocomplete="one-time-code"
                 data-audio-cue="sign-in">
          <button type="submit" id="mfa-submit" data-audio-cue="sign-in">
            <span class="desc">Verify code and open the dashboard</span>
          </button>
        </form>
        <form id="step-up-form" hidden>
          <p class="hint">This session needs re-verification before it can make changes.</p>
          <label for="step-up-code">Fresh authenticator code</label>
          <input type="text" id="step-up-code" inputmode="numeric" autocomplete="one-time-code"
                 data-audio-cue="step-up">
          <button type="submit" id="step-up-submit" data-audio-cue="step-up">
            <span class="desc">Re-verify this session with a fresh code</span>
          </button>
        </form>
      </section>
      <nav id="nav" hidden>
        ${SCREENS.map(
          ([key, label]) => `
          <button type="button" data-nav="${key}" data-audio-cue="navigate">
            <span class="desc">${label}: open this screen</span>
          </button>`,
        ).join("")}
      </nav>
      <main id="screens" hidden>
        ${SCREENS.map(
          ([key, label]) => `
          <section data-screen="${key}" aria-label="${label}">
            <h2>${label}</h2>
            <div class="tutorial-slot" data-tutorial-slot="${key}"></div>
            <div class="screen-body" id="screen-${key}"></div>
          </section>`,
        ).join("")}
      </main>`;

    this.audio.mount(doc.getElementById("audio-slot")!);
    for (const [key] of SCREENS) {
      doc.querySelector(`[data-tutorial-slot="${key}"]`)!.appendChild(renderTutorial(doc, key));
    }
    this.cards.mount(doc.getElementById("screen-entities")!);
    this.locations.mount(doc.getElementById("screen-locations")!);
    this.rules.mount(doc.getElementById("screen-automations")!);
    this.logs.mount(doc.getElementById("screen-logs")!);
    this.panels.mount(doc.getElementById("screen-panels")!);

    doc.getElementById("login-form")!.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitLogin();
    });
    doc.getElementById("mfa-form")!.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitMfa();
    });
    doc.getElementById("step-up-form")!.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitStepUp();
    });
    doc.getElementById("sign-out")!.addEventListener("click", () => {
      void this.signOut();
    });
    container.addEventListener("click", (event) => {
      const nav = (event.target as HTMLElement | null)?.closest?.(
        "button[data-nav]",
      ) as HTMLElement | null;
      if (nav) {
        this.showScreen(nav.getAttribute("data-nav")!);
      }
    });

    this.store.subscribe((snapshot) => {
      this.cards.render(snapshot.entities);
      this.locations.render(snapshot.locations);
      this.rules.render(snapshot.automations);
      this.logs.render();
      this.panels.render(snapshot.panels, snapshot.entities);
    });
  }

  showStatus(message: string, isError = false): void {
    const line = this.container?.ownerDocument.getElementById("status-line");
    if (!line) {
      return;
    }
    line.innerHTML = escapeHtml(message);
    line.className = isError ? "status-error" : "status-ok";
    if (isError && /mfa_incomplete|re-verif|not signed in/.test(message)) {
      this.showStepUp();
    }
  }

  /** Surfaces step-up without ever retrying the blocked write itself. */
  handleMutationError(error: unknown): void {
    if (error instanceof ApiError && error.needsStepUp) {
      this.showStatus("this session must be re-verified before it can make changes", true);
      this.showStepUp();
    } else if (error instanceof AuthRequiredError) {
      this.showStatus(error.message, true);
    } else {
      this.showStatus(error instanceof Error ? error.message : String(error), true);
    }
  }

  showScreen(key: string): void {
    const doc = this.container!.ownerDocument;
    for (const section of Array.from(doc.querySelectorAll("[data-screen]"))) {
      const active = section.getAttribute("data-screen") === key;
      if (active) {
        section.removeAttribute("data-inactive");
      } else {
        section.setAttribute("data-inactive", "");
      }
    }
  }

  private showStepUp(): void {
    const doc = this.container!.ownerDocument;
    doc.getElementById("auth")!.removeAttribute("hidden");
    doc.getElementById("login-form")!.setAttribute("hidden", "");
    doc.getElementById("mfa-form")!.setAttribute("hidden", "");
    doc.getElementById("step-up-form")!.removeAttribute("hidden");
  }

  private async submitLogin(): Promise<void> {
    const doc = this.container!.ownerDocument;
    const user = (doc.getElementById("login-user") as HTMLInputElement).value.trim();
    const password = (doc.getElementById("login-password") as HTMLInputElement).value;
    try {
      const step = await this.client.login(user, password);
      if (step.status === "challenge" && step.challenge_id) {
        this.challengeId = step.challenge_id;
        doc.getElementById("login-form")!.setAttribute("hidden", "");
        doc.getElementById("mfa-form")!.removeAttribute("hidden");
        this.showStatus("password accepted; enter your code");
      } else {
        this.showStatus(`sign-in: ${step.status}${step.reason ? ", " + step.reason : ""}`, true);
      }
    } catch (error) {
      this.showStatus(error instanceof Error ? error.message : String(error), true);
    }
  }

  private async submitMfa(): Promise<void> {
    const doc = this.container!.ownerDocument;
    const code = (doc.getElementById("mfa-code") as HTMLInputElement).value.trim();
    if (!this.challengeId) {
      this.showStatus("sign in with your password first", true);
      return;
    }
    try {
      const step = await this.client.completeMfa(this.challengeId, code);
      if (step.status === "ok" && this.client.session) {
        this.challengeId = null;
        doc.getElementById("auth")!.setAttribute("hidden", "");
        doc.getElementById("nav")!.removeAttribute("hidden");
        doc.getElementById("screens")!.removeAttribute("hidden");
        doc.getElementById("sign-out")!.removeAttribute("hidden");
        this.showStatus("signed in");
        this.showScreen("entities");
        await this.refresh();
        this.poller.start();
      } else {
        this.showStatus(`code check: ${step.status}${step.reason ? ", " + step.reason : ""}`, true);
      }
    } catch (error) {
      this.showStatus(error instanceof Error ? error.message : String(error), true);
    }
  }

  private async submitStepUp(): Promise<void> {
    const doc = this.container!.ownerDocument;
    const code = (doc.getElementById("step-up-code") as HTMLInputElement).value.trim();
    try {
      const restored = await this.client.stepUp(code);
      if (restored) {
        doc.getElementById("auth")!.setAttribute("hidden", "");
        doc.getElementById("step-up-form")!.setAttribute("hidden", "");
        this.showStatus("session re-verified");
      } else {
        this.showStatus("that code was not accepted", true);
      }
    } catch (error) {
      this.showStatus(error instanceof Error ? error.message : String(error), true);
    }
  }

  private async signOut(): Promise<void> {
    this.poller.stop();
    try {
      await this.client.logout();
    } catch {
      // the session may already be gone; signing out locally regardless
    }
    const doc = this.container!.ownerDocument;
    doc.getElementById("auth")!.removeAttribute("hidden");
    doc.getElementById("login-form")!.removeAttribute("hidden");
    doc.getElementById("nav")!.setAttribute("hidden", "");
    doc.getElementById("screens")!.setAttribute("hidden", "");
    doc.getElementById("sign-out")!.setAttribute("hidden", "");
    this.showStatus("signed out");
  }

  async refresh(): Promise<void> {
    try {
      await this.store.refresh();
      await this.panels.loadData(this.store.snapshot.panels);
      this.panels.render(this.store.snapshot.panels, this.store.snapshot.entities);
    } catch (error) {
      this.handleMutationError(error);
    }
  }
}
