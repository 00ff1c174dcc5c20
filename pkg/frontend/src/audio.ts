/** Audio cues: every actionable control names a cue via data-audio-cue.
 *
 * A cue is a short tone plus a spoken label. Users toggle them in settings;
 * the preference persists in localStorage. Browsers without WebAudio or
 * speech synthesis degrade to no sound, but the cue wiring (and therefore
 * the accessibility contract) stays in the DOM either way.
 */

export interface AudioCue {
  id: string;
  /** tone frequency in Hz */
  tone: number;
  /** spoken when the control is activated */
  label: string;
}

export const CUES: Record<string, AudioCue> = {
  navigate: { id: "navigate", tone: 440, label: "switching screen" },
  "sign-in": { id: "sign-in", tone: 523, label: "signing in" },
  "sign-out": { id: "sign-out", tone: 392, label: "signing out" },
  "step-up": { id: "step-up", tone: 587, label: "re-verifying session" },
  "set-state": { id: "set-state", tone: 494, label: "setting a value" },
  "set-light": { id: "set-light", tone: 659, label: "changing a light" },
  "toggle-enabled": { id: "toggle-enabled", tone: 349, label: "enabling or disabling" },
  "add-entity": { id: "add-entity", tone: 698, label: "adding a device" },
  "add-location": { id: "add-location", tone: 587, label: "adding a location" },
  "map-pick": { id: "map-pick", tone: 784, label: "picking a map point" },
  "toggle-sharing": { id: "toggle-sharing", tone: 330, label: "changing location sharing" },
  "delete-item": { id: "delete-item", tone: 262, label: "deleting" },
  "save-rule": { id: "save-rule", tone: 622, label: "saving an automation" },
  "edit-rule": { id: "edit-rule", tone: 554, label: "editing an automation" },
  "dry-run": { id: "dry-run", tone: 740, label: "testing a rule" },
  "query-logs": { id: "query-logs", tone: 466, label: "searching the log" },
  "download-log": { id: "download-log", tone: 831, label: "downloading the log" },
  "set-retention": { id: "set-retention", tone: 415, label: "changing log retention" },
  "purge-logs": { id: "purge-logs", tone: 233, label: "purging old log entries" },
  "save-panel": { id: "save-panel", tone: 703, label: "saving a panel" },
  "toggle-audio": { id: "toggle-audio", tone: 880, label: "toggling audio cues" },
};

const STORAGE_KEY = "hub-dash.audio-cues";

export class AudioCueHost {
  enabled: boolean;
  /** recorded for tests; browsers also get the actual tone */
  played: string[] = [];
  private root: HTMLElement | null = null;

  constructor() {
    let saved: string | null = null;
    try {
      saved = globalThis.localStorage?.getItem(STORAGE_KEY) ?? null;
    } catch {
      saved = null;
    }
    this.enabled = saved === null ? true : saved === "on";
  }

  /** Renders the settings toggle and wires a delegated activation listener. */
  mount(container: HTMLElement): void {
    const host = container.ownerDocument.createElement("div");
    host.setAttribute("data-audio-cue-host", "");
    host.className = "audio-settings";
    host.innerHTML = `
      <button type="button" id="audio-toggle" data-audio-cue="toggle-audio"
              aria-pressed="${this.enabled}">
        <span class="glyph" aria-hidden="true">♪</span>
        <span class="desc">Audio cues: ${this.enabled ? "on" : "off"}. Press to switch.</span>
      </button>`;
    container.appendChild(host);
    this.root = host;
    host.querySelector("#audio-toggle")!.addEventListener("click", () => {
      this.setEnabled(!this.enabled);
    });
    container.ownerDocument.addEventListener("click", (event) => {
      const target = event.target as HTMLElement | null;
      const control = target?.closest?.("[data-audio-cue]") as HTMLElement | null;
      if (control) {
        this.play(control.getAttribute("data-audio-cue") ?? "");
      }
    });
  }

  setEnabled(enabled: boolean): void {
    this.enabled = enabled;
    try {
      globalThis.localStorage?.setItem(STORAGE_KEY, enabled ? "on" : "off");
    } catch {
      // storage is optional
    }
    const button = this.root?.querySelector("#audio-toggle");
    if (button) {
      button.setAttribute("aria-pressed", String(enabled));
      const desc = button.querySelector(".desc");
      if (desc) {
        desc.textContent = `Audio cues: ${enabled ? "on" : "off"}. Press to switch.`;
      }
    }
  }

  play(cueId: string): void {
    if (!this.enabled) {
      return;
    }
    const cue = CUES[cueId];
    if (!cue) {
      return;
    }
    this.played.push(cue.id);
    this.beep(cue.tone);
    this.speak(cue.label);
  }

  private beep(frequency: number): void {
    const Ctor = (globalThis as Record<string, unknown>)["AudioContext"] as
      | (new () => AudioContext)
      | undefined;
    if (!Ctor) {
      return;
    }
    try {
      const ctx = new Ctor();
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.frequency.value = frequency;
      gain.gain.value = 0.05;
      osc.connect(gain).connect(ctx.destination);
      osc.start();
      osc.stop(ctx.currentTime + 0.12);
    } catch {
      // no sound device
    }
  }

  private speak(label: string): void {
    const synth = (globalThis as Record<string, unknown>)["speechSynthesis"] as
      | SpeechSynthesis
      | undefined;
    const Utterance = (globalThis as Record<string, unknown>)["SpeechSynthesisUtterance"] as
      | (new (text: string) => SpeechSynthesisUtterance)
      | undefined;
    if (!synth || !Utterance) {
      return;
    }
    try {
      synth.speak(new Utterance(label));
    } catch {
      // speech is best-effort
    }
  }
}
