import type { StateDoc } from "./api.js";

export function stateKey(entity: { enabled: boolean; kind: string }, state: StateDoc | null): string {
  if (!entity.enabled) {
    return "disabled";
  }
  if (!state) {
    return "unavailable";
  }
  if (state.type === "light") {
    return state.on ? "on" : "off";
  }
  if (state.type === "boolean") {
    if (entity.kind === "lock") {
      return state.value ? "locked" : "unlocked";
    }
    return state.value ? "active" : "idle";
  }
  return "active";
}

export function stateText(state: StateDoc | null): string {
  if (!state) {
    return "no reading yet";
  }
  if (state.type === "numeric") {
    return `${state.value}${state.unit ? " " + state.unit : ""}`;
  }
  if (state.type === "boolean") {
    return state.value ? "yes" : "no";
  }
  return state.on
    ? `on, ${state.intensity}% at rgb(${(state.color ?? []).join(", ")})`
    : "off";
}

export function timeText(iso: string): string {
  return iso.replace("T", " ").replace(/\.\d+/, "").replace("+00:00", " UTC");
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
