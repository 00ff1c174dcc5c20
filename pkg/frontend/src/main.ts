import { HubClient } from "./api.js";
import { AppShell } from "./views/app-shell.js";

export { AppShell } from "./views/app-shell.js";
export { HubClient } from "./api.js";

export function mountApp(container: HTMLElement, client?: HubClient, pollMs?: number): AppShell {
  const shell = new AppShell(client ?? new HubClient(), pollMs);
  shell.mount(container);
  return shell;
}

const doc = globalThis.document as Document | undefined;
if (doc) {
  const boot = () => {
    const root = doc.getElementById("app");
    if (root && !root.hasChildNodes()) {
      mountApp(root);
    }
  };
  if (doc.readyState === "loading") {
    doc.addEventListener("DOMContentLoaded", boot);
  } else {
    boot();
  }
}
