/** Shared mounting and interaction helpers for the view tests. */

import { HubClient } from "../src/api.js";
import { AppShell } from "../src/views/app-shell.js";
import { CODE, FakeHub, PASSWORD, USER } from "./fakeserver.js";

/** Lets the void-async submit/click handlers settle. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 4; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

/** The viewport meta the shipped page carries; tests assert the file matches. */
export const VIEWPORT_CONTENT = "width=device-width, initial-scale=1";

export function installPageChrome(): void {
  for (const meta of Array.from(document.head.querySelectorAll('meta[name="viewport"]'))) {
    meta.remove();
  }
  const meta = document.createElement("meta");
  meta.setAttribute("name", "viewport");
  meta.setAttribute("content", VIEWPORT_CONTENT);
  document.head.appendChild(meta);
}

export interface Mounted {
  hub: FakeHub;
  client: HubClient;
  shell: AppShell;
  container: HTMLElement;
}

export function mountShell(hub: FakeHub = new FakeHub()): Mounted {
  installPageChrome();
  document.body.innerHTML = "";
  const container = document.createElement("div");
  container.id = "app";
  document.body.appendChild(container);
  const client = new HubClient(hub.fetch);
  // poll interval far beyond any test; tests drive refresh explicitly
  const shell = new AppShell(client, 3_600_000);
  shell.mount(container);
  return { hub, client, shell, container };
}

export function setInput(id: string, value: string): void {
  const input = document.getElementById(id) as HTMLInputElement | HTMLSelectElement | null;
  if (!input) {
    throw new Error(`no input #${id}`);
  }
  input.value = value;
}

export function click(selector: string): void {
  const element = document.querySelector(selector) as HTMLElement | null;
  if (!element) {
    throw new Error(`nothing to click: ${selector}`);
  }
  element.click();
}

export function submit(formId: string): void {
  const form = document.getElementById(formId);
  if (!form) {
    throw new Error(`no form #${formId}`);
  }
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export function text(selector: string): string {
  return (document.querySelector(selector)?.textContent ?? "").trim();
}

/** Drives the real two-step sign-in UI against the fake hub. */
export async function signIn(mounted: Mounted): Promise<void> {
  setInput("login-user", USER);
  setInput("login-password", PASSWORD);
  submit("login-form");
  await flush();
  setInput("mfa-code", CODE);
  submit("mfa-form");
  await flush();
  if (!mounted.client.session) {
    throw new Error("sign-in failed during test setup");
  }
  mounted.shell.poller.stop();
}
