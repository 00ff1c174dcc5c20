/** Accessibility contract audit.
 *
 * Five rules, each mechanical enough to run in CI against the rendered DOM:
 *
 *   descriptive-text   every actionable control carries a visible description
 *   zoom-safe          nothing blocks or breaks page zoom up to 400%
 *   audio-cue          every actionable control names an audio cue, and the
 *                      cue host (with its settings toggle) is present
 *   state-colors       no two rendered states are distinguished by hue alone
 *   tutorial-present   every screen has a tutorial walkthrough
 *
 * The audit returns one violation per offending element, with a selector
 * that locates it and the rule that flagged it.
 */

import { hueOnlyPair } from "./palette.js";

export interface Violation {
  selector: string;
  rule: string;
  detail: string;
}

export const AUDIT_RULES = [
  "descriptive-text",
  "zoom-safe",
  "audio-cue",
  "state-colors",
  "tutorial-present",
] as const;

const ACTIONABLE = 'button, a[href], select, textarea, input:not([type="hidden"])';

/** Max width (px) an element may hard-code before 400% zoom forces sideways scrolling. */
const ZOOM_WIDTH_LIMIT = 600;

function cssPath(element: Element): string {
  const parts: string[] = [];
  let node: Element | null = element;
  while (node && parts.length < 6 && node.nodeName !== "BODY" && node.nodeName !== "HTML") {
    let part = node.nodeName.toLowerCase();
    if (node.id) {
      parts.unshift(`${part}#${node.id}`);
      break;
    }
    const cls = (node.getAttribute("class") ?? "").trim().split(/\s+/)[0];
    if (cls) {
      part += `.${cls}`;
    }
    const parent: Element | null = node.parentElement;
    if (parent) {
      const siblings = Array.from(parent.children).filter((c) => c.nodeName === node!.nodeName);
      if (siblings.length > 1) {
        part += `:nth-of-type(${siblings.indexOf(node) + 1})`;
      }
    }
    parts.unshift(part);
    node = parent;
  }
  return parts.join(" > ");
}

function visibleText(element: Element | null): string {
  return (element?.textContent ?? "").trim();
}

function checkDescriptiveText(root: ParentNode, out: Violation[]): void {
  for (const control of Array.from(root.querySelectorAll(ACTIONABLE))) {
    const tag = control.nodeName.toLowerCase();
    if (tag === "button" || tag === "a" || tag === "summary") {
      if (!visibleText(control.querySelector(".desc"))) {
        out.push({
          selector: cssPath(control),
          rule: "descriptive-text",
          detail: "control has no visible description (.desc with text)",
        });
      }
    } else {
      const id = control.id;
      const doc = control.ownerDocument;
      const label =
        (id && doc ? doc.querySelector(`label[for="${id}"]`) : null) ?? control.closest("label");
      if (!visibleText(label)) {
        out.push({
          selector: cssPath(control),
          rule: "descriptive-text",
          detail: "form control has no labelled description",
        });
      }
    }
  }
}

function checkZoomSafe(doc: Document, root: ParentNode, out: Violation[]): void {
  const meta = doc.querySelector('meta[name="viewport"]');
  const content = meta?.getAttribute("content") ?? "";
  if (!meta) {
    out.push({
      selector: "head",
      rule: "zoom-safe",
      detail: "no viewport meta; mobile browsers will guess a fixed layout",
    });
  } else {
    if (/user-scalable\s*=\s*(no|0)/i.test(content)) {
      out.push({
        selector: 'meta[name="viewport"]',
        rule: "zoom-safe",
        detail: "viewport disables user scaling",
      });
    }
    const maxScale = /maximum-scale\s*=\s*([\d.]+)/i.exec(content);
    if (maxScale && parseFloat(maxScale[1]!) < 4) {
      out.push({
        selector: 'meta[name="viewport"]',
        rule: "zoom-safe",
        detail: `viewport caps zoom at ${maxScale[1]}x; 4x is required`,
      });
    }
  }
  for (const element of Array.from(root.querySelectorAll<HTMLElement>("[style]"))) {
    const width = /(?:^|;)\s*(?:min-)?width\s*:\s*(\d+(?:\.\d+)?)px/.exec(
      element.getAttribute("style") ?? "",
    );
    if (width && parseFloat(width[1]!) > ZOOM_WIDTH_LIMIT) {
      out.push({
        selector: cssPath(element),
        rule: "zoom-safe",
        detail: `hard-coded ${width[1]}px width forces horizontal scrolling at high zoom`,
      });
    }
    const style = element.getAttribute("style") ?? "";
    if (/overflow\s*:\s*(hidden|clip)/.test(style) && /height\s*:\s*\d+(?:\.\d+)?px/.test(style)) {
      out.push({
        selector: cssPath(element),
        rule: "zoom-safe",
        detail: "fixed-height clipping box will cut off enlarged text",
      });
    }
  }
}

function checkAudioCues(root: ParentNode, out: Violation[]): void {
  if (!root.querySelector("[data-audio-cue-host]")) {
    out.push({
      selector: "body",
      rule: "audio-cue",
      detail: "audio cue host (with its settings toggle) is missing",
    });
  }
  for (const control of Array.from(root.querySelectorAll(ACTIONABLE))) {
    if (!(control.getAttribute("data-audio-cue") ?? "").trim()) {
      out.push({
        selector: cssPath(control),
        rule: "audio-cue",
        detail: "actionable control names no audio cue",
      });
    }
  }
}

function checkStateColors(root: ParentNode, out: Violation[]): void {
  const seen = new Map<string, { color: string; glyph: string; element: Element }>();
  for (const element of Array.from(root.querySelectorAll("[data-state-key]"))) {
    const key = element.getAttribute("data-state-key") ?? "";
    const color = element.getAttribute("data-state-color") ?? "";
    const glyph = element.getAttribute("data-state-glyph") ?? "";
    if (!key || seen.has(key)) {
      continue;
    }
    seen.set(key, { color, glyph, element });
  }
  const entries = Array.from(seen.entries());
  for (let i = 0; i < entries.length; i++) {
    for (let j = i + 1; j < entries.length; j++) {
      const [keyA, a] = entries[i]!;
      const [keyB, b] = entries[j]!;
      let hueOnly: boolean;
      try {
        hueOnly = hueOnlyPair(a, b);
      } catch {
        hueOnly = true; // unparseable color coding cannot be verified safe
      }
      if (hueOnly) {
        out.push({
          selector: cssPath(b.element),
          rule: "state-colors",
          detail: `states "${keyA}" and "${keyB}" differ by hue alone (same marker, close luminance)`,
        });
      }
    }
  }
}

function checkTutorials(root: ParentNode, out: Violation[]): void {
  for (const section of Array.from(root.querySelectorAll("[data-screen]"))) {
    const screen = section.getAttribute("data-screen") ?? "";
    const tutorial = root.querySelector(`[data-tutorial-for="${screen}"]`);
    if (!visibleText(tutorial)) {
      out.push({
        selector: cssPath(section),
        rule: "tutorial-present",
        detail: `screen "${screen}" has no tutorial walkthrough`,
      });
    }
  }
}

export function auditAccessibility(doc: Document, root?: ParentNode): Violation[] {
  const scope = root ?? doc.body ?? doc;
  const violations: Violation[] = [];
  checkDescriptiveText(scope, violations);
  checkZoomSafe(doc, scope, violations);
  checkAudioCues(scope, violations);
  checkStateColors(scope, violations);
  checkTutorials(scope, violations);
  return violations;
}
