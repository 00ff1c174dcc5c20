/** The dry-run tester renders the hub's report verbatim: outcomes, reason,
 * actions that would fire, and any rejection message.
 */

import { describe, expect, it } from "vitest";

import { FIXTURE } from "./fakeserver.js";
import { click, flush, mountShell, setInput, signIn, text, type Mounted } from "./helpers.js";

async function runDry(mounted: Mounted, ruleId: string, entityId: string, value: string) {
  setInput("dry-rule-id", ruleId);
  setInput("dry-entity-id", entityId);
  setInput("dry-value", value);
  click('button[data-action="run-dry"]');
  await flush();
}

describe("dry-run report", () => {
  it("renders a firing report exactly as returned", async () => {
    const mounted = mountShell();
    await signIn(mounted);
    const report = FIXTURE.dry_run_fires;
    const before = JSON.stringify(mounted.hub.entity("ent-1").state);
    await runDry(mounted, report.rule_id, "ent-1", "30");

    const panel = document.querySelector(".dry-report") as HTMLElement;
    expect(panel).not.toBeNull();
    expect(panel.getAttribute("data-rule-id")).toBe(report.rule_id);

    const verdict = panel.querySelector("p .badge") as HTMLElement;
    expect(verdict.getAttribute("data-state-key")).toBe("true");
    expect(verdict.textContent).toContain("yes");

    const outcomes = Array.from(panel.querySelectorAll(".outcomes li"));
    expect(outcomes.length).toBe(report.conditions.length);
    const badge = outcomes[0]!.querySelector(".badge") as HTMLElement;
    expect(badge.getAttribute("data-state-key")).toBe(report.conditions[0].outcome);
    expect(outcomes[0]!.textContent).toContain("condition 1");

    expect(panel.querySelector(".reason")).toBeNull();
    const actions = panel.querySelector("pre.actions") as HTMLElement;
    expect(actions.textContent).toBe(JSON.stringify(report.actions_that_would_fire, null, 2));
    expect(text(".evaluated-at")).toBe(`evaluated at ${report.evaluated_at}`);

    // a dry run commits nothing
    expect(JSON.stringify(mounted.hub.entity("ent-1").state)).toBe(before);
  });

  it("shows the disabled reason when the rule is off", async () => {
    const mounted = mountShell();
    await signIn(mounted);
    click('[data-rule-id="rule-co"] button[data-action="toggle-rule"]');
    await flush();
    expect(mounted.hub.automations.find((r) => r.id === "rule-co").enabled).toBe(false);

    await runDry(mounted, "rule-co", "ent-1", "30");
    const panel = document.querySelector(".dry-report") as HTMLElement;
    expect(text(".dry-report .reason strong")).toBe("disabled");
    const verdict = panel.querySelector("p .badge") as HTMLElement;
    expect(verdict.getAttribute("data-state-key")).toBe("false");
    expect(verdict.textContent).toContain("no");
    expect(panel.querySelectorAll(".outcomes li").length).toBe(0);
    expect(panel.querySelector(".actions-none")).not.toBeNull();
  });

  it("marks an unanswerable condition as unavailable, not as false", async () => {
    const mounted = mountShell();
    await signIn(mounted);
    const report = FIXTURE.dry_run_unavailable;
    await runDry(mounted, report.rule_id, "ent-2", "5");

    const panel = document.querySelector(".dry-report") as HTMLElement;
    const outcome = panel.querySelector(".outcomes li .badge") as HTMLElement;
    expect(outcome.getAttribute("data-state-key")).toBe("unavailable");
    expect(outcome.className).toContain("outcome-unavailable");
    expect(outcome.textContent).toContain("unavailable");
    // distinct marker, not just a different hue
    expect(outcome.getAttribute("data-state-glyph")).toBe("?");

    const verdict = panel.querySelector("p .badge") as HTMLElement;
    expect(verdict.getAttribute("data-state-key")).toBe("false");
    expect(panel.querySelector(".reason")).toBeNull();
  });

  it("surfaces a rejection verbatim with a plain-language hint", async () => {
    const mounted = mountShell();
    await signIn(mounted);
    await runDry(mounted, "rule-co", "ghost", "30");

    const error = document.querySelector(".dry-error") as HTMLElement;
    expect(error).not.toBeNull();
    expect(error.getAttribute("role")).toBe("alert");
    expect(text(".dry-error .verbatim")).toBe("no entity with id 'ghost'");
    expect(text(".dry-error .hint")).toContain("Fix the value above");
  });

  it("surfaces a bad probe value verbatim", async () => {
    const mounted = mountShell();
    await signIn(mounted);
    await runDry(mounted, "rule-co", "ent-1", "banana");
    expect(text(".dry-error .verbatim")).toBe("value must be a number or boolean");
  });
});
