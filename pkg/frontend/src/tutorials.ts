/** Static guided walkthroughs, one per screen. */

export interface TutorialStep {
  title: string;
  text: string;
}

export interface Tutorial {
  title: string;
  steps: TutorialStep[];
}

export const TUTORIALS: Record<string, Tutorial> = {
  entities: {
    title: "How to read and control your devices",
    steps: [
      {
        title: "Find the card",
        text: "Each device has one card. The colored chip and its marker show the current state; the text under it repeats the state in words.",
      },
      {
        title: "Change a light",
        text: "Pick a brightness and a color, then press Apply light. The icon recolors only after the hub confirms the change.",
      },
      {
        title: "Set a value",
        text: "For heaters and locks, type or toggle the value and press Set. The card shows who changed it last and when.",
      },
      {
        title: "Re-enable a sensor",
        text: "A disabled sensor asks for your password before it comes back. That is intentional: nothing turns itself back on silently.",
      },
    ],
  },
  locations: {
    title: "How to add a location",
    steps: [
      {
        title: "Name it",
        text: "Give the room or area a short name you will recognize in device lists.",
      },
      {
        title: "Pick the spot",
        text: "Click the map, or type latitude and longitude directly. Clicking fills both fields with the exact values the hub will store.",
      },
      {
        title: "Decide sharing",
        text: "Location data is kept only while sharing is on. Rules that depend on a location show 'unavailable' while sharing is off.",
      },
      {
        title: "Retention",
        text: "Each location has a retention period; the Purge button removes locations that have outlived theirs.",
      },
    ],
  },
  automations: {
    title: "How to build and test a rule",
    steps: [
      {
        title: "Open the editor",
        text: "Press the pencil next to a rule to load it into the editor, or start from the blank template.",
      },
      {
        title: "Edit the document",
        text: "A rule is one document: a trigger, a list of conditions, a list of actions. Save sends it back exactly as shown.",
      },
      {
        title: "Test before enabling",
        text: "The dry-run tester evaluates the rule against a pretend reading without changing anything. Each condition reports true, false, or unavailable.",
      },
      {
        title: "Read the outcome markers",
        text: "Outcomes use color, a marker, and a word, so they stay readable regardless of color vision.",
      },
    ],
  },
  logs: {
    title: "How to review the event log",
    steps: [
      {
        title: "Pick a period",
        text: "Choose start and end times and press Search. Every change, alert, and security event in that window is listed.",
      },
      {
        title: "Filter",
        text: "Narrow by event type to find what you care about, for example only security events.",
      },
      {
        title: "Download",
        text: "Download saves exactly the bytes the hub exports, line or CSV format, suitable for archiving.",
      },
      {
        title: "Retention and purge",
        text: "Set a retention age and purge to drop older entries. Entries under an open investigation hold always survive a purge.",
      },
    ],
  },
  panels: {
    title: "How to compose a panel",
    steps: [
      {
        title: "Create",
        text: "Name the panel and add widgets: a live entity cell or a windowed average.",
      },
      {
        title: "Arrange",
        text: "Each widget has a row and column; the grid renders them in place.",
      },
      {
        title: "Watch",
        text: "Panel data refreshes with the rest of the dashboard; the 'as of' stamp tells you how fresh it is.",
      },
    ],
  },
};

export function renderTutorial(doc: Document, screen: string): HTMLElement {
  const tutorial = TUTORIALS[screen];
  const details = doc.createElement("details");
  details.className = "tutorial";
  details.setAttribute("data-tutorial-for", screen);
  if (!tutorial) {
    return details;
  }
  const steps = tutorial.steps
    .map(
      (step, i) =>
        `<li><strong>${i + 1}. ${step.title}.</strong> <span>${step.text}</span></li>`,
    )
    .join("");
  details.innerHTML = `<summary>Tutorial: ${tutorial.title}</summary><ol>${steps}</ol>`;
  return details;
}
