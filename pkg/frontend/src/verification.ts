/* Verification viewer: run a check, paint one cell per action, and show
   what brute force costs next to the local check on the same scenario. */

import { Report, runVerification, ScenarioSummary } from "./api.js";
import { clear, el, errorStrip, fmt, option } from "./dom.js";

function headline(report: Report): HTMLElement {
  const status = report.passed ? "PASS" : "FAIL";
  return el(
    "div",
    { class: `headline ${report.passed ? "good" : "bad"}` },
    `${status} under ${report.mode} at tolerance ${report.tolerance}: ` +
      `max discrepancy ${fmt(report.max_discrepancy)}, ` +
      `${report.checked} checked / ${report.undefined} undefined / ` +
      `${report.ambiguous} ambiguous / ${report.untestable} untestable, ` +
      `${report.cost} evaluations over ${report.cost_states} states`,
  );
}

function actionGrid(report: Report): HTMLElement {
  const grid = el("div", { class: "action-grid" });
  for (const entry of report.actions) {
    const cell = el("span", {
      class: `cell ${entry.verdict}`,
      title:
        `${entry.action}: ${entry.verdict}` +
        (entry.discrepancy == null ? "" : `, discrepancy ${fmt(entry.discrepancy)}`) +
        (entry.note ? ` (${entry.note})` : ""),
    });
    grid.append(cell);
  }
  return grid;
}

function counterexampleTable(report: Report): HTMLElement | null {
  if (!report.counterexamples.length) return null;
  const body = el("tbody", {});
  for (const c of report.counterexamples.slice(0, 10)) {
    body.append(
      el(
        "tr",
        {},
        el("td", {}, c.action),
        el("td", {}, c.assignment.join(", ")),
        el("td", {}, fmt(c.lhs)),
        el("td", {}, fmt(c.rhs)),
      ),
    );
  }
  return el(
    "table",
    { class: "counterexamples" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "action"),
        el("th", {}, "assignment"),
        el("th", {}, "translated"),
        el("th", {}, "native"),
      ),
    ),
    body,
  );
}

function costBars(brute: Report, markov: Report): HTMLElement {
  const scale = Math.max(brute.cost_states, markov.cost_states, 1);
  const bar = (label: string, report: Report) =>
    el(
      "div",
      { class: "cost-row" },
      el("span", { class: "cost-label" }, label),
      el("div", { class: "cost-track" },
        el("div", {
          class: "cost-fill",
          style: `width:${Math.max(1, (100 * report.cost_states) / scale)}%`,
        })),
      el("span", { class: "cost-value" },
        `${report.cost_states} states (${report.cost} evaluations)`),
    );
  return el(
    "div",
    { class: "cost-bars" },
    el("h3", {}, "what the check costs"),
    bar("brute", brute),
    bar("markov-local", markov),
  );
}

export function mountVerificationPanel(
  root: HTMLElement,
  scenario: ScenarioSummary,
): void {
  clear(root);
  const modePick = el(
    "select",
    {},
    option("brute"),
    option("markov", "markov-local"),
    option("ci", "ci-preservation"),
    option("region"),
  );
  if (scenario.equivariance === "region") modePick.value = "region";
  const compoundBox = el("input", { type: "number", value: "1", min: "0" });
  const runButton = el("button", {}, "run verification");
  const compareButton = el("button", {}, "compare brute vs markov cost");
  const controls = el(
    "div",
    { class: "row" },
    el("label", {}, "mode ", modePick),
    el("label", {}, "max compound ", compoundBox),
    runButton,
    compareButton,
  );
  const output = el("div", { class: "verify-output" });
  root.append(controls, output);

  async function run(): Promise<void> {
    clear(output);
    output.append(el("div", { class: "spinner" }, "running..."));
    try {
      const report = await runVerification({
        scenario: scenario.name,
        mode: modePick.value as "brute" | "ci" | "markov" | "region",
        max_compound: Number(compoundBox.value) || 1,
      });
      clear(output);
      output.append(headline(report));
      if (report.region) output.append(el("div", { class: "region-line" }, `region: ${report.region}`));
      output.append(actionGrid(report));
      const table = counterexampleTable(report);
      if (table) output.append(el("h3", {}, "counterexamples"), table);
    } catch (err) {
      clear(output);
      output.append(errorStrip(String((err as Error).message), run));
    }
  }

  async function compare(): Promise<void> {
    clear(output);
    output.append(el("div", { class: "spinner" }, "running both modes..."));
    try {
      const brute = await runVerification({ scenario: scenario.name, mode: "brute" });
      const markov = await runVerification({ scenario: scenario.name, mode: "markov" });
      clear(output);
      output.append(headline(brute), headline(markov), costBars(brute, markov));
    } catch (err) {
      clear(output);
      output.append(errorStrip(String((err as Error).message), compare));
    }
  }

  runButton.addEventListener("click", () => void run());
  compareButton.addEventListener("click", () => void compare());
}
