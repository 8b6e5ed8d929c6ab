import { listScenarios, ScenarioSummary } from "./api.js";
import { clear, el, errorStrip } from "./dom.js";
import { mountNirPanel } from "./nir.js";
import { mountSessionPanel } from "./session.js";
import { mountVerificationPanel } from "./verification.js";

const TABS = ["session", "verification", "inspector"] as const;
type Tab = (typeof TABS)[number];

function scenarioCard(scenario: ScenarioSummary): HTMLElement {
  const flags = [scenario.equivariance];
  if (scenario.has_mixture) flags.push("mixture");
  if (scenario.has_nir) flags.push("neural");
  return el(
    "div",
    { class: "scenario-card" },
    el("strong", {}, scenario.name),
    el("span", { class: "flags" }, ` [${flags.join(", ")}]`),
    el("div", { class: "description" }, scenario.description),
    el(
      "div",
      { class: "variables" },
      "machine: " +
        scenario.machine_variables
          .map((v) => `${v.name}(${v.domain.length})`)
          .join(", ") +
        "  |  human: " +
        scenario.human_variables
          .map((v) => `${v.name}(${v.domain.length})`)
          .join(", "),
    ),
  );
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  clear(root);
  try {
    const scenarios = await listScenarios();
    let current = scenarios[0];
    let tab: Tab = "session";

    const picker = el("select", { class: "scenario-pick" });
    for (const s of scenarios) picker.append(el("option", { value: s.name }, s.name));
    const card = el("div", { class: "card-slot" });
    const nav = el("nav", {});
    const panel = el("main", { id: "panel" });

    const render = () => {
      clear(card);
      card.append(scenarioCard(current));
      clear(nav);
      for (const name of TABS) {
        nav.append(
          el(
            "button",
            {
              class: name === tab ? "tab active" : "tab",
              onclick: () => {
                tab = name;
                render();
              },
            },
            name,
          ),
        );
      }
      if (tab === "session") mountSessionPanel(panel, current);
      else if (tab === "verification") mountVerificationPanel(panel, current);
      else mountNirPanel(panel, current);
    };

    picker.addEventListener("change", () => {
      current = scenarios.find((s) => s.name === picker.value) ?? scenarios[0];
      render();
    });

    root.append(
      el("header", {}, el("h1", {}, "equivar"), picker),
      card,
      nav,
      panel,
    );
    render();
  } catch (err) {
    root.append(
      errorStrip(`could not reach the API: ${(err as Error).message}`, () =>
        void boot(),
      ),
    );
  }
}

void boot();
