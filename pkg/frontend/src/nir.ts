/* Neural inspector: show the concepts and generated weights for one input,
   then drag a weight and ask the server what the decision becomes. */

import { nirInfo, nirWhatIf, ScenarioSummary, WhatIfResult } from "./api.js";
import { clear, el, errorStrip, fmt } from "./dom.js";

const SUGGESTED_INPUT = [1.0, 0.8, 0.9, 0.1, 0.0, 0.0];

function termTable(result: WhatIfResult): HTMLElement {
  const body = el("tbody", {});
  for (const name of Object.keys(result.concepts)) {
    body.append(
      el(
        "tr",
        {},
        el("td", {}, name),
        el("td", {}, fmt(result.concepts[name])),
        el("td", {}, fmt(result.weights[name])),
        el("td", {}, fmt(result.terms[name])),
      ),
    );
  }
  body.append(
    el(
      "tr",
      { class: "bias-row" },
      el("td", {}, "bias"),
      el("td", {}, ""),
      el("td", {}, fmt(result.bias)),
      el("td", {}, fmt(result.bias)),
    ),
  );
  return el(
    "table",
    { class: "terms" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "concept"),
        el("th", {}, "activation"),
        el("th", {}, "weight"),
        el("th", {}, "term"),
      ),
    ),
    body,
  );
}

export function mountNirPanel(root: HTMLElement, scenario: ScenarioSummary): void {
  clear(root);
  if (!scenario.has_nir) {
    root.append(
      el("div", { class: "placeholder" },
         "this scenario has no neural block to inspect"),
    );
    return;
  }

  const output = el("div", { class: "nir-output" });
  const sliders = el("div", { class: "sliders" });
  root.append(output, sliders);

  void (async () => {
    try {
      const info = await nirInfo(scenario.name);
      const dim = info.config.input_dim;
      const boxes: HTMLInputElement[] = [];
      const inputRow = el("div", { class: "row input-row" });
      for (let i = 0; i < dim; i++) {
        const box = el("input", {
          type: "number",
          step: "0.1",
          value: String(SUGGESTED_INPUT[i] ?? 0),
          class: "x-box",
        });
        boxes.push(box);
        inputRow.append(el("label", {}, `x${i} `, box));
      }
      const evalButton = el("button", {}, info.trained ? "evaluate" : "train and evaluate");
      inputRow.append(evalButton);
      const result = el("div", { class: "nir-result" });
      clear(output);
      output.append(
        el("div", { class: "nir-head" },
           `concepts: ${info.config.concepts.join(", ")} -> ${info.config.task}`),
        inputRow,
        result,
      );

      const readInput = () => boxes.map((b) => Number(b.value) || 0);

      async function evaluate(): Promise<void> {
        clear(result);
        result.append(el("div", { class: "spinner" }, "asking the model..."));
        try {
          const base = await nirWhatIf(scenario.name, readInput());
          clear(result);
          result.append(
            termTable(base),
            el("div", { class: "y-line" }, `P(${info.config.task}) = ${fmt(base.y_hat)}`),
          );
          renderSliders(base);
        } catch (err) {
          clear(result);
          result.append(errorStrip(String((err as Error).message), evaluate));
        }
      }

      function renderSliders(base: WhatIfResult): void {
        clear(sliders);
        sliders.append(el("h3", {}, "what if a weight were different?"));
        for (const name of Object.keys(base.weights)) {
          const slider = el("input", {
            type: "range",
            min: "-10",
            max: "10",
            step: "0.1",
            value: String(base.weights[name]),
          });
          const readout = el("span", { class: "slider-readout" },
                             `${name} weight ${fmt(base.weights[name])}`);
          const outcome = el("span", { class: "slider-outcome" }, "");
          slider.addEventListener("change", () => {
            void (async () => {
              try {
                const edited = await nirWhatIf(scenario.name, readInput(), {
                  [name]: Number(slider.value),
                });
                readout.textContent = `${name} weight ${fmt(Number(slider.value))}`;
                outcome.textContent = edited.edited
                  ? ` -> P(${info.config.task}) = ${fmt(edited.edited.y_hat)}`
                  : "";
              } catch (err) {
                outcome.textContent = ` ${String((err as Error).message)}`;
              }
            })();
          });
          sliders.append(el("div", { class: "slider-row" }, readout, slider, outcome));
        }
      }

      evalButton.addEventListener("click", () => void evaluate());
    } catch (err) {
      clear(output);
      output.append(errorStrip(String((err as Error).message)));
    }
  })();
}
