/* Scored forecasting panel: choose a probe, commit to a forecast, see the
   truth. Every round is a server round trip; nothing is predicted locally. */

import {
  ActionObj,
  ApiError,
  closeSession,
  createSession,
  Forecast,
  getTranscriptText,
  getVerdict,
  playRound,
  ScenarioSummary,
  SessionInfo,
} from "./api.js";
import { clear, el, errorStrip, fmt, option } from "./dom.js";

interface SessionState {
  info: SessionInfo;
  scores: number[];
  inFlight: boolean;
  closed: boolean;
}

function describeAction(action: ActionObj[]): string {
  return action
    .map((a) => {
      const [kind, body] = Object.entries(a)[0];
      const [name, value] = Object.entries(body)[0];
      return kind === "do" ? `do(${name}=${value})` : `${name}=${value}`;
    })
    .join(" & ");
}

export function mountSessionPanel(
  root: HTMLElement,
  scenario: ScenarioSummary,
): void {
  clear(root);
  let state: SessionState | null = null;

  const queryPick = el("select", { class: "query-pick" });
  for (const v of scenario.human_variables) queryPick.append(option(v.name));
  queryPick.value =
    scenario.human_variables[scenario.human_variables.length - 1].name;
  const seedBox = el("input", { type: "number", value: "13", class: "seed" });
  const startButton = el("button", {}, "start session");
  const startForm = el(
    "div",
    { class: "row start-form" },
    el("label", {}, "forecast target ", queryPick),
    el("label", {}, "seed ", seedBox),
    startButton,
  );

  const kindPick = el("select", {}, option("do"), option("observe"));
  const varPick = el("select", {});
  const valuePick = el("select", {});
  for (const v of scenario.machine_variables) varPick.append(option(v.name));
  const fillValues = () => {
    clear(valuePick);
    const found = scenario.machine_variables.find((v) => v.name === varPick.value);
    for (const value of found ? found.domain : []) valuePick.append(option(value));
  };
  varPick.addEventListener("change", fillValues);
  fillValues();

  const forecastPick = el("select", { class: "forecast-pick" });
  const playButton = el("button", { class: "play" }, "play round");
  const controls = el(
    "div",
    { class: "row controls" },
    el("label", {}, "probe ", kindPick, varPick, valuePick),
    el("label", {}, "forecast ", forecastPick),
    playButton,
  );

  const banner = el("div", { class: "verdict-banner pending" }, "no session");
  const meanLine = el("div", { class: "mean-line" });
  const history = el("tbody", {});
  const log = el(
    "table",
    { class: "round-log" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "#"),
        el("th", {}, "probe"),
        el("th", {}, "translated"),
        el("th", {}, "forecast"),
        el("th", {}, "truth"),
        el("th", {}, "score"),
      ),
    ),
    history,
  );
  const notices = el("div", { class: "notices" });
  const closeButton = el("button", {}, "close session");
  const exportButton = el("button", {}, "export transcript");
  const replayInput = el("input", { type: "file", accept: ".json" });
  const tail = el(
    "div",
    { class: "row tail" },
    closeButton,
    exportButton,
    el("label", {}, "replay transcript ", replayInput),
  );

  root.append(startForm, controls, banner, meanLine, log, notices, tail);

  const setBusy = (busy: boolean) => {
    const active = state !== null && !state.closed && !busy;
    for (const node of [kindPick, varPick, valuePick, forecastPick, playButton]) {
      (node as HTMLButtonElement).disabled = !active;
    }
    closeButton.disabled = state === null || state.closed;
    exportButton.disabled = state === null;
  };
  setBusy(false);

  const note = (child: HTMLElement) => {
    clear(notices);
    notices.append(child);
  };

  async function refreshVerdict(): Promise<void> {
    if (!state) return;
    const verdict = await getVerdict(state.info.session_id);
    meanLine.textContent =
      `rounds ${verdict.rounds}, mean score ${fmt(verdict.mean_score)}` +
      ` (needs ${verdict.min_rounds} rounds at ${verdict.threshold})`;
    banner.classList.remove("pending", "good", "bad");
    if (!verdict.sufficient) {
      banner.classList.add("pending");
      banner.textContent = `verdict pending: ${verdict.rounds} of ${verdict.min_rounds} rounds played`;
    } else if (verdict.interpretable) {
      banner.classList.add("good");
      banner.textContent = `interpretable: mean score ${fmt(verdict.mean_score)} over ${verdict.rounds} rounds`;
    } else {
      banner.classList.add("bad");
      banner.textContent = `not interpretable: mean score ${fmt(verdict.mean_score)} over ${verdict.rounds} rounds`;
    }
  }

  function logRound(
    index: number,
    action: ActionObj[],
    translated: ActionObj[],
    forecast: Forecast,
    truth: string,
    score: number,
  ): void {
    history.append(
      el(
        "tr",
        { class: score >= 0.5 ? "hit" : "miss" },
        el("td", {}, String(index)),
        el("td", {}, describeAction(action)),
        el("td", {}, describeAction(translated)),
        el("td", {}, typeof forecast === "string" ? forecast : JSON.stringify(forecast)),
        el("td", {}, truth),
        el("td", {}, fmt(score)),
      ),
    );
  }

  async function start(): Promise<void> {
    try {
      const info = await createSession(
        scenario.name,
        queryPick.value,
        Number(seedBox.value) || 0,
      );
      state = { info, scores: [], inFlight: false, closed: false };
      clear(history);
      clear(notices);
      clear(forecastPick);
      for (const label of info.domain) forecastPick.append(option(label));
      setBusy(false);
      await refreshVerdict();
    } catch (err) {
      note(errorStrip(String((err as Error).message), start));
    }
  }

  async function play(): Promise<void> {
    if (!state || state.inFlight) return;
    const action: ActionObj = {
      [kindPick.value]: { [varPick.value]: valuePick.value },
    };
    const forecast = forecastPick.value;
    state.inFlight = true;
    setBusy(true);
    try {
      const outcome = await playRound(state.info.session_id, action, forecast);
      state.scores.push(outcome.score);
      logRound(
        outcome.round,
        outcome.action,
        outcome.translated,
        forecast,
        outcome.truth,
        outcome.score,
      );
      clear(notices);
      await refreshVerdict();
    } catch (err) {
      if (err instanceof ApiError && err.type === "ambiguous_translation") {
        note(
          errorStrip(
            "That probe does not pin down a single human-side reading, so " +
              "there is nothing well-defined to forecast. The server says: " +
              err.message +
              " Try pinning the other variable in the same block, or probe " +
              "a different variable.",
          ),
        );
      } else {
        note(errorStrip(String((err as Error).message), play));
      }
    } finally {
      if (state) state.inFlight = false;
      setBusy(false);
    }
  }

  async function close(): Promise<void> {
    if (!state) return;
    await closeSession(state.info.session_id);
    state.closed = true;
    setBusy(false);
  }

  async function exportTranscript(): Promise<void> {
    if (!state) return;
    const text = await getTranscriptText(state.info.session_id);
    const url = URL.createObjectURL(new Blob([text], { type: "application/json" }));
    const link = el("a", { href: url, download: `${scenario.name}-session.json` });
    link.click();
    URL.revokeObjectURL(url);
  }

  /* Re-run an exported transcript through the live API and check that the
     server reproduces every score; the UI never re-computes anything. */
  async function replay(file: File): Promise<void> {
    const doc = JSON.parse(await file.text());
    const info = await createSession(doc.scenario, doc.query, doc.seed);
    state = { info, scores: [], inFlight: false, closed: false };
    clear(history);
    clear(forecastPick);
    for (const label of info.domain) forecastPick.append(option(label));
    let mismatches = 0;
    for (const row of doc.rounds) {
      const outcome = await playRound(info.session_id, row.action, row.forecast);
      if (Math.abs(outcome.score - row.score) > 1e-12 || outcome.truth !== row.truth) {
        mismatches += 1;
      }
      logRound(
        outcome.round,
        outcome.action,
        outcome.translated,
        row.forecast,
        outcome.truth,
        outcome.score,
      );
    }
    if (doc.status === "closed") await close();
    await refreshVerdict();
    note(
      errorStrip(
        mismatches === 0
          ? `replayed ${doc.rounds.length} rounds, every truth and score reproduced`
          : `replay disagreed on ${mismatches} rounds`,
      ),
    );
  }

  startButton.addEventListener("click", () => void start());
  playButton.addEventListener("click", () => void play());
  closeButton.addEventListener("click", () => void close());
  exportButton.addEventListener("click", () => void exportTranscript());
  replayInput.addEventListener("change", () => {
    const file = replayInput.files && replayInput.files[0];
    if (file) void replay(file);
  });
}
