/* Typed client for the verification service. Every number shown in the UI
   comes through these calls; there is no model logic on this side. */

export interface VariableInfo {
  name: string;
  domain: string[];
}

export interface ScenarioSummary {
  name: string;
  description: string;
  equivariance: string;
  machine_variables: VariableInfo[];
  human_variables: VariableInfo[];
  has_mixture: boolean;
  has_nir: boolean;
  metadata: Record<string, unknown>;
}

/* {"observe": {"wheel": "4"}} or {"do": {...}}; compounds are lists */
export type ActionObj = Record<string, Record<string, string>>;

export interface ActionVerdict {
  action: string;
  discrepancy: number | null;
  verdict: "pass" | "fail" | "undefined" | "ambiguous" | "untestable";
  note?: string;
}

export interface Counterexample {
  action: string;
  assignment: string[];
  lhs: number;
  rhs: number;
}

export interface Report {
  mode: string;
  tolerance: number;
  passed: boolean;
  max_discrepancy: number;
  cost: number;
  cost_states: number;
  checked: number;
  undefined: number;
  ambiguous: number;
  untestable: number;
  actions: ActionVerdict[];
  counterexamples: Counterexample[];
  region?: string;
  detail?: Record<string, unknown>;
}

export interface VerifyRequest {
  scenario: string;
  mode?: "brute" | "ci" | "markov" | "region";
  action_family?: "observe" | "do" | "both";
  max_compound?: number;
  tolerance?: number;
  region?: (ActionObj | ActionObj[])[];
}

export interface SessionInfo {
  session_id: string;
  scenario: string;
  query: string;
  seed: number;
  domain: string[];
}

export type Forecast = string | Record<string, number>;

export interface RoundOutcome {
  round: number;
  action: ActionObj[];
  translated: ActionObj[];
  truth: string;
  score: number;
  running_mean: number;
}

export interface VerdictInfo {
  rounds: number;
  mean_score: number;
  threshold: number;
  min_rounds: number;
  sufficient: boolean;
  interpretable: boolean;
}

export interface WhatIfResult {
  scenario: string;
  concepts: Record<string, number>;
  weights: Record<string, number>;
  bias: number;
  terms: Record<string, number>;
  y_hat: number;
  edited?: { weights: Record<string, number>; y_hat: number };
}

export class ApiError extends Error {
  constructor(
    public readonly type: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

let base = "";

/** Point the client somewhere other than the serving origin (tests). */
export function configure(url: string): void {
  base = url.replace(/\/$/, "");
}

async function request(path: string, init?: RequestInit): Promise<Response> {
  const response = await fetch(base + path, init);
  if (response.ok || response.status === 202) return response;
  let type = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && body.error) {
      type = body.error.type ?? type;
      message = body.error.message ?? message;
    }
  } catch {
    /* non-JSON error body; keep the status line */
  }
  throw new ApiError(type, message, response.status);
}

function post(path: string, payload: unknown): Promise<Response> {
  return request(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export async function listScenarios(): Promise<ScenarioSummary[]> {
  const body = await (await request("/api/scenarios")).json();
  return body.scenarios;
}

/** Run a verification; long runs come back 202 and are polled to completion. */
export async function runVerification(payload: VerifyRequest): Promise<Report> {
  let response = await post("/api/verify", payload);
  let poll: string | null = null;
  while (response.status === 202) {
    // first 202 carries the poll URL; later ones just say "running"
    const ticket = await response.json();
    poll = ticket.poll ?? poll;
    if (!poll) throw new ApiError("protocol", "202 without a poll URL", 202);
    await sleep(150);
    response = await request(poll);
  }
  return response.json();
}

export async function createSession(
  scenario: string,
  query: string,
  seed: number,
): Promise<SessionInfo> {
  return (await post("/api/sessions", { scenario, query, seed })).json();
}

export async function playRound(
  sessionId: string,
  action: ActionObj | ActionObj[],
  forecast: Forecast,
): Promise<RoundOutcome> {
  return (await post(`/api/sessions/${sessionId}/round`, { action, forecast })).json();
}

export async function getVerdict(sessionId: string): Promise<VerdictInfo> {
  return (await request(`/api/sessions/${sessionId}/verdict`)).json();
}

/** Raw transcript text, byte-exact as served, for export and replay. */
export async function getTranscriptText(sessionId: string): Promise<string> {
  return (await request(`/api/sessions/${sessionId}`)).text();
}

export async function closeSession(sessionId: string): Promise<void> {
  await post(`/api/sessions/${sessionId}/close`, {});
}

export interface NirInfo {
  scenario: string;
  config: {
    concepts: string[];
    task: string;
    input_dim: number;
    [key: string]: unknown;
  };
  trained: boolean;
}

export async function nirInfo(scenario: string): Promise<NirInfo> {
  return (await request(`/api/nir/${scenario}`)).json();
}

export async function nirWhatIf(
  scenario: string,
  input: number[],
  weightEdits?: Record<string, number>,
): Promise<WhatIfResult> {
  return (
    await post("/api/nir/whatif", {
      scenario,
      input,
      weight_edits: weightEdits ?? {},
    })
  ).json();
}
