/* The scripted version of a user sitting at the UI: play the two recorded
   thermostat rounds through the live API, read the verdict, export the
   transcript, and prove the CLI reproduces it byte for byte. */

import { execFile } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, expect, it } from "vitest";

import {
  closeSession,
  configure,
  createSession,
  getTranscriptText,
  getVerdict,
  playRound,
} from "../src/api.js";
import { startServer, LiveServer } from "./server.js";

const run = promisify(execFile);
const ROOT = path.resolve(__dirname, "..", "..");

let server: LiveServer;

beforeAll(async () => {
  server = await startServer(8932);
  configure(server.url);
}, 40_000);

afterAll(async () => {
  await server.stop();
});

it("replays the two wheel rounds for a 2/2 score and a pending verdict", async () => {
  const session = await createSession("thermostat_basic", "comfort", 13);
  expect(session.domain).toEqual(["no", "yes"]);

  const first = await playRound(
    session.session_id,
    { do: { wheel: "6" } },
    "no",
  );
  expect(first.truth).toBe("no");
  expect(first.score).toBe(1);
  expect(first.translated).toEqual([{ do: { wheel: "6" } }]);

  const second = await playRound(
    session.session_id,
    { do: { wheel: "4" } },
    "yes",
  );
  expect(second.truth).toBe("yes");
  expect(second.score).toBe(1);
  expect(second.running_mean).toBe(1);

  const verdict = await getVerdict(session.session_id);
  expect(verdict.rounds).toBe(2);
  expect(verdict.mean_score).toBe(1);
  expect(verdict.sufficient).toBe(false); // fewer than min_rounds: pending

  await closeSession(session.session_id);
  const exported = await getTranscriptText(session.session_id);
  const doc = JSON.parse(exported);
  expect(doc.status).toBe("closed");
  expect(doc.rounds).toHaveLength(2);

  const dir = mkdtempSync(path.join(tmpdir(), "equivar-ui-"));
  const exportPath = path.join(dir, "exported.json");
  const replayPath = path.join(dir, "replayed.json");
  writeFileSync(exportPath, exported);
  await run(
    "python3",
    [
      "-c",
      "from equivar.cli import main; import sys; " +
        "sys.exit(main(['turing', '--scenario', 'thermostat_basic', " +
        `'--script', '${exportPath}', '--json', '${replayPath}']))`,
    ],
    { cwd: ROOT },
  );
  const replayed = readFileSync(replayPath);
  expect(replayed.equals(Buffer.from(exported, "utf-8"))).toBe(true);
}, 30_000);
