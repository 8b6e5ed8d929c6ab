/* Spawn the real HTTP service for the duration of a test file. */

import { spawn, ChildProcess } from "node:child_process";
import path from "node:path";

export interface LiveServer {
  url: string;
  stop: () => Promise<void>;
}

const ROOT = path.resolve(__dirname, "..", "..");

export async function startServer(port: number): Promise<LiveServer> {
  const child: ChildProcess = spawn(
    "python3",
    [
      "-c",
      "from equivar.cli import main; import sys; " +
        `sys.exit(main(['serve', '--host', '127.0.0.1', '--port', '${port}']))`,
    ],
    { cwd: ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => (stderr += String(chunk)));

  const url = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early (${child.exitCode}): ${stderr}`);
    }
    try {
      const ping = await fetch(`${url}/api/scenarios`);
      if (ping.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) {
      child.kill("SIGKILL");
      throw new Error(`server did not come up in 30s: ${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 120));
  }
  return {
    url,
    stop: () =>
      new Promise((resolve) => {
        child.once("exit", () => resolve());
        child.kill("SIGTERM");
        setTimeout(() => child.kill("SIGKILL"), 3_000).unref();
      }),
  };
}
