// DOM-driven end-to-end flow against a real judge-server subprocess: clicks
// walk a 3-pair session, the server log gains exactly 3 choices, the final
// ranking view matches the results endpoint, and a double-click records one
// choice.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { JudgeApp } from "../src/app.js";

const PORT = 18200 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let scenesDir: string;

function writePgm(path: string, rows: number, cols: number, fill: (r: number, c: number) => number) {
  const pixels = Buffer.alloc(rows * cols);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      pixels[r * cols + c] = fill(r, c);
    }
  }
  writeFileSync(path, Buffer.concat([Buffer.from(`P5\n${cols} ${rows}\n255\n`), pixels]));
}

beforeAll(async () => {
  scenesDir = mkdtempSync(join(tmpdir(), "judge-scenes-"));
  const scene = join(scenesDir, "demo");
  mkdirSync(scene);
  writePgm(join(scene, "original.pgm"), 16, 16, (r, c) => (r > 4 && r < 12 && c > 4 && c < 12 ? 0 : 1));
  writePgm(join(scene, "seg0.pgm"), 16, 16, (r, c) => (r > 4 && r < 12 && c > 4 && c < 12 ? 0 : 1));
  writePgm(join(scene, "seg1.pgm"), 16, 16, (r, c) => (r > 5 && r < 12 && c > 4 && c < 12 ? 0 : 1));
  writePgm(join(scene, "seg2.pgm"), 16, 16, (r, c) => (r > 4 && r < 11 && c > 5 && c < 12 ? 0 : 1));

  server = spawn("python3", ["-m", "labeldist.cli", "serve", "--scenes", scenesDir, "--port", String(PORT)], {
    stdio: "ignore",
  });
  await vi.waitFor(
    async () => {
      const res = await fetch(`${BASE}/api/scenes`);
      expect(res.ok).toBe(true);
    },
    { timeout: 20000, interval: 250 },
  );
});

afterAll(() => {
  server?.kill();
});

describe("judge UI against a live server", () => {
  it("completes a 3-pair session by clicking, with a double-click on one pair", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app")!;
    const app = new JudgeApp(root, new ApiClient(BASE));
    await app.start("demo", 21);

    expect(app.state.phase).toBe("judging");
    expect(root.querySelector('[data-testid="progress"]')!.textContent).toBe("0 / 3");

    let clicks = 0;
    while (app.state.phase === "judging" && clicks < 10) {
      const pairBefore = app.state.pair!.pair_id;
      const left = root.querySelector('[data-testid="choice-left"]') as HTMLElement;
      left.click();
      if (clicks === 0) {
        left.click(); // rapid double click on the first pair
      }
      clicks += 1;
      await vi.waitFor(() =>
        expect(app.state.phase === "done" || app.state.pair!.pair_id !== pairBefore).toBe(true),
      );
    }

    expect(app.state.phase).toBe("done");
    expect(clicks).toBe(3);

    // the per-scene log holds exactly 3 choices (double click recorded once)
    const log = readFileSync(join(scenesDir, "demo", "choices.csv"), "utf-8").trim().split("\n");
    expect(log[0]).toBe("timestamp,scene,winner,loser");
    expect(log.length).toBe(4);

    // ranking strip order matches the results endpoint
    const results = await new ApiClient(BASE).results("demo");
    expect(results.total_choices).toBe(3);
    const shown = [...root.querySelectorAll('[data-testid="ranking"] [data-seg-id]')].map((n) =>
      n.getAttribute("data-seg-id"),
    );
    expect(shown).toEqual(results.ranking);
  });
});
