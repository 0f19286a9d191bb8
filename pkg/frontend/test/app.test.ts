// State-machine tests against a scripted fake of the server API.

import { beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient, ChoiceOutcome, DoneMarker, PairView, Results } from "../src/api.js";
import { JudgeApp } from "../src/app.js";

interface FakeOptions {
  failFirstPost?: boolean;
  staleFirstPost?: boolean;
}

function makeFakeApi(pairCount: number, options: FakeOptions = {}) {
  const ids = ["segA", "segB", "segC"];
  const queue: Array<[string, string]> = [
    ["segA", "segB"],
    ["segA", "segC"],
    ["segB", "segC"],
  ].slice(0, pairCount) as Array<[string, string]>;
  let cursor = 0;
  let failArmed = options.failFirstPost ?? false;
  let staleArmed = options.staleFirstPost ?? false;
  const recorded: Array<{ winner: string; pairId: string }> = [];

  const api = {
    async listScenes() {
      return { scenes: [{ id: "demo", original_url: null, segmentations: ids, choices_recorded: 0 }] };
    },
    async createSession() {
      return { session_id: "s1", scene_id: "demo", total_pairs: queue.length };
    },
    async nextPair(): Promise<PairView | DoneMarker> {
      if (cursor >= queue.length) {
        return { done: true, scene_id: "demo", progress: { answered: cursor, total: queue.length } };
      }
      const [a, b] = queue[cursor]!;
      return {
        done: false,
        pair_id: `s1-${cursor}`,
        scene_id: "demo",
        original_url: "/static/scenes/demo/original.png",
        left: { id: a, url: `/img/${a}` },
        right: { id: b, url: `/img/${b}` },
        progress: { answered: cursor, total: queue.length },
      };
    },
    async postChoice(_sid: string, pairId: string, winnerId: string): Promise<ChoiceOutcome> {
      if (failArmed) {
        failArmed = false;
        throw new Error("connection reset");
      }
      if (staleArmed) {
        staleArmed = false;
        return { status: 409, ok: false };
      }
      if (pairId !== `s1-${cursor}`) {
        return { status: 409, ok: false };
      }
      recorded.push({ winner: winnerId, pairId });
      cursor += 1;
      return { status: 200, ok: true };
    },
    async results(): Promise<Results> {
      return {
        scene_id: "demo",
        ids,
        ratings: { segA: 30, segB: 0, segC: -30 },
        ranking: ["segA", "segB", "segC"],
        total_choices: recorded.length,
      };
    },
  };
  return { api: api as unknown as ApiClient, recorded };
}

describe("JudgeApp", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<main id="app"></main>';
    root = document.getElementById("app")!;
  });

  it("walks every pair and ends on the ranking view", async () => {
    const { api, recorded } = makeFakeApi(3);
    const app = new JudgeApp(root, api);
    await app.start();

    expect(root.querySelector('[data-testid="progress"]')!.textContent).toBe("0 / 3");
    expect(root.textContent).not.toMatch(/nhd|lad|madlad|0\.\d+/); // blind judging

    while (app.state.phase === "judging") {
      const left = root.querySelector('[data-testid="choice-left"]') as HTMLElement;
      left.click();
      await vi.waitFor(() => expect(app["inFlight"]).toBe(false));
    }

    expect(app.state.phase).toBe("done");
    expect(recorded.length).toBe(3);
    const items = [...root.querySelectorAll('[data-testid="ranking"] [data-seg-id]')];
    expect(items.map((n) => n.getAttribute("data-seg-id"))).toEqual(["segA", "segB", "segC"]);
  });

  it("ignores rapid double clicks: one recorded choice", async () => {
    const { api, recorded } = makeFakeApi(1);
    const app = new JudgeApp(root, api);
    await app.start();

    const left = root.querySelector('[data-testid="choice-left"]') as HTMLElement;
    left.click();
    left.click(); // second click lands while the first POST is in flight
    await vi.waitFor(() => expect(app.state.phase).toBe("done"));
    expect(recorded.length).toBe(1);
  });

  it("resyncs on a 409 without recording a duplicate", async () => {
    const { api, recorded } = makeFakeApi(2, { staleFirstPost: true });
    const app = new JudgeApp(root, api);
    await app.start();

    (root.querySelector('[data-testid="choice-left"]') as HTMLElement).click();
    await vi.waitFor(() => expect(app["inFlight"]).toBe(false));
    // stale post recorded nothing and the UI shows the real current pair
    expect(recorded.length).toBe(0);
    expect(app.state.phase).toBe("judging");
    expect(root.querySelector('[data-testid="progress"]')!.textContent).toBe("0 / 2");
  });

  it("offers a retry affordance on network failure without double-submitting", async () => {
    const { api, recorded } = makeFakeApi(1, { failFirstPost: true });
    const app = new JudgeApp(root, api);
    await app.start();

    (root.querySelector('[data-testid="choice-left"]') as HTMLElement).click();
    await vi.waitFor(() => expect(root.querySelector('[data-testid="retry"]')).not.toBeNull());
    expect(recorded.length).toBe(0);
    expect(app.state.phase).toBe("judging");

    (root.querySelector('[data-testid="retry"]') as HTMLElement).click();
    await vi.waitFor(() => expect(root.querySelector('[data-testid="retry"]')).toBeNull());
    (root.querySelector('[data-testid="choice-left"]') as HTMLElement).click();
    await vi.waitFor(() => expect(app.state.phase).toBe("done"));
    expect(recorded.length).toBe(1);
  });

  it("replaces broken images with a placeholder", async () => {
    const { api } = makeFakeApi(1);
    const app = new JudgeApp(root, api);
    await app.start();
    const img = root.querySelector(".candidate img") as HTMLImageElement;
    img.dispatchEvent(new Event("error"));
    expect(root.querySelector(".seg-image.missing")).not.toBeNull();
    expect(app.state.phase).toBe("judging"); // session not advanced
  });
});
