// Pairwise-judgment SPA: shows the original image above a side-by-side
// candidate pair, records one choice per click, and ends with the
// best-to-worst ranking. Participants never see metric values or labels
// while judging.

import { ApiClient, DoneMarker, PairView, Results } from "./api.js";

export type Phase = "loading" | "judging" | "done" | "error";

export interface ViewState {
  phase: Phase;
  sceneId: string | null;
  sessionId: string | null;
  pair: PairView | null;
  results: Results | null;
  message: string | null;
}

export class JudgeApp {
  readonly state: ViewState = {
    phase: "loading",
    sceneId: null,
    sessionId: null,
    pair: null,
    results: null,
    message: null,
  };

  private inFlight = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async start(sceneId?: string, seed?: number): Promise<void> {
    this.render();
    try {
      let chosen = sceneId;
      if (!chosen) {
        const { scenes } = await this.api.listScenes();
        if (scenes.length === 0) {
          this.fail("no scenes available");
          return;
        }
        chosen = scenes[0]!.id;
      }
      const session = await this.api.createSession(chosen, seed);
      this.state.sceneId = session.scene_id;
      this.state.sessionId = session.session_id;
      await this.refresh();
    } catch (err) {
      this.fail(String(err));
    }
  }

  /** Pull the server's current pair (or the done marker) and re-render. */
  async refresh(): Promise<void> {
    if (!this.state.sessionId) {
      return;
    }
    const view = await this.api.nextPair(this.state.sessionId);
    if ((view as DoneMarker).done) {
      this.state.phase = "done";
      this.state.pair = null;
      this.state.results = await this.api.results(this.state.sceneId!);
    } else {
      this.state.phase = "judging";
      this.state.pair = view as PairView;
    }
    this.render();
  }

  /** One POST per click: re-entry while a request is in flight is ignored. */
  async submitChoice(winnerId: string): Promise<void> {
    const pair = this.state.pair;
    if (this.inFlight || this.state.phase !== "judging" || !pair) {
      return;
    }
    this.inFlight = true;
    this.render();
    try {
      const outcome = await this.api.postChoice(this.state.sessionId!, pair.pair_id, winnerId);
      if (outcome.ok || outcome.status === 409) {
        // 409 means this tab was stale; resyncing shows the real current pair
        this.inFlight = false;
        await this.refresh();
        return;
      }
      this.state.message = `choice rejected (${outcome.status})`;
    } catch {
      this.state.message = "network problem; your last click was not recorded";
    }
    this.inFlight = false;
    this.render();
  }

  private fail(message: string): void {
    this.state.phase = "error";
    this.state.message = message;
    this.render();
  }

  // -- rendering ------------------------------------------------------------

  render(): void {
    this.root.textContent = "";
    switch (this.state.phase) {
      case "loading":
        this.root.append(el("p", "status", "loading session..."));
        break;
      case "judging":
        this.renderPair();
        break;
      case "done":
        this.renderRanking();
        break;
      case "error":
        this.root.append(el("p", "status error", this.state.message ?? "something went wrong"));
        break;
    }
  }

  private renderPair(): void {
    const pair = this.state.pair!;
    const header = el("header", "top");
    header.append(el("h1", "title", "Which segmentation matches the original best?"));
    const progress = el("p", "progress", `${pair.progress.answered} / ${pair.progress.total}`);
    progress.setAttribute("data-testid", "progress");
    header.append(progress);
    this.root.append(header);

    if (pair.original_url) {
      const original = el("figure", "original");
      original.append(imageOrPlaceholder(pair.original_url, "original image"));
      original.append(el("figcaption", "caption", "original"));
      this.root.append(original);
    }

    const row = el("div", "pair-row");
    for (const side of ["left", "right"] as const) {
      const seg = pair[side];
      const card = el("button", "candidate");
      card.setAttribute("data-testid", `choice-${side}`);
      card.setAttribute("data-seg-id", seg.id);
      if (this.inFlight) {
        card.setAttribute("disabled", "disabled");
      }
      card.append(imageOrPlaceholder(seg.url, `candidate ${side}`));
      card.addEventListener("click", () => {
        void this.submitChoice(seg.id);
      });
      row.append(card);
    }
    this.root.append(row);

    if (this.state.message) {
      const note = el("p", "status error", this.state.message);
      const retry = el("button", "retry", "retry");
      retry.setAttribute("data-testid", "retry");
      retry.addEventListener("click", () => {
        this.state.message = null;
        void this.refresh();
      });
      note.append(" ", retry);
      this.root.append(note);
    }
  }

  private renderRanking(): void {
    const results = this.state.results!;
    this.root.append(el("h1", "title", "Session complete"));
    this.root.append(el("p", "status", `${results.total_choices} choices recorded. Ranking, best to worst:`));
    const strip = el("ol", "ranking");
    strip.setAttribute("data-testid", "ranking");
    for (const id of results.ranking) {
      const item = el("li", "ranked");
      item.setAttribute("data-seg-id", id);
      item.append(el("span", "rank-label", id));
      strip.append(item);
    }
    this.root.append(strip);
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function imageOrPlaceholder(url: string, alt: string): HTMLElement {
  const img = document.createElement("img");
  img.src = url;
  img.alt = alt;
  img.className = "seg-image";
  img.addEventListener("error", () => {
    const placeholder = el("div", "seg-image missing", `image unavailable: ${alt}`);
    img.replaceWith(placeholder);
  });
  return img;
}
