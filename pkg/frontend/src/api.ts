// Typed client for the judge-server JSON endpoints.

export interface SceneSummary {
  id: string;
  original_url: string | null;
  segmentations: string[];
  choices_recorded: number;
}

export interface SegRef {
  id: string;
  url: string;
}

export interface PairView {
  done: false;
  pair_id: string;
  scene_id: string;
  original_url: string | null;
  left: SegRef;
  right: SegRef;
  progress: Progress;
}

export interface DoneMarker {
  done: true;
  scene_id: string;
  progress: Progress;
}

export interface Progress {
  answered: number;
  total: number;
}

export interface SessionInfo {
  session_id: string;
  scene_id: string;
  total_pairs: number;
}

export interface Results {
  scene_id: string;
  ids: string[];
  ratings: Record<string, number>;
  ranking: string[];
  total_choices: number;
}

export interface ChoiceOutcome {
  status: number;
  ok: boolean;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) {
      throw new Error(`GET ${path} failed: ${res.status}`);
    }
    return (await res.json()) as T;
  }

  listScenes(): Promise<{ scenes: SceneSummary[] }> {
    return this.getJson("/api/scenes");
  }

  async createSession(sceneId: string, seed?: number): Promise<SessionInfo> {
    const body: Record<string, unknown> = { scene_id: sceneId };
    if (seed !== undefined) {
      body.seed = seed;
    }
    const res = await fetch(this.base + "/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      throw new Error(`session creation failed: ${res.status}`);
    }
    return (await res.json()) as SessionInfo;
  }

  nextPair(sessionId: string): Promise<PairView | DoneMarker> {
    return this.getJson(`/api/sessions/${sessionId}/next`);
  }

  // 409 (stale pair) is an expected outcome, not an error: the caller resyncs
  async postChoice(sessionId: string, pairId: string, winnerId: string): Promise<ChoiceOutcome> {
    const res = await fetch(this.base + `/api/sessions/${sessionId}/choice`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pair_id: pairId, winner_id: winnerId }),
    });
    return { status: res.status, ok: res.ok };
  }

  results(sceneId: string): Promise<Results> {
    return this.getJson(`/api/scenes/${sceneId}/results`);
  }
}
