"""HTTP service for the pairwise human-judgment study.

Serves scenes (an original image plus its candidate segmentations), walks
each session through every unordered segmentation pair exactly once in a
seeded-shuffled order, records choices to an append-only per-scene log, and
reports live Elo ratings. Ratings and choice matrices are always derived by
replaying the chronological log through the elo module, so the log file is
the single source of truth and survives restarts.

Scene directory layout (one subdirectory per scene):

    scenes/<scene_id>/original.<ext>   reference image (never judged)
    scenes/<scene_id>/<name>.<ext>     candidate segmentations
    scenes/<scene_id>/choices.csv      append-only choice log (created lazily)
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from .core import LabeledArray, load_array
from .elo import (
    EloRatings,
    LogEntry,
    apply_result,
    build_choice_matrix,
    format_log_entry,
    parse_choice_log,
    LOG_CSV_HEADER,
)
from .metrics import METRIC_NAMES, MetricNotApplicableError, compute_metric
from .stats import ols_fit

IMAGE_SUFFIXES = (".pgm", ".ppm", ".png", ".jpg", ".jpeg", ".gif", ".bmp", ".csv")
LOG_FILENAME = "choices.csv"
K_FACTOR = 32.0
INITIAL_RATING = 0.0


@dataclass(frozen=True)
class Scene:
    id: str
    directory: Path
    original: str | None
    segmentations: tuple[str, ...]  # file names, sorted

    def seg_ids(self) -> tuple[str, ...]:
        return tuple(Path(name).stem for name in self.segmentations)

    def url_for(self, filename: str) -> str:
        return f"/static/scenes/{self.id}/{filename}"


@dataclass
class Session:
    id: str
    scene_id: str
    queue: list[tuple[str, str]]  # segmentation ids, canonical order
    swap_sides: list[bool]
    cursor: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def current_pair_id(self) -> str:
        return f"{self.id}-{self.cursor}"


def discover_scenes(scenes_dir: Path) -> dict[str, Scene]:
    scenes = {}
    for sub in sorted(p for p in scenes_dir.iterdir() if p.is_dir()):
        original = None
        segmentations = []
        for f in sorted(p for p in sub.iterdir() if p.is_file()):
            if f.suffix.lower() not in IMAGE_SUFFIXES or f.name == LOG_FILENAME:
                continue
            if f.stem == "original":
                original = f.name
            else:
                segmentations.append(f.name)
        if len(segmentations) >= 2:
            scenes[sub.name] = Scene(
                id=sub.name,
                directory=sub,
                original=original,
                segmentations=tuple(segmentations),
            )
    return scenes


def create_app(scenes_dir, seed: int = 0, ui_dir=None) -> FastAPI:
    scenes_dir = Path(scenes_dir)
    if not scenes_dir.is_dir():
        raise FileNotFoundError(f"scenes directory {scenes_dir} does not exist")
    scenes = discover_scenes(scenes_dir)

    app = FastAPI(title="labeldist judge server")
    state = {"sessions": {}, "counter": 0, "seed": seed}
    state_lock = threading.Lock()

    # -- derived state: always replayed from the append-only logs ----------

    def log_path(scene: Scene) -> Path:
        return scene.directory / LOG_FILENAME

    def scene_log(scene: Scene) -> list[LogEntry]:
        path = log_path(scene)
        if not path.exists():
            return []
        return [e for e in parse_choice_log(path.read_text()) if e.scene == scene.id]

    def scene_ratings(scene: Scene) -> EloRatings:
        ratings = EloRatings.fresh(scene.seg_ids(), k_factor=K_FACTOR, initial=INITIAL_RATING)
        for entry in scene_log(scene):
            ratings = apply_result(ratings, entry.winner, entry.loser)
        return ratings

    def append_choice(scene: Scene, winner: str, loser: str) -> None:
        path = log_path(scene)
        stamp = datetime.now(timezone.utc).isoformat()
        line = format_log_entry(LogEntry(stamp, scene.id, winner, loser))
        with state_lock:
            if not path.exists():
                path.write_text(LOG_CSV_HEADER + "\n")
            with path.open("a") as fh:
                fh.write(line + "\n")

    def get_scene(scene_id: str) -> Scene:
        scene = scenes.get(scene_id)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"unknown scene {scene_id!r}")
        return scene

    def get_session(session_id: str) -> Session:
        session = state["sessions"].get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    # -- endpoints ----------------------------------------------------------

    @app.get("/api/scenes")
    def list_scenes():
        return {
            "scenes": [
                {
                    "id": scene.id,
                    "original_url": scene.url_for(scene.original) if scene.original else None,
                    "segmentations": list(scene.seg_ids()),
                    "choices_recorded": len(scene_log(scene)),
                }
                for scene in scenes.values()
            ]
        }

    @app.get("/api/scenes/{scene_id}")
    def scene_detail(scene_id: str):
        scene = get_scene(scene_id)
        return {
            "id": scene.id,
            "original_url": scene.url_for(scene.original) if scene.original else None,
            "segmentations": [
                {"id": Path(name).stem, "url": scene.url_for(name)}
                for name in scene.segmentations
            ],
            "pair_count": len(scene.segmentations) * (len(scene.segmentations) - 1) // 2,
        }

    @app.post("/api/sessions")
    def create_session(payload: dict = Body(...)):
        scene_id = payload.get("scene_id")
        if scene_id is None:
            raise HTTPException(status_code=400, detail="scene_id is required")
        scene = get_scene(scene_id)
        with state_lock:
            state["counter"] += 1
            session_seed = payload.get("seed")
            if session_seed is None:
                session_seed = state["seed"] + state["counter"]
            session_id = f"s{state['counter']}"
            rng = np.random.default_rng(int(session_seed))
            pairs = list(itertools.combinations(scene.seg_ids(), 2))
            order = rng.permutation(len(pairs))
            queue = [pairs[k] for k in order]
            swap_sides = [bool(b) for b in rng.integers(2, size=len(pairs))]
            session = Session(
                id=session_id, scene_id=scene.id, queue=queue, swap_sides=swap_sides
            )
            state["sessions"][session_id] = session
        return {
            "session_id": session.id,
            "scene_id": scene.id,
            "total_pairs": len(session.queue),
            "seed": int(session_seed),
        }

    @app.get("/api/sessions/{session_id}/next")
    def next_pair(session_id: str):
        session = get_session(session_id)
        scene = get_scene(session.scene_id)
        with session.lock:
            progress = {"answered": session.cursor, "total": len(session.queue)}
            if session.cursor >= len(session.queue):
                return {"done": True, "scene_id": scene.id, "progress": progress}
            a, b = session.queue[session.cursor]
            left, right = (b, a) if session.swap_sides[session.cursor] else (a, b)
            by_stem = {Path(name).stem: name for name in scene.segmentations}
            return {
                "done": False,
                "pair_id": session.current_pair_id(),
                "scene_id": scene.id,
                "original_url": scene.url_for(scene.original) if scene.original else None,
                "left": {"id": left, "url": scene.url_for(by_stem[left])},
                "right": {"id": right, "url": scene.url_for(by_stem[right])},
                "progress": progress,
            }

    @app.post("/api/sessions/{session_id}/choice")
    def record_choice(session_id: str, payload: dict = Body(...)):
        session = get_session(session_id)
        scene = get_scene(session.scene_id)
        pair_id = payload.get("pair_id")
        winner = payload.get("winner_id")
        with session.lock:
            if session.cursor >= len(session.queue):
                raise HTTPException(status_code=409, detail="session already complete")
            if pair_id != session.current_pair_id():
                raise HTTPException(
                    status_code=409,
                    detail=f"stale pair {pair_id!r}; current is {session.current_pair_id()!r}",
                )
            a, b = session.queue[session.cursor]
            if winner not in (a, b):
                raise HTTPException(status_code=400, detail=f"winner {winner!r} not in pair {(a, b)}")
            loser = b if winner == a else a
            append_choice(scene, winner, loser)
            session.cursor += 1
            return {
                "ok": True,
                "recorded": {"winner": winner, "loser": loser},
                "progress": {"answered": session.cursor, "total": len(session.queue)},
            }

    @app.get("/api/scenes/{scene_id}/results")
    def results(scene_id: str):
        scene = get_scene(scene_id)
        entries = scene_log(scene)
        ids = scene.seg_ids()
        matrix = build_choice_matrix(list(ids), [(e.winner, e.loser) for e in entries])
        ratings = scene_ratings(scene)
        return {
            "scene_id": scene.id,
            "ids": list(ids),
            "choice_matrix": matrix.wins.tolist(),
            "ratings": {name: ratings.ratings[name] for name in ids},
            "ranking": ratings.ranking(),
            "total_choices": len(entries),
            "regressions": _metric_regressions(scene, ratings),
        }

    def _metric_regressions(scene: Scene, ratings: EloRatings) -> dict:
        arrays = _loadable_arrays(scene)
        if arrays is None or len(arrays) < 3:
            return {}
        ids = scene.seg_ids()
        pairs = list(itertools.combinations(range(len(ids)), 2))
        elo_d = [abs(ratings.ratings[ids[a]] - ratings.ratings[ids[b]]) for a, b in pairs]
        out = {}
        for metric in METRIC_NAMES:
            try:
                metric_d = [
                    compute_metric(metric, arrays[a], arrays[b]).value for a, b in pairs
                ]
                report = ols_fit(metric_d, elo_d)
            except (MetricNotApplicableError, ValueError):
                continue
            out[metric] = {
                "slope": report.slope,
                "intercept": report.intercept,
                "r2": report.r_squared,
                "p": report.p_value,
                "n": report.n,
            }
        return out

    def _loadable_arrays(scene: Scene) -> list[LabeledArray] | None:
        arrays = []
        shape = None
        for name in scene.segmentations:
            path = scene.directory / name
            if path.suffix.lower() not in (".pgm", ".csv"):
                return None
            try:
                arr = load_array(path)
            except ValueError:
                return None
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                return None
            arrays.append(arr)
        return arrays

    @app.get("/api/scenes/{scene_id}/choices.csv", response_class=PlainTextResponse)
    def choices_csv(scene_id: str):
        scene = get_scene(scene_id)
        path = log_path(scene)
        text = path.read_text() if path.exists() else LOG_CSV_HEADER + "\n"
        return PlainTextResponse(text, media_type="text/csv")

    @app.get("/api/scenes/{scene_id}/matrix.csv", response_class=PlainTextResponse)
    def matrix_csv(scene_id: str):
        scene = get_scene(scene_id)
        entries = scene_log(scene)
        matrix = build_choice_matrix(
            list(scene.seg_ids()), [(e.winner, e.loser) for e in entries]
        )
        return PlainTextResponse(matrix.to_csv(), media_type="text/csv")

    app.mount("/static/scenes", StaticFiles(directory=scenes_dir), name="scenes")
    if ui_dir is not None:
        app.mount("/static", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse("/static/")

    return app
