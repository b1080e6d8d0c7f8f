"""HTTP front for the study: JSON API over the tournament state machine.

The service owns a single Study instance; mutations serialize through one
lock and append to the JSONL event log before the response goes out, so a
crashed process resumes exactly where it stopped. Retried requests are
absorbed idempotently: re-posting an existing tournament returns it,
re-posting a choice with its comparison index is a no-op once applied, and
re-posting the same satisfaction label returns the closed state.

Study data layout (one directory):
    study.json     config plus image and candidate declarations
    events.jsonl   append-only event log (created on first use)
    image files    wherever study.json points, relative to the directory
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .core import (
    InsufficientVotesError,
    ProtocolError,
    Study,
    StudyConfig,
    TournamentState,
    UnknownEntityError,
)

__all__ = ["load_study", "build_app"]

MEDIA_TYPES = {".png": "image/png", ".ppm": "image/x-portable-pixmap"}


class StartBody(BaseModel):
    image_id: str
    rater_id: str


class ChoiceBody(BaseModel):
    candidate_id: str
    comparison_index: int | None = Field(default=None, ge=0)


class SatisfactionBody(BaseModel):
    label: str


class MosBody(BaseModel):
    image_id: str
    rater_id: str
    method: str
    score: int


def load_study(data_dir: str | Path) -> tuple[Study, dict[str, Path], dict[str, Path]]:
    """Build the Study from study.json and replay its event log.

    Returns (study, raw image paths by image id, candidate paths by
    candidate id).
    """
    data_dir = Path(data_dir)
    declared = json.loads((data_dir / "study.json").read_text(encoding="utf-8"))
    config = StudyConfig(**declared.get("config", {}))
    study = Study(config=config, log_path=data_dir / "events.jsonl")

    raws: dict[str, Path] = {}
    candidates: dict[str, Path] = {}
    for image in declared["images"]:
        image_id = image["image_id"]
        cand_methods = {}
        for cand_id, cand in image["candidates"].items():
            if cand_id in candidates:
                raise ValueError(f"candidate id {cand_id!r} reused across images")
            cand_methods[cand_id] = cand["method"]
            candidates[cand_id] = data_dir / cand["path"]
        study.register_image(image_id, cand_methods, raw_path=image.get("raw"))
        if image.get("raw"):
            raws[image_id] = data_dir / image["raw"]
    study.load_log()
    return study, raws, candidates


def _view(state: TournamentState) -> dict:
    pair = state.current_pair()
    return {
        "tournament_id": state.tournament_id,
        "image_id": state.image_id,
        "rater_id": state.rater_id,
        "pair": list(pair) if pair else None,
        "pair_urls": [f"/results/{c}" for c in pair] if pair else None,
        "raw_url": f"/images/{state.image_id}/raw",
        "comparisons_done": state.comparisons_done,
        "comparisons_total": state.comparisons_total,
        "final_pick": state.final_pick,
        "needs_satisfaction": state.final_pick is not None and state.satisfaction is None,
        "satisfaction": state.satisfaction,
    }


def build_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir)
    study, raws, candidates = load_study(data_dir)
    lock = threading.Lock()
    app = FastAPI(title="pairwise comparison study")
    app.state.study = study

    def fail(exc: ProtocolError) -> HTTPException:
        if isinstance(exc, UnknownEntityError):
            return HTTPException(status_code=404, detail=str(exc))
        return HTTPException(status_code=409, detail=str(exc))

    @app.post("/tournaments", status_code=201)
    def start(body: StartBody):
        with lock:
            tid = f"{body.image_id}:{body.rater_id}"
            existing = study.tournaments.get(tid)
            if existing is not None:
                return _view(existing)
            try:
                return _view(study.start_tournament(body.image_id, body.rater_id))
            except ProtocolError as exc:
                raise fail(exc) from exc

    @app.get("/tournaments/{tid}")
    def get_tournament(tid: str):
        try:
            return _view(study.tournament(tid))
        except ProtocolError as exc:
            raise fail(exc) from exc

    @app.post("/tournaments/{tid}/choice")
    def choose(tid: str, body: ChoiceBody):
        with lock:
            try:
                state = study.tournament(tid)
                if (
                    body.comparison_index is not None
                    and body.comparison_index < state.comparisons_done
                ):
                    if state.choices[body.comparison_index] == body.candidate_id:
                        return _view(state)  # duplicate delivery, already applied
                    raise ProtocolError("conflicting retry for an applied comparison")
                if (
                    body.comparison_index is not None
                    and body.comparison_index > state.comparisons_done
                ):
                    raise ProtocolError("comparison index ahead of the tournament")
                return _view(study.submit_choice(tid, body.candidate_id))
            except ProtocolError as exc:
                raise fail(exc) from exc

    @app.post("/tournaments/{tid}/satisfaction")
    def label(tid: str, body: SatisfactionBody):
        with lock:
            try:
                state = study.tournament(tid)
                if state.satisfaction is not None and state.satisfaction == body.label:
                    return _view(state)  # duplicate delivery
                return _view(study.submit_satisfaction(tid, body.label))
            except ProtocolError as exc:
                raise fail(exc) from exc

    @app.post("/mos", status_code=201)
    def mos(body: MosBody):
        with lock:
            try:
                study.record_mos(body.image_id, body.rater_id, body.method, body.score)
            except ProtocolError as exc:
                raise fail(exc) from exc
        return {"stored": True}

    @app.get("/images/{image_id}/candidates")
    def image_candidates(image_id: str):
        record = study.images.get(image_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        return [
            {"candidate_id": cid, "method": method, "url": f"/results/{cid}"}
            for cid, method in sorted(record.candidates.items())
        ]

    @app.get("/images")
    def image_list():
        return [
            {"image_id": image_id, "raw_url": f"/images/{image_id}/raw"}
            for image_id in sorted(study.images)
        ]

    @app.get("/images/{image_id}/verdict")
    def verdict(image_id: str):
        try:
            v = study.finalize_image(image_id)
        except ProtocolError as exc:
            raise fail(exc) from exc
        return json.loads(v.to_json())

    @app.get("/images/{image_id}/raw")
    def raw_image(image_id: str):
        path = raws.get(image_id)
        if path is None or not path.exists():
            raise HTTPException(status_code=404, detail=f"no raw image for {image_id!r}")
        return FileResponse(path, media_type=MEDIA_TYPES.get(path.suffix.lower()))

    @app.get("/results/{candidate_id}")
    def result_image(candidate_id: str):
        path = candidates.get(candidate_id)
        if path is None or not path.exists():
            raise HTTPException(status_code=404, detail=f"no candidate {candidate_id!r}")
        return FileResponse(path, media_type=MEDIA_TYPES.get(path.suffix.lower()))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
