"""Reference-selection study: per-rater winner-stays tournaments over the
candidate enhancements of each image, majority voting across raters, and
the dissatisfaction rule that demotes an image to the challenging set.

All state lives in an append-only event log (tournament_started, choice,
satisfaction, mos). Every mutation builds an event, validates it by
applying it, and only then commits it, so replaying the log reconstructs
the exact same state, verdicts included.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "ProtocolError",
    "UnknownEntityError",
    "InsufficientVotesError",
    "StudyConfig",
    "TournamentState",
    "ImageVerdict",
    "Study",
    "SATISFIED",
    "DISSATISFIED",
]

log = logging.getLogger(__name__)

SATISFIED = "satisfied"
DISSATISFIED = "dissatisfied"


class ProtocolError(Exception):
    """A request that the study protocol does not allow in this state."""


class UnknownEntityError(ProtocolError):
    """Reference to an image, candidate, or tournament that does not exist."""


class InsufficientVotesError(ProtocolError):
    """Finalization requested before enough raters finished the image."""


@dataclass(frozen=True)
class StudyConfig:
    candidate_count: int = 12
    raters_required: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.candidate_count < 2:
            raise ValueError("need at least two candidates to compare")
        if self.raters_required < 1:
            raise ValueError("need at least one rater")


@dataclass
class TournamentState:
    tournament_id: str
    image_id: str
    rater_id: str
    order: tuple[str, ...]
    comparisons_done: int = 0
    champion: str | None = None
    final_pick: str | None = None
    satisfaction: str | None = None
    choices: list[str] = field(default_factory=list)

    @property
    def candidate_count(self) -> int:
        return len(self.order)

    @property
    def comparisons_total(self) -> int:
        return len(self.order) - 1

    @property
    def closed(self) -> bool:
        return self.satisfaction is not None

    def current_pair(self) -> tuple[str, str] | None:
        """The pair on screen, or None once the final pick exists."""
        if self.final_pick is not None:
            return None
        if self.comparisons_done == 0:
            return (self.order[0], self.order[1])
        return (self.champion, self.order[self.comparisons_done + 1])


@dataclass(frozen=True)
class ImageVerdict:
    image_id: str
    reference: str | None
    challenging: bool
    vote_counts: dict[str, int]
    dissatisfied_count: int

    def to_json(self) -> str:
        """Canonical serialization; byte-stable across replays."""
        return json.dumps(
            {
                "image_id": self.image_id,
                "reference": self.reference,
                "challenging": self.challenging,
                "vote_counts": self.vote_counts,
                "dissatisfied_count": self.dissatisfied_count,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class _ImageRecord:
    image_id: str
    candidates: dict[str, str]  # candidate id -> method name
    raw_path: str | None = None


@dataclass
class Study:
    """In-memory protocol state, optionally backed by a JSONL event log."""

    config: StudyConfig
    log_path: Path | None = None
    images: dict[str, _ImageRecord] = field(default_factory=dict)
    tournaments: dict[str, TournamentState] = field(default_factory=dict)
    mos: dict[tuple[str, str, str], int] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)

    # ---- setup ------------------------------------------------------------

    def register_image(self, image_id: str, candidates: dict[str, str], raw_path=None):
        """Declare an image and its candidate results (id -> method name).

        Registration is configuration, not history: it must happen before
        events referencing the image are applied.
        """
        if image_id in self.images:
            raise ProtocolError(f"image {image_id!r} already registered")
        if len(candidates) != self.config.candidate_count:
            raise ProtocolError(
                f"image {image_id!r} has {len(candidates)} candidates, "
                f"config requires {self.config.candidate_count}"
            )
        self.images[image_id] = _ImageRecord(image_id, dict(candidates), raw_path)

    def load_log(self) -> int:
        """Replay the attached log file; returns the number of events."""
        if self.log_path is None or not self.log_path.exists():
            return 0
        count = 0
        with open(self.log_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    self.apply_event(json.loads(line))
                    count += 1
        return count

    # ---- operations ---------------------------------------------------------

    def start_tournament(self, image_id: str, rater_id: str) -> TournamentState:
        """Open a tournament; the candidate order is a seeded permutation."""
        if image_id not in self.images:
            raise UnknownEntityError(f"unknown image {image_id!r}")
        tid = f"{image_id}:{rater_id}"
        if tid in self.tournaments:
            raise ProtocolError(f"rater {rater_id!r} already has a tournament for {image_id!r}")
        order = self._permutation(image_id, rater_id)
        event = {
            "type": "tournament_started",
            "tournament_id": tid,
            "image_id": image_id,
            "rater_id": rater_id,
            "order": list(order),
        }
        self._commit(event)
        return self.tournaments[tid]

    def submit_choice(self, tournament_id: str, chosen: str) -> TournamentState:
        state = self._tournament(tournament_id)
        pair = state.current_pair()
        if pair is None:
            raise ProtocolError("tournament already finished its comparisons")
        if chosen not in pair:
            raise ProtocolError(f"candidate {chosen!r} is not on screen")
        self._commit({"type": "choice", "tournament_id": tournament_id, "candidate_id": chosen})
        return self.tournaments[tournament_id]

    def submit_satisfaction(self, tournament_id: str, label: str) -> TournamentState:
        state = self._tournament(tournament_id)
        if label not in (SATISFIED, DISSATISFIED):
            raise ProtocolError(f"label must be {SATISFIED!r} or {DISSATISFIED!r}")
        if state.final_pick is None:
            raise ProtocolError("satisfaction label comes after the final pick")
        if state.satisfaction is not None:
            raise ProtocolError("tournament already labeled")
        self._commit({"type": "satisfaction", "tournament_id": tournament_id, "label": label})
        return self.tournaments[tournament_id]

    def record_mos(self, image_id: str, rater_id: str, method: str, score: int):
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise ProtocolError(f"score must be an integer in [1, 5], got {score!r}")
        if image_id not in self.images:
            raise UnknownEntityError(f"unknown image {image_id!r}")
        if (image_id, rater_id, method) in self.mos:
            log.warning("overwriting score for (%s, %s, %s)", image_id, rater_id, method)
        self._commit(
            {
                "type": "mos",
                "image_id": image_id,
                "rater_id": rater_id,
                "method": method,
                "score": score,
            }
        )

    # ---- queries ------------------------------------------------------------

    def tournament(self, tournament_id: str) -> TournamentState:
        return self._tournament(tournament_id)

    def closed_tournaments(self, image_id: str) -> list[TournamentState]:
        return [
            t
            for t in self.tournaments.values()
            if t.image_id == image_id and t.closed
        ]

    def finalize_image(self, image_id: str) -> ImageVerdict:
        """Majority vote plus the dissatisfaction demotion rule.

        The winner is the candidate with the most final picks (ties break to
        the lexicographically smallest id). If strictly more than half of the
        winner's own voters labeled it dissatisfactory, the image becomes
        challenging and no reference is published.
        """
        if image_id not in self.images:
            raise UnknownEntityError(f"unknown image {image_id!r}")
        closed = self.closed_tournaments(image_id)
        if len(closed) < self.config.raters_required:
            raise InsufficientVotesError(
                f"{len(closed)} of {self.config.raters_required} raters finished {image_id!r}"
            )
        votes: dict[str, int] = {}
        for t in closed:
            votes[t.final_pick] = votes.get(t.final_pick, 0) + 1
        winner = min(votes, key=lambda c: (-votes[c], c))
        dissatisfied = sum(
            1 for t in closed if t.final_pick == winner and t.satisfaction == DISSATISFIED
        )
        challenging = dissatisfied > votes[winner] / 2
        return ImageVerdict(
            image_id=image_id,
            reference=None if challenging else winner,
            challenging=challenging,
            vote_counts=dict(sorted(votes.items())),
            dissatisfied_count=dissatisfied,
        )

    def reference_methods(self) -> list[str]:
        """Winning method per finalizable image that kept its reference."""
        out = []
        for image_id, record in self.images.items():
            try:
                verdict = self.finalize_image(image_id)
            except InsufficientVotesError:
                continue
            if verdict.reference is not None:
                out.append(record.candidates[verdict.reference])
        return out

    def mos_records(self):
        return [(i, r, m, s) for (i, r, m), s in self.mos.items()]

    # ---- event machinery ------------------------------------------------------

    def apply_event(self, event: dict) -> None:
        """Single entry point for state transitions; replay calls this too."""
        kind = event.get("type")
        if kind == "tournament_started":
            self._apply_started(event)
        elif kind == "choice":
            self._apply_choice(event)
        elif kind == "satisfaction":
            self._apply_satisfaction(event)
        elif kind == "mos":
            self._apply_mos(event)
        else:
            raise ProtocolError(f"unknown event type {kind!r}")
        self.events.append(event)

    def _commit(self, event: dict) -> None:
        self.apply_event(event)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(event, sort_keys=True) + "\n")

    def _apply_started(self, event: dict) -> None:
        image = self.images.get(event["image_id"])
        if image is None:
            raise UnknownEntityError(f"unknown image {event['image_id']!r}")
        order = tuple(event["order"])
        if sorted(order) != sorted(image.candidates):
            raise ProtocolError("event order does not permute the image's candidates")
        tid = event["tournament_id"]
        if tid in self.tournaments:
            raise ProtocolError(f"duplicate tournament {tid!r}")
        self.tournaments[tid] = TournamentState(
            tournament_id=tid,
            image_id=event["image_id"],
            rater_id=event["rater_id"],
            order=order,
        )

    def _apply_choice(self, event: dict) -> None:
        state = self._tournament(event["tournament_id"])
        pair = state.current_pair()
        chosen = event["candidate_id"]
        if pair is None or chosen not in pair:
            raise ProtocolError(f"invalid choice {chosen!r}")
        state.champion = chosen
        state.choices.append(chosen)
        state.comparisons_done += 1
        if state.comparisons_done == state.comparisons_total:
            state.final_pick = state.champion

    def _apply_satisfaction(self, event: dict) -> None:
        state = self._tournament(event["tournament_id"])
        if state.final_pick is None or state.satisfaction is not None:
            raise ProtocolError("satisfaction not expected now")
        label = event["label"]
        if label not in (SATISFIED, DISSATISFIED):
            raise ProtocolError(f"bad label {label!r}")
        state.satisfaction = label

    def _apply_mos(self, event: dict) -> None:
        self.mos[(event["image_id"], event["rater_id"], event["method"])] = event["score"]

    def _tournament(self, tournament_id: str) -> TournamentState:
        state = self.tournaments.get(tournament_id)
        if state is None:
            raise UnknownEntityError(f"unknown tournament {tournament_id!r}")
        return state

    def _permutation(self, image_id: str, rater_id: str) -> tuple[str, ...]:
        # Stable across restarts: the stream is keyed by (seed, image, rater).
        rng = random.Random(f"{self.config.seed}:{image_id}:{rater_id}")
        order = sorted(self.images[image_id].candidates)
        rng.shuffle(order)
        return tuple(order)
