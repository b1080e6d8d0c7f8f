"""Pairwise-comparison study: tournament protocol core and HTTP service."""

from .core import (
    DISSATISFIED,
    SATISFIED,
    ImageVerdict,
    InsufficientVotesError,
    ProtocolError,
    Study,
    StudyConfig,
    TournamentState,
    UnknownEntityError,
)

__all__ = [
    "Study",
    "StudyConfig",
    "TournamentState",
    "ImageVerdict",
    "ProtocolError",
    "UnknownEntityError",
    "InsufficientVotesError",
    "SATISFIED",
    "DISSATISFIED",
]
