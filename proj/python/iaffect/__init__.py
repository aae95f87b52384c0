"""Infant affect recognition from face and body landmarks."""

from ._iaffect import (
    Error,
    auc,
    commands,
    load_sessions,
    model_info,
    run,
    synth_session,
    t_sf_two_sided,
    welch_t,
)

__all__ = [
    "Error",
    "auc",
    "commands",
    "load_sessions",
    "model_info",
    "run",
    "synth_session",
    "t_sf_two_sided",
    "welch_t",
]
