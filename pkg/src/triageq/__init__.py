"""Emergency-centre triage scoring, online consult-time learning, and
queue optimization."""

__version__ = "0.1.0"

from . import config, fql, fuzzy, scheduler, simkit, triage  # noqa: F401
