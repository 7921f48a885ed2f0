"""Multi-region steady-state evolutionary search over the DAG space."""

from .search import (
    BestEntry,
    Individual,
    SearchConfig,
    SearchResult,
    select_parents,
    steady_state_search,
    make_training_evaluator,
)
from .audit import AuditReport, replay_search_log

__all__ = [
    "BestEntry",
    "Individual",
    "SearchConfig",
    "SearchResult",
    "select_parents",
    "steady_state_search",
    "make_training_evaluator",
    "AuditReport",
    "replay_search_log",
]
