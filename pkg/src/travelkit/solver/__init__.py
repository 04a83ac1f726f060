"""Itinerary solver: beam search, exhaustive oracle, and feasibility checks.

The exhaustive search kernel has a compiled (Cython) and a pure-Python
implementation selected at import; see `travelkit.solver.kernel`.
"""

from .planner import (
    DEFAULT_BEAM_WIDTH,
    Itinerary,
    PlanError,
    PlanInstance,
    Visit,
    brute_force,
    default_travel_time,
    feasible,
    haversine_km,
    instance_from_record,
    instance_to_record,
    itinerary_from_record,
    itinerary_to_record,
    solve,
)
from .kernel import backend_name

__all__ = [
    "DEFAULT_BEAM_WIDTH",
    "Itinerary",
    "PlanError",
    "PlanInstance",
    "Visit",
    "backend_name",
    "brute_force",
    "default_travel_time",
    "feasible",
    "haversine_km",
    "instance_from_record",
    "instance_to_record",
    "itinerary_from_record",
    "itinerary_to_record",
    "solve",
]
