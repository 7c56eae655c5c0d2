"""Exact solver for two-agent finite-horizon teams with nested information.

Agent 2's memory is contained in agent 1's.  The solver runs a backward
dynamic program over agent 2's joint belief on (state, agent 1's private
history), in exact rational arithmetic, and checks itself against a
brute-force strategy enumeration.
"""

from importlib import resources

from .beliefs import (
    Belief1,
    Belief2,
    NewInfo2,
    PrivateHistory,
    initial_belief1,
    initial_belief2,
    reconstruct_belief1,
    reduced_cost1,
    reduced_cost2,
    update_belief1,
    update_belief2,
    z2_distribution,
)
from .dp import SolvedPolicy, Solver, execute_policy, final_stage_equivalence_check, solve
from .errors import (
    IncompletePrescriptionError,
    InconsistentObservationError,
    NullEventError,
    ParseError,
    ResourceBoundError,
    ValidationError,
)
from .model import TeamModel, load_model, load_model_file, observation_kernel, serialize_model, validate_model
from .oracle import brute_force_optimal, evaluate_strategy, generate_random_instance, simulate
from .prescriptions import Prescription, apply, enumerate_prescriptions, prescription_domain

__version__ = "0.1.0"


def desk_team() -> TeamModel:
    """The bundled two-state, one-step maintenance example."""
    text = resources.files(__package__).joinpath("data/desk_team.json").read_text(encoding="utf-8")
    return load_model(text)
