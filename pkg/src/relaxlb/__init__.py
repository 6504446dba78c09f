"""Query/relaxation model for single-source shortest paths and its cubic lower bounds."""

from .adversary import Adversary, DuelResult, check_invariants, det_lower_bound, duel, new_adversary
from .core import (
    SOURCE,
    NegativeCycle,
    Potential,
    WeightAssignment,
    combine,
    delta_potential,
    hard_det,
    hard_rand,
    load_instance,
    save_instance,
    true_distances,
)
from .golomb import erdos_turan_ruler, golomb_potential, is_golomb
from .machine import BudgetExhausted, ModelViolation, Strategy, Transcript, replay, run
from .reduction import MaskParams, check_potential_oblivious, theorem2_demo, verify_p1, verify_p2, wrap
from .strategies import STRATEGIES, make_strategy
from .yao import expected_lower_bound, experiment, phase_times, sample_permutation

__version__ = "0.1.0"
