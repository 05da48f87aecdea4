"""normkit: affordance inference under Dempster-Shafer uncertainty,
analogical precedent matching via structure mapping, and moral-gated
action-script repair."""

from .ds import BeliefInterval, combine_evidence
from .logic import Const, Func, Predicate, Var, unify
from .rules import AffordanceRule, Fact, Scene, load_rules, load_scene
from .inference import AffordanceBelief, abduce, infer, select_best
from .dgroup import Dgroup, load_dgroup, parse_dgroup
from .sme import (
    GMap, ScoreWeights, SimilarityResult,
    build_match_hypotheses, candidate_inferences, extract_gmaps,
    similarity, structural_score, verify_candidate_inference,
)
from .cases import Case, CaseLibrary, load_library, retrieve, save_library
from .scripts import ActionScript, ActionStep, Goal, Scenario, load_scenario
from .goal import (
    CheckResult, Trace, check_moral_percept, decompose, execute,
    next_modified_action_scripts, scenario_to_dgroup,
)
from .config import RunConfig, build_config

__version__ = "0.1.0"
