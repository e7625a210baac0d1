"""Social-choice aggregation toolkit for collective feedback.

Ordinal voting rules, cardinal and multi-winner aggregation, judgment
aggregation, a small feedback-statement language, simulated evaluator
populations, reward-model pipelines, and property auditors, all behind a
deterministic command line.
"""

__version__ = "0.1.0"

from .audits import (
    CloneSpec,
    CloneTestResult,
    ManipulationWitness,
    anonymity_check,
    clone_test,
    cloned_profile,
    manipulation_search_cardinal,
    manipulation_search_ordinal,
)
from .cardinal import (
    CARDINAL_RULES,
    Committee,
    RatingProfile,
    aggregate_ratings,
    cardinal_rule,
    cc_score,
    compose_multiwinner_response,
    greedy_cc,
    k_borda,
    rating_profile_from_json,
    rating_profile_to_json,
)
from .feedback import (
    FeedbackInconsistencyError,
    FeedbackParseError,
    PartialPreference,
    compile_constraints,
    format_statement,
    interpret_rating,
    parse_feedback,
)
from .judgment import (
    Agenda,
    JudgmentProfile,
    check_consistency,
    closest_consistent,
    judgment_profile_from_json,
    majority_judgments,
)
from .ordinal import (
    ORDINAL_RULES,
    Lottery,
    SocialRanking,
    borda,
    instant_runoff,
    ordinal_rule,
    plurality,
    random_dictator,
    ranked_pairs,
    ranked_pairs_locks,
)
from .pipeline import (
    PromptCase,
    SelectionPolicy,
    emit_sft_dataset,
    evaluate_reward,
    inference_time_choice,
    rlchf_from_features,
    rlchf_from_rankings,
    select_response,
    simulate_collective_decision,
)
from .profiles import (
    BallotParseError,
    CycleReport,
    MarginMatrix,
    OrdinalProfile,
    RankingBallot,
    detect_cycles,
    format_profile,
    margin_matrix,
    parse_profile,
    profile_from_rankings,
)
from .simulation import (
    GroundTruthWorld,
    IndividualPreferenceModel,
    PopulationSpec,
    ResponseRecord,
    fit_individual_model,
    predict_rating,
    sample_population,
    true_rating,
)
