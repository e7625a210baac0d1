"""Reward-model pipelines over collective feedback.

Three variants, all ending in a desk-scale reward model or a chosen response:

  "rankings":   jury ballots per prompt, aggregated by an ordinal rule F into
                a collective ranking, turned into per-response target scores,
                and fitted as a linear reward model on response features.
  "features":   a learned individual preference model evaluated at a sampled
                evaluator population, aggregated pointwise by a cardinal W.
  "collective": simulated evaluators vote (through induced rankings) per
                prompt; winners become supervised (prompt, response) pairs or
                an inference-time choice with no learning step at all.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from random import Random

import numpy as np

from .cardinal import Committee, cardinal_rule, greedy_cc, k_borda
from .ordinal import ORDINAL_RULES, ordinal_rule
from .profiles import OrdinalProfile, RankingBallot
from .seeding import derive_seed
from .simulation import (
    ComponentDist,
    EvaluatorFeatures,
    GroundTruthWorld,
    GroupSpec,
    IndividualPreferenceModel,
    PopulationSpec,
    ResponseRecord,
    clamp_rating,
    fit_individual_model,
    predict_rating,
    sample_population,
    true_rating,
)

MULTIWINNER_RULES = ("k_borda", "greedy_cc")


@dataclass(frozen=True)
class PromptCase:
    """One prompt with its candidate responses and, optionally, jury ballots."""

    prompt: str
    responses: tuple[ResponseRecord, ...]
    jury: tuple[RankingBallot, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "responses", tuple(self.responses))
        if self.jury is not None:
            object.__setattr__(self, "jury", tuple(self.jury))
        if len(self.responses) < 2:
            raise ValueError("a prompt case needs at least two responses")
        ids = [y.id for y in self.responses]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate response ids in case {self.prompt!r}")
        dims = {len(y.features) for y in self.responses}
        if len(dims) != 1:
            raise ValueError("responses within a case must share a feature dimension")
        if self.jury is not None:
            # Delegates range/completeness checks to profile validation.
            self.jury_profile()

    def response_ids(self) -> tuple[str, ...]:
        return tuple(y.id for y in self.responses)

    def response(self, rid: str) -> ResponseRecord:
        for y in self.responses:
            if y.id == rid:
                return y
        raise KeyError(f"no response {rid!r} in case {self.prompt!r}")

    def jury_profile(self) -> OrdinalProfile:
        if self.jury is None:
            raise ValueError(f"case {self.prompt!r} has no jury ballots")
        return OrdinalProfile(self.response_ids(), self.jury)


@dataclass(frozen=True)
class FittedRewardModel:
    """Linear reward on response features: clamp(weights . g(y) + intercept)."""

    weights: tuple[float, ...]
    intercept: float
    ridge_lambda: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not all(math.isfinite(w) for w in self.weights) or not math.isfinite(self.intercept):
            raise ValueError("fitted reward model has non-finite parameters")


@dataclass(frozen=True)
class ComposedRewardModel:
    """Reward = W over an individual model's predictions at a fixed evaluator sample."""

    psi: IndividualPreferenceModel
    sample: tuple[EvaluatorFeatures, ...]
    rule_id: str

    def __post_init__(self):
        object.__setattr__(self, "sample", tuple(tuple(f) for f in self.sample))
        if not self.sample:
            raise ValueError("composed reward model needs a non-empty evaluator sample")
        cardinal_rule(self.rule_id)


RewardModel = FittedRewardModel | ComposedRewardModel


@dataclass(frozen=True)
class SelectionPolicy:
    """Response selection: argmax at temperature 0, softmax sampling above."""

    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


def rank_target_scores(ranking: Sequence[str]) -> dict[str, float]:
    """Map collective-rank positions linearly onto [0, 10], winner first."""
    m = len(ranking)
    if m < 2:
        raise ValueError("need at least two ranked responses")
    return {rid: 10.0 * (m - 1 - pos) / (m - 1) for pos, rid in enumerate(ranking)}


def variant1_targets(case: PromptCase, rule_f: str) -> dict[str, float]:
    """Aggregate a case's jury with F and read off per-response target scores."""
    ranking = ordinal_rule(rule_f)(case.jury_profile()).ranking
    return rank_target_scores(ranking)


def _ridge_with_intercept(
    X: np.ndarray, y: np.ndarray, ridge_lambda: float
) -> tuple[np.ndarray, float]:
    # Center so the intercept absorbs the means and stays unpenalized.
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    if ridge_lambda == 0:
        rank = np.linalg.matrix_rank(Xc)
        if rank < X.shape[1]:
            raise ValueError(
                f"design is rank deficient at lambda=0 (rank {rank} < {X.shape[1]}); "
                "add cases or use a positive ridge_lambda"
            )
        w = np.linalg.lstsq(Xc, yc, rcond=None)[0]
    else:
        gram = Xc.T @ Xc + ridge_lambda * np.eye(X.shape[1])
        w = np.linalg.solve(gram, Xc.T @ yc)
    return w, float(y_mean - w @ x_mean)


def rlchf_from_rankings(
    cases: Sequence[PromptCase], rule_f: str, ridge_lambda: float
) -> FittedRewardModel:
    """Variant 1: fit a linear reward model to jury-aggregated target scores."""
    if not cases:
        raise ValueError("need at least one prompt case")
    rows = []
    targets = []
    for case in cases:
        scores = variant1_targets(case, rule_f)
        for y in case.responses:
            rows.append(np.asarray(y.features, dtype=float))
            targets.append(scores[y.id])
    w, b = _ridge_with_intercept(np.vstack(rows), np.asarray(targets), ridge_lambda)
    return FittedRewardModel(tuple(w.tolist()), b, float(ridge_lambda))


def rlchf_from_features(
    psi: IndividualPreferenceModel,
    sample: Sequence[EvaluatorFeatures],
    rule_w: str,
) -> ComposedRewardModel:
    """Variant 2: aggregate the individual model over a fixed evaluator sample."""
    return ComposedRewardModel(psi, tuple(sample), rule_w)


def evaluate_reward(model: RewardModel, prompt: str, y: ResponseRecord) -> float:
    """Numeric reward for one (prompt, response) pair.

    Models here carry no prompt-specific parameters; the prompt argument keeps
    the reward interface honest for callers that iterate over cases.
    """
    del prompt
    if isinstance(model, FittedRewardModel):
        if len(y.features) != len(model.weights):
            raise ValueError(
                f"response {y.id!r} has {len(y.features)} features, model expects {len(model.weights)}"
            )
        return clamp_rating(float(np.dot(model.weights, y.features)) + model.intercept)
    ratings = [predict_rating(model.psi, f, y) for f in model.sample]
    return float(cardinal_rule(model.rule_id)(ratings))


def select_response(
    model: RewardModel, case: PromptCase, policy: SelectionPolicy, seed: int
) -> ResponseRecord:
    """Pick a response by reward: argmax at T=0, softmax sample at T>0."""
    rewards = {y.id: evaluate_reward(model, case.prompt, y) for y in case.responses}
    if policy.temperature == 0:
        best = max(rewards.values())
        winner = min(rid for rid, r in rewards.items() if r == best)
        return case.response(winner)
    ids = sorted(rewards)
    top = max(rewards.values())
    expo = [math.exp((rewards[rid] - top) / policy.temperature) for rid in ids]
    total = sum(expo)
    ticket = Random(seed).random() * total
    cumulative = 0.0
    for rid, mass in zip(ids, expo):
        cumulative += mass
        if ticket < cumulative:
            return case.response(rid)
    return case.response(ids[-1])


def induced_ranking(
    psi: IndividualPreferenceModel, f: EvaluatorFeatures, responses: Sequence[ResponseRecord]
) -> tuple[str, ...]:
    """One evaluator's strict ranking of the responses, ties broken by id."""
    ratings = {y.id: predict_rating(psi, f, y) for y in responses}
    return tuple(sorted(ratings, key=lambda rid: (-ratings[rid], rid)))


def simulate_collective_decision(
    case: PromptCase,
    psi: IndividualPreferenceModel,
    sample: Sequence[EvaluatorFeatures],
    rule: str,
    k: int | None = None,
) -> ResponseRecord | Committee:
    """Let simulated evaluators vote over the case's responses.

    Each sampled evaluator contributes the ranking induced by their predicted
    ratings; `rule` is an ordinal rule id for a single winner, or one of
    k_borda/greedy_cc (with k) for a committee.
    """
    if not sample:
        raise ValueError("need a non-empty evaluator sample")
    ballots = tuple(RankingBallot(induced_ranking(psi, f, case.responses)) for f in sample)
    profile = OrdinalProfile(case.response_ids(), ballots)
    if rule in MULTIWINNER_RULES:
        if k is None:
            raise ValueError(f"rule {rule!r} needs a committee size k")
        chooser = k_borda if rule == "k_borda" else greedy_cc
        return chooser(profile, k)
    winner = ordinal_rule(rule)(profile).winner
    return case.response(winner)


def emit_sft_dataset(
    cases: Sequence[PromptCase],
    psi: IndividualPreferenceModel,
    sample: Sequence[EvaluatorFeatures],
    rule: str,
) -> tuple[tuple[str, str], ...]:
    """One (prompt, winning response id) pair per case, in case order.

    Only single-winner rules fit the dataset schema; committee selection has
    no single `chosen` id to record.
    """
    if rule in MULTIWINNER_RULES:
        raise ValueError(
            f"rule {rule!r} returns a committee; the supervised dataset format "
            "records exactly one chosen response per prompt"
        )
    pairs = []
    for case in cases:
        winner = simulate_collective_decision(case, psi, sample, rule)
        pairs.append((case.prompt, winner.id))
    return tuple(pairs)


def sft_jsonl_lines(pairs: Sequence[tuple[str, str]]) -> tuple[str, ...]:
    """Serialize (prompt, chosen id) pairs as one JSON record per line."""
    return tuple(
        json.dumps({"prompt": prompt, "chosen": chosen}, sort_keys=True)
        for prompt, chosen in pairs
    )


CandidateGenerator = Callable[[str, int], Sequence[ResponseRecord]]


def inference_time_choice(
    prompt: str,
    generator: CandidateGenerator,
    spec: PopulationSpec,
    n_evaluators: int,
    psi: IndividualPreferenceModel,
    rule: str,
    seed: int,
    k: int | None = None,
) -> ResponseRecord | Committee:
    """Choose among freshly generated candidates with no learning step.

    The generator stands in for a pretrained LLM: it maps (prompt, seed) to
    candidate responses.  Evaluator features and candidates get separate
    derived seeds so neither draw disturbs the other.
    """
    if n_evaluators < 1:
        raise ValueError("need at least one simulated evaluator")
    candidates = tuple(generator(prompt, derive_seed(seed, "candidates")))
    if len(candidates) < 2:
        raise ValueError(f"candidate generator produced {len(candidates)} responses, need >= 2")
    sample = sample_population(spec, n_evaluators, derive_seed(seed, "population"))
    case = PromptCase(prompt, candidates)
    return simulate_collective_decision(case, psi, sample, rule, k)


# ---------------------------------------------------------------------------
# Dataset and config plumbing shared with the command line.


@dataclass(frozen=True)
class SimulationDataset:
    """Prompt cases plus the synthetic population and world that rate them."""

    cases: tuple[PromptCase, ...]
    population: PopulationSpec
    world: GroundTruthWorld

    def __post_init__(self):
        if not self.cases:
            raise ValueError("a dataset needs at least one case")


def _component_from_json(data: dict) -> ComponentDist:
    return ComponentDist(data["kind"], float(data["a"]), float(data["b"]))


def _population_from_json(data: dict) -> PopulationSpec:
    groups = tuple(
        GroupSpec(
            float(g["weight"]),
            tuple(_component_from_json(c) for c in g["components"]),
        )
        for g in data["groups"]
    )
    return PopulationSpec(int(data["d"]), groups, float(data.get("noise_sigma", 0.0)))


def _case_from_json(data: dict) -> PromptCase:
    responses = tuple(
        ResponseRecord(r["id"], r.get("text", r["id"]), tuple(float(v) for v in r["features"]))
        for r in data["responses"]
    )
    jury = None
    if "jury" in data:
        jury = tuple(
            RankingBallot(tuple(b["ranking"]), int(b.get("weight", 1))) for b in data["jury"]
        )
    return PromptCase(data["prompt"], responses, jury)


def dataset_from_json(text: str) -> SimulationDataset:
    """Load {"cases": [...], "population": {...}, "world": {...}}."""
    data = json.loads(text)
    missing = {"cases", "population", "world"} - set(data)
    if missing:
        raise ValueError(f"dataset is missing key(s) {sorted(missing)}")
    world = data["world"]
    return SimulationDataset(
        tuple(_case_from_json(c) for c in data["cases"]),
        _population_from_json(data["population"]),
        GroundTruthWorld(
            tuple(tuple(float(v) for v in row) for row in world["M_star"]),
            float(world.get("noise_sigma", 0.0)),
        ),
    )


VARIANTS = ("rankings", "features", "collective", "inference")


@dataclass(frozen=True)
class PipelineConfig:
    """A parsed simulate configuration; fields are variant-dependent."""

    variant: str
    rule_f: str | None = None
    rule_w: str | None = None
    rule_c: str | None = None
    k: int | None = None
    n_evaluators: int | None = None
    ridge_lambda: float = 1e-6
    seed: int | None = None
    dataset: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        needs = {
            "rankings": self.rule_f,
            "features": self.rule_w,
            "collective": self.rule_c,
            "inference": self.rule_c,
        }[self.variant]
        if needs is None:
            flag = {"rankings": "F", "features": "W"}.get(self.variant, "C")
            raise ValueError(f"variant {self.variant!r} needs rule {flag}")
        if self.variant in ("features", "collective", "inference") and not self.n_evaluators:
            raise ValueError(f"variant {self.variant!r} needs a population size N")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be non-negative")


def config_from_json(text: str) -> PipelineConfig:
    data = json.loads(text)
    if not isinstance(data, dict) or "variant" not in data:
        raise ValueError('pipeline config must be an object with a "variant"')
    return PipelineConfig(
        variant=data["variant"],
        rule_f=data.get("F"),
        rule_w=data.get("W"),
        rule_c=data.get("C"),
        k=data.get("k"),
        n_evaluators=data.get("N"),
        ridge_lambda=float(data.get("ridge_lambda", 1e-6)),
        seed=data.get("seed"),
        dataset=data.get("dataset"),
    )


def _train_psi(
    dataset: SimulationDataset,
    sample: Sequence[EvaluatorFeatures],
    ridge_lambda: float,
    seed: int,
) -> IndividualPreferenceModel:
    # Ground-truth ratings for every (evaluator, case, response) triple; each
    # case gets its own noise stream so case order never matters.
    samples = []
    for ci, case in enumerate(dataset.cases):
        case_seed = derive_seed(seed, "case-ratings", ci)
        for ei, f in enumerate(sample):
            for y in case.responses:
                samples.append((f, y, true_rating(dataset.world, f, y, case_seed, ei)))
    return fit_individual_model(samples, ridge_lambda)


def run_pipeline(config: PipelineConfig, dataset: SimulationDataset, seed: int):
    """Execute one variant; returns (report payload, SFT lines or None).

    The config's own seed, when present, takes precedence over the caller's.
    """
    master = config.seed if config.seed is not None else seed
    payload: dict = {"variant": config.variant, "seed": master}
    sft_lines = None
    if config.variant == "rankings":
        model = rlchf_from_rankings(dataset.cases, config.rule_f, config.ridge_lambda)
        payload["rule_F"] = config.rule_f
        payload["model"] = {"weights": list(model.weights), "intercept": model.intercept}
        payload["cases"] = [
            {
                "prompt": case.prompt,
                "targets": variant1_targets(case, config.rule_f),
                "rewards": {
                    y.id: evaluate_reward(model, case.prompt, y) for y in case.responses
                },
                "chosen": select_response(model, case, SelectionPolicy(0.0), master).id,
            }
            for case in dataset.cases
        ]
        return payload, sft_lines

    sample = sample_population(
        dataset.population, config.n_evaluators, derive_seed(master, "population")
    )
    psi = _train_psi(dataset, sample, config.ridge_lambda, master)
    payload["n_evaluators"] = config.n_evaluators
    if config.variant == "features":
        model = rlchf_from_features(psi, sample, config.rule_w)
        payload["rule_W"] = config.rule_w
        payload["cases"] = [
            {
                "prompt": case.prompt,
                "rewards": {
                    y.id: evaluate_reward(model, case.prompt, y) for y in case.responses
                },
                "chosen": select_response(model, case, SelectionPolicy(0.0), master).id,
            }
            for case in dataset.cases
        ]
    elif config.variant == "collective":
        payload["rule_C"] = config.rule_c
        if config.rule_c in MULTIWINNER_RULES:
            payload["cases"] = [
                {
                    "prompt": case.prompt,
                    "committee": list(
                        simulate_collective_decision(
                            case, psi, sample, config.rule_c, config.k
                        ).winners
                    ),
                }
                for case in dataset.cases
            ]
        else:
            pairs = emit_sft_dataset(dataset.cases, psi, sample, config.rule_c)
            payload["cases"] = [
                {"prompt": prompt, "chosen": chosen} for prompt, chosen in pairs
            ]
            sft_lines = sft_jsonl_lines(pairs)
    else:
        payload["rule_C"] = config.rule_c
        payload["cases"] = []
        for ci, case in enumerate(dataset.cases):
            generator = _fixed_candidates(case)
            chosen = inference_time_choice(
                case.prompt,
                generator,
                dataset.population,
                config.n_evaluators,
                psi,
                config.rule_c,
                derive_seed(master, "inference-case", ci),
                config.k,
            )
            entry = {"prompt": case.prompt}
            if isinstance(chosen, Committee):
                entry["committee"] = list(chosen.winners)
            else:
                entry["chosen"] = chosen.id
            payload["cases"].append(entry)
    return payload, sft_lines


def _fixed_candidates(case: PromptCase) -> CandidateGenerator:
    # The CLI has no live LLM; the dataset's stored responses stand in for
    # fresh generations.
    def generate(prompt: str, seed: int) -> tuple[ResponseRecord, ...]:
        del prompt, seed
        return case.responses

    return generate
