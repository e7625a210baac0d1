"""Property auditors: clone independence, manipulation search, anonymity.

Each auditor either certifies a property on the given instance or returns a
concrete witness that can be re-run to reproduce the failure.  Searches are
exhaustive within small caps, so "none" is a proof over the searched domain,
not a sampling statement.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from itertools import permutations
from random import Random

from .cardinal import RatingProfile, cardinal_rule
from .ordinal import ordinal_rule
from .profiles import OrdinalProfile, profile_from_rankings

MAX_MANIPULATION_ALTERNATIVES = 6
MAX_MANIPULATION_RATERS = 7
DEFAULT_RATING_GRID = tuple(float(v) for v in range(11))
ANONYMITY_PERMUTATIONS = 20
# Exact-arithmetic distance ties must not become witnesses through float
# rounding; anything below this is treated as "no closer".
IMPROVEMENT_TOL = 1e-9


@dataclass(frozen=True)
class CloneSpec:
    """How to clone one alternative into near-identical copies.

    Clones replace the target as a contiguous block at its former position in
    every ballot.  `orders` optionally fixes the block's internal order per
    unit voter (index into the expanded voter list); unlisted voters fall back
    to the lexicographic order.  One copy makes cloning a no-op.
    """

    target: str
    copies: int = 2
    orders: Mapping[int, tuple[str, ...]] | None = None

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError("copies must be at least 1")
        if self.orders is not None:
            fixed = {int(i): tuple(order) for i, order in self.orders.items()}
            object.__setattr__(self, "orders", fixed)
            if any(i < 0 for i in fixed):
                raise ValueError("ballot indices must be non-negative")

    def clone_ids(self) -> tuple[str, ...]:
        if self.copies == 1:
            return (self.target,)
        return tuple(f"{self.target}{i}" for i in range(1, self.copies + 1))


def cloned_profile(profile: OrdinalProfile, spec: CloneSpec) -> OrdinalProfile:
    """Expand the profile per the clone spec, one unit ballot per voter."""
    if spec.target not in profile.alternatives:
        raise ValueError(f"clone target {spec.target!r} is not an alternative")
    clones = spec.clone_ids()
    taken = set(profile.alternatives) - {spec.target}
    collisions = sorted(taken & set(clones))
    if collisions:
        raise ValueError(f"clone id(s) {collisions} collide with existing alternatives")
    default_order = tuple(sorted(clones))
    units = profile.unit_rankings()
    if spec.orders is not None:
        for index, order in spec.orders.items():
            if index >= len(units):
                raise ValueError(f"ballot index {index} out of range for {len(units)} voters")
            if sorted(order) != sorted(clones):
                raise ValueError(f"order for ballot {index} is not a permutation of {clones}")
    alternatives = []
    for alt in profile.alternatives:
        alternatives.extend(default_order if alt == spec.target else [alt])
    rankings = []
    for index, ranking in enumerate(units):
        block = default_order
        if spec.orders is not None and index in spec.orders:
            block = spec.orders[index]
        expanded: list[str] = []
        for alt in ranking:
            expanded.extend(block if alt == spec.target else [alt])
        rankings.append(tuple(expanded))
    return profile_from_rankings(rankings, alternatives)


@dataclass(frozen=True)
class CloneTestResult:
    verdict: str  # "independent" or "violated"
    base_winner: str
    cloned_winner: str
    clones: tuple[str, ...]

    @property
    def independent(self) -> bool:
        return self.verdict == "independent"


def clone_test(rule_id: str, profile: OrdinalProfile, spec: CloneSpec) -> CloneTestResult:
    """Does cloning the target change the outcome class of the winner?

    Outcomes are compared with every clone identified back with the target, so
    "some clone wins" before and after counts as independent; any switch
    between a non-clone and the clone set (or between two non-clones) is a
    violation.
    """
    rule = ordinal_rule(rule_id)
    base_winner = rule(profile).winner
    expanded = cloned_profile(profile, spec)
    cloned_winner = rule(expanded).winner
    clones = spec.clone_ids()
    base_class = spec.target if base_winner == spec.target else base_winner
    new_class = spec.target if cloned_winner in clones else cloned_winner
    verdict = "independent" if base_class == new_class else "violated"
    return CloneTestResult(verdict, base_winner, cloned_winner, clones)


@dataclass(frozen=True)
class ManipulationWitness:
    """A misreport that strictly improves the outcome for the misreporter.

    Ordinal: outcomes are winners and `truthful`/`misreport` are rankings.
    Cardinal: outcomes are aggregates and `truthful`/`misreport` are ratings.
    """

    voter: int
    truthful: tuple[str, ...] | float
    misreport: tuple[str, ...] | float
    honest_outcome: str | float
    manipulated_outcome: str | float


def _replace_unit_ballot(
    profile: OrdinalProfile, voter: int, ranking: tuple[str, ...]
) -> OrdinalProfile:
    units = list(profile.unit_rankings())
    units[voter] = ranking
    return profile_from_rankings(units, profile.alternatives)


def manipulation_search_ordinal(
    rule_id: str, profile: OrdinalProfile, voter: int
) -> ManipulationWitness | None:
    """Brute-force every misreport for one voter; first improving one wins.

    Misreports are tried in lexicographic order over all permutations of the
    alternatives; improvement means the new winner sits strictly higher in
    the voter's truthful ranking.
    """
    m = len(profile.alternatives)
    if m > MAX_MANIPULATION_ALTERNATIVES:
        raise ValueError(
            f"{m} alternatives exceed the exhaustive-search cap "
            f"({MAX_MANIPULATION_ALTERNATIVES}); the misreport space is m!"
        )
    units = profile.unit_rankings()
    if not 0 <= voter < len(units):
        raise ValueError(f"voter index {voter} out of range for {len(units)} voters")
    rule = ordinal_rule(rule_id)
    truthful = units[voter]
    honest_winner = rule(profile).winner
    honest_rank = truthful.index(honest_winner)
    if honest_rank == 0:
        return None
    for misreport in permutations(sorted(profile.alternatives)):
        if misreport == truthful:
            continue
        new_winner = rule(_replace_unit_ballot(profile, voter, misreport)).winner
        if truthful.index(new_winner) < honest_rank:
            return ManipulationWitness(voter, truthful, misreport, honest_winner, new_winner)
    return None


def manipulation_search_cardinal(
    rule_id: str,
    ratings: Sequence[float],
    voter: int,
    grid: Sequence[float] = DEFAULT_RATING_GRID,
) -> ManipulationWitness | None:
    """Grid-search misreports that pull the aggregate toward the voter's truth.

    Success is the strict kind: the aggregate after the misreport must land
    closer to the voter's truthful rating than the honest aggregate does.
    """
    values = [float(r) for r in ratings]
    if len(values) > MAX_MANIPULATION_RATERS:
        raise ValueError(
            f"{len(values)} raters exceed the exhaustive-search cap ({MAX_MANIPULATION_RATERS})"
        )
    if not 0 <= voter < len(values):
        raise ValueError(f"voter index {voter} out of range for {len(values)} raters")
    rule = cardinal_rule(rule_id)
    truth = values[voter]
    honest_gap = abs(rule(values) - truth)
    for report in grid:
        if report == truth:
            continue
        shifted = list(values)
        shifted[voter] = float(report)
        outcome = rule(shifted)
        if abs(outcome - truth) < honest_gap - IMPROVEMENT_TOL:
            return ManipulationWitness(voter, truth, float(report), rule(values), outcome)
    return None


def reverify_ordinal_witness(
    rule_id: str, profile: OrdinalProfile, witness: ManipulationWitness
) -> bool:
    """Re-run the election with the misreport and confirm the claimed flip."""
    rule = ordinal_rule(rule_id)
    if rule(profile).winner != witness.honest_outcome:
        return False
    shifted = _replace_unit_ballot(profile, witness.voter, tuple(witness.misreport))
    if rule(shifted).winner != witness.manipulated_outcome:
        return False
    truthful = tuple(witness.truthful)
    return truthful.index(witness.manipulated_outcome) < truthful.index(witness.honest_outcome)


def reverify_cardinal_witness(
    rule_id: str, ratings: Sequence[float], witness: ManipulationWitness
) -> bool:
    rule = cardinal_rule(rule_id)
    values = [float(r) for r in ratings]
    if rule(values) != witness.honest_outcome:
        return False
    shifted = list(values)
    shifted[witness.voter] = float(witness.misreport)
    if rule(shifted) != witness.manipulated_outcome:
        return False
    truth = values[witness.voter]
    honest_gap = abs(witness.honest_outcome - truth)
    return abs(witness.manipulated_outcome - truth) < honest_gap - IMPROVEMENT_TOL


def anonymity_check(rule, profile, seed: int) -> bool:
    """Is the outcome invariant under shuffling who cast which ballot?

    `rule` is an ordinal or cardinal rule id, or any callable on the profile
    type; `profile` is an OrdinalProfile or a RatingProfile.  Twenty seeded
    permutations are tried; True means all outcomes matched the original.
    """
    rng = Random(seed)
    if isinstance(profile, OrdinalProfile):
        fn = ordinal_rule(rule) if isinstance(rule, str) else rule
        units = profile.unit_rankings()
        baseline = fn(profile)
        for _ in range(ANONYMITY_PERMUTATIONS):
            order = rng.sample(range(len(units)), len(units))
            shuffled = profile_from_rankings(
                [units[i] for i in order], profile.alternatives
            )
            if fn(shuffled) != baseline:
                return False
        return True
    if isinstance(profile, RatingProfile):
        if isinstance(rule, str):
            agg = cardinal_rule(rule)

            def fn(rp):
                return {alt: agg(rp.column(alt)) for alt in rp.alternatives}
        else:
            fn = rule
        names = list(profile.evaluators)
        baseline = fn(profile)
        for _ in range(ANONYMITY_PERMUTATIONS):
            order = rng.sample(range(len(names)), len(names))
            reassigned = RatingProfile(
                profile.alternatives,
                profile.evaluators,
                {names[i]: dict(profile.ratings[names[j]]) for i, j in enumerate(order)},
            )
            if fn(reassigned) != baseline:
                return False
        return True
    raise TypeError(f"cannot audit anonymity on {type(profile).__name__}")


def random_strict_profile(rng: Random, m: int, n: int) -> OrdinalProfile:
    """n independent uniform strict rankings over the first m letters."""
    alternatives = tuple(chr(ord("A") + i) for i in range(m))
    rankings = [tuple(rng.sample(alternatives, m)) for _ in range(n)]
    return profile_from_rankings(rankings, alternatives)


def random_clone_spec(rng: Random, profile: OrdinalProfile, copies: int = 2) -> CloneSpec:
    """Clone a random alternative with independently shuffled per-voter orders."""
    target = rng.choice(profile.alternatives)
    spec = CloneSpec(target, copies)
    clones = spec.clone_ids()
    orders = {
        i: tuple(rng.sample(clones, len(clones))) for i in range(profile.num_voters)
    }
    return CloneSpec(target, copies, orders)
