"""Cardinal rating aggregation and multi-winner committee selection."""

from __future__ import annotations

import json
import statistics
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from .profiles import OrdinalProfile, validate_alternative_id

RATING_MIN = 0.0
RATING_MAX = 10.0


@dataclass(frozen=True)
class RatingProfile:
    """Complete cardinal ratings: every evaluator rates every alternative on [0, 10]."""

    alternatives: tuple[str, ...]
    evaluators: tuple[str, ...]
    ratings: dict[str, dict[str, float]]

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "evaluators", tuple(self.evaluators))
        object.__setattr__(
            self, "ratings", {e: dict(row) for e, row in self.ratings.items()}
        )
        if not self.alternatives:
            raise ValueError("a rating profile needs at least one alternative")
        if not self.evaluators:
            raise ValueError("a rating profile needs at least one evaluator")
        if len(set(self.alternatives)) != len(self.alternatives):
            raise ValueError("duplicate alternative ids")
        if len(set(self.evaluators)) != len(self.evaluators):
            raise ValueError("duplicate evaluator ids")
        for alt in self.alternatives:
            validate_alternative_id(alt)
        if set(self.ratings) != set(self.evaluators):
            raise ValueError("ratings must cover exactly the declared evaluators")
        for evaluator, row in self.ratings.items():
            if set(row) != set(self.alternatives):
                raise ValueError(
                    f"evaluator {evaluator!r} must rate exactly the declared alternatives"
                )
            for alt, value in row.items():
                value = float(value)
                if not RATING_MIN <= value <= RATING_MAX:
                    raise ValueError(
                        f"rating {value} for ({evaluator!r}, {alt!r}) outside [0, 10]"
                    )
                row[alt] = value

    def column(self, alt: str) -> list[float]:
        """All evaluators' ratings of one alternative, in evaluator order."""
        return [self.ratings[e][alt] for e in self.evaluators]


def rating_profile_from_json(text: str) -> RatingProfile:
    """Load the {"alternatives": [...], "ratings": {evaluator: {alt: num}}} schema."""
    data = json.loads(text)
    if not isinstance(data, dict) or set(data) != {"alternatives", "ratings"}:
        raise ValueError('expected an object with keys "alternatives" and "ratings"')
    evaluators = tuple(data["ratings"])
    return RatingProfile(tuple(data["alternatives"]), evaluators, data["ratings"])


def rating_profile_to_json(rp: RatingProfile) -> str:
    return json.dumps(
        {"alternatives": list(rp.alternatives), "ratings": rp.ratings},
        indent=2,
        sort_keys=True,
    )


def _mean(values: list[float]) -> float:
    return statistics.fmean(values)


def _median(values: list[float]) -> float:
    return float(statistics.median(values))


CARDINAL_RULES: dict[str, Callable[[list[float]], float]] = {
    "mean": _mean,
    "median": _median,
}


def cardinal_rule(rule_id: str) -> Callable[[list[float]], float]:
    try:
        return CARDINAL_RULES[rule_id]
    except KeyError:
        known = ", ".join(sorted(CARDINAL_RULES))
        raise ValueError(f"unknown cardinal rule {rule_id!r}; known rules: {known}") from None


def aggregate_ratings(rp: RatingProfile, rule_id: str) -> dict[str, float]:
    """Aggregate each alternative's ratings into one social rating."""
    rule = cardinal_rule(rule_id)
    return {alt: rule(rp.column(alt)) for alt in rp.alternatives}


@dataclass(frozen=True)
class Committee:
    """k distinct alternatives, in the order the rule selected them."""

    winners: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "winners", tuple(self.winners))
        if not self.winners:
            raise ValueError("a committee needs at least one winner")
        if len(set(self.winners)) != len(self.winners):
            raise ValueError("committee winners must be distinct")

    @property
    def size(self) -> int:
        return len(self.winners)


def _check_committee_size(profile: OrdinalProfile, k: int):
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValueError(f"committee size must be a positive integer, got {k!r}")
    if k > profile.num_alternatives:
        raise ValueError(
            f"committee size {k} exceeds the {profile.num_alternatives} alternatives"
        )


def borda_scores(profile: OrdinalProfile) -> dict[str, float]:
    m = profile.num_alternatives
    scores = {a: 0.0 for a in profile.alternatives}
    for ballot in profile.ballots:
        for pos, alt in enumerate(ballot.ranking):
            scores[alt] += ballot.weight * (m - 1 - pos)
    return scores


def k_borda(profile: OrdinalProfile, k: int) -> Committee:
    """The k alternatives with the highest Borda scores, best first."""
    _check_committee_size(profile, k)
    scores = borda_scores(profile)
    ordered = sorted(scores, key=lambda a: (-scores[a], a))
    return Committee(tuple(ordered[:k]))


def cc_score(profile: OrdinalProfile, committee: tuple[str, ...]) -> float:
    """Chamberlin-Courant objective: each voter counts their best committee member."""
    m = profile.num_alternatives
    total = 0.0
    for ballot in profile.ballots:
        pos = ballot.positions()
        best = max(m - 1 - pos[alt] for alt in committee)
        total += ballot.weight * best
    return total


def greedy_cc(profile: OrdinalProfile, k: int) -> Committee:
    """Greedy Chamberlin-Courant with Borda satisfaction.

    Each round adds the alternative with the largest marginal gain in the sum
    over voters of their best (highest Borda satisfaction) committee member,
    breaking gain ties lexicographically.
    """
    _check_committee_size(profile, k)
    m = profile.num_alternatives
    satisfaction = [
        {alt: m - 1 - pos for pos, alt in enumerate(b.ranking)} for b in profile.ballots
    ]
    weights = [b.weight for b in profile.ballots]
    # Satisfactions are non-negative, so a zero baseline makes round one's
    # marginal gain equal the plain Borda satisfaction sum.
    current = [0.0] * len(profile.ballots)
    chosen: list[str] = []
    for _ in range(k):
        best_alt = None
        best_gain = -1.0
        for alt in profile.alternatives:
            if alt in chosen:
                continue
            gain = sum(
                w * max(sat[alt] - cur, 0.0)
                for sat, cur, w in zip(satisfaction, current, weights)
            )
            if gain > best_gain or (gain == best_gain and alt < best_alt):
                best_alt = alt
                best_gain = gain
        chosen.append(best_alt)
        current = [max(cur, sat[best_alt]) for sat, cur in zip(satisfaction, current)]
    return Committee(tuple(chosen))


RESPONSE_HEADER = "The following are {n} typical answers to your question:"


def compose_multiwinner_response(committee: Committee, response_texts: Mapping[str, str]) -> str:
    """Merge a committee's answers into one bullet-point response."""
    missing = [w for w in committee.winners if w not in response_texts]
    if missing:
        raise KeyError(f"no response text for committee winner(s) {missing}")
    lines = [RESPONSE_HEADER.format(n=committee.size)]
    for winner in committee.winners:
        lines.append(f"- {response_texts[winner]}")
    return "\n".join(lines)
