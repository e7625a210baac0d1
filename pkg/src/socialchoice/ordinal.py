"""Ordinal social welfare functions: full social rankings from ranking profiles."""

from __future__ import annotations

import random
from collections.abc import Callable
from dataclasses import dataclass, field

from .profiles import OrdinalProfile, margin_matrix

LOTTERY_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SocialRanking:
    """A complete collective ranking.

    `ranking` is a permutation of the profile's alternatives, winner first.
    `scores` carries rule-specific per-alternative detail when the rule has a
    natural score.  `tie_groups` partitions the ranking into maximal blocks
    whose internal order came from the lexicographic tie-break rather than
    from the rule itself; singleton blocks mean no tie was broken.
    """

    ranking: tuple[str, ...]
    tie_groups: tuple[tuple[str, ...], ...]
    scores: dict[str, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        object.__setattr__(self, "tie_groups", tuple(tuple(g) for g in self.tie_groups))
        flattened = tuple(a for group in self.tie_groups for a in group)
        if flattened != self.ranking:
            raise ValueError("tie_groups must partition the ranking in order")

    @property
    def winner(self) -> str:
        return self.ranking[0]


@dataclass(frozen=True)
class Lottery:
    """A probability distribution over alternatives."""

    probabilities: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "probabilities", dict(self.probabilities))
        if any(p < 0 for p in self.probabilities.values()):
            raise ValueError("lottery probabilities must be non-negative")
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > LOTTERY_SUM_TOL:
            raise ValueError(f"lottery probabilities sum to {total}, expected 1")

    def probability(self, alt: str) -> float:
        return self.probabilities.get(alt, 0.0)


def _groups_by_score(ordered: list[str], scores: dict[str, float]) -> tuple[tuple[str, ...], ...]:
    groups: list[list[str]] = []
    for alt in ordered:
        if groups and scores[groups[-1][-1]] == scores[alt]:
            groups[-1].append(alt)
        else:
            groups.append([alt])
    return tuple(tuple(g) for g in groups)


def _score_ranking(scores: dict[str, float]) -> SocialRanking:
    # Descending score, lexicographic id within equal scores.
    ordered = sorted(scores, key=lambda a: (-scores[a], a))
    return SocialRanking(tuple(ordered), _groups_by_score(ordered, scores), scores)


def first_place_counts(profile: OrdinalProfile, active: set[str] | None = None) -> dict[str, int]:
    """Weighted count of ballots whose top-ranked active alternative is each id."""
    if active is None:
        active = set(profile.alternatives)
    counts = {a: 0 for a in profile.alternatives if a in active}
    for ballot in profile.ballots:
        for alt in ballot.ranking:
            if alt in active:
                counts[alt] += ballot.weight
                break
    return counts


def plurality(profile: OrdinalProfile) -> SocialRanking:
    """Rank alternatives by how often they appear at the very top of a ballot."""
    counts = first_place_counts(profile)
    return _score_ranking({a: float(c) for a, c in counts.items()})


def borda(profile: OrdinalProfile) -> SocialRanking:
    """Rank by Borda score: m-1 points for a first place down to 0 for a last place."""
    m = profile.num_alternatives
    scores = {a: 0.0 for a in profile.alternatives}
    for ballot in profile.ballots:
        for pos, alt in enumerate(ballot.ranking):
            scores[alt] += ballot.weight * (m - 1 - pos)
    return _score_ranking(scores)


def instant_runoff(profile: OrdinalProfile) -> SocialRanking:
    """Repeatedly eliminate the alternative with fewest current first places.

    The lexicographically largest id is eliminated when several share the
    fewest count.  The social ranking is the reverse elimination order; the
    recorded score of each alternative is its first-place count in the round
    it went out.
    """
    active = set(profile.alternatives)
    eliminated: list[str] = []
    argmin_sets: list[set[str]] = []
    scores: dict[str, float] = {}
    while active:
        counts = first_place_counts(profile, active)
        fewest = min(counts.values())
        losers = {a for a, c in counts.items() if c == fewest}
        out = max(losers)
        eliminated.append(out)
        argmin_sets.append(losers)
        scores[out] = float(counts[out])
        active.remove(out)
    ranking = tuple(reversed(eliminated))
    # Adjacent alternatives were tie-broken when the higher-ranked one sat in
    # the same fewest-firsts set at the round the lower one went out.
    groups: list[list[str]] = [[eliminated[0]]]
    for rnd in range(1, len(eliminated)):
        if eliminated[rnd] in argmin_sets[rnd - 1]:
            groups[-1].append(eliminated[rnd])
        else:
            groups.append([eliminated[rnd]])
    tie_groups = tuple(tuple(reversed(g)) for g in reversed(groups))
    return SocialRanking(ranking, tie_groups, scores)


def _reaches(edges: set[tuple[str, str]], start: str, goal: str) -> bool:
    stack = [start]
    seen = {start}
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        for a, b in edges:
            if a == node and b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def ranked_pairs_locks(profile: OrdinalProfile) -> tuple[tuple[str, str, int], ...]:
    """The (winner, loser, margin) pairs Tideman's method locks, in lock order.

    Strict-majority pairs are considered from largest margin down, margin ties
    in lexicographic (winner, loser) order; a pair is skipped when it would
    close a cycle with the pairs already locked.
    """
    matrix = margin_matrix(profile)
    pairs = sorted(matrix.positive_pairs(), key=lambda p: (-p[2], p[0], p[1]))
    locked: list[tuple[str, str, int]] = []
    edges: set[tuple[str, str]] = set()
    for winner, loser, margin in pairs:
        if not _reaches(edges, loser, winner):
            locked.append((winner, loser, margin))
            edges.add((winner, loser))
    assert all(not _reaches(edges - {(a, b)}, b, a) for a, b in edges), "locked digraph has a cycle"
    return tuple(locked)


def ranked_pairs(profile: OrdinalProfile) -> SocialRanking:
    """Tideman's method: lock majority pairs from largest margin down, skip cycles.

    The output is the topological order of the locked digraph, choosing the
    lexicographically smallest available alternative at each step; blocks of
    mutually unordered alternatives are reported as tie groups.
    """
    alts = profile.alternatives
    locked = {(a, b) for a, b, _ in ranked_pairs_locks(profile)}

    indegree = {a: 0 for a in alts}
    for _, b in locked:
        indegree[b] += 1
    ranking: list[str] = []
    remaining = set(alts)
    while remaining:
        available = sorted(a for a in remaining if indegree[a] == 0)
        nxt = available[0]
        ranking.append(nxt)
        remaining.remove(nxt)
        for a, b in locked:
            if a == nxt:
                indegree[b] -= 1

    # Two adjacent alternatives are tied when the locked digraph never orders
    # them, directly or transitively.
    groups: list[list[str]] = [[ranking[0]]]
    for alt in ranking[1:]:
        prev = groups[-1][-1]
        if _reaches(locked, prev, alt):
            groups.append([alt])
        else:
            groups[-1].append(alt)
    return SocialRanking(tuple(ranking), tuple(tuple(g) for g in groups))


def random_dictator(profile: OrdinalProfile, seed: int) -> tuple[Lottery, str]:
    """First-place-share lottery plus one winner sampled with the seeded generator.

    The lottery itself does not depend on the seed; only the sampled winner does.
    """
    n = profile.num_voters
    counts = first_place_counts(profile)
    lottery = Lottery({a: c / n for a, c in counts.items()})
    rng = random.Random(seed)
    ticket = rng.random() * n
    cumulative = 0.0
    winner = profile.alternatives[0]
    for alt in profile.alternatives:
        cumulative += counts[alt]
        if ticket < cumulative:
            winner = alt
            break
    return lottery, winner


ORDINAL_RULES: dict[str, Callable[[OrdinalProfile], SocialRanking]] = {
    "plurality": plurality,
    "borda": borda,
    "instant_runoff": instant_runoff,
    "ranked_pairs": ranked_pairs,
}


def ordinal_rule(rule_id: str):
    """Look up a deterministic ordinal rule by its id."""
    try:
        return ORDINAL_RULES[rule_id]
    except KeyError:
        known = ", ".join(sorted(ORDINAL_RULES))
        raise ValueError(f"unknown ordinal rule {rule_id!r}; known rules: {known}") from None
