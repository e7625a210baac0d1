"""Strict-ranking ballot profiles, pairwise majority margins, and cycle detection."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

_FORBIDDEN_ID_CHARS = (">", ",")

# Full cycle enumeration is factorial in the number of alternatives; above
# this we report a single witness cycle instead.
MAX_ENUMERATED_ALTERNATIVES = 8


class BallotParseError(ValueError):
    """A ballot file (or profile construction) violated the expected format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def validate_alternative_id(alt_id: str) -> str:
    """Check an alternative id token: non-empty, no whitespace, no '>' or ','."""
    if not isinstance(alt_id, str) or not alt_id:
        raise BallotParseError(f"alternative id must be a non-empty string, got {alt_id!r}")
    if any(ch.isspace() for ch in alt_id):
        raise BallotParseError(f"alternative id {alt_id!r} contains whitespace")
    for ch in _FORBIDDEN_ID_CHARS:
        if ch in alt_id:
            raise BallotParseError(f"alternative id {alt_id!r} contains forbidden character {ch!r}")
    return alt_id


@dataclass(frozen=True)
class RankingBallot:
    """A strict total order over the profile's alternatives, cast by `weight` voters."""

    ranking: tuple[str, ...]
    weight: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        if not isinstance(self.weight, int) or isinstance(self.weight, bool) or self.weight < 1:
            raise BallotParseError(f"ballot weight must be a positive integer, got {self.weight!r}")
        if len(set(self.ranking)) != len(self.ranking):
            raise BallotParseError(f"duplicate alternative in ranking {self.ranking}")

    def positions(self) -> dict[str, int]:
        """Map alternative id to its 0-indexed position from the top."""
        return {alt: i for i, alt in enumerate(self.ranking)}


@dataclass(frozen=True)
class OrdinalProfile:
    """An immutable election: alternatives plus weighted strict rankings."""

    alternatives: tuple[str, ...]
    ballots: tuple[RankingBallot, ...]

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "ballots", tuple(self.ballots))
        if not self.alternatives:
            raise BallotParseError("a profile needs at least one alternative")
        for alt in self.alternatives:
            validate_alternative_id(alt)
        if len(set(self.alternatives)) != len(self.alternatives):
            raise BallotParseError("duplicate alternative ids in profile")
        if not self.ballots:
            raise BallotParseError("a profile needs at least one ballot")
        alt_set = set(self.alternatives)
        for ballot in self.ballots:
            missing = alt_set - set(ballot.ranking)
            unknown = set(ballot.ranking) - alt_set
            if unknown:
                raise BallotParseError(
                    f"ballot {ballot.ranking} ranks unknown alternative(s) {sorted(unknown)}"
                )
            if missing:
                raise BallotParseError(
                    f"ballot {ballot.ranking} omits alternative(s) {sorted(missing)}; "
                    "rankings must be complete"
                )

    @property
    def num_alternatives(self) -> int:
        return len(self.alternatives)

    @property
    def num_voters(self) -> int:
        return sum(b.weight for b in self.ballots)

    def unit_rankings(self) -> tuple[tuple[str, ...], ...]:
        """Expand weighted ballots into one ranking per voter, in ballot order."""
        out: list[tuple[str, ...]] = []
        for ballot in self.ballots:
            out.extend([ballot.ranking] * ballot.weight)
        return tuple(out)


def profile_from_rankings(
    rankings: Iterable[Sequence[str]], alternatives: Sequence[str] | None = None
) -> OrdinalProfile:
    """Build a unit-weight profile from raw rankings (alternatives default to the first ranking)."""
    rankings = [tuple(r) for r in rankings]
    if alternatives is None:
        if not rankings:
            raise BallotParseError("cannot infer alternatives from an empty ranking list")
        alternatives = rankings[0]
    return OrdinalProfile(tuple(alternatives), tuple(RankingBallot(r) for r in rankings))


def parse_profile(text: str) -> OrdinalProfile:
    """Parse the on-disk ballot format.

    Lines starting with '#' are comments.  The first content line is
    ``alternatives: A, B, C``; each following line is ``COUNT: X > Y > Z``
    with COUNT a positive decimal integer and the ranking a permutation of
    the declared alternatives.  Whitespace around tokens is ignored.
    """
    alternatives: tuple[str, ...] | None = None
    ballots: list[RankingBallot] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if alternatives is None:
            if not line.startswith("alternatives:"):
                raise BallotParseError(
                    "expected header 'alternatives: ...' before any ballot line", lineno
                )
            tokens = [t.strip() for t in line[len("alternatives:"):].split(",")]
            if tokens == [""]:
                raise BallotParseError("empty alternative list", lineno)
            try:
                alts = tuple(validate_alternative_id(t) for t in tokens)
            except BallotParseError as exc:
                raise BallotParseError(str(exc), lineno) from None
            if len(set(alts)) != len(alts):
                raise BallotParseError("duplicate alternative id in header", lineno)
            alternatives = alts
            continue
        count_part, sep, ranking_part = line.partition(":")
        if not sep:
            raise BallotParseError("expected 'COUNT: X > Y > ...'", lineno)
        count_token = count_part.strip()
        if not count_token.isdigit():
            raise BallotParseError(f"ballot count must be a positive integer, got {count_token!r}", lineno)
        count = int(count_token)
        if count < 1:
            raise BallotParseError("ballot count must be positive", lineno)
        ranking = tuple(t.strip() for t in ranking_part.split(">"))
        seen: set[str] = set()
        for alt in ranking:
            if not alt:
                raise BallotParseError("empty alternative token in ranking", lineno)
            if alt not in alternatives:
                raise BallotParseError(f"unknown alternative {alt!r}", lineno)
            if alt in seen:
                raise BallotParseError(f"alternative {alt!r} appears twice in ranking", lineno)
            seen.add(alt)
        missing = set(alternatives) - seen
        if missing:
            raise BallotParseError(
                f"ranking is missing alternative(s) {sorted(missing)}; rankings must be complete",
                lineno,
            )
        ballots.append(RankingBallot(ranking, count))
    if alternatives is None:
        raise BallotParseError("no 'alternatives:' header found")
    if not ballots:
        raise BallotParseError("no ballot lines found")
    return OrdinalProfile(alternatives, tuple(ballots))


def format_profile(profile: OrdinalProfile) -> str:
    """Render a profile in canonical form: single spaces, ballots in file order."""
    lines = ["alternatives: " + ", ".join(profile.alternatives)]
    for ballot in profile.ballots:
        lines.append(f"{ballot.weight}: " + " > ".join(ballot.ranking))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MarginMatrix:
    """Pairwise net majority margins, indexed by the profile's alternative order.

    ``entries[i][j]`` is (#voters preferring alternatives[i] to alternatives[j])
    minus (#voters preferring alternatives[j] to alternatives[i]).
    """

    alternatives: tuple[str, ...]
    entries: tuple[tuple[int, ...], ...]

    def margin(self, a: str, b: str) -> int:
        i = self.alternatives.index(a)
        j = self.alternatives.index(b)
        return self.entries[i][j]

    def positive_pairs(self) -> list[tuple[str, str, int]]:
        """All strict majority pairs as (winner, loser, margin), margin > 0."""
        out = []
        for i, a in enumerate(self.alternatives):
            for j, b in enumerate(self.alternatives):
                if self.entries[i][j] > 0:
                    out.append((a, b, self.entries[i][j]))
        return out


def margin_matrix(profile: OrdinalProfile) -> MarginMatrix:
    """Tally the pairwise majority margin matrix of a profile."""
    alts = profile.alternatives
    m = len(alts)
    index = {a: i for i, a in enumerate(alts)}
    entries = [[0] * m for _ in range(m)]
    for ballot in profile.ballots:
        pos = ballot.positions()
        for i, a in enumerate(alts):
            for j in range(i + 1, m):
                b = alts[j]
                if pos[a] < pos[b]:
                    entries[i][index[b]] += ballot.weight
                    entries[index[b]][i] -= ballot.weight
                else:
                    entries[i][index[b]] -= ballot.weight
                    entries[index[b]][i] += ballot.weight
    return MarginMatrix(alts, tuple(tuple(row) for row in entries))


@dataclass(frozen=True)
class CycleReport:
    """Majority-cycle structure of a margin matrix."""

    has_condorcet_winner: bool
    condorcet_winner: str | None
    cycles: tuple[tuple[str, ...], ...]


def _majority_adjacency(matrix: MarginMatrix) -> dict[int, list[int]]:
    m = len(matrix.alternatives)
    return {
        i: [j for j in range(m) if matrix.entries[i][j] > 0]
        for i in range(m)
    }


def _enumerate_cycles(adjacency: dict[int, list[int]], stop_after_first: bool) -> list[tuple[int, ...]]:
    # Each elementary cycle is found exactly once, rooted at its smallest node:
    # the DFS only walks through nodes greater than the root.
    cycles: list[tuple[int, ...]] = []
    nodes = sorted(adjacency)

    def extend(root: int, path: list[int], on_path: set[int]) -> bool:
        for nxt in adjacency[path[-1]]:
            if nxt == root and len(path) >= 3:
                cycles.append(tuple(path))
                if stop_after_first:
                    return True
            elif nxt > root and nxt not in on_path:
                on_path.add(nxt)
                path.append(nxt)
                if extend(root, path, on_path):
                    return True
                path.pop()
                on_path.remove(nxt)
        return False

    for root in nodes:
        if extend(root, [root], {root}) and stop_after_first:
            break
    return cycles


def detect_cycles(matrix: MarginMatrix) -> CycleReport:
    """Report the Condorcet winner (if any) and the majority cycles of a margin matrix.

    A cycle is a sequence (a, b, ..., z) with strict majority edges a>b>...>z>a,
    written starting from its lexicographically smallest member.  All elementary
    cycles are enumerated for small alternative sets; above
    MAX_ENUMERATED_ALTERNATIVES a single witness cycle is reported.
    """
    alts = matrix.alternatives
    m = len(alts)
    winner = None
    for i, a in enumerate(alts):
        if all(matrix.entries[i][j] > 0 for j in range(m) if j != i):
            winner = a
            break
    # Search the majority digraph over lexicographic alternative order so the
    # smallest-root canonicalization is by id, not by profile position.
    order = sorted(range(m), key=lambda i: alts[i])
    relabel = {orig: rank for rank, orig in enumerate(order)}
    adjacency = {
        relabel[i]: sorted(relabel[j] for j in range(m) if matrix.entries[i][j] > 0)
        for i in range(m)
    }
    raw = _enumerate_cycles(adjacency, stop_after_first=m > MAX_ENUMERATED_ALTERNATIVES)
    cycles = tuple(
        sorted(
            (tuple(alts[order[i]] for i in cyc) for cyc in raw),
            key=lambda c: (len(c), c),
        )
    )
    return CycleReport(winner is not None, winner, cycles)
