"""Majority judgment aggregation over a propositional agenda with a consistency constraint."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

# A judgment set assigns every agenda atom a truth value.
JudgmentSet = dict[str, bool]

MAX_AGENDA_ATOMS = 20


class ConstraintSyntaxError(ValueError):
    """The constraint formula text is not well-formed."""


# ---------------------------------------------------------------------------
# Constraint formulas.  Grammar (precedence ! > & > | > <->, all binary
# connectives left-associative):
#
#   iff   := or ('<->' or)*
#   or    := and ('|' and)*
#   and   := unary ('&' unary)*
#   unary := '!' unary | atom | '(' iff ')'
#
# An AST node is a nested tuple: ("atom", name), ("not", x), ("and", l, r),
# ("or", l, r), ("iff", l, r).

_Node = tuple


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif text.startswith("<->", i):
            tokens.append("<->")
            i += 3
        elif ch in "!&|()":
            tokens.append(ch)
            i += 1
        elif ch.isalnum() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ConstraintSyntaxError(f"unexpected character {ch!r} in constraint")
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        token = self.peek()
        if token is None:
            raise ConstraintSyntaxError("constraint ended unexpectedly")
        self.pos += 1
        return token

    def parse(self) -> _Node:
        node = self.iff()
        if self.peek() is not None:
            raise ConstraintSyntaxError(f"unexpected token {self.peek()!r}")
        return node

    def iff(self) -> _Node:
        node = self.or_()
        while self.peek() == "<->":
            self.take()
            node = ("iff", node, self.or_())
        return node

    def or_(self) -> _Node:
        node = self.and_()
        while self.peek() == "|":
            self.take()
            node = ("or", node, self.and_())
        return node

    def and_(self) -> _Node:
        node = self.unary()
        while self.peek() == "&":
            self.take()
            node = ("and", node, self.unary())
        return node

    def unary(self) -> _Node:
        token = self.take()
        if token == "!":
            return ("not", self.unary())
        if token == "(":
            node = self.iff()
            if self.take() != ")":
                raise ConstraintSyntaxError("expected ')'")
            return node
        if token in {"&", "|", "<->", ")"}:
            raise ConstraintSyntaxError(f"unexpected token {token!r}")
        return ("atom", token)


def _evaluate(node: _Node, assignment: JudgmentSet) -> bool:
    match node:
        case ("atom", name):
            return assignment[name]
        case ("not", x):
            return not _evaluate(x, assignment)
        case ("and", left, right):
            return _evaluate(left, assignment) and _evaluate(right, assignment)
        case ("or", left, right):
            return _evaluate(left, assignment) or _evaluate(right, assignment)
        case ("iff", left, right):
            return _evaluate(left, assignment) == _evaluate(right, assignment)
    raise AssertionError(f"unreachable node {node!r}")


def _atoms_in(node: _Node) -> set[str]:
    if node[0] == "atom":
        return {node[1]}
    return set().union(*(_atoms_in(child) for child in node[1:]))


@dataclass(frozen=True)
class Agenda:
    """An ordered set of atomic propositions plus a consistency constraint.

    The constraint is an infix formula over the atoms; every individual and
    collective judgment set is measured against it.  Construction fails if no
    truth assignment satisfies the constraint.
    """

    atoms: tuple[str, ...]
    constraint: str

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("an agenda needs at least one atom")
        if len(self.atoms) > MAX_AGENDA_ATOMS:
            raise ValueError(f"agenda exceeds {MAX_AGENDA_ATOMS} atoms")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate agenda atoms")
        node = _Parser(_tokenize(self.constraint)).parse()
        unknown = _atoms_in(node) - set(self.atoms)
        if unknown:
            raise ValueError(f"constraint mentions undeclared atom(s) {sorted(unknown)}")
        object.__setattr__(self, "_node", node)
        if not any(True for _ in self.satisfying_assignments()):
            raise ValueError("constraint is unsatisfiable")

    def satisfies(self, js: JudgmentSet) -> bool:
        self._check_total(js)
        return _evaluate(self._node, js)

    def satisfying_assignments(self):
        """Yield every constraint-satisfying judgment set, in lexicographic order."""
        for bits in itertools.product((False, True), repeat=len(self.atoms)):
            candidate = dict(zip(self.atoms, bits))
            if _evaluate(self._node, candidate):
                yield candidate

    def _check_total(self, js: JudgmentSet):
        if set(js) != set(self.atoms):
            raise ValueError(
                f"judgment set over {sorted(js)} does not match agenda atoms {list(self.atoms)}"
            )


def agenda_from_json(text: str) -> Agenda:
    """Load the {"atoms": [...], "constraint": "..."} schema."""
    data = json.loads(text)
    if not isinstance(data, dict) or set(data) != {"atoms", "constraint"}:
        raise ValueError('expected an object with keys "atoms" and "constraint"')
    return Agenda(tuple(data["atoms"]), data["constraint"])


def agenda_to_json(agenda: Agenda) -> str:
    return json.dumps(
        {"atoms": list(agenda.atoms), "constraint": agenda.constraint},
        indent=2,
        sort_keys=True,
    )


@dataclass(frozen=True)
class JudgmentProfile:
    """Named evaluators' judgment sets; every individual must satisfy the constraint."""

    agenda: Agenda
    judgments: tuple[tuple[str, JudgmentSet], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "judgments",
            tuple((name, dict(js)) for name, js in self.judgments),
        )
        if not self.judgments:
            raise ValueError("a judgment profile needs at least one evaluator")
        names = [name for name, _ in self.judgments]
        if len(set(names)) != len(names):
            raise ValueError("duplicate evaluator ids")
        for name, js in self.judgments:
            if not self.agenda.satisfies(js):
                raise ValueError(f"evaluator {name!r} holds an inconsistent judgment set")

    @property
    def num_evaluators(self) -> int:
        return len(self.judgments)


def judgment_profile_from_json(text: str) -> JudgmentProfile:
    """Load {"agenda": {...}, "judgments": {evaluatorId: {atom: bool}}}."""
    data = json.loads(text)
    if not isinstance(data, dict) or set(data) != {"agenda", "judgments"}:
        raise ValueError('expected an object with keys "agenda" and "judgments"')
    agenda = agenda_from_json(json.dumps(data["agenda"]))
    judgments = tuple(
        (name, {atom: bool(v) for atom, v in js.items()})
        for name, js in data["judgments"].items()
    )
    return JudgmentProfile(agenda, judgments)


def majority_judgments(jp: JudgmentProfile) -> JudgmentSet:
    """Atom-by-atom strict majority.  Requires an odd number of evaluators."""
    n = jp.num_evaluators
    if n % 2 == 0:
        raise ValueError(f"majority voting needs an odd evaluator count, got {n}")
    return {
        atom: sum(js[atom] for _, js in jp.judgments) * 2 > n
        for atom in jp.agenda.atoms
    }


def check_consistency(js: JudgmentSet, agenda: Agenda) -> bool:
    """Does the judgment set satisfy the agenda's constraint?"""
    return agenda.satisfies(js)


def closest_consistent(js: JudgmentSet, agenda: Agenda) -> JudgmentSet:
    """The constraint-satisfying judgment set nearest to `js` in Hamming distance.

    Distance ties prefer flipping atoms later in agenda order (with the agenda
    ordered premises-then-conclusion this reproduces premise-based repair),
    then fall back to the lexicographically smallest assignment.
    """
    agenda._check_total(js)

    def key(candidate: JudgmentSet):
        flips = tuple(candidate[a] != js[a] for a in agenda.atoms)
        return (sum(flips), flips, tuple(candidate[a] for a in agenda.atoms))

    return min(agenda.satisfying_assignments(), key=key)
