"""Synthetic evaluator populations with a learnable bilinear preference model.

The ground-truth world rates a response y for an evaluator with features f as
clamp(f' M* g(y) + noise, 0, 10); the learnable model recovers an estimate of
M* by ridge regression on the vectorized outer-product design.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .cardinal import RATING_MAX, RATING_MIN, RatingProfile
from .seeding import derive_seed

# An evaluator is a point in [0, 1]^d.
EvaluatorFeatures = tuple[float, ...]

WEIGHT_SUM_TOL = 1e-9


def clamp_rating(value: float) -> float:
    return min(RATING_MAX, max(RATING_MIN, float(value)))


@dataclass(frozen=True)
class ResponseRecord:
    """A candidate response: id, display text, and a q-dimensional feature vector."""

    id: str
    text: str
    features: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        if not self.id:
            raise ValueError("response id must be non-empty")
        if not all(math.isfinite(v) for v in self.features):
            raise ValueError(f"non-finite feature in response {self.id!r}")


@dataclass(frozen=True)
class ComponentDist:
    """One feature dimension's distribution: uniform(a, b) on [0,1] or beta(a, b)."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind == "uniform":
            if not 0.0 <= self.a <= self.b <= 1.0:
                raise ValueError(f"uniform bounds [{self.a}, {self.b}] must sit inside [0, 1]")
        elif self.kind == "beta":
            if self.a <= 0 or self.b <= 0:
                raise ValueError("beta shape parameters must be positive")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: random.Random) -> float:
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b)
        return rng.betavariate(self.a, self.b)


@dataclass(frozen=True)
class GroupSpec:
    """A stakeholder subpopulation: sampling weight plus per-dimension distributions."""

    weight: float
    components: tuple[ComponentDist, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.weight <= 0:
            raise ValueError("group weight must be positive")


@dataclass(frozen=True)
class PopulationSpec:
    """A stratified population: groups whose weights sum to one."""

    d: int
    groups: tuple[GroupSpec, ...]
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.d < 1:
            raise ValueError("feature dimension must be at least 1")
        if not self.groups:
            raise ValueError("a population needs at least one group")
        for group in self.groups:
            if len(group.components) != self.d:
                raise ValueError(
                    f"group has {len(group.components)} component distributions, expected {self.d}"
                )
        total = sum(g.weight for g in self.groups)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"group weights sum to {total}, expected 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def group_quotas(weights: list[float], n: int) -> list[int]:
    """Largest-remainder quotas: floor(weight*n) plus the biggest fractional parts."""
    raw = [w * n for w in weights]
    base = [int(math.floor(r)) for r in raw]
    shortfall = n - sum(base)
    by_remainder = sorted(range(len(weights)), key=lambda i: (base[i] - raw[i], i))
    for i in by_remainder[:shortfall]:
        base[i] += 1
    return base


def sample_population(spec: PopulationSpec, n: int, seed: int) -> tuple[EvaluatorFeatures, ...]:
    """Draw n evaluators, stratified by group quotas, deterministically in seed."""
    if n < 1:
        raise ValueError("population sample size must be at least 1")
    quotas = group_quotas([g.weight for g in spec.groups], n)
    evaluators: list[EvaluatorFeatures] = []
    for gi, (group, quota) in enumerate(zip(spec.groups, quotas)):
        rng = random.Random(derive_seed(seed, "population-group", gi))
        for _ in range(quota):
            evaluators.append(tuple(dist.sample(rng) for dist in group.components))
    return tuple(evaluators)


def _as_matrix(entries) -> np.ndarray:
    matrix = np.asarray(entries, dtype=float)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise ValueError("matrix entries must be finite")
    return matrix


@dataclass(frozen=True)
class GroundTruthWorld:
    """The synthetic ground truth: rating(f, y) = clamp(f' M_star g(y) + noise)."""

    M_star: tuple[tuple[float, ...], ...]
    noise_sigma: float = 0.0

    def __post_init__(self):
        matrix = _as_matrix(self.M_star)
        object.__setattr__(self, "M_star", tuple(tuple(row) for row in matrix.tolist()))
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def d(self) -> int:
        return len(self.M_star)

    @property
    def q(self) -> int:
        return len(self.M_star[0])


def _check_dims(d: int, q: int, f: EvaluatorFeatures, y: ResponseRecord):
    if len(f) != d:
        raise ValueError(f"evaluator has {len(f)} features, world expects {d}")
    if len(y.features) != q:
        raise ValueError(f"response {y.id!r} has {len(y.features)} features, world expects {q}")


def true_rating(
    world: GroundTruthWorld,
    f: EvaluatorFeatures,
    y: ResponseRecord,
    seed: int,
    evaluator_index: int,
) -> float:
    """Ground-truth rating with per-(evaluator, response) noise.

    The noise stream is derived from (seed, evaluator_index, response id), so
    the rating never depends on what was evaluated before it.
    """
    _check_dims(world.d, world.q, f, y)
    value = float(np.asarray(f) @ np.asarray(world.M_star) @ np.asarray(y.features))
    if world.noise_sigma > 0:
        rng = random.Random(derive_seed(seed, "noise", evaluator_index, y.id))
        value += rng.gauss(0.0, world.noise_sigma)
    return clamp_rating(value)


@dataclass(frozen=True)
class IndividualPreferenceModel:
    """A fitted bilinear rating model: prediction = clamp(f' M_hat g(y))."""

    M_hat: tuple[tuple[float, ...], ...]
    ridge_lambda: float

    def __post_init__(self):
        matrix = _as_matrix(self.M_hat)
        object.__setattr__(self, "M_hat", tuple(tuple(row) for row in matrix.tolist()))

    @property
    def d(self) -> int:
        return len(self.M_hat)

    @property
    def q(self) -> int:
        return len(self.M_hat[0])


def fit_individual_model(
    samples: list[tuple[EvaluatorFeatures, ResponseRecord, float]],
    ridge_lambda: float,
) -> IndividualPreferenceModel:
    """Ridge-fit M_hat on (f, y, rating) triples.

    Each sample contributes one row kron(f, g(y)) to the design; the normal
    equations (X'X + lambda I) w = X'r are solved in closed form.  At
    lambda = 0 a rank-deficient design is reported instead of silently
    pseudo-inverted.
    """
    if not samples:
        raise ValueError("need at least one sample")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be non-negative")
    d = len(samples[0][0])
    q = len(samples[0][1].features)
    rows = []
    targets = []
    for f, y, rating in samples:
        if len(f) != d or len(y.features) != q:
            raise ValueError("inconsistent sample dimensions")
        rows.append(np.kron(np.asarray(f, dtype=float), np.asarray(y.features, dtype=float)))
        targets.append(float(rating))
    X = np.vstack(rows)
    r = np.asarray(targets)
    if ridge_lambda == 0:
        rank = np.linalg.matrix_rank(X)
        if rank < d * q:
            raise ValueError(
                f"design is rank deficient at lambda=0 (rank {rank} < {d * q}); "
                "add samples or use a positive ridge_lambda"
            )
        w = np.linalg.lstsq(X, r, rcond=None)[0]
    else:
        gram = X.T @ X + ridge_lambda * np.eye(d * q)
        w = np.linalg.solve(gram, X.T @ r)
    return IndividualPreferenceModel(
        tuple(tuple(row) for row in w.reshape(d, q).tolist()), float(ridge_lambda)
    )


def predict_rating(psi: IndividualPreferenceModel, f: EvaluatorFeatures, y: ResponseRecord) -> float:
    """Model rating: clamp(f' M_hat g(y), 0, 10)."""
    _check_dims(psi.d, psi.q, f, y)
    return clamp_rating(float(np.asarray(f) @ np.asarray(psi.M_hat) @ np.asarray(y.features)))


@dataclass(frozen=True)
class Principle:
    """A named scoring rule over response features, usable as a synthetic voter."""

    name: str
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        if not self.name:
            raise ValueError("principle name must be non-empty")
        if not all(math.isfinite(v) for v in self.weights):
            raise ValueError(f"non-finite weight in principle {self.name!r}")


def principle_panel(
    principles: list[Principle], responses: list[ResponseRecord]
) -> RatingProfile:
    """Rate every response by every principle: rating = clamp(weights . g(y)).

    The result is an ordinary rating profile, so principles can vote through
    any cardinal rule or, via induced rankings, any ordinal rule.
    """
    if not principles:
        raise ValueError("need at least one principle")
    q = len(responses[0].features) if responses else 0
    ratings = {}
    for principle in principles:
        if len(principle.weights) != q:
            raise ValueError(
                f"principle {principle.name!r} scores {len(principle.weights)} features, "
                f"responses have {q}"
            )
        ratings[principle.name] = {
            y.id: clamp_rating(float(np.dot(principle.weights, y.features)))
            for y in responses
        }
    return RatingProfile(
        tuple(y.id for y in responses),
        tuple(p.name for p in principles),
        ratings,
    )
