"""
Exact discrete probability machinery.

Categorical distributions, mean-field factored beliefs, factor-wise Bayes
updates, likelihood messages, KL divergence and the softmax policy map. All
values are immutable once built; every operation returns new objects.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr, softmax

from ..utils.errors import (
    NegativeEntryError,
    NonFiniteError,
    NormalizationError,
    SupportMismatchError,
    ZeroMassError,
)

logger = logging.getLogger(__name__)

# Floor for likelihood message entries and for lifted belief entries.
EPSILON = 1e-12
# Tolerance on the unit-sum invariant of every distribution.
NORMALIZATION_TOLERANCE = 1e-9


def _frozen(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Categorical:
    """Normalized probability vector over a finite support."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen(self.probs)
        if arr.ndim != 1 or arr.size == 0:
            raise SupportMismatchError('Categorical', 'non-empty vector', arr.shape)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError('Categorical', arr)
        if np.any(arr < 0):
            raise NegativeEntryError('Categorical', float(arr.min()))
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise NormalizationError('Categorical', total)
        object.__setattr__(self, 'probs', arr)

    @classmethod
    def delta(cls, size: int, index: int) -> "Categorical":
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, size: int) -> "Categorical":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Categorical):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def argmax(self) -> int:
        """Most probable index, lowest index on ties."""
        return int(np.argmax(self.probs))

    def is_delta(self, tolerance: float = 0.0) -> bool:
        return float(self.probs.max()) >= 1.0 - tolerance

    def __repr__(self) -> str:
        return f"Categorical({np.array2string(self.probs, precision=4)})"


@dataclass(frozen=True)
class FactoredBelief:
    """Mean-field belief: one independent Categorical per state factor."""

    factors: Tuple[Categorical, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'factors', tuple(self.factors))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]]) -> "FactoredBelief":
        return cls(tuple(normalize(v) for v in vectors))

    def __len__(self) -> int:
        return len(self.factors)

    def __getitem__(self, index: int) -> Categorical:
        return self.factors[index]

    def __iter__(self):
        return iter(self.factors)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def vectors(self) -> List[np.ndarray]:
        return [f.probs for f in self.factors]

    def replace(self, index: int, factor: Categorical) -> "FactoredBelief":
        factors = list(self.factors)
        factors[index] = factor
        return FactoredBelief(tuple(factors))

    def key(self) -> bytes:
        """Byte string identifying the belief exactly (memoisation key)."""
        return b'|'.join(f.probs.tobytes() for f in self.factors)


@dataclass(frozen=True)
class LikelihoodMessage:
    """Per-factor unnormalized evidence weights, floored at EPSILON."""

    weights: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        floored = []
        for w in self.weights:
            arr = np.asarray(w, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError('LikelihoodMessage', arr)
            if np.any(arr < 0):
                raise NegativeEntryError('LikelihoodMessage', float(arr.min()))
            floored.append(_frozen(np.maximum(arr, EPSILON)))
        object.__setattr__(self, 'weights', tuple(floored))

    @classmethod
    def ones(cls, cardinalities: Sequence[int]) -> "LikelihoodMessage":
        return cls(tuple(np.ones(n) for n in cardinalities))

    def __len__(self) -> int:
        return len(self.weights)

    def is_identity(self, index: Optional[int] = None) -> bool:
        """True when the message (or one factor of it) is exactly all-ones."""
        if index is not None:
            return bool(np.all(self.weights[index] == 1.0))
        return all(bool(np.all(w == 1.0)) for w in self.weights)


@dataclass(frozen=True)
class LikelihoodSlice:
    """P(o = observed | parents) for one modality, dense over its parents."""

    parent_factors: Tuple[int, ...]
    table: np.ndarray


def normalize(v: Sequence[float]) -> Categorical:
    """Scale a non-negative vector to unit mass.

    Raises:
        ZeroMassError: the vector sums to zero.
        NegativeEntryError: an entry is negative.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise SupportMismatchError('normalize', 'non-empty vector', arr.shape)
    if np.any(np.isnan(arr)):
        raise NonFiniteError('normalize', arr)
    if np.any(arr < 0):
        raise NegativeEntryError('normalize', float(arr.min()))
    total = arr.sum()
    if total <= 0:
        raise ZeroMassError('normalize')
    return Categorical(arr / total)


def softmax_neg(values: Sequence[float], temperature: float = 1.0) -> Categorical:
    """Return sigma(-values / temperature).

    A value of +inf maps to probability 0 as long as one value is finite;
    NaN and -inf are rejected.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0 or np.any(np.isnan(arr)) or np.any(arr == -np.inf):
        raise NonFiniteError('softmax_neg', arr)
    finite = np.isfinite(arr)
    if not finite.any():
        raise NonFiniteError('softmax_neg', arr)
    probs = np.zeros_like(arr)
    probs[finite] = softmax(-arr[finite] / temperature)
    return Categorical(probs)


def kl_divergence(q: Categorical, p: Categorical) -> float:
    """D_KL[q || p] in nats; +inf when q puts mass where p has none."""
    if len(q) != len(p):
        raise SupportMismatchError('kl_divergence', len(p), len(q))
    total = float(np.sum(rel_entr(q.probs, p.probs)))
    return max(total, 0.0)


def contract(table: np.ndarray, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Contract the trailing ``len(vectors)`` axes of ``table`` with ``vectors``."""
    result = table
    for vec in reversed(vectors):
        result = result @ vec
    return result


def marginal_evidence(table: np.ndarray, vectors: Sequence[np.ndarray],
                      keep: int) -> np.ndarray:
    """Sum ``table`` over every axis except ``keep``, weighting by ``vectors``."""
    result = table
    for axis in range(len(vectors) - 1, keep, -1):
        result = result @ vectors[axis]
    for axis in range(keep):
        result = np.tensordot(vectors[axis], result, axes=([0], [0]))
    return result


def expected_observation(belief: FactoredBelief, likelihood: np.ndarray,
                         parent_factors: Sequence[int]) -> Categorical:
    """Predictive outcome distribution of one modality.

    Args:
        belief: current factored belief.
        likelihood: table of shape (outcomes, *parent cardinalities).
        parent_factors: factor index for each trailing axis of ``likelihood``.
    """
    vectors = []
    for axis, factor in enumerate(parent_factors):
        if factor >= len(belief):
            raise SupportMismatchError('expected_observation', f"factor < {len(belief)}", factor)
        if likelihood.shape[axis + 1] != len(belief[factor]):
            raise SupportMismatchError('expected_observation',
                                       likelihood.shape[axis + 1], len(belief[factor]))
        vectors.append(belief[factor].probs)
    outcome = contract(likelihood, vectors)
    return Categorical(np.clip(outcome, 0.0, None))


def bayes_update(prior: FactoredBelief,
                 likelihood_slices: Sequence[LikelihoodSlice]) -> FactoredBelief:
    """Factor-wise posterior given the observed outcome of each modality.

    Evidence from a modality with several parents is marginalised onto each
    parent with the prior beliefs over its co-parents (one sweep, no fixed
    point iteration). Factors that receive no evidence are returned as-is.

    Raises:
        ZeroMassError: the observation is impossible under the prior.
    """
    evidence: List[Optional[np.ndarray]] = [None] * len(prior)
    for lik in likelihood_slices:
        vectors = []
        for axis, factor in enumerate(lik.parent_factors):
            if lik.table.shape[axis] != len(prior[factor]):
                raise SupportMismatchError('bayes_update', len(prior[factor]),
                                           lik.table.shape[axis])
            vectors.append(prior[factor].probs)
        for axis, factor in enumerate(lik.parent_factors):
            e = marginal_evidence(lik.table, vectors, axis)
            evidence[factor] = e if evidence[factor] is None else evidence[factor] * e

    factors = list(prior.factors)
    for index, e in enumerate(evidence):
        if e is None:
            continue
        unnormalized = prior[index].probs * e
        total = unnormalized.sum()
        if not total > 0:
            raise ZeroMassError('bayes_update', factor=index)
        factors[index] = Categorical(unnormalized / total)
    return FactoredBelief(tuple(factors))


def apply_message(belief: FactoredBelief, msg: LikelihoodMessage) -> FactoredBelief:
    """Multiply a likelihood message into a belief and renormalize.

    Factors whose message is exactly all-ones are left untouched. Entries
    the belief rules out stay at zero whatever the message says; use
    :func:`smooth` first when a ruled-out state has to be recoverable.
    """
    if len(msg) != len(belief):
        raise SupportMismatchError('apply_message', len(belief), len(msg))
    factors = list(belief.factors)
    for index, weights in enumerate(msg.weights):
        if msg.is_identity(index):
            continue
        if weights.size != len(belief[index]):
            raise SupportMismatchError('apply_message', len(belief[index]), weights.size)
        product = belief[index].probs * weights
        total = product.sum()
        if not total > 0:
            raise ZeroMassError('apply_message', factor=index)
        factors[index] = Categorical(product / total)
    return FactoredBelief(tuple(factors))


def smooth(belief: FactoredBelief, floor: float = EPSILON) -> FactoredBelief:
    """Lift every entry to ``floor`` and renormalize (recovery after surprise)."""
    return FactoredBelief(tuple(normalize(np.maximum(f.probs, floor)) for f in belief))
