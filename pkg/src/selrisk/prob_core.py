"""Finite probability spaces and random variables stored as per-atom tables.

Atoms are indexed ``0..n-1`` and events are sets of atom indices.  All
objects are immutable; operations are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NonPositiveProbability,
    ProbabilitiesDoNotSumToOne,
)

EXACT_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ProbSpace:
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == self.probs[0]))

    def __eq__(self, other):
        return isinstance(other, ProbSpace) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"ProbSpace({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class RandomVariable:
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 1:
            raise DimensionMismatch("random variable needs a 1-d value table")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __add__(self, other):
        other = other.values if isinstance(other, RandomVariable) else other
        return RandomVariable(self.values + other)

    def __mul__(self, c):
        return RandomVariable(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(-self.values)


@dataclass(frozen=True, eq=False)
class RandomVector:
    """Table of shape ``(atoms, d)``."""

    values: np.ndarray

    def __post_init__(self):
        try:
            vals = _frozen(self.values)
        except ValueError:
            vals = None
        if vals is None or vals.ndim != 2:
            raise DimensionMismatch("random vector needs an atoms x d table")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> RandomVariable:
        return RandomVariable(self.values[:, j])

    def total(self) -> RandomVariable:
        """Per-atom coordinate sum (the total payoff of a capital position)."""
        return RandomVariable(self.values.sum(axis=1))

    @classmethod
    def constant(cls, point, n: int) -> "RandomVector":
        return cls(np.tile(np.asarray(point, dtype=float), (n, 1)))


@dataclass(frozen=True)
class QuantileFunction:
    """Step quantile function of a discrete law.

    ``breakpoints`` holds ``(value, cum_prob)`` pairs with distinct,
    increasing values; the last cumulative probability is exactly 1.
    """

    breakpoints: tuple[tuple[float, float], ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.breakpoints])

    @property
    def cum_probs(self) -> np.ndarray:
        return np.array([c for _, c in self.breakpoints])

    def __call__(self, t: float) -> float:
        """First value whose cumulative probability reaches ``t``."""
        for v, c in self.breakpoints:
            if c >= t - EXACT_TOL:
                return v
        return self.breakpoints[-1][0]


def make_space(probs: Sequence[float]) -> ProbSpace:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise NonPositiveProbability("need a nonempty list of probabilities")
    if np.any(~(p > 0)):
        raise NonPositiveProbability(f"probabilities must be > 0, got {p.tolist()}")
    total = math.fsum(p)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise ProbabilitiesDoNotSumToOne(f"probabilities sum to {total}")
    if total != 1.0:
        p = p / total
    return ProbSpace(p)


def uniform_space(n: int) -> ProbSpace:
    return ProbSpace(np.full(n, 1.0 / n))


def _check_len(xi: RandomVariable, sp: ProbSpace):
    if len(xi) != sp.n:
        raise DimensionMismatch(f"variable has {len(xi)} atoms, space has {sp.n}")


def expectation(xi: RandomVariable, sp: ProbSpace) -> float:
    _check_len(xi, sp)
    return math.fsum(xi.values * sp.probs)


def quantile_function(xi: RandomVariable, sp: ProbSpace) -> QuantileFunction:
    _check_len(xi, sp)
    order = np.argsort(xi.values, kind="stable")
    merged: list[list[float]] = []
    for v, p in zip(xi.values[order], sp.probs[order]):
        if merged and merged[-1][0] == v:
            merged[-1][1].append(p)
        else:
            merged.append([float(v), [p]])
    points = []
    running: list[float] = []
    for v, ps in merged:
        running.extend(ps)
        points.append((v, math.fsum(running)))
    # the last cumulative probability is 1 by construction of the space
    points[-1] = (points[-1][0], 1.0)
    return QuantileFunction(tuple(points))


def indicator(atoms: Iterable[int], sp: ProbSpace) -> RandomVariable:
    vals = np.zeros(sp.n)
    for i in atoms:
        if not 0 <= i < sp.n:
            raise IndexOutOfRange(f"atom {i} outside 0..{sp.n - 1}")
        vals[i] = 1.0
    return RandomVariable(vals)


def event_probability(atoms: Iterable[int], sp: ProbSpace) -> float:
    return math.fsum(sp.probs[list(set(atoms))])
