"""Scalar monetary risk measures on finite spaces and their vector assembly.

Sign convention: ``risk(xi + c) == risk(xi) - c``.  Distortion risks use
``-int F^{-1}(t) d g~(t)`` with the dual ``g~(t) = 1 - g(1 - t)``; AVaR at
level alpha is the distortion with ``g(t) = max(0, (t - 1 + alpha)/alpha)``.

Every measure has a scalar route (exact, via the merged quantile function)
and a batched route (:func:`risk_batch`) used by the enumeration engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyScenarioSet,
    InvalidAlpha,
    InvalidDistortion,
    NegativeDensity,
)
from .prob_core import (
    ProbSpace,
    RandomVariable,
    RandomVector,
    expectation,
    quantile_function,
)

DENSITY_TOL = 1e-9


@dataclass(frozen=True)
class DistortionFunction:
    """Piecewise-linear distortion ``g`` given by ``(t, g(t))`` knots."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(t), float(g)) for t, g in self.knots)
        if len(knots) < 2:
            raise InvalidDistortion("need at least two knots")
        ts = [t for t, _ in knots]
        gs = [g for _, g in knots]
        if ts[0] != 0.0 or ts[-1] != 1.0 or gs[0] != 0.0 or gs[-1] != 1.0:
            raise InvalidDistortion("g must run from (0, 0) to (1, 1)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidDistortion("knot abscissae must be strictly increasing")
        if any(b < a for a, b in zip(gs, gs[1:])):
            raise InvalidDistortion("g must be nondecreasing")
        object.__setattr__(self, "knots", knots)

    @property
    def ts(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots])

    @property
    def gs(self) -> np.ndarray:
        return np.array([g for _, g in self.knots])

    def g(self, t):
        return np.interp(t, self.ts, self.gs)

    def dual(self, t):
        """``g~(t) = 1 - g(1 - t)``."""
        return 1.0 - np.interp(1.0 - np.asarray(t, dtype=float), self.ts, self.gs)

    def dual_is_concave(self) -> bool:
        # g~ concave <=> g convex <=> knot slopes nondecreasing
        ts, gs = self.ts, self.gs
        slopes = np.diff(gs) / np.diff(ts)
        return bool(np.all(np.diff(slopes) >= -1e-12))


@dataclass(frozen=True)
class EssInf:
    kind = "essinf"


@dataclass(frozen=True)
class NegExpectation:
    kind = "neg_expectation"


@dataclass(frozen=True)
class AVaR:
    alpha: float
    kind = "avar"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidAlpha(f"alpha must lie in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class Distortion:
    g: DistortionFunction
    kind = "distortion"


@dataclass(frozen=True, eq=False)
class ScenarioMax:
    """``max_k (E[zeta_k * (-xi)] - penalty_k)`` over a finite scenario family."""

    densities: tuple[np.ndarray, ...]
    penalties: tuple[float, ...]
    kind = "scenario_max"

    def __post_init__(self):
        if len(self.densities) == 0:
            raise EmptyScenarioSet("scenario_max needs at least one scenario")
        if len(self.densities) != len(self.penalties):
            raise DimensionMismatch("one penalty per density")
        dens = []
        for z in self.densities:
            z = np.array(z, dtype=float)
            if np.any(z < 0):
                raise NegativeDensity(f"density has negative entries: {z.tolist()}")
            z.setflags(write=False)
            dens.append(z)
        object.__setattr__(self, "densities", tuple(dens))
        object.__setattr__(self, "penalties", tuple(float(p) for p in self.penalties))

    def check_space(self, sp: ProbSpace):
        for z in self.densities:
            if len(z) != sp.n:
                raise DimensionMismatch("density length differs from atom count")
            mean = math.fsum(z * sp.probs)
            if abs(mean - 1.0) > DENSITY_TOL:
                raise NegativeDensity(f"density has mean {mean}, expected 1")


RiskSpec = Union[EssInf, NegExpectation, AVaR, Distortion, ScenarioMax]

LAW_INVARIANT_KINDS = frozenset({"essinf", "neg_expectation", "avar", "distortion"})


@dataclass(frozen=True)
class VectorRiskSpec:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise DimensionMismatch("vector risk needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def law_invariant(self) -> bool:
        return all(c.kind in LAW_INVARIANT_KINDS for c in self.components)

    @property
    def coherent(self) -> bool:
        return all(is_coherent(c) for c in self.components)

    @property
    def convex(self) -> bool:
        return all(is_convex(c) for c in self.components)

    @classmethod
    def identical(cls, r, d: int) -> "VectorRiskSpec":
        return cls((r,) * d)


def is_convex(r) -> bool:
    if isinstance(r, Distortion):
        return r.g.dual_is_concave()
    return True


def is_coherent(r) -> bool:
    if isinstance(r, ScenarioMax):
        return all(p == 0.0 for p in r.penalties)
    return is_convex(r)


# ---------------------------------------------------------------- scalar route


def _check(xi: RandomVariable, sp: ProbSpace):
    if len(xi) != sp.n:
        raise DimensionMismatch(f"variable has {len(xi)} atoms, space has {sp.n}")


def ess_inf_risk(xi: RandomVariable, sp: ProbSpace) -> float:
    _check(xi, sp)
    return -float(np.min(xi.values))


def neg_expectation_risk(xi: RandomVariable, sp: ProbSpace) -> float:
    return -expectation(xi, sp)


def avar_risk(xi: RandomVariable, sp: ProbSpace, alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    q = quantile_function(xi, sp)
    terms = []
    prev = 0.0
    for v, c in q.breakpoints:
        w = min(c, alpha) - min(prev, alpha)
        if w > 0:
            terms.append(v * w)
        prev = c
    return -math.fsum(terms) / alpha


def distortion_risk(xi: RandomVariable, sp: ProbSpace, g: DistortionFunction) -> float:
    if not isinstance(g, DistortionFunction):
        raise InvalidDistortion("expected a DistortionFunction")
    q = quantile_function(xi, sp)
    terms = []
    prev = 0.0
    for v, c in q.breakpoints:
        terms.append(v * (float(g.dual(c)) - float(g.dual(prev))))
        prev = c
    return -math.fsum(terms)


def avar_distortion(alpha: float) -> DistortionFunction:
    if not 0.0 < alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return DistortionFunction(((0.0, 0.0), (1.0, 1.0)))
    return DistortionFunction(((0.0, 0.0), (1.0 - alpha, 0.0), (1.0, 1.0)))


def scenario_max_risk(xi: RandomVariable, sp: ProbSpace, scenarios: ScenarioMax) -> float:
    _check(xi, sp)
    scenarios.check_space(sp)
    vals = [
        math.fsum(sp.probs * z * (-xi.values)) - pen
        for z, pen in zip(scenarios.densities, scenarios.penalties)
    ]
    return max(vals)


def risk(xi: RandomVariable, sp: ProbSpace, r) -> float:
    """Evaluate any :data:`RiskSpec` on a scalar random variable."""
    if isinstance(r, EssInf):
        return ess_inf_risk(xi, sp)
    if isinstance(r, NegExpectation):
        return neg_expectation_risk(xi, sp)
    if isinstance(r, AVaR):
        return avar_risk(xi, sp, r.alpha)
    if isinstance(r, Distortion):
        return distortion_risk(xi, sp, r.g)
    if isinstance(r, ScenarioMax):
        return scenario_max_risk(xi, sp, r)
    raise TypeError(f"unknown risk spec {r!r}")


def vector_risk(xi: RandomVector, sp: ProbSpace, spec: VectorRiskSpec) -> np.ndarray:
    if xi.n != sp.n or xi.d != spec.d:
        raise DimensionMismatch(
            f"vector is {xi.n}x{xi.d}, space has {sp.n} atoms, spec has {spec.d} components"
        )
    return np.array([risk(xi.column(j), sp, r) for j, r in enumerate(spec.components)])


# --------------------------------------------------------------- batched route


def _sorted_with_probs(values: np.ndarray, probs: np.ndarray, uniform: bool):
    """Sort each row ascending and return matching cumulative probabilities."""
    if uniform:
        v = np.sort(values, axis=1)
        p = np.broadcast_to(probs, v.shape)
    else:
        order = np.argsort(values, axis=1, kind="stable")
        v = np.take_along_axis(values, order, axis=1)
        p = probs[order]
    c = np.cumsum(p, axis=1)
    c[:, -1] = 1.0
    return v, c


def risk_batch(values: np.ndarray, sp: ProbSpace, r) -> np.ndarray:
    """Risk of each row of ``values`` (shape ``(S, n)``).

    Sums run over the sorted row, so the result for a row does not depend on
    the atom order when the space is uniform.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != sp.n:
        raise DimensionMismatch("batch must have shape (S, atoms)")
    probs = sp.probs
    uniform = sp.is_uniform
    if isinstance(r, EssInf):
        return -values.min(axis=1)
    if isinstance(r, ScenarioMax):
        r.check_space(sp)
        cols = [
            (-values) @ (probs * z) - pen for z, pen in zip(r.densities, r.penalties)
        ]
        return np.max(np.stack(cols, axis=1), axis=1)
    v, c = _sorted_with_probs(values, probs, uniform)
    prev = np.concatenate([np.zeros((c.shape[0], 1)), c[:, :-1]], axis=1)
    if isinstance(r, NegExpectation):
        w = c - prev
        return -np.sum(v * w, axis=1)
    if isinstance(r, AVaR):
        a = r.alpha
        w = (np.minimum(c, a) - np.minimum(prev, a)) / a
        return -np.sum(v * w, axis=1)
    if isinstance(r, Distortion):
        w = r.g.dual(c) - r.g.dual(prev)
        return -np.sum(v * w, axis=1)
    raise TypeError(f"unknown risk spec {r!r}")


def vector_risk_batch(selections: np.ndarray, sp: ProbSpace, spec: VectorRiskSpec) -> np.ndarray:
    """Risk vectors of a batch of selections of shape ``(S, n, d)``."""
    if selections.ndim != 3 or selections.shape[2] != spec.d:
        raise DimensionMismatch("selections must have shape (S, atoms, d)")
    cols = [risk_batch(selections[:, :, j], sp, r) for j, r in enumerate(spec.components)]
    return np.stack(cols, axis=1)
