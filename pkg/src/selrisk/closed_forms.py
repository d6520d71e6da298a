"""Exact risk sets for the explicitly solvable portfolios.

These evaluators are the ground truth the enumeration oracle is compared
against: half-space transfers ``C + H_t``, the fixed-cost set ``I_kappa``
under Average Value-at-Risk, finite transfer sets with two or three points,
and fixed points under the essential infimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InvalidAlpha,
    GridMismatch,
    NonConvexRisk,
    OrientationViolated,
    PreconditionViolated,
    SameSignTransfer,
    UnsupportedDimension,
)
from .lowerset_geom import (
    RiskSetResult,
    fixed_points,
    grid,
    i_kappa,
    negate,
    translate,
)
from .prob_core import ProbSpace, RandomVariable, RandomVector, expectation
from .scalar_risk import (
    AVaR,
    DistortionFunction,
    EssInf,
    NegExpectation,
    VectorRiskSpec,
    is_convex,
    risk,
    vector_risk,
)

BETA_STEP = 0.01


def total_payoff(C: RandomVector) -> RandomVariable:
    """``D = C^(1) + ... + C^(d)`` atom by atom."""
    return C.total()


def _upper_sum(level: float, d: int) -> tuple:
    """``{x : x_1 + ... + x_d >= level}`` in normalized ``(n, level)`` form."""
    return (tuple([1.0 / d] * d), level / d)


def _minus_h(s: float, d: int, **kw) -> RiskSetResult:
    # -H_s = {x : sum(x) >= -s}
    return RiskSetResult(np.zeros((0, d)), (_upper_sum(-s, d),), **kw)


def _require_convex(r):
    if not is_convex(r):
        raise NonConvexRisk(f"{r!r} is not a convex risk measure")


def ht_identical(C: RandomVector, t: float, r, sp: ProbSpace) -> RiskSetResult:
    """All components equal a convex ``r``: ``-H_{t - d r(D/d)}``."""
    _require_convex(r)
    d = C.d
    D = total_payoff(C)
    s = t - d * risk(D * (1.0 / d), sp, r)
    return _minus_h(s, d, descriptor={"kind": "ht_identical", "offset": s})


def ht_essinf_mixed(C: RandomVector, t: float, r, sp: ProbSpace) -> RiskSetResult:
    """One essential-infimum component, the rest a convex ``r``:
    ``-H_{t - (d-1) r(D/(d-1))}``."""
    _require_convex(r)
    d = C.d
    if d < 2:
        raise UnsupportedDimension("needs at least two components")
    D = total_payoff(C)
    s = t - (d - 1) * risk(D * (1.0 / (d - 1)), sp, r)
    return _minus_h(s, d, descriptor={"kind": "ht_essinf_mixed", "offset": s})


def ht_expectation_mixed(C: RandomVector, t: float, r, sp: ProbSpace) -> RiskSetResult:
    """One negative-expectation component, the rest a convex ``r`` that
    dominates the negative mean: ``-H_{t + E D}``."""
    _require_convex(r)
    d = C.d
    D = total_payoff(C)
    probes = [D, D * (1.0 / max(1, d - 1))] + [C.column(j) for j in range(d)]
    for xi in probes:
        if risk(xi, sp, r) < -expectation(xi, sp) - 1e-12:
            raise PreconditionViolated(f"{r!r} does not dominate the negative mean")
    s = t + expectation(D, sp)
    return _minus_h(s, d, descriptor={"kind": "ht_expectation_mixed", "offset": s})


def ht_closed_form(C: RandomVector, t: float, spec: VectorRiskSpec, sp: ProbSpace) -> RiskSetResult:
    """Pick whichever of the three ``C + H_t`` formulas the risk spec qualifies for."""
    comps = list(spec.components)
    if all(c == comps[0] for c in comps) and is_convex(comps[0]):
        return ht_identical(C, t, comps[0], sp)
    for special, fn in ((EssInf(), ht_essinf_mixed), (NegExpectation(), ht_expectation_mixed)):
        idx = [i for i, c in enumerate(comps) if c == special]
        if len(idx) != 1:
            continue
        rest = [c for i, c in enumerate(comps) if i != idx[0]]
        if all(c == rest[0] for c in rest) and is_convex(rest[0]):
            return fn(C, t, rest[0], sp)
    raise PreconditionViolated("no closed form for C + H_t with this risk vector")


def ikappa_bounds(C: RandomVector, kappa: float, spec: VectorRiskSpec, sp: ProbSpace, params=None):
    """Inner and outer bounds for the fixed-cost portfolio ``C + I_kappa``.

    inner = (rho(C) - I_kappa) u rho_s(C + H_{-kappa});  outer = rho_s(C + H_0).
    Half-space terms use the exact formulas when the risk spec qualifies and the
    enumeration oracle otherwise (flagged ``oracle`` in ``flags``).
    """
    from .selection_engine import EngineParams, HalfSpaceTransfer, Scenario, selection_risk

    def half(t):
        try:
            return ht_closed_form(C, t, spec, sp), False
        except PreconditionViolated:
            scn = Scenario(sp, spec, HalfSpaceTransfer(C, t), params or EngineParams())
            return selection_risk(scn), True

    rc = vector_risk(C, sp, spec)
    shifted = RiskSetResult.from_upper(translate(negate(i_kappa(kappa, C.d)), rc))
    hm, oracle_in = half(-kappa)
    inner = RiskSetResult(
        np.vstack([shifted.minimal_points, hm.minimal_points.reshape(-1, C.d)]),
        shifted.halfspaces + hm.halfspaces,
        hm.regions,
        flags={"oracle": oracle_in},
    )
    outer, oracle_out = half(0.0)
    outer.flags["oracle"] = oracle_out
    return inner, outer


# ------------------------------------------------------ fixed costs with C = 0


@dataclass(frozen=True, eq=False)
class BRhoSet:
    """``(r(1_A), r(-1_A))`` pairs indexed by ``P(A) = beta``."""

    betas: np.ndarray
    points: np.ndarray


def _avar_indicator_pair(alpha: float, beta: float) -> tuple:
    if beta <= min(alpha, 1 - alpha):
        return 0.0, beta / alpha
    if alpha < beta <= 1 - alpha:
        return 0.0, 1.0
    if 1 - alpha < beta <= alpha:
        return -1.0 + (1 - beta) / alpha, beta / alpha
    return -1.0 + (1 - beta) / alpha, 1.0


def b_rho_avar(alpha: float, betas: Optional[Sequence[float]] = None) -> BRhoSet:
    if not 0.0 < alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    betas = grid(0.0, 1.0, BETA_STEP) if betas is None else np.asarray(betas, dtype=float)
    pts = np.array([_avar_indicator_pair(alpha, b) for b in betas])
    return BRhoSet(betas, pts)


def envelope_threshold(s, kappa: float, alpha: float):
    """Smallest ordinate over the abscissa ``-s`` (``s >= 0``) of rho_s(I_kappa)."""
    c = kappa * (1.0 / alpha - 1.0)
    s = np.asarray(s, dtype=float)
    return np.minimum(kappa + s, (np.sqrt(s) + math.sqrt(c)) ** 2)


def envelope_crossover(kappa: float, alpha: float) -> float:
    """Abscissa where the straight and curved branches meet (alpha > 1/2)."""
    c = 1.0 / alpha - 1.0
    if c == 0.0:  # alpha = 1: the curved branch never meets the straight one
        return math.inf
    return kappa * (1.0 - c) ** 2 / (4.0 * c)


def _envelope_boundary(kappa: float, alpha: float):
    c = kappa * (1.0 / alpha - 1.0)
    f0 = min(kappa, c)

    def b(u: float) -> float:
        if u < 0:
            return float(envelope_threshold(-u, kappa, alpha))
        if u < f0:
            return 0.0
        reach = [u - kappa]
        if u >= c:
            reach.append((math.sqrt(u) - math.sqrt(c)) ** 2)
        return -max(reach)

    return b


def ikappa_avar_riskset(kappa: float, alpha: float, window=None, step=None) -> RiskSetResult:
    """rho_s(I_kappa) in the plane when both components are AVaR_alpha."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    if not kappa > 0:
        raise PreconditionViolated("kappa must be positive")
    if alpha <= 0.5:
        res = RiskSetResult.from_upper(
            negate(i_kappa(kappa, 2)), descriptor={"kind": "minus_i_kappa", "kappa": kappa}
        )
    else:
        c = kappa * (1.0 / alpha - 1.0)
        res = RiskSetResult(
            np.zeros((1, 2)),
            regions=(_envelope_boundary(kappa, alpha),),
            descriptor={
                "kind": "envelope",
                "kappa": kappa,
                "alpha": alpha,
                "branches": [
                    "(-x, y): x >= 0, y >= min(kappa + x, (sqrt(x) + sqrt(c))^2)",
                    "(x, -y): y >= 0, x >= min(kappa + y, (sqrt(y) + sqrt(c))^2)",
                    "R_+^2",
                ],
                "c": c,
                "crossover": envelope_crossover(kappa, alpha),
            },
        )
    if window is not None:
        res = res.with_curve(window, step)
    return res


def ikappa_avar_sampled(B: BRhoSet, kappa: float, t_grid=None, window=None, step=None) -> RiskSetResult:
    """Risk set of ``I_kappa`` generated from a sampled ``B_rho``.

    Transfers ``(x, -kappa - x) 1_A`` with ``x = t >= 0`` have risk
    ``(t b1, (kappa + t) b2)``; transfers to the other coordinate give
    ``(t b2, (t - kappa) b1)``.
    """
    if t_grid is None:
        if window is None or step is None:
            raise GridMismatch("need a t grid, or a window and step to derive one")
        (x0, x1), (y0, y1) = window
        diam = math.hypot(x1 - x0, y1 - y0)
        t_grid = grid(0.0, diam, step)
    t = np.asarray(t_grid, dtype=float)[:, None]
    b1, b2 = B.points[:, 0][None, :], B.points[:, 1][None, :]
    fam1 = np.stack([t * b1, (kappa + t) * b2], axis=-1).reshape(-1, 2)
    fam2 = np.stack([t * b2, (t - kappa) * b1], axis=-1).reshape(-1, 2)
    res = RiskSetResult(np.vstack([np.zeros((1, 2)), fam1, fam2]), descriptor={"kind": "ikappa_avar_sampled", "kappa": kappa})
    if window is not None:
        res = res.with_curve(window, step)
    return res


# ------------------------------------------------------ finite transfer sets


def _distorted_coordinate(v: float, beta, g: DistortionFunction):
    """Risk of ``v 1_A`` with ``P(A) = beta`` under the distortion ``g``."""
    if v >= 0:
        return -v * g.g(beta)
    return -v * g.dual(beta)


def two_point_riskset(x: float, y: float, g: DistortionFunction, betas=None) -> RiskSetResult:
    """Transfers restricted to ``{(0, 0), (x, y)}`` with ``x y < 0``."""
    if not x * y < 0:
        raise SameSignTransfer(f"need x*y < 0, got ({x}, {y})")
    betas = grid(0.0, 1.0, BETA_STEP) if betas is None else np.asarray(betas, dtype=float)
    pts = np.column_stack(
        [_distorted_coordinate(x, betas, g), _distorted_coordinate(y, betas, g)]
    )
    return RiskSetResult(pts, descriptor={"kind": "two_point", "x": x, "y": y})


def three_point_riskset(p1, p3, g: DistortionFunction, step: float = BETA_STEP) -> RiskSetResult:
    """Transfers restricted to ``{p1, 0, p3}`` with ``x1 < 0 < x3``, ``y1 > 0 > y3``."""
    (x1, y1), (x3, y3) = p1, p3
    if not (x1 < 0 < x3 and y1 > 0 > y3):
        raise OrientationViolated("need x1 < 0 < x3 and y1 > 0 > y3")
    a = grid(0.0, 1.0, step)
    a1, a3 = np.meshgrid(a, a, indexing="ij")
    ok = a1 + a3 <= 1.0 + 1e-12
    a1, a3 = a1[ok], a3[ok]
    pts = np.column_stack(
        [
            -x1 * g.dual(a1) - x3 * g.g(a3),
            -y1 * g.g(a1) - y3 * g.dual(a3),
        ]
    )
    return RiskSetResult(pts, descriptor={"kind": "three_point", "p1": p1, "p3": p3})


def three_point_value(p1, p3, g: DistortionFunction, a1: float, a3: float) -> np.ndarray:
    (x1, y1), (x3, y3) = p1, p3
    return np.array(
        [
            -x1 * float(g.dual(a1)) - x3 * float(g.g(a3)),
            -y1 * float(g.g(a1)) - y3 * float(g.dual(a3)),
        ]
    )


def two_point_value(x: float, y: float, g: DistortionFunction, beta: float) -> np.ndarray:
    return np.array(
        [float(_distorted_coordinate(x, beta, g)), float(_distorted_coordinate(y, beta, g))]
    )


def fixed_point_riskset(X) -> RiskSetResult:
    """Negated fixed points: the risk set under essential-infimum components."""
    return RiskSetResult.from_upper(negate(fixed_points(list(X))), descriptor={"kind": "fixed_points"})
