"""Randomized property checks for the selection risk oracle.

Each suite draws small grid-aligned scenarios from a seeded generator,
checks one structural property and, on failure, shrinks the case to a
minimal reproduction expressed as scenario documents.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lowerset_geom import (
    EXACT_TOL,
    MEMBER_TOL,
    LowerSet,
    Orthant,
    boundary_curve,
    convex_hull,
    lower_from_generators,
    translate,
)
from .prob_core import ProbSpace, RandomVector, make_space, uniform_space
from .scalar_risk import (
    AVaR,
    Distortion,
    DistortionFunction,
    EssInf,
    NegExpectation,
    ScenarioMax,
    VectorRiskSpec,
    vector_risk,
)
from .scenario_io import scenario_doc
from .selection_engine import (
    Custom,
    EngineParams,
    FixedCost,
    Scenario,
    convexity_defect,
    rho_Z,
    selection_risk,
)

GEN_STEP = 0.25
CASE_ENGINE = EngineParams(grid_step=0.25, window=((-3.0, 3.0), (-3.0, 3.0)))


@dataclass
class Case:
    """A drawn instance: the scenarios involved plus scalar parameters."""

    scenarios: dict
    params: dict = field(default_factory=dict)

    def describe(self) -> str:
        out = {k: scenario_doc(s) for k, s in self.scenarios.items()}
        out["params"] = self.params
        return json.dumps(out, indent=1, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    return repr(o)


# ----------------------------------------------------------------- generators


def _gens(rng, k: int, d: int = 2) -> np.ndarray:
    return rng.integers(-6, 7, size=(k, d)) * GEN_STEP


def _staircase(rng, n: int, max_gens: int = 3) -> list:
    return [
        lower_from_generators(_gens(rng, int(rng.integers(1, max_gens + 1))))
        for _ in range(n)
    ]


def _space(rng, n: int, uniform: Optional[bool] = None) -> ProbSpace:
    if uniform is None:
        uniform = bool(rng.integers(0, 2))
    if uniform:
        return uniform_space(n)
    w = rng.integers(1, 5, size=n).astype(float)
    return make_space(w / w.sum())


def _density(rng, sp: ProbSpace) -> np.ndarray:
    z = rng.integers(1, 5, size=sp.n).astype(float)
    return z / float(sp.probs @ z)


_CONVEX_DISTORTION = DistortionFunction(((0.0, 0.0), (0.5, 0.2), (1.0, 1.0)))


def _component(rng, sp: ProbSpace, kinds) -> object:
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if kind == "essinf":
        return EssInf()
    if kind == "neg_expectation":
        return NegExpectation()
    if kind == "avar":
        return AVaR(float(rng.choice([0.2, 0.25, 0.5, 0.75, 1.0])))
    if kind == "distortion":
        return Distortion(_CONVEX_DISTORTION)
    k = int(rng.integers(1, 3))
    return ScenarioMax(tuple(_density(rng, sp) for _ in range(k)), (0.0,) * k)


def _spec(rng, sp, kinds=("essinf", "neg_expectation", "avar", "distortion", "scenario_max")):
    return VectorRiskSpec((_component(rng, sp, kinds), _component(rng, sp, kinds)))


def _scenario(sp, spec, X, engine=CASE_ENGINE) -> Scenario:
    return Scenario(sp, spec, Custom(X), engine)


# ------------------------------------------------------------------- helpers


def _all_in(points: np.ndarray, result, tol=MEMBER_TOL) -> Optional[list]:
    for p in points:
        if not result.contains(p, tol):
            return p.tolist()
    return None


def _covers(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """Every point of ``a`` dominates some point of ``b`` up to ``tol``."""
    if len(a) == 0:
        return True
    if len(b) == 0:
        return False
    return bool(np.all(np.any(np.all(b[None, :, :] <= a[:, None, :] + tol, axis=2), axis=1)))


def _same_points(a: np.ndarray, b: np.ndarray, tol=1e-9) -> bool:
    """Equal upper sets; rounding may keep a nearly dominated extra point."""
    return _covers(a, b, tol) and _covers(b, a, tol)


def _scale_set(x: LowerSet, c: float) -> LowerSet:
    return lower_from_generators(x.apexes() * c)


def _mix_sets(x: LowerSet, y: LowerSet, lam: float) -> LowerSet:
    a, b = x.apexes(), y.apexes()
    pts = lam * a[:, None, :] + (1 - lam) * b[None, :, :]
    return lower_from_generators(pts.reshape(-1, 2))


# --------------------------------------------------------------------- suites
#
# A suite has ``draw(rng) -> Case`` and ``check(case) -> Optional[str]``
# (``None`` when the property holds).  Cases whose scenarios use Custom
# staircase portfolios can be shrunk generator by generator.


def _draw_monotone(rng):
    n = int(rng.integers(1, 4))
    sp = _space(rng, n)
    spec = _spec(rng, sp)
    X = _staircase(rng, n)
    Y = [
        LowerSet(x.primitives + tuple(Orthant(tuple(g)) for g in _gens(rng, int(rng.integers(1, 3)))), 2)
        for x in X
    ]
    return Case({"X": _scenario(sp, spec, X), "Y": _scenario(sp, spec, Y)})


def _check_monotone(case):
    sx, sy = case.scenarios["X"], case.scenarios["Y"]
    for x, y in zip(sx.portfolio.X, sy.portfolio.X):
        if not all(y.contains(a) for a in x.apexes()):
            return None  # shrinking broke X <= Y; vacuous
    p = _all_in(selection_risk(sx).minimal_points, selection_risk(sy))
    return None if p is None else f"risk point {p} of X missing from the risk set of Y"


def _draw_cash(rng):
    n = int(rng.integers(1, 4))
    sp = _space(rng, n)
    spec = _spec(rng, sp)
    a = _gens(rng, 1)[0]
    return Case({"X": _scenario(sp, spec, _staircase(rng, n))}, {"a": a.tolist()})


def _check_cash(case):
    s = case.scenarios["X"]
    a = np.array(case.params["a"])
    moved = _scenario(s.space, s.risk, [translate(x, a) for x in s.portfolio.X])
    lhs = selection_risk(moved).minimal_points
    rhs = selection_risk(s).minimal_points - a
    return None if _same_points(lhs, rhs) else f"rho_s(X + a) = {lhs.tolist()} vs rho_s(X) - a = {rhs.tolist()}"


_COHERENT = ("essinf", "neg_expectation", "avar", "distortion", "scenario_max")


def _draw_homog(rng):
    n = int(rng.integers(1, 4))
    sp = _space(rng, n)
    spec = _spec(rng, sp, _COHERENT)
    c = float(rng.choice([0.5, 2.0, 3.0]))
    return Case({"X": _scenario(sp, spec, _staircase(rng, n))}, {"c": c})


def _check_homog(case):
    s = case.scenarios["X"]
    c = case.params["c"]
    scaled = _scenario(s.space, s.risk, [_scale_set(x, c) for x in s.portfolio.X])
    lhs = selection_risk(scaled).minimal_points
    rhs = selection_risk(s).minimal_points * c
    return None if _same_points(lhs, rhs) else f"rho_s(cX) = {lhs.tolist()} vs c rho_s(X) = {rhs.tolist()}"


def _draw_convex(rng):
    n = int(rng.integers(1, 3))
    sp = _space(rng, n)
    spec = _spec(rng, sp)
    lam = float(rng.choice([0.25, 0.5, 0.75]))
    return Case(
        {"X": _scenario(sp, spec, _staircase(rng, n, 2)), "Y": _scenario(sp, spec, _staircase(rng, n, 2))},
        {"lambda": lam},
    )


def _check_convex(case):
    sx, sy = case.scenarios["X"], case.scenarios["Y"]
    lam = case.params["lambda"]
    mixed = _scenario(sx.space, sx.risk, [_mix_sets(x, y, lam) for x, y in zip(sx.portfolio.X, sy.portfolio.X)])
    rx, ry, rm = selection_risk(sx), selection_risk(sy), selection_risk(mixed)
    pts = lam * rx.minimal_points[:, None, :] + (1 - lam) * ry.minimal_points[None, :, :]
    p = _all_in(pts.reshape(-1, 2), rm)
    return None if p is None else f"mixture point {p} missing from rho_s(lam X + (1 - lam) Y)"


def _draw_random_shift(rng):
    n = int(rng.integers(1, 4))
    sp = _space(rng, n)
    spec = _spec(rng, sp, _COHERENT)
    C = _gens(rng, n)
    return Case({"X": _scenario(sp, spec, _staircase(rng, n))}, {"C": C.tolist()})


def _check_random_shift(case):
    s = case.scenarios["X"]
    C = np.array(case.params["C"])
    shifted = _scenario(s.space, s.risk, [translate(x, c) for x, c in zip(s.portfolio.X, C)])
    rc = vector_risk(RandomVector(C), s.space, s.risk)
    p = _all_in(rc + selection_risk(s).minimal_points, selection_risk(shifted))
    return None if p is None else f"rho(C) + rho_s(X) point {p} missing from rho_s(C + X)"


def _draw_law(rng):
    n = int(rng.integers(2, 5))
    sp = uniform_space(n)
    spec = _spec(rng, sp, ("essinf", "neg_expectation", "avar", "distortion"))
    perm = rng.permutation(n).tolist()
    return Case({"X": _scenario(sp, spec, _staircase(rng, n))}, {"perm": perm})


def _check_law(case):
    s = case.scenarios["X"]
    perm = case.params["perm"]
    if sorted(perm) != list(range(len(s.portfolio.X))):
        return None
    permuted = _scenario(s.space, s.risk, [s.portfolio.X[i] for i in perm])
    a, b = selection_risk(s).minimal_points, selection_risk(permuted).minimal_points
    if a.shape == b.shape and np.array_equal(a, b):
        return None
    return f"outputs differ under atom permutation {perm}: {a.tolist()} vs {b.tolist()}"


def _draw_grid(rng):
    n = int(rng.integers(1, 3))
    sp = _space(rng, n)
    spec = _spec(rng, sp)
    C = _gens(rng, n) * 0.5
    kappa = float(rng.integers(1, 5)) * GEN_STEP
    window = ((-2.0, 2.0), (-2.0, 2.0))
    coarse = Scenario(sp, spec, FixedCost(RandomVector(C), kappa), EngineParams(grid_step=0.5, window=window))
    fine = Scenario(sp, spec, FixedCost(RandomVector(C), kappa), EngineParams(grid_step=0.25, window=window))
    return Case({"coarse": coarse, "fine": fine})


def _check_grid(case):
    p = _all_in(selection_risk(case.scenarios["coarse"]).minimal_points, selection_risk(case.scenarios["fine"]))
    return None if p is None else f"coarse-grid risk point {p} missing after refinement"


def _draw_hull(rng):
    n = int(rng.integers(1, 4))
    sp = _space(rng, n)
    X = _staircase(rng, n, 4)
    Z = [np.column_stack([_density(rng, sp), _density(rng, sp)]) for _ in range(int(rng.integers(1, 3)))]
    spec = VectorRiskSpec((EssInf(), EssInf()))
    return Case({"X": _scenario(sp, spec, X)}, {"Z": [z.tolist() for z in Z]})


HULL_WINDOW = ((-4.0, 4.0), (-4.0, 4.0))


def _check_hull(case):
    s = case.scenarios["X"]
    Z = [np.array(z) for z in case.params["Z"]]
    X = list(s.portfolio.X)
    a = rho_Z(X, s.space, Z, atomless=True)
    b = rho_Z([convex_hull(x) for x in X], s.space, Z, atomless=True)
    ca, cb = boundary_curve(a, HULL_WINDOW, 0.125), boundary_curve(b, HULL_WINDOW, 0.125)
    gap = 0.0
    for ya, yb in zip(ca.ys, cb.ys):
        if ya != yb:
            gap = max(gap, abs(ya - yb))
    return None if gap <= 1e-9 else f"rho_Z(X) and rho_Z(conv X) boundaries differ by {gap}"


CONVEXIFY_COUNTS = (2, 4, 8)
CONVEXIFY_WINDOW = ((-1.0, 1.0), (-1.0, 1.0))


def _draw_convexify(rng):
    s = float(rng.choice([0.1, 0.2, 0.25, 0.5]))
    hi = float(rng.choice([1.25, 1.5]))
    return Case({}, {"spread": s, "high": hi})


def convexify_scenario(n: int, spread: float, high: float = 1.25) -> Scenario:
    """Two-scenario maximum over densities constant on the halves of a
    uniform space, applied to a deterministic two-point staircase."""
    h = n // 2
    z1 = np.array([high] * h + [2.0 - high] * h)
    r = ScenarioMax((z1, z1[::-1].copy()), (0.0, 0.0))
    X = [lower_from_generators([(spread, -spread), (-spread, spread)])] * n
    return _scenario(uniform_space(n), VectorRiskSpec((r, r)), X, EngineParams(grid_step=0.01, window=CONVEXIFY_WINDOW))


def convexify_defects(spread: float, high: float = 1.25, counts=CONVEXIFY_COUNTS) -> list:
    return [
        convexity_defect(selection_risk(convexify_scenario(n, spread, high)), CONVEXIFY_WINDOW, 0.01)
        for n in counts
    ]


def _check_convexify(case):
    d = convexify_defects(case.params["spread"], case.params["high"])
    ok = all(b <= a + EXACT_TOL for a, b in zip(d, d[1:]))
    return None if ok else f"convexity defects {d} increase with the atom count"


@dataclass(frozen=True)
class Suite:
    name: str
    draw: Callable
    check: Callable


SUITES = {
    s.name: s
    for s in (
        Suite("monotonicity", _draw_monotone, _check_monotone),
        Suite("cash_invariance", _draw_cash, _check_cash),
        Suite("homogeneity", _draw_homog, _check_homog),
        Suite("convexity_containment", _draw_convex, _check_convex),
        Suite("random_shift", _draw_random_shift, _check_random_shift),
        Suite("law_invariance", _draw_law, _check_law),
        Suite("grid_monotonicity", _draw_grid, _check_grid),
        Suite("rho_z_hull", _draw_hull, _check_hull),
        Suite("convexification", _draw_convexify, _check_convexify),
    )
}


# ------------------------------------------------------------------ shrinking


def _shrink_steps(case: Case):
    """Cases one generator smaller than ``case``."""
    for key, s in case.scenarios.items():
        if not isinstance(s.portfolio, Custom):
            continue
        X = list(s.portfolio.X)
        for i, x in enumerate(X):
            if len(x.primitives) < 2:
                continue
            for j in range(len(x.primitives)):
                prims = x.primitives[:j] + x.primitives[j + 1:]
                Y = X[:i] + [LowerSet(prims, x.d)] + X[i + 1:]
                scen = dict(case.scenarios)
                scen[key] = Scenario(s.space, s.risk, Custom(Y), s.engine)
                yield Case(scen, case.params)


def shrink(case: Case, check: Callable) -> Case:
    """Greedily drop generators while the failure persists."""
    improved = True
    while improved:
        improved = False
        for smaller in _shrink_steps(case):
            try:
                failed = check(smaller) is not None
            except Exception:
                failed = False
            if failed:
                case, improved = smaller, True
                break
    return case


@dataclass
class SuiteReport:
    name: str
    cases: int
    failure: Optional[str] = None
    reproduction: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def run_suite(name: str, seed: int, cases: int) -> SuiteReport:
    suite = SUITES[name]
    rng = np.random.default_rng([seed, sorted(SUITES).index(name)])
    for i in range(cases):
        case = suite.draw(rng)
        try:
            msg = suite.check(case)
        except Exception as e:  # a crash is a failure too
            msg = f"{type(e).__name__}: {e}"
        if msg is not None:
            small = shrink(case, suite.check)
            try:
                small_msg = suite.check(small) or msg
            except Exception as e:
                small_msg = f"{type(e).__name__}: {e}"
            return SuiteReport(name, i + 1, f"case {i}: {small_msg}", small.describe())
    return SuiteReport(name, cases)


def run_battery(seed: int = 42, cases: int = 200, suites=None) -> list:
    names = list(SUITES) if suites is None else list(suites)
    return [run_suite(n, seed, cases) for n in names]
