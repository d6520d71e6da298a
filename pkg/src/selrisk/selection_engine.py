"""Brute-force selection risk oracle and the other set-valued functionals.

A selection picks one point of ``X(omega)`` per atom.  The oracle enumerates
selections whose values are drawn from a finite candidate set per atom
(the sampled Pareto frontier), computes their risk vectors and keeps the
Pareto-minimal ones.  The computed set is therefore an inner approximation
of the selection risk set which only grows as candidates are added.

Symmetry reduction: when every risk component is law invariant, atoms with
equal probability and equal realization are interchangeable, so only
multisets of candidates are enumerated inside such a group.  This leaves
the resulting risk set unchanged.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDensity,
    NotRepresentable,
    PreconditionViolated,
    SelectionBudgetExceeded,
    UnsupportedDimension,
)
from .lowerset_geom import (
    ConvexLowerSet,
    ConvexUpperSet,
    HalfSpace,
    LowerSet,
    Orthant,
    RiskSetResult,
    boundary_curve,
    curve_sup_distance,
    fixed_points,
    h_t,
    i_kappa,
    intersect,
    lower_convex_envelope,
    lower_from_generators,
    minkowski,
    negate,
    pareto_points,
    pareto_sample,
    scale_coordinatewise,
    support,
    translate,
)
from .prob_core import ProbSpace, RandomVector
from .scalar_risk import VectorRiskSpec, vector_risk_batch

DEFAULT_CAP = 2_000_000
BLOCK_FLOATS = 2_000_000


# ------------------------------------------------------------------ portfolios


@dataclass(frozen=True, eq=False)
class FixedCost:
    """``X = C + I_kappa``: any transfer costs a fixed ``kappa``."""

    C: RandomVector
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")


@dataclass(frozen=True, eq=False)
class HalfSpaceTransfer:
    """``X = C + H_t``: frictionless transfers with disposal."""

    C: RandomVector
    t: float


@dataclass(frozen=True, eq=False)
class FiniteTransfers:
    """``X = C + M + R_-^d`` for a finite transfer set ``M``."""

    C: RandomVector
    M: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.M, dtype=float)
        if m.size == 0:
            raise ValueError("transfer set M must be nonempty")
        object.__setattr__(self, "M", m.reshape(len(m), -1))


@dataclass(frozen=True, eq=False)
class Custom:
    X: tuple

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(self.X))


def realize(portfolio, n: Optional[int] = None) -> list:
    """Per-atom lower sets of a portfolio specification."""
    if isinstance(portfolio, Custom):
        return list(portfolio.X)
    C = portfolio.C
    if isinstance(portfolio, FixedCost):
        base = i_kappa(portfolio.kappa, C.d)
        return [translate(base, row) for row in C.values]
    if isinstance(portfolio, HalfSpaceTransfer):
        base = h_t(portfolio.t, C.d)
        return [translate(base, row) for row in C.values]
    if isinstance(portfolio, FiniteTransfers):
        if portfolio.M.shape[1] != C.d:
            raise DimensionMismatch("transfer points and C have different dimensions")
        return [lower_from_generators(row + portfolio.M) for row in C.values]
    raise TypeError(f"unknown portfolio {portfolio!r}")


# ---------------------------------------------------------------- engine setup


@dataclass(frozen=True)
class EngineParams:
    """Discretization of the selection union.

    ``window`` is the box (per-coordinate ``(lo, hi)``) in risk space on which
    boundary curves are reported.  Frontiers of the portfolio are sampled on
    ``sample_window``, by default the smallest box holding both ``window``
    and its reflection, since risk vectors sit near reflected positions.
    """

    grid_step: float = 0.05
    window: tuple = ((-3.0, 3.0), (-3.0, 3.0))
    selection_cap: int = DEFAULT_CAP
    mode: str = "general"
    sample_window: Optional[tuple] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if self.selection_cap < 1:
            raise ValueError("selection_cap must be at least 1")
        if self.mode not in ("general", "partition"):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(
            self, "window", tuple(tuple(float(v) for v in w) for w in self.window)
        )

    @property
    def candidate_window(self) -> tuple:
        if self.sample_window is not None:
            return tuple(tuple(w) for w in self.sample_window)
        return tuple((min(lo, -hi), max(hi, -lo)) for lo, hi in self.window)

    @property
    def curve_window(self) -> tuple:
        return self.window[0]


@dataclass(frozen=True, eq=False)
class Scenario:
    space: ProbSpace
    risk: VectorRiskSpec
    portfolio: object
    engine: EngineParams = field(default_factory=EngineParams)

    @property
    def d(self) -> int:
        return self.risk.d

    def realizations(self) -> list:
        X = realize(self.portfolio)
        if len(X) != self.space.n:
            raise DimensionMismatch(f"{len(X)} realizations for {self.space.n} atoms")
        for s in X:
            if s.d != self.d:
                raise DimensionMismatch(f"realization of dimension {s.d}, risk has {self.d}")
        return X


def candidate_points(x_omega: LowerSet, params: EngineParams) -> np.ndarray:
    """Finite stand-in for the Pareto frontier of one realization."""
    if x_omega.is_staircase:
        return pareto_points(x_omega.apexes(), maximal=True)
    if x_omega.d != 2:
        raise UnsupportedDimension("frontier sampling needs d = 2")
    return pareto_sample(x_omega, params.candidate_window, params.grid_step)


def _threads(params: EngineParams) -> int:
    if params.threads is not None:
        return max(1, int(params.threads))
    env = os.environ.get("SELRISK_THREADS")
    if env:
        return max(1, int(env))
    return 1


# ------------------------------------------------------------ enumeration core


@dataclass
class _Group:
    atoms: list
    options: np.ndarray  # (M, len(atoms)) candidate indices
    points: np.ndarray  # (K, d)


def _multisets(k: int, s: int) -> np.ndarray:
    return np.array(list(itertools.combinations_with_replacement(range(k), s)), dtype=np.int64)


def _group_count(k: int, s: int, symmetric: bool) -> int:
    return math.comb(k + s - 1, s) if symmetric else k**s


def _plan_general(scn: Scenario) -> tuple:
    X = scn.realizations()
    sp = scn.space
    cands = [candidate_points(x, scn.engine) for x in X]
    symmetric = scn.risk.law_invariant
    groups: dict = {}
    for i, x in enumerate(X):
        key = (sp.probs[i], x) if symmetric else i
        groups.setdefault(key, []).append(i)
    total = 1
    plan = []
    for atoms in groups.values():
        k = len(cands[atoms[0]])
        total *= _group_count(k, len(atoms), symmetric)
        plan.append((atoms, k))
    return cands, plan, symmetric, total


def _general_blocks(scn, cands, plan, symmetric) -> Iterator[np.ndarray]:
    n, d = scn.space.n, scn.d
    groups = []
    for atoms, k in plan:
        s = len(atoms)
        if symmetric and s > 1:
            opts = _multisets(k, s)
        else:
            opts = np.array(list(itertools.product(range(k), repeat=s)), dtype=np.int64)
        groups.append(_Group(atoms, opts, cands[atoms[0]]))
    sizes = [len(g.options) for g in groups]
    total = int(np.prod(sizes, dtype=object))
    strides = []
    acc = 1
    for m in reversed(sizes):
        strides.append(acc)
        acc *= m
    strides = strides[::-1]
    block = max(1, BLOCK_FLOATS // max(1, n * d))
    for start in range(0, total, block):
        flat = np.arange(start, min(total, start + block), dtype=np.int64)
        sel = np.empty((len(flat), n, d))
        for g, stride, m in zip(groups, strides, sizes):
            idx = (flat // stride) % m
            sel[:, g.atoms, :] = g.points[g.options[idx]]
        yield sel


def _compositions(n: int, m: int) -> Iterator[tuple]:
    for cuts in itertools.combinations(range(n + m - 1), m - 1):
        prev = -1
        parts = []
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(n + m - 1 - prev - 1)
        yield tuple(parts)


def _surjections(n: int, u: int) -> int:
    return sum((-1) ** j * math.comb(u, j) * (u - j) ** n for j in range(u + 1))


def _plan_partition(scn: Scenario) -> tuple:
    X = scn.realizations()
    first = X[0]
    if any(x != first for x in X[1:]):
        raise PreconditionViolated("partition mode needs identical realizations on all atoms")
    branches = []
    for p in first.primitives:
        piece = LowerSet((p,), first.d)
        branches.append(candidate_points(piece, scn.engine))
    n, m = scn.space.n, len(branches)
    sizes = [len(b) for b in branches]
    symmetric = scn.risk.law_invariant and scn.space.is_uniform
    total = 0
    for u in range(1, m + 1):
        for used in itertools.combinations(range(m), u):
            ways = math.comb(n - 1, u - 1) if symmetric else _surjections(n, u)
            total += ways * math.prod(sizes[b] for b in used)

    def labelings():
        if symmetric:
            for parts in _compositions(n, m):
                yield np.repeat(np.arange(m), parts)
        else:
            for lab in itertools.product(range(m), repeat=n):
                yield np.array(lab)

    return branches, labelings, total


def _partition_blocks(scn, branches, labelings) -> Iterator[np.ndarray]:
    n, d = scn.space.n, scn.d
    for labels in labelings():
        used = list(np.unique(labels))
        ranges = [np.arange(len(branches[b])) for b in used]
        combo = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(len(used), -1).T
        sel = np.empty((len(combo), n, d))
        for pos, b in enumerate(used):
            atoms = np.nonzero(labels == b)[0]
            sel[:, atoms, :] = branches[b][combo[:, pos]][:, None, :]
        yield sel


def _risk_of_blocks(scn: Scenario, blocks: Iterator[np.ndarray]) -> np.ndarray:
    sp, spec = scn.space, scn.risk

    def work(sel):
        return pareto_points(vector_risk_batch(sel, sp, spec), maximal=False)

    threads = _threads(scn.engine)
    if threads == 1:
        parts = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    if not parts:
        return np.zeros((0, scn.d))
    return pareto_points(np.concatenate(parts, axis=0), maximal=False)


def selection_count(scn: Scenario) -> int:
    if scn.engine.mode == "partition":
        return _plan_partition(scn)[2]
    return _plan_general(scn)[3]


def selection_risk(scn: Scenario) -> RiskSetResult:
    """Discretized selection risk set of the scenario's portfolio."""
    if scn.engine.mode == "partition":
        return selection_risk_partition(scn)
    cands, plan, symmetric, total = _plan_general(scn)
    if total > scn.engine.selection_cap:
        raise SelectionBudgetExceeded(total, scn.engine.selection_cap)
    pts = _risk_of_blocks(scn, _general_blocks(scn, cands, plan, symmetric))
    return RiskSetResult(pts, flags={"selections": total, "mode": "general"})


def selection_risk_partition(scn: Scenario) -> RiskSetResult:
    """Selections constant on the cells of an atom partition, one cell per
    primitive of a deterministic portfolio."""
    branches, labelings, total = _plan_partition(scn)
    if total > scn.engine.selection_cap:
        raise SelectionBudgetExceeded(total, scn.engine.selection_cap)
    pts = _risk_of_blocks(scn, _partition_blocks(scn, branches, labelings))
    return RiskSetResult(pts, flags={"selections": total, "mode": "partition"})


def is_acceptable(scn: Scenario) -> bool:
    return selection_risk(scn).contains(np.zeros(scn.d))


# --------------------------------------------------------- expectations, rho_Z


def selection_expectation(X: Sequence[LowerSet], sp: ProbSpace) -> LowerSet:
    """Probability-weighted Minkowski sum of the realizations."""
    if len(X) != sp.n:
        raise DimensionMismatch(f"{len(X)} realizations for {sp.n} atoms")
    d = X[0].d
    out = None
    for x, p in zip(X, sp.probs):
        if x.d != d:
            raise DimensionMismatch("realizations differ in dimension")
        term = scale_coordinatewise(x, np.full(d, p))
        out = term if out is None else minkowski(out, term)
    return out


def _check_densities(Z, sp: ProbSpace, d: int) -> list:
    out = []
    for z in Z:
        vals = z.values if isinstance(z, RandomVector) else np.asarray(z, dtype=float)
        if vals.shape != (sp.n, d):
            raise InvalidDensity(f"density table must be {sp.n}x{d}")
        if np.any(~(vals > 0)):
            raise InvalidDensity("densities must be strictly positive")
        means = sp.probs @ vals
        if np.any(np.abs(means - 1.0) > 1e-9):
            raise InvalidDensity(f"density means {means.tolist()} differ from 1")
        out.append(vals)
    if not out:
        raise InvalidDensity("need at least one density")
    return out


def _candidate_normals(x) -> list:
    """Superset of the edge normals of the hull of a planar lower set."""
    if isinstance(x, ConvexLowerSet):
        return x.edge_normals()
    out = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    out += [np.asarray(h.normal) for h in x.halfspaces]
    apex = x.apexes()
    for a, b in itertools.combinations(apex, 2):
        w = np.array([abs(a[1] - b[1]), abs(b[0] - a[0])])
        if (a[0] - b[0]) * (a[1] - b[1]) < 0 and np.all(w > 0):
            out.append(w)
    return out


def _atomless_expectation(X, sp: ProbSpace, z: np.ndarray) -> ConvexUpperSet:
    """``E(-zeta X)`` when every atom is split into a non-atomic cell.

    Each cell then contributes ``p_i * (-zeta_i) * conv X_i``; the sum is
    described through support functions on a finite set of normals.
    """
    normals = []
    for x, zi in zip(X, z):
        normals += [w / zi for w in _candidate_normals(x)]
    cons = []
    for w in normals:
        w = w / w.sum()
        s = math.fsum(p * support(x, zi * w) for x, p, zi in zip(X, sp.probs, z))
        if math.isfinite(s):
            cons.append((tuple(w), -s))
    return ConvexUpperSet(tuple(cons))


def rho_Z(X: Sequence, sp: ProbSpace, Z, atomless: bool = False) -> RiskSetResult:
    """Intersection over densities ``zeta`` of ``E(-zeta X)``.

    With ``atomless=False`` the expectation is the selection expectation on
    the finite space itself.  With ``atomless=True`` every atom is treated as
    a non-atomic cell, so the expectation is convex (planar sets only).
    """
    d = X[0].d
    dens = _check_densities(Z, sp, d)
    if atomless:
        if d != 2:
            raise UnsupportedDimension("atomless expectations are planar only")
        sets = [_atomless_expectation(X, sp, z) for z in dens]
        cons = tuple(c for s in sets for c in s.constraints)
        cu = ConvexUpperSet(cons)
        return RiskSetResult(
            np.zeros((0, 2)), regions=(cu.boundary_at,), descriptor={"convex": cu}
        )
    lowers = []
    for z in dens:
        terms = [scale_coordinatewise(x, p * zi) for x, p, zi in zip(X, sp.probs, z)]
        acc = terms[0]
        for t in terms[1:]:
            acc = minkowski(acc, t)
        lowers.append(acc)
    try:
        acc = lowers[0]
        for l in lowers[1:]:
            acc = intersect(acc, l)
        return RiskSetResult.from_upper(negate(acc))
    except NotRepresentable:
        if d != 2:
            raise
    uppers = [RiskSetResult.from_upper(negate(l)) for l in lowers]

    def boundary(x, _u=uppers):
        return max(u.boundary_at(x) for u in _u)

    return RiskSetResult(np.zeros((0, 2)), regions=(boundary,), flags={"sampled": True})


# ----------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class RiskConvexity:
    ok: bool
    witness: Optional[dict] = None

    def __bool__(self):
        return self.ok


def is_risk_convex(F: LowerSet, spec: VectorRiskSpec, sp: ProbSpace, params: EngineParams) -> RiskConvexity:
    """Check that ``-rho(1_A x1 + 1_{A^c} x2)`` stays in ``F`` for every event
    ``A`` and every pair of candidate frontier points."""
    if F.d != 2 and not F.is_staircase:
        raise UnsupportedDimension("frontier sampling needs d = 2")
    cands = candidate_points(F, params)
    n = sp.n
    events = np.array(list(itertools.product([0, 1], repeat=n)), dtype=bool)
    k = len(cands)
    pairs = np.array(list(itertools.product(range(k), repeat=2)))
    for mask in events:
        sel = np.where(
            mask[None, :, None], cands[pairs[:, 0]][:, None, :], cands[pairs[:, 1]][:, None, :]
        )
        r = vector_risk_batch(sel, sp, spec)
        for row, (i, j) in zip(-r, pairs):
            if not F.contains(row):
                return RiskConvexity(
                    False,
                    {
                        "event": np.nonzero(mask)[0].tolist(),
                        "x1": cands[i].tolist(),
                        "x2": cands[j].tolist(),
                        "minus_risk": row.tolist(),
                    },
                )
    return RiskConvexity(True)


def convexity_defect(r: RiskSetResult, window, step: float) -> float:
    """Sup gap between a risk set's boundary and that of its convex hull."""
    if r.d != 2:
        raise UnsupportedDimension("convexity defect is planar only")
    curve = boundary_curve(r, window, step)
    return curve_sup_distance(curve, lower_convex_envelope(curve))
