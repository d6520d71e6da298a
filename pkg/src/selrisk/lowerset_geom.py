"""Exact algebra of lower closed sets built from orthants and half-spaces.

A :class:`LowerSet` is a finite union of primitives:

* ``Orthant(apex)``       -- ``apex + R_-^d``
* ``HalfSpace(n, t)``     -- ``{x : n.x <= t}`` with ``n >= 0`` and ``sum(n) == 1``
* ``Full(d)``             -- all of ``R^d``

This class is closed under union, Minkowski sums, translation and positive
coordinatewise scaling, which is everything the selection machinery needs.
Intersections may leave the class; :func:`intersect` then raises
:class:`NotRepresentable`.  Boundary sampling is implemented for ``d == 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGeneratorSet,
    GridMismatch,
    NonPositiveScale,
    NotRepresentable,
    UnsupportedDimension,
)

MEMBER_TOL = 1e-9
EXACT_TOL = 1e-12
GRID_DECIMALS = 12

Point = tuple


def _pt(x) -> tuple:
    return tuple(float(v) for v in np.asarray(x, dtype=float).ravel())


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Abscissae ``lo, lo+step, ...`` up to ``hi``, rounded to 12 decimals."""
    if not step > 0:
        raise ValueError("grid step must be positive")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), GRID_DECIMALS)


# ------------------------------------------------------------------ primitives


@dataclass(frozen=True, order=True)
class Orthant:
    apex: tuple

    @property
    def d(self):
        return len(self.apex)

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        return all(xi <= ai + tol for xi, ai in zip(x, self.apex))


@dataclass(frozen=True, order=True)
class HalfSpace:
    normal: tuple
    offset: float

    @classmethod
    def make(cls, normal, offset) -> "HalfSpace":
        n = np.asarray(normal, dtype=float)
        if np.any(n < 0) or not np.any(n > 0):
            raise ValueError("half-space normal must be nonnegative and nonzero")
        s = float(n.sum())
        return cls(_pt(n / s), float(offset) / s)

    @classmethod
    def sum_le(cls, t: float, d: int = 2) -> "HalfSpace":
        """``H_t = {x : x_1 + ... + x_d <= t}``."""
        return cls.make(np.ones(d), t)

    @property
    def d(self):
        return len(self.normal)

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        return float(np.dot(self.normal, x)) <= self.offset + tol


@dataclass(frozen=True, order=True)
class Full:
    d: int

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        return True


Primitive = Union[Orthant, HalfSpace, Full]


def _same_normal(n, m) -> bool:
    return all(abs(a - b) <= EXACT_TOL for a, b in zip(n, m))


def primitive_subset(p: Primitive, q: Primitive) -> bool:
    """Exact containment ``p <= q`` between primitives."""
    if isinstance(q, Full):
        return True
    if isinstance(p, Full):
        return False
    if isinstance(p, Orthant):
        if isinstance(q, Orthant):
            return all(a <= b + EXACT_TOL for a, b in zip(p.apex, q.apex))
        return float(np.dot(q.normal, p.apex)) <= q.offset + EXACT_TOL
    if isinstance(q, Orthant):
        return False
    return _same_normal(p.normal, q.normal) and p.offset <= q.offset + EXACT_TOL


def _sort_key(p: Primitive):
    if isinstance(p, Orthant):
        return (0, p.apex, 0.0)
    if isinstance(p, HalfSpace):
        return (1, p.normal, p.offset)
    return (2, (), 0.0)


def prune(prims: Iterable[Primitive]) -> tuple:
    """Drop primitives contained in another one; sort canonically."""
    items = sorted(set(prims), key=_sort_key)
    # merge half-spaces whose normals agree up to rounding
    kept: list = []
    for p in items:
        if isinstance(p, Full):
            return (p,)
        kept.append(p)
    out = []
    for i, p in enumerate(kept):
        dominated = False
        for j, q in enumerate(kept):
            if i == j:
                continue
            if primitive_subset(p, q):
                # among mutually-contained primitives keep the first one
                if primitive_subset(q, p) and j > i:
                    continue
                dominated = True
                break
        if not dominated:
            out.append(p)
    return tuple(out)


# ------------------------------------------------------------------- lower set


@dataclass(frozen=True)
class LowerSet:
    primitives: tuple
    d: int

    def __post_init__(self):
        prims = tuple(self.primitives)
        if not prims:
            raise EmptyGeneratorSet("a lower set needs at least one primitive")
        for p in prims:
            if p.d != self.d:
                raise DimensionMismatch(f"primitive of dimension {p.d} in a {self.d}-d set")
        object.__setattr__(self, "primitives", prune(prims))

    @property
    def orthants(self) -> list:
        return [p for p in self.primitives if isinstance(p, Orthant)]

    @property
    def halfspaces(self) -> list:
        return [p for p in self.primitives if isinstance(p, HalfSpace)]

    @property
    def is_full(self) -> bool:
        return any(isinstance(p, Full) for p in self.primitives)

    @property
    def is_staircase(self) -> bool:
        return all(isinstance(p, Orthant) for p in self.primitives)

    def apexes(self) -> np.ndarray:
        pts = [p.apex for p in self.orthants]
        return np.array(pts, dtype=float).reshape(len(pts), self.d)

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        return contains(self, x, tol)

    def __repr__(self):
        parts = []
        for p in self.primitives:
            if isinstance(p, Orthant):
                parts.append(f"O{p.apex}")
            elif isinstance(p, HalfSpace):
                parts.append(f"H({p.normal}<={p.offset})")
            else:
                parts.append("Full")
        return "LowerSet[" + " u ".join(parts) + "]"


@dataclass(frozen=True)
class UpperSet:
    """The reflection ``-L`` of a lower set ``L``."""

    mirror: LowerSet

    @property
    def d(self) -> int:
        return self.mirror.d

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        return self.mirror.contains(-np.asarray(x, dtype=float), tol)

    def minimal_points(self) -> np.ndarray:
        return -self.mirror.apexes()

    def upper_halfspaces(self) -> tuple:
        """Half-space components as ``(n, level)`` meaning ``n.x >= level``."""
        return tuple((h.normal, -h.offset) for h in self.mirror.halfspaces)


def orthant(apex) -> LowerSet:
    a = _pt(apex)
    return LowerSet((Orthant(a),), len(a))


def halfspace(normal, offset) -> LowerSet:
    h = HalfSpace.make(normal, offset)
    return LowerSet((h,), h.d)


def i_kappa(kappa: float, d: int = 2) -> LowerSet:
    """Positions reachable at price zero under a fixed transfer cost."""
    return LowerSet((Orthant((0.0,) * d), HalfSpace.sum_le(-kappa, d)), d)


def h_t(t: float, d: int = 2) -> LowerSet:
    return LowerSet((HalfSpace.sum_le(t, d),), d)


def lower_from_generators(points) -> LowerSet:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise EmptyGeneratorSet("no generators given")
    pts = pts.reshape(len(pts), -1)
    return LowerSet(tuple(Orthant(_pt(p)) for p in pts), pts.shape[1])


def _check_dim(a, b):
    if a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d} differ")


def union(a: LowerSet, b: LowerSet) -> LowerSet:
    _check_dim(a, b)
    return LowerSet(a.primitives + b.primitives, a.d)


def _prim_sum(p: Primitive, q: Primitive) -> Primitive:
    if isinstance(p, Full) or isinstance(q, Full):
        return Full(p.d)
    if isinstance(p, Orthant) and isinstance(q, Orthant):
        return Orthant(_pt(np.add(p.apex, q.apex)))
    if isinstance(p, HalfSpace) and isinstance(q, Orthant):
        p, q = q, p
    if isinstance(p, Orthant):
        return HalfSpace(q.normal, q.offset + float(np.dot(q.normal, p.apex)))
    if _same_normal(p.normal, q.normal):
        return HalfSpace(p.normal, p.offset + q.offset)
    return Full(p.d)


def minkowski(a: LowerSet, b: LowerSet) -> LowerSet:
    _check_dim(a, b)
    return LowerSet(tuple(_prim_sum(p, q) for p in a.primitives for q in b.primitives), a.d)


def translate(a, v):
    """Shift a lower or upper set by the vector ``v``."""
    if isinstance(a, UpperSet):
        return UpperSet(translate(a.mirror, -np.asarray(v, dtype=float)))
    v = np.asarray(v, dtype=float)
    if v.shape != (a.d,):
        raise DimensionMismatch(f"shift of shape {v.shape} for a {a.d}-d set")
    out = []
    for p in a.primitives:
        if isinstance(p, Orthant):
            out.append(Orthant(_pt(np.add(p.apex, v))))
        elif isinstance(p, HalfSpace):
            out.append(HalfSpace(p.normal, p.offset + float(np.dot(p.normal, v))))
        else:
            out.append(p)
    return LowerSet(tuple(out), a.d)


def scale_coordinatewise(a: LowerSet, z) -> LowerSet:
    """The set ``{z * x : x in a}`` for a strictly positive vector ``z``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (a.d,):
        raise DimensionMismatch(f"scale of shape {z.shape} for a {a.d}-d set")
    if np.any(~(z > 0)):
        raise NonPositiveScale(f"scale factors must be > 0, got {z.tolist()}")
    out = []
    for p in a.primitives:
        if isinstance(p, Orthant):
            out.append(Orthant(_pt(z * np.asarray(p.apex))))
        elif isinstance(p, HalfSpace):
            out.append(HalfSpace.make(np.asarray(p.normal) / z, p.offset))
        else:
            out.append(p)
    return LowerSet(tuple(out), a.d)


def scale(a: LowerSet, c: float) -> LowerSet:
    return scale_coordinatewise(a, np.full(a.d, float(c)))


def negate(a):
    """Reflection through the origin: lower sets become upper sets and back."""
    if isinstance(a, UpperSet):
        return a.mirror
    return UpperSet(a)


def contains(a, x, tol=MEMBER_TOL) -> bool:
    if isinstance(a, UpperSet):
        return a.contains(x, tol)
    x = np.asarray(x, dtype=float)
    if x.shape != (a.d,):
        raise DimensionMismatch(f"point of shape {x.shape} for a {a.d}-d set")
    return any(p.contains(x, tol) for p in a.primitives)


def _prim_intersect(p: Primitive, q: Primitive) -> Optional[Primitive]:
    """Exact intersection, or ``None`` when it leaves the primitive class."""
    if isinstance(p, Full):
        return q
    if isinstance(q, Full):
        return p
    if isinstance(p, Orthant) and isinstance(q, Orthant):
        return Orthant(_pt(np.minimum(p.apex, q.apex)))
    if primitive_subset(p, q):
        return p
    if primitive_subset(q, p):
        return q
    return None


def intersect(a: LowerSet, b: LowerSet) -> LowerSet:
    """Exact intersection by distributing over the two unions."""
    _check_dim(a, b)
    exact, loose = [], []
    for p in a.primitives:
        for q in b.primitives:
            r = _prim_intersect(p, q)
            if r is None:
                loose.append((p, q))
            else:
                exact.append(r)
    for p, q in loose:
        # p & q is harmless if either factor already sits inside an exact term
        if not any(primitive_subset(p, t) or primitive_subset(q, t) for t in exact):
            raise NotRepresentable(f"{p} & {q} is not a union of primitives")
    return LowerSet(tuple(exact), a.d)


def fixed_points(per_atom: Sequence[LowerSet]) -> LowerSet:
    """Points lying in every realization (the atoms all carry positive mass)."""
    out = per_atom[0]
    for s in per_atom[1:]:
        out = intersect(out, s)
    return out


# ----------------------------------------------------------------- convex hull


def _upper_hull(points: np.ndarray) -> np.ndarray:
    """Upper concave chain of 2-d points, sorted by x (monotone chain)."""
    pts = sorted(set(map(tuple, points)))
    hull: list = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull, dtype=float)


@dataclass(frozen=True)
class ConvexLowerSet:
    """Closed convex lower set in the plane.

    Exactly one description is active: ``full``; a single ``halfspace``; or a
    concave ``chain`` of vertices (x ascending, y descending) meaning the
    region below the chain, closed off by a horizontal ray on the left and a
    vertical ray on the right.
    """

    chain: tuple = ()
    halfspace: Optional[HalfSpace] = None
    full: bool = False
    d: int = 2

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        if self.full:
            return True
        if self.halfspace is not None:
            return self.halfspace.contains(x, tol)
        return self.frontier_y(x[0]) >= x[1] - tol

    def frontier_y(self, x: float) -> float:
        """``max{y : (x, y) in set}``; ``-inf`` when the column is empty."""
        if self.full:
            return math.inf
        if self.halfspace is not None:
            n, t = self.halfspace.normal, self.halfspace.offset
            if n[1] > 0:
                return (t - n[0] * x) / n[1]
            return math.inf if n[0] * x <= t + EXACT_TOL else -math.inf
        xs = [v[0] for v in self.chain]
        ys = [v[1] for v in self.chain]
        if x > xs[-1] + EXACT_TOL:
            return -math.inf
        if x <= xs[0]:
            return ys[0]
        return float(np.interp(x, xs, ys))

    def support(self, v) -> float:
        """``sup{v.x : x in set}`` for a direction ``v >= 0``."""
        v = np.asarray(v, dtype=float)
        if self.full:
            return 0.0 if not np.any(v) else math.inf
        if self.halfspace is not None:
            return _halfspace_support(self.halfspace, v)
        return float(max(np.dot(v, c) for c in self.chain))

    def edge_normals(self) -> list:
        if self.full:
            return []
        if self.halfspace is not None:
            return [np.asarray(self.halfspace.normal)]
        out = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        for (x1, y1), (x2, y2) in zip(self.chain, self.chain[1:]):
            out.append(np.array([y1 - y2, x2 - x1]))
        return out


def _halfspace_support(h: HalfSpace, v: np.ndarray) -> float:
    if not np.any(v):
        return 0.0
    lam = v.sum()
    if _same_normal(tuple(v / lam), h.normal):
        return lam * h.offset
    return math.inf


def convex_hull(a: LowerSet) -> ConvexLowerSet:
    if a.d != 2:
        raise UnsupportedDimension("convex hulls are implemented for d = 2")
    if a.is_full:
        return ConvexLowerSet(full=True)
    normals = {h.normal for h in a.halfspaces}
    if len(normals) > 1:
        # two non-parallel half-planes already span the plane
        return ConvexLowerSet(full=True)
    apexes = a.apexes()
    if normals:
        h = a.halfspaces[0]
        top = max([h.offset] + [float(np.dot(h.normal, p)) for p in apexes])
        return ConvexLowerSet(halfspace=HalfSpace(h.normal, top))
    chain = _upper_hull(apexes)
    return ConvexLowerSet(chain=tuple(map(tuple, chain)))


def support(a, v) -> float:
    """Support function of a lower set (or its hull) in a direction ``v >= 0``."""
    if isinstance(a, ConvexLowerSet):
        return a.support(v)
    v = np.asarray(v, dtype=float)
    best = -math.inf
    for p in a.primitives:
        if isinstance(p, Orthant):
            best = max(best, float(np.dot(v, p.apex)))
        elif isinstance(p, HalfSpace):
            best = max(best, _halfspace_support(p, v))
        else:
            return 0.0 if not np.any(v) else math.inf
    return best


# ------------------------------------------------------- 2-d frontier sampling


def frontier_y(a: LowerSet, x: float) -> float:
    """``max{y : (x, y) in a}`` for a planar lower set."""
    if a.d != 2:
        raise UnsupportedDimension("frontier evaluation needs d = 2")
    best = -math.inf
    for p in a.primitives:
        if isinstance(p, Orthant):
            if x <= p.apex[0] + EXACT_TOL:
                best = max(best, p.apex[1])
        elif isinstance(p, HalfSpace):
            n, t = p.normal, p.offset
            if n[1] > 0:
                best = max(best, (t - n[0] * x) / n[1])
            elif n[0] * x <= t + EXACT_TOL:
                return math.inf
        else:
            return math.inf
    return best


def _window_box(window):
    """Accept ``(xmin, xmax)`` or ``((xmin, xmax), (ymin, ymax))``."""
    w = tuple(window)
    if len(w) == 2 and np.ndim(w[0]) == 0:
        return (float(w[0]), float(w[1])), (-math.inf, math.inf)
    (x0, x1), (y0, y1) = w
    return (float(x0), float(x1)), (float(y0), float(y1))


def pareto_points(points, maximal: bool = True) -> np.ndarray:
    """Non-dominated rows of ``points``, sorted lexicographically.

    ``maximal=True`` keeps points not below another point (frontier of a
    lower set); ``maximal=False`` keeps minimal points (upper sets).
    Exact duplicates collapse; no tolerance is applied.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
    pts = np.unique(pts, axis=0)
    if not maximal:
        return -pareto_points(-pts, maximal=True)[::-1]
    d = pts.shape[1]
    if d == 1:
        return pts[-1:]
    if d == 2:
        # sweep x descending; keep strictly increasing y
        order = np.lexsort((-pts[:, 1], -pts[:, 0]))
        keep = []
        best = -math.inf
        for i in order:
            if pts[i, 1] > best:
                keep.append(i)
                best = pts[i, 1]
        out = pts[sorted(keep)]
        return out[np.lexsort((out[:, 1], out[:, 0]))]
    keep = np.ones(len(pts), dtype=bool)
    for i in range(len(pts)):
        if not keep[i]:
            continue
        dom = np.all(pts >= pts[i], axis=1) & np.any(pts > pts[i], axis=1)
        if dom.any():
            keep[i] = False
    return pts[keep]


def pareto_sample(a: LowerSet, window, step: float) -> np.ndarray:
    """Sampled Pareto frontier of a planar lower set on a grid of abscissae."""
    if a.d != 2:
        raise UnsupportedDimension("frontier sampling needs d = 2")
    (x0, x1), (y0, y1) = _window_box(window)
    pts = []
    for x in grid(x0, x1, step):
        y = frontier_y(a, x)
        if y == math.inf:
            y = y1
        if not math.isfinite(y) or y < y0 - EXACT_TOL:
            continue
        pts.append((x, round(y, GRID_DECIMALS)))
    pts.extend(map(tuple, a.apexes()))
    if not pts:
        return np.zeros((0, 2))
    return pareto_points(pts, maximal=True)


# ------------------------------------------------------------- curves, results


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Lower-left boundary ``b(x)`` of a planar upper set on a grid.

    ``inf`` marks abscissae where the set is empty.
    """

    window: tuple
    xs: np.ndarray
    ys: np.ndarray

    def nonempty(self):
        mask = np.isfinite(self.ys) | (self.ys == -math.inf)
        return self.xs[mask], self.ys[mask]


def _upper_boundary(normal, level, x: float) -> float:
    n1, n2 = normal
    if n2 > 0:
        return (level - n1 * x) / n2
    return -math.inf if n1 * x >= level - EXACT_TOL else math.inf


@dataclass(frozen=True, eq=False)
class ConvexUpperSet:
    """Intersection of upper half-spaces ``{y : w.y >= h}`` with ``w >= 0``."""

    constraints: tuple

    def contains(self, y, tol=MEMBER_TOL) -> bool:
        return all(float(np.dot(w, y)) >= h - tol for w, h in self.constraints)

    def boundary_at(self, x: float) -> float:
        """Smallest ``y`` with ``(x, y)`` in the set (d = 2)."""
        best = -math.inf
        for w, h in self.constraints:
            if h == -math.inf:
                continue
            if h == math.inf:
                return math.inf
            best = max(best, _upper_boundary(w, h, x))
        return best


@dataclass(frozen=True, eq=False)
class RiskSetResult:
    """An upper set: union of orthants ``p + R_+^d``, upper half-spaces and
    extra planar regions given by their boundary functions.

    ``halfspaces`` entries are ``(n, level)`` meaning ``{x : n.x >= level}``.
    ``regions`` entries map an abscissa to the smallest ordinate in that
    component (``inf`` when empty).
    """

    minimal_points: np.ndarray
    halfspaces: tuple = ()
    regions: tuple = ()
    curve: Optional[BoundaryCurve] = None
    descriptor: Optional[dict] = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.minimal_points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(0 if pts.size == 0 else 1, -1)
        if pts.size:
            pts = pareto_points(pts, maximal=False)
        object.__setattr__(self, "minimal_points", pts)

    @property
    def d(self) -> int:
        if self.minimal_points.size:
            return self.minimal_points.shape[1]
        if self.halfspaces:
            return len(self.halfspaces[0][0])
        return 2

    @classmethod
    def from_upper(cls, u: UpperSet, **kw) -> "RiskSetResult":
        pts = u.minimal_points()
        hs = u.upper_halfspaces()
        if u.mirror.is_full:
            hs = hs + ((tuple([1.0 / u.d] * u.d), -math.inf),)
        return cls(pts.reshape(len(pts), u.d), hs, **kw)

    def contains(self, x, tol=MEMBER_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if self.minimal_points.size and np.any(
            np.all(self.minimal_points <= x + tol, axis=1)
        ):
            return True
        for n, level in self.halfspaces:
            if float(np.dot(n, x)) >= level - tol:
                return True
        for b in self.regions:
            if b(float(x[0])) <= x[1] + tol:
                return True
        return False

    def boundary_at(self, x: float) -> float:
        best = math.inf
        if self.minimal_points.size:
            if self.minimal_points.shape[1] != 2:
                raise UnsupportedDimension("boundary curves need d = 2")
            mask = self.minimal_points[:, 0] <= x + EXACT_TOL
            if mask.any():
                best = float(self.minimal_points[mask, 1].min())
        for n, level in self.halfspaces:
            best = min(best, _upper_boundary(n, level, x))
        for b in self.regions:
            best = min(best, b(x))
        return best

    def with_curve(self, window, step) -> "RiskSetResult":
        return RiskSetResult(
            self.minimal_points,
            self.halfspaces,
            self.regions,
            boundary_curve(self, window, step),
            self.descriptor,
            dict(self.flags),
        )


def boundary_curve(r: RiskSetResult, window, step: float) -> BoundaryCurve:
    if r.d != 2:
        raise UnsupportedDimension("boundary curves need d = 2")
    (x0, x1), _ = _window_box(window)
    xs = grid(x0, x1, step)
    ys = np.array([r.boundary_at(x) for x in xs])
    return BoundaryCurve((x0, x1), xs, ys)


def clip_curve(curve: BoundaryCurve, y_range) -> BoundaryCurve:
    """Restrict a curve to a vertical range: ordinates above the top (empty
    sets included) become the top, those below the bottom become the bottom."""
    lo, hi = y_range
    return BoundaryCurve(curve.window, curve.xs, np.clip(curve.ys, lo, hi))


def curve_sup_distance(a: BoundaryCurve, b: BoundaryCurve) -> float:
    if a.xs.shape != b.xs.shape or not np.allclose(a.xs, b.xs, rtol=0, atol=EXACT_TOL):
        raise GridMismatch("curves are sampled on different grids")
    worst = 0.0
    for ya, yb in zip(a.ys, b.ys):
        if ya == yb:
            continue
        gap = abs(ya - yb)
        worst = max(worst, gap)
    return worst


def curve_excess(inner: BoundaryCurve, outer: BoundaryCurve) -> float:
    """How far ``inner`` dips below ``outer``; ``<= 0`` means containment."""
    if inner.xs.shape != outer.xs.shape:
        raise GridMismatch("curves are sampled on different grids")
    worst = -math.inf
    for yi, yo in zip(inner.ys, outer.ys):
        if yi == math.inf:
            continue
        worst = max(worst, yo - yi if yo != yi else 0.0)
    return worst if worst != -math.inf else 0.0


def lower_convex_envelope(curve: BoundaryCurve) -> BoundaryCurve:
    """Boundary of the convex hull of the region above ``curve``."""
    xs, ys = curve.xs, curve.ys
    mask = np.isfinite(ys)
    pts = np.column_stack([xs[mask], ys[mask]])
    out = np.full_like(ys, math.inf)
    if len(pts) == 0:
        return BoundaryCurve(curve.window, xs, out)
    hull: list = []
    for p in pts:
        while len(hull) >= 2:
            (xa, ya), (xb, yb) = hull[-2], hull[-1]
            if (xb - xa) * (p[1] - ya) - (yb - ya) * (p[0] - xa) <= 0:
                hull.pop()
            else:
                break
        hull.append(tuple(p))
    hx = [h[0] for h in hull]
    hy = [h[1] for h in hull]
    out[mask] = np.interp(xs[mask], hx, hy)
    return BoundaryCurve(curve.window, xs, out)
