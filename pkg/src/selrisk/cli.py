"""Command-line front end: ``selrisk compute | compare | props``."""
from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

import numpy as np

from . import closed_forms as cf
from .battery import SUITES, run_battery
from .errors import (
    NonConvexRisk,
    PreconditionViolated,
    SchemaError,
    SelectionBudgetExceeded,
    SelRiskError,
)
from .lowerset_geom import (
    MEMBER_TOL,
    BoundaryCurve,
    RiskSetResult,
    boundary_curve,
)
from .scalar_risk import AVaR, Distortion, EssInf, avar_distortion
from .scenario_io import load_scenario
from .selection_engine import (
    FiniteTransfers,
    FixedCost,
    HalfSpaceTransfer,
    Scenario,
    selection_risk,
)

EXIT_OK, EXIT_SCHEMA, EXIT_BUDGET, EXIT_PRECONDITION, EXIT_TOLERANCE, EXIT_PROPS = range(6)


# --------------------------------------------------------------- closed forms


def _require(cond: bool, msg: str):
    if not cond:
        raise PreconditionViolated(msg)


def _zero_c(scn: Scenario):
    _require(not np.any(scn.portfolio.C.values), "closed form needs C = 0")


def _avar_alpha(scn: Scenario) -> float:
    comps = scn.risk.components
    _require(
        scn.d == 2 and all(isinstance(c, AVaR) for c in comps) and comps[0] == comps[1],
        "closed form needs two identical AVaR components",
    )
    return comps[0].alpha


def _distortion(scn: Scenario):
    comps = scn.risk.components
    _require(scn.d == 2 and comps[0] == comps[1], "closed form needs identical components")
    c = comps[0]
    if isinstance(c, AVaR):
        return avar_distortion(c.alpha)
    _require(isinstance(c, Distortion), "closed form needs a distortion risk measure")
    return c.g


def _fixed_cost(scn: Scenario):
    _require(isinstance(scn.portfolio, FixedCost), "closed form needs a fixed_cost portfolio")
    _zero_c(scn)


def _transfers(scn: Scenario, k: int) -> np.ndarray:
    pf = scn.portfolio
    _require(isinstance(pf, FiniteTransfers), "closed form needs a finite_transfers portfolio")
    _zero_c(scn)
    M = pf.M
    nonzero = M[np.any(M != 0, axis=1)]
    _require(len(M) == k and len(nonzero) == k - 1, f"closed form needs the origin plus {k - 1} transfer points")
    return nonzero


def _cf_ikappa_avar(scn):
    _fixed_cost(scn)
    return cf.ikappa_avar_riskset(scn.portfolio.kappa, _avar_alpha(scn))


def _cf_ikappa_avar_sampled(scn):
    _fixed_cost(scn)
    B = cf.b_rho_avar(_avar_alpha(scn))
    return cf.ikappa_avar_sampled(B, scn.portfolio.kappa, window=scn.engine.window, step=scn.engine.grid_step)


def _cf_ht(scn):
    _require(isinstance(scn.portfolio, HalfSpaceTransfer), "closed form needs a halfspace portfolio")
    return cf.ht_closed_form(scn.portfolio.C, scn.portfolio.t, scn.risk, scn.space)


def _cf_two_point(scn):
    (p,) = _transfers(scn, 2)
    return cf.two_point_riskset(p[0], p[1], _distortion(scn))


def _cf_three_point(scn):
    pts = _transfers(scn, 3)
    p1, p3 = sorted(map(tuple, pts))
    return cf.three_point_riskset(p1, p3, _distortion(scn))


def _cf_fixed_points(scn):
    _require(all(isinstance(c, EssInf) for c in scn.risk.components), "closed form needs essinf components")
    return cf.fixed_point_riskset(scn.realizations())


CLOSED_FORMS = {
    "ikappa_avar": _cf_ikappa_avar,
    "ikappa_avar_sampled": _cf_ikappa_avar_sampled,
    "ht": _cf_ht,
    "two_point": _cf_two_point,
    "three_point": _cf_three_point,
    "fixed_points": _cf_fixed_points,
}


def closed_form(name: str, scn: Scenario) -> RiskSetResult:
    return CLOSED_FORMS[name](scn)


# ------------------------------------------------------------------- output


def fmt(v: float) -> str:
    """Shortest decimal string that reads back to the same double."""
    return repr(float(v) + 0.0)


def curve_rows(curve: BoundaryCurve) -> list:
    return [(x, y) for x, y in zip(curve.xs, curve.ys) if y != math.inf]


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in rows:
            fh.write(f"{fmt(x)},{fmt(y)}\n")


def write_svg(path, rows, window, size: int = 400, pad: int = 20):
    """Plot the CSV rows as one polyline over the window, with both axes."""
    (x0, x1), (y0, y1) = window

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (size - 2 * pad)

    def py(y):
        y = min(max(y, y0), y1)
        return size - pad - (y - y0) / (y1 - y0) * (size - 2 * pad)

    pts = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in rows)
    ax = min(max(0.0, x0), x1)
    ay = min(max(0.0, y0), y1)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}">',
        f'<line class="axis" x1="{px(x0):.3f}" y1="{py(ay):.3f}" x2="{px(x1):.3f}" y2="{py(ay):.3f}" stroke="gray"/>',
        f'<line class="axis" x1="{px(ax):.3f}" y1="{py(y0):.3f}" x2="{px(ax):.3f}" y2="{py(y1):.3f}" stroke="gray"/>',
        f'<polyline points="{pts}" fill="none" stroke="black"/>',
        "</svg>",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _curve(res: RiskSetResult, scn: Scenario) -> BoundaryCurve:
    return boundary_curve(res, scn.engine.window, scn.engine.grid_step)


# ----------------------------------------------------------------- commands


def cmd_compute(args) -> int:
    scn = load_scenario(args.scenario)
    res = closed_form(args.closed_form, scn) if args.closed_form else selection_risk(scn)
    rows = curve_rows(_curve(res, scn))
    write_csv(args.out, rows)
    if args.svg:
        write_svg(args.svg, rows, scn.engine.window)
    return EXIT_OK


def compare_curves(oracle: BoundaryCurve, closed: BoundaryCurve, y_range) -> tuple:
    """Per-abscissa gaps within the vertical range, and whether the oracle
    set lies inside the closed-form set."""
    lo, hi = y_range
    contained = True
    rows = []
    for x, yo, yc in zip(oracle.xs, oracle.ys, closed.ys):
        if yo != math.inf and yo < yc - MEMBER_TOL:
            contained = False
        a, b = min(max(yo, lo), hi), min(max(yc, lo), hi)
        rows.append((x, yo, yc, abs(a - b)))
    return rows, contained


def cmd_compare(args) -> int:
    scn = load_scenario(args.scenario)
    closed = _curve(closed_form(args.closed_form, scn), scn)
    oracle = _curve(selection_risk(scn), scn)
    rows, contained = compare_curves(oracle, closed, scn.engine.window[1])
    with open(args.report, "w", newline="") as fh:
        fh.write("x,oracle_y,closed_y,gap\n")
        for r in rows:
            fh.write(",".join(fmt(v) for v in r) + "\n")
    gap = max((r[3] for r in rows), default=0.0)
    if not contained or gap > args.tol:
        print(
            f"tolerance exceeded: sup gap {fmt(gap)} (tol {fmt(args.tol)}), "
            f"oracle inside closed form: {contained}",
            file=sys.stderr,
        )
        return EXIT_TOLERANCE
    print(f"sup gap {fmt(gap)}")
    return EXIT_OK


def cmd_props(args) -> int:
    suites = [args.suite] if args.suite else None
    ok = True
    for rep in run_battery(args.seed, args.cases, suites):
        print(f"{rep.name}: {'PASS' if rep.ok else 'FAIL'} ({rep.cases} cases)")
        if not rep.ok:
            ok = False
            print(f"  {rep.failure}")
            print("  minimal reproduction:")
            print(rep.reproduction)
    return EXIT_OK if ok else EXIT_PROPS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selrisk", description="Selection risk sets of set-valued portfolios.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="write the boundary curve of a scenario's risk set")
    c.add_argument("--scenario", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--svg")
    c.add_argument("--closed-form", choices=sorted(CLOSED_FORMS))
    c.set_defaults(func=cmd_compute)

    m = sub.add_parser("compare", help="compare the oracle with a closed form")
    m.add_argument("--scenario", required=True)
    m.add_argument("--closed-form", required=True, choices=sorted(CLOSED_FORMS))
    m.add_argument("--tol", type=float, required=True)
    m.add_argument("--report", required=True)
    m.set_defaults(func=cmd_compare)

    r = sub.add_parser("props", help="run the randomized property battery")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--cases", type=int, default=200)
    r.add_argument("--suite", choices=sorted(SUITES))
    r.set_defaults(func=cmd_props)
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except SelectionBudgetExceeded as e:
        print(f"selection budget exceeded: {e.required} selections required, cap {e.cap}", file=sys.stderr)
        return EXIT_BUDGET
    except (PreconditionViolated, NonConvexRisk) as e:
        print(f"closed-form precondition violated: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (SelRiskError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
