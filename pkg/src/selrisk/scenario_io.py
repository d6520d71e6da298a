"""JSON scenario files: validation, parsing and serialization."""
from __future__ import annotations

import json
import math

import numpy as np

from .errors import SchemaError, SelRiskError
from .lowerset_geom import Full, HalfSpace, LowerSet, Orthant
from .prob_core import RandomVector, make_space
from .scalar_risk import (
    AVaR,
    Distortion,
    DistortionFunction,
    EssInf,
    NegExpectation,
    ScenarioMax,
    VectorRiskSpec,
)
from .selection_engine import (
    Custom,
    EngineParams,
    FiniteTransfers,
    FixedCost,
    HalfSpaceTransfer,
    Scenario,
)

TOP_KEYS = {"space", "dimension", "risk", "portfolio", "engine"}
RISK_KEYS = {
    "essinf": set(),
    "neg_expectation": set(),
    "avar": {"alpha"},
    "distortion": {"knots"},
    "scenario_max": {"densities", "penalties"},
}
PORTFOLIO_KEYS = {
    "fixed_cost": ({"kappa"}, {"C"}),
    "halfspace": ({"t"}, {"C"}),
    "finite_transfers": ({"M"}, {"C"}),
    "custom": ({"atoms"}, set()),
}
ENGINE_KEYS = {"grid_step", "window", "selection_cap", "mode", "sample_window", "threads"}


def _keys(obj, where: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    for k in obj:
        if k not in required | set(optional):
            raise SchemaError(f"{where}.{k}" if where else k, "unknown key")
    for k in required:
        if k not in obj:
            raise SchemaError(f"{where}.{k}" if where else k, "missing key")


def _num(v, key: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(key, f"expected a finite number, got {v!r}")
    return float(v)


def _vec(v, key: str, d=None) -> np.ndarray:
    if not isinstance(v, list):
        raise SchemaError(key, "expected an array")
    out = np.array([_num(x, key) for x in v])
    if d is not None and len(out) != d:
        raise SchemaError(key, f"expected {d} entries, got {len(out)}")
    return out


def _matrix(v, key: str, d=None) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise SchemaError(key, "expected a nonempty array of rows")
    return np.array([_vec(row, key, d) for row in v])


def _risk(obj, i: int, n: int):
    where = f"risk[{i}]"
    if not isinstance(obj, dict) or obj.get("kind") not in RISK_KEYS:
        raise SchemaError(f"{where}.kind", f"expected one of {sorted(RISK_KEYS)}")
    kind = obj["kind"]
    _keys(obj, where, {"kind"} | RISK_KEYS[kind])
    if kind == "essinf":
        return EssInf()
    if kind == "neg_expectation":
        return NegExpectation()
    if kind == "avar":
        return AVaR(_num(obj["alpha"], f"{where}.alpha"))
    if kind == "distortion":
        knots = _matrix(obj["knots"], f"{where}.knots", 2)
        return Distortion(DistortionFunction(tuple(map(tuple, knots))))
    dens = _matrix(obj["densities"], f"{where}.densities", n)
    pens = _vec(obj["penalties"], f"{where}.penalties", len(dens))
    return ScenarioMax(tuple(dens), tuple(pens))


def _primitive(obj, key: str, d: int):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SchemaError(key, "expected exactly one of orthant, halfspace, full")
    (kind, val), = obj.items()
    if kind == "orthant":
        return Orthant(tuple(_vec(val, f"{key}.orthant", d)))
    if kind == "halfspace":
        _keys(val, f"{key}.halfspace", {"normal", "offset"})
        return HalfSpace.make(
            _vec(val["normal"], f"{key}.halfspace.normal", d),
            _num(val["offset"], f"{key}.halfspace.offset"),
        )
    if kind == "full":
        if val is not True:
            raise SchemaError(f"{key}.full", "expected true")
        return Full(d)
    raise SchemaError(f"{key}.{kind}", "unknown key")


def _portfolio(obj, n: int, d: int):
    if not isinstance(obj, dict) or obj.get("kind") not in PORTFOLIO_KEYS:
        raise SchemaError("portfolio.kind", f"expected one of {sorted(PORTFOLIO_KEYS)}")
    kind = obj["kind"]
    req, opt = PORTFOLIO_KEYS[kind]
    _keys(obj, "portfolio", {"kind"} | req, opt)
    if kind == "custom":
        atoms = obj["atoms"]
        if not isinstance(atoms, list) or len(atoms) != n:
            raise SchemaError("portfolio.atoms", f"expected {n} atoms")
        X = []
        for i, prims in enumerate(atoms):
            if not isinstance(prims, list) or not prims:
                raise SchemaError(f"portfolio.atoms[{i}]", "expected a nonempty array")
            X.append(
                LowerSet([_primitive(p, f"portfolio.atoms[{i}][{j}]", d) for j, p in enumerate(prims)], d)
            )
        return Custom(X)
    C = _matrix(obj["C"], "portfolio.C", d) if "C" in obj else np.zeros((n, d))
    if len(C) != n:
        raise SchemaError("portfolio.C", f"expected {n} rows")
    C = RandomVector(C)
    if kind == "fixed_cost":
        return FixedCost(C, _num(obj["kappa"], "portfolio.kappa"))
    if kind == "halfspace":
        return HalfSpaceTransfer(C, _num(obj["t"], "portfolio.t"))
    return FiniteTransfers(C, _matrix(obj["M"], "portfolio.M", d))


def _window(v, key: str, d: int) -> tuple:
    rows = _matrix(v, key, 2)
    if len(rows) != d or np.any(rows[:, 0] >= rows[:, 1]):
        raise SchemaError(key, f"expected {d} increasing (lo, hi) pairs")
    return tuple(map(tuple, rows))


def _engine(obj, d: int) -> EngineParams:
    _keys(obj, "engine", set(), ENGINE_KEYS)
    kw = {}
    if "grid_step" in obj:
        kw["grid_step"] = _num(obj["grid_step"], "engine.grid_step")
    for k in ("window", "sample_window"):
        if k in obj:
            kw[k] = _window(obj[k], f"engine.{k}", d)
    for k in ("selection_cap", "threads"):
        if k in obj:
            v = obj[k]
            if isinstance(v, bool) or not isinstance(v, int):
                raise SchemaError(f"engine.{k}", "expected an integer")
            kw[k] = v
    if "mode" in obj:
        kw["mode"] = obj["mode"]
    try:
        return EngineParams(**kw)
    except ValueError as e:
        raise SchemaError("engine", str(e)) from None


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded scenario document and build the scenario.

    Any problem is reported as a ``SchemaError`` naming the offending key.
    """
    _keys(doc, "", TOP_KEYS, set())
    d = doc["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SchemaError("dimension", "expected a positive integer")
    probs = _vec(doc["space"], "space")
    try:
        sp = make_space(probs)
    except SelRiskError as e:
        raise SchemaError("space", str(e)) from None
    risks = doc["risk"]
    if not isinstance(risks, list) or len(risks) != d:
        raise SchemaError("risk", f"expected {d} component specs")
    try:
        comps = [_risk(r, i, sp.n) for i, r in enumerate(risks)]
        spec = VectorRiskSpec(tuple(comps))
        for c in comps:
            if isinstance(c, ScenarioMax):
                c.check_space(sp)
        portfolio = _portfolio(doc["portfolio"], sp.n, d)
    except SchemaError:
        raise
    except (SelRiskError, ValueError) as e:
        raise SchemaError(getattr(e, "key", "risk/portfolio"), str(e)) from None
    return Scenario(sp, spec, portfolio, _engine(doc["engine"], d))


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError("<document>", f"invalid JSON: {e}") from None
    return parse_scenario(doc)


# ---------------------------------------------------------------- serializing


def _risk_doc(r) -> dict:
    if isinstance(r, EssInf):
        return {"kind": "essinf"}
    if isinstance(r, NegExpectation):
        return {"kind": "neg_expectation"}
    if isinstance(r, AVaR):
        return {"kind": "avar", "alpha": r.alpha}
    if isinstance(r, Distortion):
        return {"kind": "distortion", "knots": [list(k) for k in r.g.knots]}
    return {
        "kind": "scenario_max",
        "densities": [z.tolist() for z in r.densities],
        "penalties": list(r.penalties),
    }


def _primitive_doc(p) -> dict:
    if isinstance(p, Orthant):
        return {"orthant": list(p.apex)}
    if isinstance(p, HalfSpace):
        return {"halfspace": {"normal": list(p.normal), "offset": p.offset}}
    return {"full": True}


def scenario_doc(scn: Scenario) -> dict:
    """Inverse of ``parse_scenario``."""
    pf = scn.portfolio
    if isinstance(pf, Custom):
        port = {"kind": "custom", "atoms": [[_primitive_doc(p) for p in x.primitives] for x in pf.X]}
    else:
        port = {"C": pf.C.values.tolist()}
        if isinstance(pf, FixedCost):
            port.update(kind="fixed_cost", kappa=pf.kappa)
        elif isinstance(pf, HalfSpaceTransfer):
            port.update(kind="halfspace", t=pf.t)
        else:
            port.update(kind="finite_transfers", M=pf.M.tolist())
    e = scn.engine
    eng = {
        "grid_step": e.grid_step,
        "window": [list(w) for w in e.window],
        "selection_cap": e.selection_cap,
        "mode": e.mode,
    }
    if e.sample_window is not None:
        eng["sample_window"] = [list(w) for w in e.sample_window]
    return {
        "space": scn.space.probs.tolist(),
        "dimension": scn.d,
        "risk": [_risk_doc(r) for r in scn.risk.components],
        "portfolio": port,
        "engine": eng,
    }
