"""Problem-file schema: UTF-8 JSON with exact rationals as "p/q" strings.

Two kinds of file: ``"problem"`` (a perturbation function with its grids)
and ``"eset"`` (a halfspace-intersection set definition).  Unknown keys
are rejected so that typos fail loudly; rational-backend files must not
contain JSON floats, which keeps exactness alive across serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from econvex.conjugation import DualGrid, pair_tensor_dual_grid, tensor_dual_grid
from econvex.duality import PerturbationProblem
from econvex.esets import EPolyhedron, Halfspace
from econvex.funcrep import (
    Abs,
    Affine,
    Expr,
    Grid,
    Indicator,
    Max,
    Min,
    PerturbFn,
    Precompose,
    Sum,
    _form,
)

__all__ = ["InputError", "ProblemFile", "EsetFile", "load", "loads", "save_text", "boundary_warnings"]


class InputError(ValueError):
    """Schema violation, named field included in the message."""


def _require_keys(obj: dict, required, optional=(), where: str = "object"):
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise InputError(f"{where}: missing field(s) {', '.join(missing)}")
    unknown = [k for k in obj if k not in set(required) | set(optional)]
    if unknown:
        raise InputError(f"{where}: unknown field(s) {', '.join(unknown)}")


def _num(v, backend: str, where: str):
    if backend == "rational":
        if isinstance(v, bool) or isinstance(v, float):
            raise InputError(
                f"{where}: rational backend requires integers or 'p/q' strings, got {v!r}"
            )
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, str):
            try:
                return Fraction(v)
            except (ValueError, ZeroDivisionError):
                raise InputError(f"{where}: cannot parse rational {v!r}") from None
        raise InputError(f"{where}: bad number {v!r}")
    if isinstance(v, bool):
        raise InputError(f"{where}: bad number {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot parse number {v!r}") from None
    raise InputError(f"{where}: bad number {v!r}")


def _vec(v, dim: int, backend: str, where: str) -> Tuple:
    if not isinstance(v, list):
        v = [v]
    if len(v) != dim:
        raise InputError(f"{where}: expected {dim} coordinate(s), got {len(v)}")
    return tuple(_num(c, backend, where) for c in v)


def _rational_vec(v, dim: int, where: str) -> Tuple:
    return _vec(v, dim, "rational", where)


def _parse_eset(obj: dict, where: str) -> EPolyhedron:
    _require_keys(obj, ["dim", "constraints"], (), where)
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise InputError(f"{where}.dim: must be a positive integer")
    constraints = []
    for i, c in enumerate(obj["constraints"]):
        cw = f"{where}.constraints[{i}]"
        _require_keys(c, ["a", "b", "strict"], (), cw)
        if not isinstance(c["strict"], bool):
            raise InputError(f"{cw}.strict: must be a boolean")
        constraints.append(
            Halfspace(
                _rational_vec(c["a"], dim, f"{cw}.a"),
                _num(c["b"], "rational", f"{cw}.b"),
                c["strict"],
            )
        )
    return EPolyhedron(dim, constraints)


def _parse_form(obj: dict, x_dim: int, y_dim: int, where: str):
    _require_keys(obj, [], ("x", "y", "const"), where)
    cx = _rational_vec(obj.get("x", [0] * x_dim), x_dim, f"{where}.x")
    cy = _rational_vec(obj.get("y", [0] * y_dim), y_dim, f"{where}.y")
    const = _num(obj.get("const", 0), "rational", f"{where}.const")
    return _form(cx, cy, const)


def _parse_expr(obj: dict, x_dim: int, y_dim: int, where: str) -> Expr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise InputError(f"{where}: expected an expression object with 'op'")
    op = obj["op"]
    if op == "affine":
        _require_keys(obj, ["op"], ("x", "y", "const"), where)
        return Affine(_parse_form({k: v for k, v in obj.items() if k != "op"}, x_dim, y_dim, where))
    if op == "abs":
        _require_keys(obj, ["op", "arg"], (), where)
        return Abs(_parse_expr(obj["arg"], x_dim, y_dim, f"{where}.arg"))
    if op in ("sum", "max", "min"):
        _require_keys(obj, ["op", "terms"], (), where)
        terms = tuple(
            _parse_expr(t, x_dim, y_dim, f"{where}.terms[{i}]")
            for i, t in enumerate(obj["terms"])
        )
        if not terms:
            raise InputError(f"{where}.terms: must not be empty")
        return {"sum": Sum, "max": Max, "min": Min}[op](terms)
    if op == "indicator":
        _require_keys(obj, ["op", "set", "rows"], (), where)
        poly = _parse_eset(obj["set"], f"{where}.set")
        rows = tuple(
            _parse_form(r, x_dim, y_dim, f"{where}.rows[{i}]")
            for i, r in enumerate(obj["rows"])
        )
        if len(rows) != poly.dim:
            raise InputError(f"{where}.rows: need one row per set coordinate")
        return Indicator(poly, rows)
    if op == "precompose":
        _require_keys(obj, ["op", "arg", "x_rows", "y_rows"], (), where)
        x_rows = tuple(
            _parse_form(r, x_dim, y_dim, f"{where}.x_rows[{i}]")
            for i, r in enumerate(obj["x_rows"])
        )
        y_rows = tuple(
            _parse_form(r, x_dim, y_dim, f"{where}.y_rows[{i}]")
            for i, r in enumerate(obj["y_rows"])
        )
        inner = _parse_expr(obj["arg"], len(x_rows), len(y_rows), f"{where}.arg")
        return Precompose(inner, x_rows, y_rows)
    raise InputError(f"{where}.op: unknown operation {op!r}")


def _parse_grid(obj, dim: int, backend: str, where: str) -> Grid:
    if isinstance(obj, dict) and "points" in obj:
        _require_keys(obj, ["points"], (), where)
        pts = [_vec(p, dim, backend, f"{where}.points[{i}]") for i, p in enumerate(obj["points"])]
        return Grid(dim, pts, backend)
    if isinstance(obj, dict) and {"lo", "hi", "count"} <= set(obj):
        _require_keys(obj, ["lo", "hi", "count"], (), where)
        if dim != 1:
            raise InputError(f"{where}: lo/hi/count ranges are 1-D; use explicit points")
        if not isinstance(obj["count"], int) or obj["count"] < 1:
            raise InputError(f"{where}.count: must be a positive integer")
        return Grid.uniform(
            _num(obj["lo"], backend, f"{where}.lo"),
            _num(obj["hi"], backend, f"{where}.hi"),
            obj["count"],
            backend,
        )
    raise InputError(f"{where}: expected {{points}} or {{lo, hi, count}}")


@dataclass
class ProblemFile:
    """Validated problem file; ``build()`` assembles the grid problem."""

    name: str
    x_dim: int
    y_dim: int
    backend: str
    tolerance: float
    phi: PerturbFn
    x_grid: Grid
    y_grid: Grid
    dual_y_grid: DualGrid
    full_dual_pairs: DualGrid
    raw: dict

    def build(self) -> PerturbationProblem:
        return PerturbationProblem(
            self.phi,
            self.x_grid,
            self.y_grid,
            self.dual_y_grid,
            self.full_dual_pairs,
            name=self.name,
            tolerance=self.tolerance,
        )


@dataclass
class EsetFile:
    name: str
    polyhedron: EPolyhedron
    raw: dict


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("top level: expected an object with a 'kind' field")
    if obj["kind"] == "eset":
        _require_keys(obj, ["kind", "name", "set"], (), "top level")
        return EsetFile(str(obj["name"]), _parse_eset(obj["set"], "set"), obj)
    if obj["kind"] != "problem":
        raise InputError(f"kind: unknown kind {obj['kind']!r}")

    _require_keys(
        obj,
        ["kind", "name", "x_dim", "y_dim", "backend", "phi", "grids"],
        ("tolerance",),
        "top level",
    )
    x_dim, y_dim = obj["x_dim"], obj["y_dim"]
    for label, d in (("x_dim", x_dim), ("y_dim", y_dim)):
        if not isinstance(d, int) or d < 1:
            raise InputError(f"{label}: must be a positive integer")
    backend = obj["backend"]
    if backend not in ("rational", "float"):
        raise InputError("backend: must be 'rational' or 'float'")
    tolerance = obj.get("tolerance", 1e-9)
    if not isinstance(tolerance, (int, float)) or isinstance(tolerance, bool) or tolerance < 0:
        raise InputError("tolerance: must be a nonnegative number")

    grids = obj["grids"]
    _require_keys(
        grids,
        ["x", "y", "ystar", "vstar", "alpha"],
        ("xstar", "ustar"),
        "grids",
    )
    x_grid = _parse_grid(grids["x"], x_dim, backend, "grids.x")
    y_grid = _parse_grid(grids["y"], y_dim, backend, "grids.y")
    if not y_grid.has_origin:
        raise InputError("grids.y: the origin must be a member (0 in the y-grid)")

    def veclist(key, dim, default=None):
        if key not in grids:
            return [tuple(_num(0, backend, key) for _ in range(dim))] if default else None
        return [
            _vec(v, dim, backend, f"grids.{key}[{i}]")
            for i, v in enumerate(grids[key])
        ]

    ystars = veclist("ystar", y_dim)
    vstars = veclist("vstar", y_dim)
    alphas = [_num(a, backend, f"grids.alpha[{i}]") for i, a in enumerate(grids["alpha"])]
    if any(a <= 0 for a in alphas):
        raise InputError("grids.alpha: duality requires every alpha > 0")
    xstars = veclist("xstar", x_dim, default=True)
    ustars = veclist("ustar", x_dim, default=True)

    dual_y = tensor_dual_grid(ystars, vstars, alphas, backend)
    pairs = pair_tensor_dual_grid(xstars, ystars, ustars, vstars, alphas, backend)

    phi = PerturbFn(x_dim, y_dim, expr=_parse_expr(obj["phi"], x_dim, y_dim, "phi"))
    return ProblemFile(
        name=str(obj["name"]),
        x_dim=x_dim,
        y_dim=y_dim,
        backend=backend,
        tolerance=float(tolerance),
        phi=phi,
        x_grid=x_grid,
        y_grid=y_grid,
        dual_y_grid=dual_y,
        full_dual_pairs=pairs,
        raw=obj,
    )


def load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return loads(text)


def save_text(raw: dict) -> str:
    """Canonical serialization; reloading reproduces identical grids."""
    return json.dumps(raw, indent=2, sort_keys=True) + "\n"


def boundary_coincidences(P: PerturbationProblem) -> List[Tuple[str, Tuple, object]]:
    """Grid points landing exactly on a coupling boundary <., u*> = alpha.

    A boundary coincidence flips which branch of the coupling fires under
    the smallest perturbation of the data, so the loader surfaces them.
    Returns (space, point, dual point) rows.
    """
    out = []
    for w in P.dual_y_grid.points:
        for y in P.y_grid.points:
            if _dot(y, w.ustar) == w.alpha:
                out.append(("y", y, w))
    for flat in P.full_dual_grid.points:
        for p in P.product.points:
            if _dot(p, flat.ustar) == flat.alpha:
                out.append(("(x,y)", p, flat))
    return out


def boundary_warnings(P: PerturbationProblem) -> List[str]:
    """Coincidence report grouped per dual point, one line each."""
    groups: Dict[Tuple[str, object], List[Tuple]] = {}
    for space, point, w in boundary_coincidences(P):
        groups.setdefault((space, w), []).append(point)
    lines = []
    for (space, w), points in groups.items():
        lines.append(
            f"{len(points)} {space}-grid point(s) lie exactly on the coupling "
            f"boundary of {w} (first: {points[0]})"
        )
    return lines


def _dot(a, b):
    total = 0
    for u, v in zip(a, b):
        total += u * v
    return total
