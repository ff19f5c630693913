"""Function representations and the infimum value function.

Three carriers:

* `SampledFn` -- extended-real values on a finite grid of points.  Grid
  conjugation and every duality audit treat the grid itself as the space,
  so off-grid queries are errors, not interpolations.
* `PwAffine1` -- exact 1-D piecewise-affine functions over the rationals,
  with per-piece open/closed endpoints and infinite constant pieces.
* `PerturbFn` -- a bivariate perturbation function over X x Y, either a
  small expression tree (affine, abs, indicator of an `EPolyhedron`, sum,
  pointwise max/min, affine precomposition) or an explicit table.  All
  sums inside expressions use the extended-real conventions, so they
  propagate into every derived object.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

from econvex.esets import EPolyhedron, Interval1
from econvex.extreal import NEG_INF, POS_INF, ExtReal, fold_sum
from econvex import extreal

__all__ = [
    "Grid",
    "SampledFn",
    "PwAffine1",
    "Expr",
    "Affine",
    "Abs",
    "Indicator",
    "Sum",
    "Max",
    "Min",
    "Precompose",
    "PerturbFn",
    "product_grid",
    "infimum_value_function",
    "restrict_to_zero",
    "slice_x",
    "materialize",
]

Point = Tuple  # tuple of scalars, one per coordinate


def _coerce_scalar(v, backend: str):
    if backend == "rational":
        return Fraction(v)
    if backend == "float":
        return float(v)
    raise ValueError(f"unknown backend {backend!r}")


def _coerce_point(p, dim: int, backend: str) -> Point:
    if not isinstance(p, (tuple, list)):
        p = (p,)
    if len(p) != dim:
        raise ValueError(f"point {p!r} does not have dimension {dim}")
    return tuple(_coerce_scalar(v, backend) for v in p)


class Grid:
    """Finite ordered list of pairwise-distinct points in a fixed dimension."""

    def __init__(self, dim: int, points: Iterable, backend: str = "rational"):
        if dim < 1:
            raise ValueError("grid dimension must be positive")
        self.dim = dim
        self.backend = backend
        self.points: Tuple[Point, ...] = tuple(
            _coerce_point(p, dim, backend) for p in points
        )
        self._index: Dict[Point, int] = {}
        for i, p in enumerate(self.points):
            if p in self._index:
                raise ValueError(f"duplicate grid point {p!r}")
            self._index[p] = i

    @classmethod
    def uniform(cls, lo, hi, count: int, backend: str = "rational") -> "Grid":
        """Uniform 1-D grid from lo to hi inclusive."""
        if count < 1:
            raise ValueError("count must be positive")
        if count == 1:
            return cls(1, [(lo,)], backend)
        if backend == "rational":
            lo, hi = Fraction(lo), Fraction(hi)
            step = Fraction(hi - lo, count - 1)
            pts = [(lo + i * step,) for i in range(count)]
        else:
            lo, hi = float(lo), float(hi)
            pts = [(lo + i * (hi - lo) / (count - 1),) for i in range(count)]
        return cls(1, pts, backend)

    @property
    def origin(self) -> Point:
        return tuple(_coerce_scalar(0, self.backend) for _ in range(self.dim))

    @property
    def has_origin(self) -> bool:
        return self.origin in self._index

    def index_of(self, point) -> int:
        p = _coerce_point(point, self.dim, self.backend)
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"point {point!r} is not on the grid") from None

    def __contains__(self, point) -> bool:
        try:
            self.index_of(point)
            return True
        except (KeyError, ValueError):
            return False

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


class SampledFn:
    """Extended-real function known on a grid, one value per point."""

    def __init__(self, grid, values: Sequence[ExtReal]):
        values = tuple(values)
        if len(values) != len(grid.points):
            raise ValueError("values must align one-to-one with grid points")
        self.grid = grid
        self.values = values

    def value_at(self, point) -> ExtReal:
        return self.values[self.grid.index_of(point)]

    def items(self):
        return zip(self.grid.points, self.values)

    def dom_points(self) -> Tuple[Point, ...]:
        """Points where the function is below +inf."""
        return tuple(p for p, v in self.items() if v < POS_INF)

    @property
    def is_proper(self) -> bool:
        return all(v > NEG_INF for v in self.values) and bool(self.dom_points())

    @classmethod
    def from_callable(cls, grid, fn) -> "SampledFn":
        return cls(grid, [fn(p) for p in grid.points])


# ---------------------------------------------------------------------------
# Exact 1-D piecewise-affine functions
# ---------------------------------------------------------------------------

PieceValue = Union[Tuple[Fraction, Fraction], ExtReal]  # (slope, intercept) or +-inf


class PwAffine1:
    """Exact 1-D piecewise-affine function; pieces tile the line."""

    def __init__(self, pieces: Sequence[Tuple[Interval1, PieceValue]]):
        pieces = [p for p in pieces if not p[0].is_empty]
        pieces.sort(key=lambda p: (p[0].lo, not p[0].lo_open))
        self.pieces: Tuple[Tuple[Interval1, PieceValue], ...] = tuple(pieces)
        self._check_tiling()

    def _check_tiling(self):
        if not self.pieces:
            raise ValueError("a piecewise function needs at least one piece")
        first, last = self.pieces[0][0], self.pieces[-1][0]
        if first.lo != NEG_INF or last.hi != POS_INF:
            raise ValueError("pieces must cover the whole line")
        for (a, _), (b, _) in zip(self.pieces, self.pieces[1:]):
            if a.hi != b.lo or a.hi_open == b.lo_open:
                raise ValueError(
                    f"pieces must tile without gap or overlap near {a.hi}"
                )

    def value(self, x) -> ExtReal:
        x = Fraction(x)
        for interval, val in self.pieces:
            if interval.contains(x):
                if isinstance(val, ExtReal):
                    return val
                slope, intercept = val
                return ExtReal(slope * x + intercept)
        raise AssertionError("pieces tile the line")  # pragma: no cover

    def sample(self, grid: Grid) -> SampledFn:
        if grid.dim != 1 or grid.backend != "rational":
            raise ValueError("PwAffine1 samples onto 1-D rational grids")
        return SampledFn(grid, [self.value(p[0]) for p in grid.points])

    # -- common constructors -----------------------------------------------

    @staticmethod
    def affine(slope, intercept=0) -> "PwAffine1":
        return PwAffine1(
            [(Interval1.whole_line(), (Fraction(slope), Fraction(intercept)))]
        )

    @staticmethod
    def abs_fn() -> "PwAffine1":
        zero = ExtReal(0)
        return PwAffine1(
            [
                (Interval1(NEG_INF, True, zero, True), (Fraction(-1), Fraction(0))),
                (Interval1(zero, False, POS_INF, True), (Fraction(1), Fraction(0))),
            ]
        )

    @staticmethod
    def indicator(interval: Interval1) -> "PwAffine1":
        """0 on the interval, +inf outside."""
        if interval.is_empty:
            return PwAffine1([(Interval1.whole_line(), POS_INF)])
        pieces = [(interval, (Fraction(0), Fraction(0)))]
        if interval.lo != NEG_INF:
            pieces.append(
                (Interval1(NEG_INF, True, interval.lo, not interval.lo_open), POS_INF)
            )
        if interval.hi != POS_INF:
            pieces.append(
                (Interval1(interval.hi, not interval.hi_open, POS_INF, True), POS_INF)
            )
        return PwAffine1(pieces)

    @staticmethod
    def indicator_leq(c) -> "PwAffine1":
        return PwAffine1.indicator(Interval1(NEG_INF, True, ExtReal(Fraction(c)), False))


# ---------------------------------------------------------------------------
# Perturbation functions
# ---------------------------------------------------------------------------

AffineForm = Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...], Fraction]  # (cx, cy, const)


def _form(cx, cy, const=0) -> AffineForm:
    return (
        tuple(Fraction(c) for c in cx),
        tuple(Fraction(c) for c in cy),
        Fraction(const),
    )


def _eval_form(form: AffineForm, x: Point, y: Point, backend: str):
    cx, cy, const = form
    if len(cx) != len(x) or len(cy) != len(y):
        raise ValueError("affine form dimensions do not match the point")
    if backend == "float":
        total = float(const)
        for c, v in zip(cx, x):
            total += float(c) * v
        for c, v in zip(cy, y):
            total += float(c) * v
        return total
    total = const
    for c, v in zip(cx, x):
        total += c * v
    for c, v in zip(cy, y):
        total += c * v
    return total


class Expr:
    """Node of the perturbation-function expression grammar."""

    def evaluate(self, x: Point, y: Point, backend: str) -> ExtReal:
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(Expr):
    form: AffineForm

    @staticmethod
    def of(cx, cy, const=0) -> "Affine":
        return Affine(_form(cx, cy, const))

    def evaluate(self, x, y, backend):
        return ExtReal(_eval_form(self.form, x, y, backend))


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    def evaluate(self, x, y, backend):
        v = self.arg.evaluate(x, y, backend)
        if not v.is_finite:
            return POS_INF
        return ExtReal(abs(v.value))


@dataclass(frozen=True)
class Indicator(Expr):
    """0 where the affinely mapped point lies in the set, +inf outside.

    ``rows`` holds one affine form per coordinate of the set.  Containment
    uses exact comparisons in the rational backend and raw IEEE
    comparisons in the float backend; never a tolerance.
    """

    polyhedron: EPolyhedron
    rows: Tuple[AffineForm, ...]

    @staticmethod
    def of(polyhedron, rows) -> "Indicator":
        return Indicator(polyhedron, tuple(_form(*r) for r in rows))

    def evaluate(self, x, y, backend):
        if len(self.rows) != self.polyhedron.dim:
            raise ValueError("one affine row per polyhedron coordinate required")
        mapped = tuple(_eval_form(r, x, y, backend) for r in self.rows)
        for c in self.polyhedron.constraints:
            lhs = _eval_form((c.normal, (), Fraction(0)), mapped, (), backend)
            rhs = float(c.offset) if backend == "float" else c.offset
            ok = lhs < rhs if c.strict else lhs <= rhs
            if not ok:
                return POS_INF
        return ExtReal(_coerce_scalar(0, backend))


@dataclass(frozen=True)
class Sum(Expr):
    terms: Tuple[Expr, ...]

    def evaluate(self, x, y, backend):
        return fold_sum(t.evaluate(x, y, backend) for t in self.terms)


@dataclass(frozen=True)
class Max(Expr):
    terms: Tuple[Expr, ...]

    def evaluate(self, x, y, backend):
        return extreal.sup(t.evaluate(x, y, backend) for t in self.terms)


@dataclass(frozen=True)
class Min(Expr):
    terms: Tuple[Expr, ...]

    def evaluate(self, x, y, backend):
        return extreal.inf(t.evaluate(x, y, backend) for t in self.terms)


@dataclass(frozen=True)
class Precompose(Expr):
    """Evaluate ``inner`` at affine images of (x, y)."""

    inner: Expr
    x_rows: Tuple[AffineForm, ...]
    y_rows: Tuple[AffineForm, ...]

    def evaluate(self, x, y, backend):
        x2 = tuple(_eval_form(r, x, y, backend) for r in self.x_rows)
        y2 = tuple(_eval_form(r, x, y, backend) for r in self.y_rows)
        return self.inner.evaluate(x2, y2, backend)


class PerturbFn:
    """Bivariate perturbation function, expression- or table-backed."""

    def __init__(
        self,
        x_dim: int,
        y_dim: int,
        expr: Optional[Expr] = None,
        table: Optional[Dict[Tuple[Point, Point], ExtReal]] = None,
    ):
        if (expr is None) == (table is None):
            raise ValueError("exactly one of expr or table must be given")
        self.x_dim = x_dim
        self.y_dim = y_dim
        self.expr = expr
        self.table = table

    def value(self, x, y, backend: str = "rational") -> ExtReal:
        x = _coerce_point(x, self.x_dim, backend)
        y = _coerce_point(y, self.y_dim, backend)
        if self.expr is not None:
            return self.expr.evaluate(x, y, backend)
        try:
            return self.table[(x, y)]
        except KeyError:
            raise KeyError(f"({x!r}, {y!r}) is not in the table") from None


def product_grid(x_grid: Grid, y_grid: Grid) -> Grid:
    """Grid over X x Y with concatenated coordinates, x-major order."""
    if x_grid.backend != y_grid.backend:
        raise ValueError("product grids need a common backend")
    pts = [x + y for x, y in itertools.product(x_grid.points, y_grid.points)]
    return Grid(x_grid.dim + y_grid.dim, pts, x_grid.backend)


def split_point(p: Point, x_dim: int) -> Tuple[Point, Point]:
    return p[:x_dim], p[x_dim:]


def infimum_value_function(phi: PerturbFn, x_grid: Grid, y_grid: Grid) -> SampledFn:
    """p(y) = inf over the x-grid of phi(x, y)."""
    backend = y_grid.backend
    vals = [
        extreal.inf(phi.value(x, y, backend) for x in x_grid.points)
        for y in y_grid.points
    ]
    return SampledFn(y_grid, vals)


def restrict_to_zero(phi: PerturbFn, x_grid: Grid, y_grid: Grid) -> SampledFn:
    """The map x -> phi(x, 0); requires the origin on the y-grid."""
    if not y_grid.has_origin:
        raise ValueError("the origin is missing from the y-grid")
    backend = x_grid.backend
    origin = y_grid.origin
    return SampledFn(x_grid, [phi.value(x, origin, backend) for x in x_grid.points])


def slice_x(phi: PerturbFn, x, y_grid: Grid) -> SampledFn:
    """The map y -> phi(x, y); its dom_points() realize Y_x on the grid."""
    backend = y_grid.backend
    return SampledFn(y_grid, [phi.value(x, y, backend) for y in y_grid.points])


def materialize(phi: PerturbFn, x_grid: Grid, y_grid: Grid) -> PerturbFn:
    """Tabulate an expression-backed phi over the grid product."""
    backend = x_grid.backend
    table = {
        (x, y): phi.value(x, y, backend)
        for x in x_grid.points
        for y in y_grid.points
    }
    return PerturbFn(phi.x_dim, phi.y_dim, table=table)
