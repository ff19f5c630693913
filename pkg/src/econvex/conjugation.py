"""Coupling functions and the associated conjugation operators.

The dual space is W = X* x X* x R.  The coupling of a point x with
w = (x*, u*, alpha) is <x, x*> when <x, u*> < alpha and +inf otherwise;
its partner couples the same pair in the opposite order with the same
value.  Conjugates are suprema of coupling-minus-function and, on grids,
are taken over the grid as the space: no interpolation, no extrapolation,
and the strict gate is evaluated with an exact rational comparison or a
raw IEEE one -- never a tolerance.

Functions of two blocks of variables are conjugated with the paired
coupling on (X x Y) x ((X* x Y*) x (X* x Y*) x R); since inner products
split over concatenation, a paired dual point is just a dual point of the
product space, which is what :meth:`DualPairPoint.flatten` returns.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from econvex.extreal import NEG_INF, POS_INF, ExtReal
from econvex import extreal
from econvex.funcrep import Grid, PwAffine1, SampledFn

__all__ = [
    "DualPoint",
    "DualPairPoint",
    "DualGrid",
    "coupling_c",
    "coupling_cprime",
    "coupling_cbar",
    "c_conjugate",
    "cprime_conjugate",
    "biconjugate",
    "econvex_hull_approx",
    "c_conjugate_exact",
    "tensor_dual_grid",
    "pair_tensor_dual_grid",
    "adapted_dual_grid",
    "embed_pair",
    "parallel_map",
]


def _dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ValueError("dimension mismatch in inner product")
    total = 0
    for x, y in zip(a, b):
        total += x * y
    return total


def _coerce_vec(v, backend: str) -> Tuple:
    if not isinstance(v, (tuple, list)):
        v = (v,)
    if backend == "rational":
        return tuple(Fraction(c) for c in v)
    return tuple(float(c) for c in v)


def _coerce_scalar(v, backend: str):
    return Fraction(v) if backend == "rational" else float(v)


@dataclass(frozen=True)
class DualPoint:
    """An element (x*, u*, alpha) of W = X* x X* x R."""

    xstar: Tuple
    ustar: Tuple
    alpha: object

    @staticmethod
    def of(xstar, ustar, alpha, backend: str = "rational") -> "DualPoint":
        return DualPoint(
            _coerce_vec(xstar, backend),
            _coerce_vec(ustar, backend),
            _coerce_scalar(alpha, backend),
        )

    @property
    def dim(self) -> int:
        return len(self.xstar)

    def __post_init__(self):
        if len(self.xstar) != len(self.ustar):
            raise ValueError("xstar and ustar must share the primal dimension")


@dataclass(frozen=True)
class DualPairPoint:
    """An element ((x*, y*), (u*, v*), alpha) of the paired dual space."""

    xstar: Tuple
    ystar: Tuple
    ustar: Tuple
    vstar: Tuple
    alpha: object

    @staticmethod
    def of(xstar, ystar, ustar, vstar, alpha, backend: str = "rational") -> "DualPairPoint":
        return DualPairPoint(
            _coerce_vec(xstar, backend),
            _coerce_vec(ystar, backend),
            _coerce_vec(ustar, backend),
            _coerce_vec(vstar, backend),
            _coerce_scalar(alpha, backend),
        )

    def __post_init__(self):
        if len(self.xstar) != len(self.ustar) or len(self.ystar) != len(self.vstar):
            raise ValueError("paired dual point blocks must match dimensions")

    def flatten(self) -> DualPoint:
        """The same functional on the product space X x Y."""
        return DualPoint(self.xstar + self.ystar, self.ustar + self.vstar, self.alpha)

    def x_side(self) -> DualPoint:
        """Projection onto W = X* x X* x R."""
        return DualPoint(self.xstar, self.ustar, self.alpha)

    def y_side(self) -> DualPoint:
        return DualPoint(self.ystar, self.vstar, self.alpha)


def embed_pair(w: DualPoint, x_dim: int, backend: str = "rational") -> DualPairPoint:
    """Lift a Y-side dual point (y*, v*, alpha) to ((0, y*), (0, v*), alpha)."""
    zero = tuple(_coerce_scalar(0, backend) for _ in range(x_dim))
    return DualPairPoint(zero, w.xstar, zero, w.ustar, w.alpha)


class DualGrid:
    """Finite list of pairwise-distinct dual points, usable as a grid."""

    def __init__(self, points: Iterable, backend: str = "rational"):
        self.points = tuple(points)
        self.backend = backend
        self._index = {}
        for i, p in enumerate(self.points):
            if p in self._index:
                raise ValueError(f"duplicate dual point {p!r}")
            self._index[p] = i

    @property
    def alpha_positive(self) -> bool:
        return all(p.alpha > 0 for p in self.points)

    def index_of(self, point) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise KeyError(f"dual point {point!r} is not on the grid") from None

    def __contains__(self, point) -> bool:
        return point in self._index

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def tensor_dual_grid(
    xstars, ustars, alphas, backend: str = "rational"
) -> DualGrid:
    """Tensor product of slope lists and an alpha list."""
    pts = [
        DualPoint.of(xs, us, a, backend)
        for xs in xstars
        for us in ustars
        for a in alphas
    ]
    return DualGrid(pts, backend)


def pair_tensor_dual_grid(
    xstars, ystars, ustars, vstars, alphas, backend: str = "rational"
) -> DualGrid:
    pts = [
        DualPairPoint.of(xs, ys, us, vs, a, backend)
        for xs in xstars
        for ys in ystars
        for us in ustars
        for vs in vstars
        for a in alphas
    ]
    return DualGrid(pts, backend)


def adapted_dual_grid(f: PwAffine1, alphas, ustars=((0,),)) -> DualGrid:
    """Dual grid whose x* list carries the slopes of f's affine pieces.

    Conjugating an affine function recovers it exactly once its slope is
    on the dual grid, so adapted grids make the biconjugate gap vanish.
    """
    slopes = []
    for _, val in f.pieces:
        if not isinstance(val, ExtReal):
            s = (val[0],)
            if s not in slopes:
                slopes.append(s)
    if (Fraction(0),) not in slopes:
        slopes.append((Fraction(0),))
    return tensor_dual_grid(slopes, ustars, alphas, "rational")


# ---------------------------------------------------------------------------
# Couplings
# ---------------------------------------------------------------------------


def coupling_c(x, w: DualPoint) -> ExtReal:
    """<x, x*> if <x, u*> < alpha, +inf otherwise."""
    if _dot(x, w.ustar) < w.alpha:
        return ExtReal(_dot(x, w.xstar))
    return POS_INF


def coupling_cprime(w: DualPoint, x) -> ExtReal:
    """The partner coupling; same value with arguments swapped."""
    return coupling_c(x, w)


def coupling_cbar(x, y, pair: DualPairPoint) -> ExtReal:
    """<x,x*> + <y,y*> if <x,u*> + <y,v*> < alpha, +inf otherwise."""
    return coupling_c(tuple(x) + tuple(y), pair.flatten())


# ---------------------------------------------------------------------------
# Grid conjugates
# ---------------------------------------------------------------------------


def parallel_map(fn, items):
    """Ordered map, threaded when ECONVEX_THREADS > 1; result order fixed."""
    items = list(items)
    workers = int(os.environ.get("ECONVEX_THREADS", "1") or "1")
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _classify(values):
    """(tag, payload) rows: tag 'f' finite, '+' +inf, '-' -inf."""
    rows = []
    for v in values:
        if v.is_pos_inf:
            rows.append(("+", None))
        elif v.is_neg_inf:
            rows.append(("-", None))
        else:
            rows.append(("f", v.value))
    return rows


def _sup_coupling_minus(points, rows, w: DualPoint) -> ExtReal:
    """sup over the rows of coupling(x, w) - value, with the conventions."""
    ustar, alpha, xstar = w.ustar, w.alpha, w.xstar
    best = None  # raw finite payload of the running sup, None = -inf so far
    for p, (tag, payload) in zip(points, rows):
        if tag == "+":
            continue  # both (+inf)-(+inf) and finite-(+inf) are -inf
        if not (_dot(p, ustar) < alpha):
            return POS_INF  # +inf - (finite or -inf) = +inf
        if tag == "-":
            return POS_INF  # finite - (-inf) = +inf
        term = _dot(p, xstar) - payload
        if best is None or term > best:
            best = term
    return NEG_INF if best is None else ExtReal(best)


def c_conjugate(f: SampledFn, w_grid: DualGrid) -> SampledFn:
    """f^c(w) = sup over the grid of { c(x, w) - f(x) }."""
    rows = _classify(f.values)
    points = f.grid.points
    vals = parallel_map(lambda w: _sup_coupling_minus(points, rows, w), w_grid.points)
    return SampledFn(w_grid, vals)


def _sup_prime_minus(w_points, rows, x) -> ExtReal:
    best = None
    for w, (tag, payload) in zip(w_points, rows):
        if tag == "+":
            continue  # anything - (+inf) = -inf
        if not (_dot(x, w.ustar) < w.alpha):
            return POS_INF  # +inf - (finite or -inf) = +inf
        if tag == "-":
            return POS_INF  # finite - (-inf) = +inf
        term = _dot(x, w.xstar) - payload
        if best is None or term > best:
            best = term
    return NEG_INF if best is None else ExtReal(best)


def cprime_conjugate(g: SampledFn, x_grid: Grid) -> SampledFn:
    """g^{c'}(x) = sup over the dual grid of { c'(w, x) - g(w) }."""
    rows = _classify(g.values)
    w_points = g.grid.points
    vals = parallel_map(lambda x: _sup_prime_minus(w_points, rows, x), x_grid.points)
    return SampledFn(x_grid, vals)


def biconjugate(f: SampledFn, w_grid: DualGrid) -> SampledFn:
    """f^{cc'} back on f's own grid: a minorant of f that tightens as the
    dual grid is refined."""
    return cprime_conjugate(c_conjugate(f, w_grid), f.grid)


def econvex_hull_approx(f: SampledFn, w_grid: DualGrid) -> SampledFn:
    """Grid approximation of the largest evenly convex minorant of f."""
    return biconjugate(f, w_grid)


# ---------------------------------------------------------------------------
# Exact 1-D conjugate
# ---------------------------------------------------------------------------


def _gate_intervals(w: DualPoint):
    """({x : x*u* < alpha}, its complement) as 1-D intervals."""
    from econvex.esets import Interval1

    (u,) = w.ustar
    if u == 0:
        if 0 < w.alpha:
            return Interval1.whole_line(), Interval1.empty()
        return Interval1.empty(), Interval1.whole_line()
    bound = ExtReal(Fraction(w.alpha, u))
    if u > 0:
        return (
            Interval1(NEG_INF, True, bound, True),
            Interval1(bound, False, POS_INF, True),
        )
    return (
        Interval1(bound, True, POS_INF, True),
        Interval1(NEG_INF, True, bound, False),
    )


def c_conjugate_exact(f: PwAffine1, w: DualPoint) -> ExtReal:
    """Exact supremum of c(x, w) - f(x) over the whole line.

    The coupling is +inf wherever the gate <x, u*> < alpha fails, so the
    conjugate is +inf as soon as some piece with value below +inf meets
    the gate-failure halfline.  Otherwise only the gate region
    contributes, piece by piece in rational arithmetic; the sup of an
    affine function over a nonempty interval equals its sup over the
    closure, so endpoint openness never changes the value.
    """
    if w.dim != 1:
        raise ValueError("the exact conjugate is 1-D only")
    (xstar,) = w.xstar
    feasible, blocked = _gate_intervals(w)
    terms = []
    for interval, val in f.pieces:
        if isinstance(val, ExtReal) and val.is_pos_inf:
            continue  # anything - (+inf) = -inf
        if not interval.intersect(blocked).is_empty:
            return POS_INF  # +inf - (finite or -inf)
        section = interval.intersect(feasible)
        if section.is_empty:
            continue
        if isinstance(val, ExtReal):
            return POS_INF  # finite coupling - (-inf)
        slope, intercept = val
        m = Fraction(xstar) - slope
        if m > 0:
            terms.append(
                POS_INF if not section.hi.is_finite else ExtReal(m * section.hi.value - intercept)
            )
        elif m < 0:
            terms.append(
                POS_INF if not section.lo.is_finite else ExtReal(m * section.lo.value - intercept)
            )
        else:
            terms.append(ExtReal(-intercept))
    return extreal.sup(terms)
