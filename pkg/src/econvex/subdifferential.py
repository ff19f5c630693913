"""Generalized subgradients for the conditional-bilinear coupling.

A dual point w = (x*, u*, alpha) is a subgradient of f at x0 when f(x0) is
finite, the gate <x0, u*> < alpha holds, and the coupling difference
minorizes the function difference over the whole grid.  The conjugate
characterization (f(x0) + f^c(w) = c(x0, w), and its epsilon relaxation
with <= c(x0, w) + eps) is equivalent on finite instances and both routes
are always computed; disagreement is a bug and raises.

The transfer audit moves memberships between a function and its conjugate:
the forward direction is a grid theorem, the converse requires the grid
surrogate of even convexity, namely f^{cc'} = f pointwise.  Membership
transfers at the same pair (x, w) on both sides.

The epsilon-formula audits compare the subdifferential of the restriction
phi(., 0) with projections of the subdifferential of phi at (x, 0).  The
projection formula at the same epsilon is a grid theorem; the
intersection formula's infinite intersection over eta > 0 is approximated
by a finite decreasing ladder, which by monotonicity collapses to its
smallest member, so the reported inclusion carries that eta_min slack and
the report names it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from econvex.conjugation import (
    DualGrid,
    DualPoint,
    c_conjugate,
    coupling_c,
    cprime_conjugate,
)
from econvex.conjugation import _classify, _sup_coupling_minus, _sup_prime_minus
from econvex.duality import EXACT_PASS, PerturbationProblem, c5_audit, converse_duality_report
from econvex.extreal import ExtReal
from econvex.funcrep import SampledFn

__all__ = [
    "SubdiffSet",
    "is_c_subgradient",
    "is_c_subgradient_via_conjugate",
    "c_subdifferential",
    "is_cprime_subgradient",
    "eps_c_subdifferential",
    "transfer_audit",
    "TransferReport",
    "total_duality_certificate",
    "prop43_audit",
    "theorem43_audit",
    "theorem44_audit",
]


@dataclass(frozen=True)
class SubdiffSet:
    """Grid section of a subdifferential: members from the queried grid."""

    base_point: Tuple
    epsilon: object
    members: Tuple[DualPoint, ...]

    def __contains__(self, w: DualPoint) -> bool:
        return w in self.members


def conjugate_value(f: SampledFn, w: DualPoint) -> ExtReal:
    """f^c at a single dual point."""
    return _sup_coupling_minus(f.grid.points, _classify(f.values), w)


def prime_conjugate_value(g: SampledFn, x) -> ExtReal:
    """g^{c'} at a single primal point."""
    return _sup_prime_minus(g.grid.points, _classify(g.values), x)


def _zero_eps(f: SampledFn):
    return Fraction(0) if f.grid.backend == "rational" else 0.0


def is_c_subgradient(f: SampledFn, x0, w: DualPoint, eps=None) -> bool:
    """Definitional membership over the grid, with the eps relaxation."""
    if eps is None:
        eps = _zero_eps(f)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    x0 = f.grid.points[f.grid.index_of(x0)]
    fx0 = f.value_at(x0)
    if not fx0.is_finite:
        return False
    cx0 = coupling_c(x0, w)
    if not cx0.is_finite:
        return False  # the gate <x0, u*> < alpha failed
    eps_e = ExtReal(eps)
    for x, fx in f.items():
        lhs = fx - fx0
        rhs = (coupling_c(x, w) - cx0) - eps_e
        if not lhs >= rhs:
            return False
    return True


def is_c_subgradient_via_conjugate(
    f: SampledFn, f_conj_at_w: ExtReal, x0, w: DualPoint, eps=None
) -> bool:
    """Conjugate-form membership: f(x0) + f^c(w) <= c(x0, w) + eps."""
    if eps is None:
        eps = _zero_eps(f)
    x0 = f.grid.points[f.grid.index_of(x0)]
    fx0 = f.value_at(x0)
    if not fx0.is_finite:
        return False
    cx0 = coupling_c(x0, w)
    if not cx0.is_finite:
        return False
    return fx0 + f_conj_at_w <= cx0 + ExtReal(eps)


def _members(f: SampledFn, x0, eps, w_grid: DualGrid) -> Tuple[DualPoint, ...]:
    out = []
    for w in w_grid.points:
        by_def = is_c_subgradient(f, x0, w, eps)
        by_conj = is_c_subgradient_via_conjugate(f, conjugate_value(f, w), x0, w, eps)
        if by_def != by_conj:  # pragma: no cover - grid equivalence is a theorem
            raise RuntimeError(
                f"definitional and conjugate membership disagree at {w}"
            )
        if by_def:
            out.append(w)
    return tuple(out)


def c_subdifferential(f: SampledFn, x0, w_grid: DualGrid) -> SubdiffSet:
    eps = _zero_eps(f)
    return SubdiffSet(tuple(x0), eps, _members(f, x0, eps, w_grid))


def eps_c_subdifferential(f: SampledFn, x0, eps, w_grid: DualGrid) -> SubdiffSet:
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    return SubdiffSet(tuple(x0), eps, _members(f, x0, eps, w_grid))


def is_cprime_subgradient(g: SampledFn, w0: DualPoint, x) -> bool:
    """Membership of a primal point in the subdifferential of g at w0.

    The definitional inequality runs over the dual grid carrying g; the
    conjugate-equality route is evaluated as a cross-check and the two
    must agree exactly.
    """
    g.grid.index_of(w0)  # raises off-grid
    gw0 = g.value_at(w0)
    gate = gw0.is_finite and coupling_c(x, w0).is_finite
    if gate:
        cw0 = coupling_c(x, w0)
        by_def = all(
            (gw - gw0) >= (coupling_c(x, w) - cw0) for w, gw in g.items()
        )
        by_conj = gw0 + prime_conjugate_value(g, x) == cw0
    else:
        by_def = by_conj = False
    if by_def != by_conj:  # pragma: no cover - grid equivalence is a theorem
        raise RuntimeError(f"c'-subgradient routes disagree at {w0}")
    return by_def


# ---------------------------------------------------------------------------
# Transfer between a function and its conjugate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferReport:
    forward_ok: bool
    econvex_surrogate: bool  # f^{cc'} = f on the grid
    converse_ok: bool
    counterexamples: Tuple  # (x, w) where the converse fails
    pairs_checked: int


def transfer_audit(f: SampledFn, w_grid: DualGrid) -> TransferReport:
    """Forward: membership in the subdifferential of f pushes to the
    conjugate.  Converse: holds under the grid surrogate of even
    convexity; counterexample pairs are listed when it does not."""
    f_conj = c_conjugate(f, w_grid)
    f_biconj = cprime_conjugate(f_conj, f.grid)
    surrogate = all(
        f_biconj.value_at(p) == f.value_at(p) for p in f.grid.points
    )
    forward_ok = True
    counterexamples = []
    checked = 0
    for x in f.grid.points:
        for w in w_grid.points:
            checked += 1
            primal = is_c_subgradient(f, x, w)
            dual = is_cprime_subgradient(f_conj, w, x)
            if primal and not dual:
                forward_ok = False
            if dual and not primal:
                counterexamples.append((x, w))
    return TransferReport(
        forward_ok=forward_ok,
        econvex_surrogate=surrogate,
        converse_ok=not counterexamples,
        counterexamples=tuple(counterexamples),
        pairs_checked=checked,
    )


# ---------------------------------------------------------------------------
# Total duality
# ---------------------------------------------------------------------------


def _full_membership(P: PerturbationProblem, base, flat: DualPoint, eps) -> bool:
    return is_c_subgradient(P.phi_on_product, base, flat, eps)


def total_duality_certificate(
    P: PerturbationProblem,
) -> Optional[Tuple[Tuple, DualPoint]]:
    """First (x, (y*, v*, alpha)) with the embedded dual point in the
    subdifferential of phi at (x, 0); None when no total duality on the
    grid."""
    origin = P.y_grid.origin
    for x in P.x_grid.points:
        base = x + origin
        if not P.phi_on_product.value_at(base).is_finite:
            continue
        for w in P.dual_y_grid.points:
            if _full_membership(P, base, P.embed(w), _zero_eps(P.phi_on_product)):
                return x, w
    return None


def prop43_audit(P: PerturbationProblem) -> dict:
    """Exhaustive equivalence: the embedded dual point is a subgradient of
    phi at (x, 0) iff x solves the primal, (y*, v*, alpha) solves the
    dual, and the two values agree and are finite."""
    report = converse_duality_report(P)
    origin = P.y_grid.origin
    mismatches = []
    for x in P.x_grid.points:
        base = x + origin
        for w in P.dual_y_grid.points:
            member = _full_membership(P, base, P.embed(w), _zero_eps(P.phi_on_product))
            optimal = (
                report.zero_gap and x in report.primal_argmin and w in report.dual_argmax
            )
            if member != optimal:
                mismatches.append((x, w, member, optimal))
    cert = total_duality_certificate(P)
    cert_consistent = (cert is not None) == report.total
    return {
        "equivalence_ok": not mismatches,
        "mismatches": tuple(mismatches),
        "certificate": cert,
        "certificate_consistent": cert_consistent,
    }


# ---------------------------------------------------------------------------
# Epsilon-formula audits
# ---------------------------------------------------------------------------


def _default_ladder(backend: str):
    if backend == "rational":
        return (Fraction(1), Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
    return (1.0, 0.1, 0.01, 0.001)


def _restriction_subdiff(P: PerturbationProblem, x, eps) -> Tuple[DualPoint, ...]:
    return _members(P.f0, x, eps, P.x_side_grid)


def _projected_full_subdiff(P: PerturbationProblem, x, eps) -> Tuple[DualPoint, ...]:
    base = x + P.y_grid.origin
    out = []
    for flat in P.full_dual_grid.points:
        if _full_membership(P, base, flat, eps):
            w = P.x_side(flat)
            if w not in out:
                out.append(w)
    return tuple(out)


def theorem43_audit(P: PerturbationProblem, x, eps, eta_ladder=None) -> dict:
    """Intersection formula for the eps-subdifferential of phi(., 0).

    The ladder intersection equals the projection at eta_min (membership
    is monotone in eps), so the unconditional inclusion is exact whenever
    eta_min sits below the instance's value resolution; the report names
    the ladder and eta_min.  Set equality is the conditional direction,
    surrogated by the c5 audit.
    """
    if eta_ladder is None:
        eta_ladder = _default_ladder(P.backend)
    eta_ladder = tuple(eta_ladder)
    if not eta_ladder or any(e <= 0 for e in eta_ladder):
        raise ValueError("the eta ladder must be a nonempty list of positive steps")
    if list(eta_ladder) != sorted(eta_ladder, reverse=True):
        raise ValueError("the eta ladder must be decreasing")
    lhs = _restriction_subdiff(P, x, eps)
    projected = [
        frozenset(_projected_full_subdiff(P, x, eps + eta)) for eta in eta_ladder
    ]
    intersection = frozenset.intersection(*projected)
    superset_ok = intersection <= frozenset(lhs)
    equal = intersection == frozenset(lhs)
    return {
        "superset_ok": superset_ok,
        "equal": equal,
        "lhs": tuple(lhs),
        "intersection": tuple(sorted(intersection, key=str)),
        "eta_ladder": eta_ladder,
        "eta_min": eta_ladder[-1],
        "c5_surrogate": c5_audit(P).status == EXACT_PASS,
    }


def theorem44_audit(P: PerturbationProblem, x, eps) -> dict:
    """Projection formula at the same eps: the projection is always inside
    the restriction's subdifferential; equality tracks the c5 surrogate,
    and strict-inclusion witnesses are listed."""
    lhs = frozenset(_restriction_subdiff(P, x, eps))
    rhs = frozenset(_projected_full_subdiff(P, x, eps))
    witnesses = tuple(sorted(lhs - rhs, key=str))
    return {
        "superset_ok": rhs <= lhs,
        "equal": lhs == rhs,
        "lhs": tuple(sorted(lhs, key=str)),
        "projection": tuple(sorted(rhs, key=str)),
        "strict_witnesses": witnesses,
        "c5_surrogate": c5_audit(P).status == EXACT_PASS,
    }
