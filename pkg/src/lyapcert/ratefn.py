"""Certified rate-function quantities from certified Lambda(p) evaluators.

For an ergodic model with negative top Lyapunov exponent, the probability
of observing a positive finite-time exponent decays like exp(-t I(0)),
where I is the Legendre-Fenchel transform of the convex moment function
Lambda.  Everything here consumes only *enclosures* of Lambda, so every
output interval is certified as long as the evaluator is sound:

  - minimizer brackets by certified three-point convexity comparisons,
  - I(0) = -inf Lambda by combining interval-argument evaluation over the
    bracket with convexity chord minorants and point-sample upper bounds,
  - pointwise Legendre-Fenchel sandwiches from certified evidence,
  - the profile gamma(p) = Lambda(p)/p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

from .errors import BracketFailure, UsageError
from .intervals import Interval

__all__ = [
    "RateResult",
    "bracket_minimizer",
    "rate_at_zero",
    "legendre_fenchel_at",
    "gamma_fn",
]


@dataclass
class RateResult:
    """A certified rate value at zero, the supporting minimizer bracket,
    and the evidence points it was derived from."""

    I0: Interval
    minimizer_bracket: Interval
    evidence: list = field(default_factory=list)  # (p, Lambda) Interval pairs
    model: str = ""


class _Cache:
    """Memoizing wrapper around a Lambda evaluator."""

    def __init__(self, evaluator, cache=None):
        self.evaluator = evaluator
        self.data = cache if cache is not None else {}

    def __call__(self, p: float) -> Interval:
        if p not in self.data:
            self.data[p] = self.evaluator(Interval(p))
        return self.data[p]

    def evidence(self):
        return sorted(
            ((Interval(p), lam) for p, lam in self.data.items()),
            key=lambda pair: pair[0].lo,
        )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bracket_minimizer(evaluator, seed_grid, tol: float = 2e-5,
                      max_evals: int = 80, cache=None) -> Interval:
    """Certified bracket [p1, p3] around the minimizer of a convex Lambda.

    A triple p1 < p2 < p3 with Lambda(p2) strictly below both neighbours
    (as intervals) pins the minimizer inside (p1, p3) by convexity.  The
    bracket shrinks by golden-section-style certified comparisons until
    the width reaches tol or the enclosure widths make further strict
    comparisons impossible; the last certified bracket is returned."""
    ev = _Cache(evaluator, cache)
    grid = sorted(float(q) for q in seed_grid)
    if len(grid) < 3:
        raise BracketFailure("need at least three seed points")
    vals = [ev(p) for p in grid]
    triple = None
    for i in range(1, len(grid) - 1):
        if vals[i].strictly_below(vals[i - 1]) and vals[i].strictly_below(
            vals[i + 1]
        ):
            triple = (grid[i - 1], grid[i], grid[i + 1])
            break
    if triple is None:
        raise BracketFailure(
            "no certified interior minimum on the seed grid"
        )
    p1, p2, p3 = triple
    evals = len(grid)
    while p3 - p1 > tol and evals < max_evals:
        if p2 - p1 >= p3 - p2:
            q = p2 - _INV_PHI * (p2 - p1)
            left = True
        else:
            q = p2 + _INV_PHI * (p3 - p2)
            left = False
        if not (p1 < q < p3) or q == p2:
            break
        lq = ev(q)
        evals += 1
        l2 = ev(p2)
        if lq.strictly_below(l2):
            if left:
                p1, p2, p3 = p1, q, p2
            else:
                p1, p2, p3 = p2, q, p3
        elif l2.strictly_below(lq):
            if left:
                p1, p2, p3 = q, p2, p3
            else:
                p1, p2, p3 = p1, p2, q
        else:
            break  # widths block further certified comparisons
    return Interval(p1, p3)


def _chord_lower(points) -> float:
    """Lower bound for inf of a convex function from three certified
    points: left of the middle the function sits above the backward
    extension of the right chord, and symmetrically."""
    (q1, l1), (q2, l2), (q3, l3) = points
    s_right = (l3 - l2) / (q3 - q2)
    s_left = (l2 - l1) / (q2 - q1)
    lo_left = (l2 + s_right * (Interval(q1.lo, q2.hi) - q2)).lo
    lo_right = (l2 + s_left * (Interval(q2.lo, q3.hi) - q2)).lo
    return min(lo_left, lo_right)


def rate_at_zero(evaluator, bracket: Interval, cache=None,
                 subdivisions: int = 4, max_subdivisions: int = 64,
                 target_width: float = 1e-6) -> Interval:
    """Certified enclosure of I(0) = -inf_p Lambda(p) given a certified
    minimizer bracket.

    The infimum is sandwiched between the best point-sample upper value
    and the better of two lower bounds: convexity chord minorants through
    the cached evidence, and interval-argument evaluation over the
    bracket, subdivided (doubling) while that keeps paying off."""
    ev = _Cache(evaluator, cache)
    lo_b, hi_b = bracket.lo, bracket.hi
    if lo_b >= hi_b:
        raise UsageError("bracket must have positive width")
    # Upper bound for the infimum from point samples.
    mid = 0.5 * (lo_b + hi_b)
    inf_hi = min(ev(q).hi for q in (lo_b, mid, hi_b))
    inf_hi = min(inf_hi, min(l.hi for l in ev.data.values()))
    # Lower bound 1: chord minorants through certified evidence triples
    # whose outer points flank the bracket (the minimizer lies between
    # them, so the minorant over [q1, q3] bounds the infimum).  Any
    # q1 < q2 < q3 triple of certified points is admissible by convexity.
    pts = ev.evidence()
    chord = -math.inf
    left = [pt for pt in pts if pt[0].hi <= lo_b]
    right = [pt for pt in pts if pt[0].lo >= hi_b]
    for q1 in left:
        for q3 in right:
            for q2 in pts:
                if q1[0].hi < q2[0].lo and q2[0].hi < q3[0].lo:
                    chord = max(chord, _chord_lower((q1, q2, q3)))
    # Lower bound 2: interval-argument evaluation with subdivision.
    best = chord
    pieces = max(1, subdivisions)
    prev_width = math.inf
    while inf_hi - best > target_width:
        lows = []
        for i in range(pieces):
            a = lo_b + (hi_b - lo_b) * i / pieces
            b = lo_b + (hi_b - lo_b) * (i + 1) / pieces
            lows.append(evaluator(Interval(a, b)).lo)
        best = max(best, min(lows))
        width = inf_hi - best
        if (
            width <= target_width
            or pieces >= max_subdivisions
            or width > 0.75 * prev_width
        ):
            break
        prev_width = width
        pieces *= 2
    inf_lo = best
    if not (inf_lo <= inf_hi):
        raise UsageError("inconsistent infimum bounds (unsound evaluator?)")
    return Interval(-inf_hi, -inf_lo)


def legendre_fenchel_at(evidence, r: float):
    """Sandwich for I(r) = sup_p (r p - Lambda(p)) from certified points.

    The lower bound max_i (r p_i - Lambda(p_i)) holds unconditionally.
    The upper bound uses convexity: on every evidence gap, Lambda sits
    above the inward extensions of the neighbouring chords, so the
    supremum over the evidence hull is bounded; it is valid only when r
    lies within the certified chord-slope range, otherwise +inf."""
    pts = sorted(evidence, key=lambda pair: Interval._coerce(pair[0]).lo)
    pts = [(Interval._coerce(p), lam) for p, lam in pts]
    if len(pts) < 2:
        raise UsageError("need at least two certified evidence points")
    ir = Interval(r)
    lower = max((ir * p - lam).lo for p, lam in pts)
    if len(pts) < 3:
        return lower, math.inf
    slopes = [
        (pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0])
        for i in range(len(pts) - 1)
    ]
    # The supremum is confined to the evidence hull only when the extreme
    # chord slopes certify that r is an attained subgradient inside.
    if not (slopes[0].hi <= r <= slopes[-1].lo):
        return lower, math.inf
    upper = -math.inf
    for i in range(len(pts) - 1):
        pa, la = pts[i]
        pb, lb = pts[i + 1]
        bounds = []
        if i > 0:
            bounds.append((pts[i - 1], pts[i]))
        if i + 2 < len(pts):
            bounds.append((pts[i + 1], pts[i + 2]))
        if not bounds:
            return lower, math.inf
        seg = Interval(pa.lo, pb.hi)
        cand = math.inf
        for (q1, l1), (q2, l2) in bounds:
            s = (l2 - l1) / (q2 - q1)
            # r p - (l1 + s (p - q1)) = (r - s) p + s q1 - l1, factored so
            # the interval p enters only once (avoids dependency blow-up)
            cand = min(cand, ((ir - s) * seg + s * q1 - l1).hi)
        upper = max(upper, cand)
    if not (lower <= upper):
        upper = max(upper, lower)
    return lower, upper


def gamma_fn(evaluator, p: Interval, continuation_cert=None) -> Interval:
    """The profile gamma(p) = Lambda(p)/p, extended by gamma(0) = Lambda'(0)
    when a parameter-uniform certificate supplies the derivative."""
    p = Interval._coerce(p)
    if p.lo == 0.0 and p.hi == 0.0:
        if continuation_cert is None:
            raise UsageError(
                "gamma at p = 0 requires a continuation certificate"
            )
        from .continuation import lambda_derivatives_at

        return lambda_derivatives_at(continuation_cert, Interval(0.0))[1]
    if p.lo <= 0.0 <= p.hi:
        raise UsageError("gamma is undefined on intervals straddling 0")
    return evaluator(p) / p
