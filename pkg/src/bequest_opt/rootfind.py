"""Bracketed scalar root finding.

Bisection with a guarded secant step.  The secant candidate is accepted only
when it falls strictly inside the current bracket, and a plain bisection is
forced on every other iteration, so convergence is guaranteed for any
continuous function with a sign change and never relies on smoothness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


class RootFindError(RuntimeError):
    """Base class for root-finding failures."""


class NoSignChange(RootFindError):
    """The supplied bracket does not straddle a root."""


class MaxIterExceeded(RootFindError):
    """The iteration cap was reached before the tolerance was met."""


class BracketNotFound(RootFindError):
    """Geometric expansion hit its cap without finding a sign change."""


@dataclass(frozen=True)
class RootConfig:
    """Tolerances for :func:`solve_bracketed`.

    Convergence means the bracket width is at most
    ``abs_tol + rel_tol * |midpoint|``, a uniform criterion for roots that
    span many orders of magnitude.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol > 0.0:
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class Bracket:
    """An interval [lo, hi] whose endpoint values straddle zero."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))

    def check(self) -> None:
        if math.isnan(self.f_lo) or math.isnan(self.f_hi):
            raise NoSignChange(f"bracket endpoints evaluate to NaN: ({self.f_lo}, {self.f_hi})")
        if not self.lo < self.hi:
            raise NoSignChange(f"bracket is empty: [{self.lo}, {self.hi}]")
        if self.f_lo == 0.0 or self.f_hi == 0.0:
            return
        if math.copysign(1.0, self.f_lo) == math.copysign(1.0, self.f_hi):
            raise NoSignChange(
                f"no sign change on [{self.lo}, {self.hi}]: f={self.f_lo}, {self.f_hi}"
            )


def solve_bracketed(
    f: Callable[[float], float],
    bracket: Bracket,
    cfg: RootConfig = RootConfig(),
) -> float:
    """Return a root of ``f`` inside ``bracket``.

    Deterministic for identical inputs.  Raises :class:`NoSignChange` for an
    invalid bracket and :class:`MaxIterExceeded` if the iteration cap is hit.
    """
    bracket.check()
    lo, hi, f_lo, f_hi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi

    for it in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if width <= cfg.abs_tol + cfg.rel_tol * abs(mid):
            return mid

        x = mid
        if it % 2 == 1 and math.isfinite(f_lo) and math.isfinite(f_hi) and f_hi != f_lo:
            secant = lo - f_lo * (hi - lo) / (f_hi - f_lo)
            # keep the secant candidate safely interior so the bracket shrinks
            margin = 0.01 * width
            if lo + margin < secant < hi - margin:
                x = secant

        fx = f(x)
        if fx == 0.0:
            return x
        if math.isnan(fx):
            raise RootFindError(f"function evaluated to NaN at {x}")
        if math.copysign(1.0, fx) == math.copysign(1.0, f_lo):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx

    raise MaxIterExceeded(
        f"no convergence in {cfg.max_iter} iterations; bracket [{lo}, {hi}]"
    )


def expand_bracket_up(
    f: Callable[[float], float],
    lo: float,
    growth: float = 2.0,
    cap_factor: float = 1e6,
) -> Bracket:
    """Grow the upper endpoint geometrically from ``lo`` until the sign flips.

    The search is capped at ``cap_factor * lo``; hitting the cap without a
    sign change raises :class:`BracketNotFound`.  Requires ``lo > 0`` and
    ``growth > 1``.
    """
    if not lo > 0.0:
        raise ValueError("lo must be positive for geometric expansion")
    if not growth > 1.0:
        raise ValueError("growth must exceed 1")
    f_lo = f(lo)
    if math.isnan(f_lo):
        raise RootFindError(f"function evaluated to NaN at {lo}")
    if f_lo == 0.0:
        return Bracket(lo, lo * growth, 0.0, f(lo * growth))

    cap = cap_factor * lo
    prev, f_prev = lo, f_lo
    hi = lo * growth
    while hi <= cap:
        f_hi = f(hi)
        if math.isnan(f_hi):
            raise RootFindError(f"function evaluated to NaN at {hi}")
        if f_hi == 0.0 or math.copysign(1.0, f_hi) != math.copysign(1.0, f_lo):
            return Bracket(prev, hi, f_prev, f_hi)
        prev, f_prev = hi, f_hi
        hi *= growth
    raise BracketNotFound(f"no sign change up to {cap} (started at {lo})")
