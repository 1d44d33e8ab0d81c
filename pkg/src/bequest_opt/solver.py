"""Closed-form solutions and evaluation of the optimal controls.

Each regime's value function is assembled from at most three branches:

* an explicit power branch near the safe level (and, for zero consumption,
  another explicit power branch near zero), and
* implicitly parametrized branches where the natural coordinate is the
  marginal value y = phi_w rather than wealth.  On those branches wealth is a
  strictly monotone closed-form function of y, so evaluation at a given
  wealth is a one-dimensional bracketed inversion in log y.

A :class:`Solution` stores the handful of free parameters (buy level, dual
ratios) that pin the branches together; everything else is evaluated on
demand.  Solutions are immutable and evaluation is pure, so a solution can be
shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import (
    DerivedConstants,
    DomainError,
    MarketParams,
    Regime,
    classify_regime,
    derive_constants,
    g_func,
    ell_func,
)
from .rootfind import Bracket, RootConfig, solve_bracketed, expand_bracket_up

_ROOT_CFG = RootConfig(rel_tol=1e-15, abs_tol=1e-15, max_iter=200)


class RegimeMismatchError(ValueError):
    """A regime-specific constructor was called outside its parameter region."""


class RootFailure(RuntimeError):
    """A defining scalar equation could not be bracketed or solved."""


@dataclass(frozen=True)
class StrategyEval:
    """Value function and optimal controls at a single wealth point."""

    w: float
    y: float          # marginal value phi_w (the dual variable)
    phi: float        # probability of reaching the bequest goal
    phi_w: float
    phi_ww: float
    pi_star: float    # dollars in the risky asset
    d_star: float     # death benefit in force


@dataclass(frozen=True)
class DeterministicSolution:
    """No-risky-asset, no-consumption benchmark."""

    w_star: float     # switch wealth between the insured and uninsured branches
    w_s_det: float    # safe level h*b/(r+h)


# ---------------------------------------------------------------------------
# branch evaluators
# ---------------------------------------------------------------------------


def _exp(x: float) -> float:
    """exp that saturates at +inf instead of raising (huge dual exponents
    appear when the market premium is tiny)."""
    return math.exp(x) if x < 709.0 else math.inf


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _invert_decreasing(w_of_t, t_lo: float, t_hi: float, w: float, w_scale: float) -> float:
    """Solve w_of_t(t) = w for a strictly decreasing map on [t_lo, t_hi].

    Endpoint mismatches up to 1e-9 * w_scale (root-solve noise in the stored
    branch parameters) collapse to the endpoint.
    """
    f_lo = w_of_t(t_lo) - w
    f_hi = w_of_t(t_hi) - w
    slack = 1e-9 * w_scale
    if f_lo <= 0.0:
        if f_lo > -slack:
            return t_lo
        raise DomainError(f"wealth {w} above the branch interval")
    if f_hi >= 0.0:
        if f_hi < slack:
            return t_hi
        raise DomainError(f"wealth {w} below the branch interval")
    return solve_bracketed(
        lambda t: w_of_t(t) - w, Bracket(t_lo, t_hi, f_lo, f_hi), _ROOT_CFG
    )


@dataclass(frozen=True)
class _PowerLower:
    """phi = coef * w**q on [0, w_b): the uninsured branch at zero consumption."""

    lo: float
    hi: float
    coef: float
    q: float
    pi_slope: float  # (mu-r)/sigma^2 / (1-q)

    def value(self, w: float) -> tuple[float, float, float, float]:
        if w == 0.0:
            return 0.0, math.inf, -math.inf, 0.0
        q, k = self.q, self.coef
        phi = k * w ** q
        phi_w = k * q * w ** (q - 1.0)
        phi_ww = k * q * (q - 1.0) * w ** (q - 2.0)
        return phi, phi_w, phi_ww, self.pi_slope * w


@dataclass(frozen=True)
class _PowerUpper:
    """phi = 1 - coef * (level - w)**expo up to the branch's level."""

    lo: float
    hi: float
    level: float
    coef: float
    expo: float
    pi_scale: float  # (mu-r)/sigma^2 / (expo-1)

    def value(self, w: float) -> tuple[float, float, float, float]:
        e, k = self.expo, self.coef
        u = self.level - w
        if u <= 0.0:
            ww = 0.0 if e > 2.0 else (-2.0 * k if e == 2.0 else -math.inf)
            return 1.0, 0.0, ww, 0.0
        phi = 1.0 - k * u ** e
        phi_w = k * e * u ** (e - 1.0)
        phi_ww = -k * e * (e - 1.0) * u ** (e - 2.0)
        return phi, phi_w, phi_ww, self.pi_scale * u


@dataclass(frozen=True)
class _DualAlpha:
    """Uninsured dual branch: wealth parametrized by z = y / y_0 in [z_lo, 1]."""

    lo: float
    hi: float
    cr: float      # c / r
    a1: float      # alpha1
    a2: float      # alpha2
    ca: float      # alpha1*(1-alpha2)/(alpha1-alpha2)
    cb: float      # alpha2*(alpha1-1)/(alpha1-alpha2)
    gg: float      # (alpha1-1)*(1-alpha2)/(alpha1-alpha2)
    y_0: float
    z_lo: float
    mr_ss: float   # (mu-r)/sigma^2

    def w_of_t(self, t: float) -> float:
        return self.cr * (
            1.0
            - self.ca * math.exp((self.a1 - 1.0) * t)
            - self.cb * math.exp((self.a2 - 1.0) * t)
        )

    def t_of_w(self, w: float) -> float:
        return _invert_decreasing(self.w_of_t, math.log(self.z_lo), 0.0, w, self.cr)

    def value_at_t(self, t: float) -> tuple[float, float, float, float]:
        e1 = math.exp((self.a1 - 1.0) * t)
        e2 = math.exp((self.a2 - 1.0) * t)
        z = math.exp(t)
        phi = self.cr * self.gg * self.y_0 * (e2 * z - e1 * z)
        y = self.y_0 * z
        phi_ww = y / (self.cr * self.gg * (self.a2 * e2 - self.a1 * e1))
        pi = self.mr_ss * self.cr * self.gg * (self.a1 * e1 - self.a2 * e2)
        return phi, y, phi_ww, pi

    def value(self, w: float) -> tuple[float, float, float, float]:
        phi, y, phi_ww, pi = self.value_at_t(self.t_of_w(w))
        return phi, y, phi_ww, pi


@dataclass(frozen=True)
class _DualBeta:
    """Insured dual branch below the bequest goal: u = y / y_g in [1, u_hi]."""

    lo: float
    hi: float
    lvl: float     # (c + h*b)/(r + h)
    kappa: float   # (c - r*b)/(r*(r + h))
    b1: float      # beta1
    b2: float      # beta2
    a1c: float     # beta1*g(beta2)/(beta1-beta2)
    a2c: float     # -beta2*g(beta1)/(beta1-beta2)
    v1c: float     # (beta1-1)*g(beta2)/(beta1-beta2)
    v2c: float     # (1-beta2)*g(beta1)/(beta1-beta2)
    y_g: float
    u_hi: float
    mr_ss: float

    def w_of_t(self, t: float) -> float:
        return self.lvl - self.kappa * (
            self.a1c * math.exp((self.b1 - 1.0) * t)
            + self.a2c * math.exp((self.b2 - 1.0) * t)
        )

    def t_of_w(self, w: float) -> float:
        return _invert_decreasing(self.w_of_t, 0.0, math.log(self.u_hi), w, self.lvl)

    def value_at_t(self, t: float) -> tuple[float, float, float, float]:
        e1 = math.exp((self.b1 - 1.0) * t)
        e2 = math.exp((self.b2 - 1.0) * t)
        u = math.exp(t)
        phi = 1.0 - self.kappa * self.y_g * (self.v1c * e1 * u + self.v2c * e2 * u)
        y = self.y_g * u
        bu = (self.b1 - 1.0) * self.a1c * e1 - (1.0 - self.b2) * self.a2c * e2
        phi_ww = -y / (self.kappa * bu)
        pi = self.mr_ss * self.kappa * bu
        return phi, y, phi_ww, pi

    def value(self, w: float) -> tuple[float, float, float, float]:
        phi, y, phi_ww, pi = self.value_at_t(self.t_of_w(w))
        return phi, y, phi_ww, pi


# ---------------------------------------------------------------------------
# the assembled solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    """Regime tag plus the free parameters of its value function."""

    regime: Regime
    params: MarketParams
    derived: DerivedConstants
    w_b: float                      # buy level: insure iff wealth >= w_b (and < b)
    y_0: Optional[float] = None     # marginal value at w = 0
    y_b: Optional[float] = None     # marginal value at the buy level
    y_g: Optional[float] = None     # marginal value at the bequest goal
    y_b0: Optional[float] = None    # y_b / y_0
    y_g0: Optional[float] = None    # y_g / y_0
    y_bg: Optional[float] = None    # y_b / y_g

    @property
    def w_s(self) -> float:
        return self.derived.w_s

    @property
    def pasting_points(self) -> tuple[float, ...]:
        return tuple(br.lo for br in self._branches()[1:])

    def _alpha_branch(self, hi: float) -> _DualAlpha:
        p, d = self.params, self.derived
        a1, a2 = d.alpha1, d.alpha2
        return _DualAlpha(
            lo=0.0, hi=hi, cr=p.c / p.r, a1=a1, a2=a2,
            ca=a1 * (1.0 - a2) / (a1 - a2),
            cb=a2 * (a1 - 1.0) / (a1 - a2),
            gg=(a1 - 1.0) * (1.0 - a2) / (a1 - a2),
            y_0=self.y_0, z_lo=self.y_b0 if self.y_b0 is not None else 1.0,
            mr_ss=(p.mu - p.r) / p.sigma ** 2,
        )

    def _beta_branch(self, lo: float, u_hi: float) -> _DualBeta:
        p, d = self.params, self.derived
        b1, b2 = d.beta1, d.beta2
        g1 = g_func(b1, p, d)
        g2 = g_func(b2, p, d)
        den = b1 - b2
        return _DualBeta(
            lo=lo, hi=p.b,
            lvl=(p.c + p.h * p.b) / (p.r + p.h),
            kappa=(p.c - p.r * p.b) / (p.r * (p.r + p.h)),
            b1=b1, b2=b2,
            a1c=b1 * g2 / den, a2c=-b2 * g1 / den,
            v1c=(b1 - 1.0) * g2 / den, v2c=(1.0 - b2) * g1 / den,
            y_g=self.y_g, u_hi=u_hi,
            mr_ss=(p.mu - p.r) / p.sigma ** 2,
        )

    def _upper_branch(self, lo: float) -> _PowerUpper:
        p, d = self.params, self.derived
        mr_ss = (p.mu - p.r) / p.sigma ** 2
        if self.regime in (Regime.FULL_INSURANCE_BELOW_BEQUEST, Regime.BUY_LEVEL_ABOVE_RB):
            level = p.c / p.r
            coef = (self.y_g / d.p0) * (level - p.b) ** (1.0 - d.p0)
            expo = d.p0
        elif self.regime == Regime.RUIN_LIMIT_H_ZERO:
            level = d.w_s
            coef = level ** (-d.p0) if level > 0.0 else 0.0
            expo = d.p0
        elif self.regime == Regime.FULL_INSURANCE_BELOW_SAFE:
            level = d.w_s
            coef = level ** (-d.p)
            expo = d.p
        elif self.regime == Regime.ZERO_CONSUMPTION:
            level = d.w_s
            span = level - self.w_b
            coef = d.q * (d.p - 1.0) / (d.p - d.q) / span ** d.p
            expo = d.p
        else:  # buy level below bequest, low consumption
            level = d.w_s
            span = level - self.w_b
            coef = p.lam * span ** (1.0 - d.p) / (p.h * d.p * (p.b - self.w_b))
            expo = d.p
        return _PowerUpper(
            lo=lo, hi=level, level=level, coef=coef, expo=expo,
            pi_scale=mr_ss / (expo - 1.0) if expo > 1.0 else math.inf,
        )

    def _branches(self) -> list:
        p, d = self.params, self.derived
        reg = self.regime
        if reg == Regime.ZERO_CONSUMPTION:
            mr_ss = (p.mu - p.r) / p.sigma ** 2
            coef = d.p * (1.0 - d.q) / (d.p - d.q) / self.w_b ** d.q
            lower = _PowerLower(
                lo=0.0, hi=self.w_b, coef=coef, q=d.q, pi_slope=mr_ss / (1.0 - d.q)
            )
            return [lower, self._upper_branch(self.w_b)]
        if reg in (Regime.FULL_INSURANCE_BELOW_SAFE, Regime.RUIN_LIMIT_H_ZERO):
            return [self._upper_branch(0.0)]
        if reg == Regime.BUY_LEVEL_BELOW_BEQUEST_C_LOW:
            if self.w_b == 0.0:
                return [self._upper_branch(0.0)]
            return [self._alpha_branch(self.w_b), self._upper_branch(self.w_b)]
        if reg == Regime.FULL_INSURANCE_BELOW_BEQUEST:
            return [self._beta_branch(0.0, 1.0 / self.y_g0), self._upper_branch(p.b)]
        # buy level above r*b
        branches = []
        if self.w_b > 0.0:
            branches.append(self._alpha_branch(self.w_b))
        branches.append(self._beta_branch(self.w_b, self.y_bg))
        branches.append(self._upper_branch(p.b))
        return branches

    def _branch_at(self, w: float, side: str = "+"):
        branches = self._branches()
        if side == "-":
            for br in branches:
                if br.lo < w <= br.hi:
                    return br
            raise DomainError(f"no branch has {w} as an interior or right point")
        for br in branches:
            if br.lo <= w < br.hi:
                return br
        if w == branches[-1].hi:
            return branches[-1]
        raise DomainError(f"wealth {w} outside [0, {self.w_s}]")

    def _d_star(self, w: float) -> float:
        if w >= self.w_b and w <= self.params.b:
            return self.params.b - w
        return 0.0

    def eval(self, w: float, side: str = "+") -> StrategyEval:
        """Value, derivatives, and optimal controls at wealth ``w`` in [0, w_s].

        ``side`` selects the branch at a pasting point ('+' is the default,
        right-continuous choice).
        """
        if math.isnan(w) or w < 0.0 or w > self.w_s:
            raise DomainError(f"wealth {w} outside [0, {self.w_s}]")
        phi, phi_w, phi_ww, pi = self._branch_at(w, side).value(w)
        phi = min(1.0, max(0.0, phi))
        return StrategyEval(
            w=w, y=phi_w, phi=phi, phi_w=phi_w, phi_ww=phi_ww,
            pi_star=pi, d_star=self._d_star(w),
        )

    def phi(self, w: float) -> float:
        return self.eval(w).phi

    def pi(self, w: float) -> float:
        """Risky-asset position with the w >= w_s convention (zero above)."""
        if w >= self.w_s:
            return 0.0
        return self.eval(w).pi_star

    def invert_dual(self, w: float) -> float:
        """Marginal value y solving the branch's wealth equation at ``w``."""
        for br in self._branches():
            if not isinstance(br, (_DualAlpha, _DualBeta)):
                continue
            if br.lo <= w <= br.hi:
                t = br.t_of_w(w)
                scale = br.y_0 if isinstance(br, _DualAlpha) else br.y_g
                return scale * math.exp(t)
        raise DomainError(f"no dual branch at wealth {w}")


# ---------------------------------------------------------------------------
# regime constructors
# ---------------------------------------------------------------------------


def _alpha_mix(d: DerivedConstants) -> tuple[float, float]:
    a1, a2 = d.alpha1, d.alpha2
    return a1 * (1.0 - a2) / (a1 - a2), a2 * (a1 - 1.0) / (a1 - a2)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise RegimeMismatchError(msg)


def solve_zero_consumption(params: MarketParams, derived: DerivedConstants) -> Solution:
    _require(params.c == 0.0, f"zero-consumption regime needs c = 0, got {params.c}")
    _require(params.h > 0.0, "zero-consumption regime needs h > 0")
    d = derived
    w_b = (1.0 - d.q) / (d.p - d.q) * d.w_s
    y_b = d.p * d.q / d.w_s  # phi_w at the buy level, equal from both branches
    return Solution(
        regime=Regime.ZERO_CONSUMPTION, params=params, derived=d, w_b=w_b, y_b=y_b
    )


def solve_full_insurance(params: MarketParams, derived: DerivedConstants) -> Solution:
    d = derived
    rb = params.r * params.b
    _require(params.h > 0.0 and params.h <= d.h_cut,
             f"full-insurance regime needs 0 < h <= {d.h_cut}, got {params.h}")
    _require(d.c1 <= params.c <= rb,
             f"full-insurance regime needs c in [{d.c1}, {rb}], got {params.c}")
    return Solution(
        regime=Regime.FULL_INSURANCE_BELOW_SAFE, params=params, derived=d,
        w_b=0.0, y_0=d.p / d.w_s,
    )


def _solve_y_b0_low_c(params: MarketParams, d: DerivedConstants) -> float:
    """Dual ratio y_b / y_0 in (0, 1] for the low-consumption buy-level regime."""
    cr = params.c / params.r
    ca, cb = _alpha_mix(d)
    k1 = cr * ca * (d.beta1 - d.alpha1)
    k2 = cr * cb * (d.beta1 - d.alpha2)  # negative: alpha2 < 0
    target = (d.beta1 - 1.0) * (cr - d.w_s)

    def f(t: float) -> float:
        return (
            k1 * _exp((d.alpha1 - 1.0) * t)
            + k2 * _exp((d.alpha2 - 1.0) * t)
            - target
        )

    f0 = f(0.0)
    if f0 <= 0.0:
        # analytically f(0) >= 0 iff c <= c1; only rounding noise lands here
        return 1.0
    t_lo = -1.0
    for _ in range(120):
        if f(t_lo) < 0.0:
            break
        t_lo *= 2.0
    else:
        raise RootFailure("could not bracket the buy-level dual ratio")
    t = solve_bracketed(f, Bracket(t_lo, 0.0, f(t_lo), f0), _ROOT_CFG)
    return math.exp(t)


def _w_b_from_y_b0(params: MarketParams, d: DerivedConstants, y_b0: float) -> float:
    ca, cb = _alpha_mix(d)
    cr = params.c / params.r
    w_b = cr * (1.0 - ca * y_b0 ** (d.alpha1 - 1.0) - cb * y_b0 ** (d.alpha2 - 1.0))
    return max(w_b, 0.0)


def solve_buy_level_low_c(params: MarketParams, derived: DerivedConstants) -> Solution:
    d = derived
    rb = params.r * params.b
    _require(0.0 < params.c <= rb,
             f"low-consumption buy-level regime needs 0 < c <= {rb}, got {params.c}")
    _require(params.c <= d.c1 * (1.0 + 1e-12),
             f"low-consumption buy-level regime needs c <= c1 = {d.c1}, got {params.c}")
    _require(params.h > 0.0, "buy-level regime needs h > 0")
    y_b0 = _solve_y_b0_low_c(params, d)
    w_b = _w_b_from_y_b0(params, d, y_b0)
    y_b = (params.lam / params.h) / (params.b - w_b)
    return Solution(
        regime=Regime.BUY_LEVEL_BELOW_BEQUEST_C_LOW, params=params, derived=d,
        w_b=w_b, y_0=y_b / y_b0, y_b=y_b, y_b0=y_b0,
    )


def solve_full_insurance_above_rb(
    params: MarketParams, derived: DerivedConstants
) -> Solution:
    d = derived
    rb = params.r * params.b
    _require(params.c > rb, f"regime needs c > r*b = {rb}, got {params.c}")
    _require(params.h > 0.0, "regime needs h > 0")
    if params.h > d.h_cut:
        _require(params.c >= d.c2 * (1.0 - 1e-12),
                 f"regime needs c >= c2 = {d.c2} when h > {d.h_cut}, got {params.c}")
    r, h, b, c, lam = params.r, params.h, params.b, params.c, params.lam
    b1, b2 = d.beta1, d.beta2
    g1 = g_func(b1, params, d)
    g2 = g_func(b2, params, d)
    kappa = (c - r * b) / (r * (r + h))
    lvl = (c + h * b) / (r + h)
    la = math.log(kappa * b1 * g2 / (b1 - b2))
    lb = math.log(-kappa * b2 * g1 / (b1 - b2))

    def f(t: float) -> float:
        return _logaddexp(la + (1.0 - b1) * t, lb + (1.0 - b2) * t) - math.log(lvl)

    f0 = f(0.0)  # log((c-rb)/(r+h)) - log(lvl) < 0
    if f0 == 0.0:
        y_g0 = 1.0
    else:
        t_lo = -1.0
        for _ in range(120):
            if f(t_lo) > 0.0:
                break
            t_lo *= 2.0
        else:
            raise RootFailure("could not bracket the goal-level dual ratio")
        t = solve_bracketed(f, Bracket(t_lo, 0.0, f(t_lo), f0), _ROOT_CFG)
        y_g0 = math.exp(t)
    inv_y0 = lvl * (b1 - 1.0) / b1 + kappa * (g1 / b1) * y_g0 ** (1.0 - b2)
    y_0 = 1.0 / inv_y0
    return Solution(
        regime=Regime.FULL_INSURANCE_BELOW_BEQUEST, params=params, derived=d,
        w_b=0.0, y_0=y_0, y_g=y_0 * y_g0, y_g0=y_g0,
    )


def _bk_coeffs(params: MarketParams, d: DerivedConstants):
    """Coefficient pairs of the two bracket factors in the equation for y_bg."""
    r, h, lam = params.r, params.h, params.lam
    a1, a2, b1, b2 = d.alpha1, d.alpha2, d.beta1, d.beta2
    g1 = g_func(b1, params, d)
    g2 = g_func(b2, params, d)
    den = b1 - b2
    c10 = h * ((a1 - 1.0) - (r / lam) * a1)
    c11 = -ell_func(a1, b1, params) * g2 / den
    c12 = ell_func(a1, b2, params) * g1 / den
    c20 = h * ((1.0 - a2) + (r / lam) * a2)
    c21 = ell_func(a2, b1, params) * g2 / den
    c22 = -ell_func(a2, b2, params) * g1 / den
    return (c10, c11, c12), (c20, c21, c22)


def solve_buy_level_above_rb(params: MarketParams, derived: DerivedConstants) -> Solution:
    d = derived
    rb = params.r * params.b
    _require(params.h > d.h_cut,
             f"regime needs h > r*lam/(r+m) = {d.h_cut}, got {params.h}")
    _require(rb < params.c <= d.c2 * (1.0 + 1e-12),
             f"regime needs c in ({rb}, {d.c2}], got {params.c}")
    r, h, b, c = params.r, params.h, params.b, params.c
    a1, a2, b1, b2 = d.alpha1, d.alpha2, d.beta1, d.beta2
    (c10, c11, c12), (c20, c21, c22) = _bk_coeffs(params, d)
    kc = (c - rb) / (c * (r + h))
    const = (
        (a1 - a2) * math.log(kc)
        - (a1 - 1.0) * math.log(a1 - 1.0)
        - (1.0 - a2) * math.log(1.0 - a2)
    )

    def bk1(x: float) -> float:
        lx = math.log(x)
        return c10 + c11 * _exp((b1 - 1.0) * lx) + c12 * _exp((b2 - 1.0) * lx)

    def bk2(x: float) -> float:
        lx = math.log(x)
        return c20 + c21 * _exp((b1 - 1.0) * lx) + c22 * _exp((b2 - 1.0) * lx)

    def log_rhs(x: float) -> float:
        v1, v2 = bk1(x), bk2(x)
        if v1 <= 0.0 or v2 <= 0.0:
            return -math.inf
        return const + (a1 - 1.0) * math.log(v1) + (1.0 - a2) * math.log(v2)

    f = lambda x: log_rhs(x) - 0.0
    x0 = 1.0 + 1e-6
    for _ in range(8):
        if f(x0) < 0.0:
            break
        x0 = 1.0 + (x0 - 1.0) / 16.0
    else:
        raise RootFailure("could not start the bracket for y_bg above 1")
    try:
        bracket = expand_bracket_up(f, x0, growth=2.0)
    except Exception as exc:  # BracketNotFound or NaN
        raise RootFailure(f"could not bracket y_bg: {exc}") from exc
    t = solve_bracketed(
        lambda t: f(math.exp(t)),
        Bracket(math.log(bracket.lo), math.log(bracket.hi), bracket.f_lo, bracket.f_hi),
        _ROOT_CFG,
    )
    y_bg = math.exp(t)

    kappa = (c - rb) / (r * (r + h))
    cr = c / r
    y_b0 = (kappa * bk2(y_bg) / (cr * (1.0 - a2))) ** (1.0 / (a1 - 1.0))
    y_b0 = min(y_b0, 1.0)
    w_b = _w_b_from_y_b0(params, d, y_b0)
    y_b = (params.lam / h) / (b - w_b)
    return Solution(
        regime=Regime.BUY_LEVEL_ABOVE_RB, params=params, derived=d,
        w_b=w_b, y_0=y_b / y_b0, y_b=y_b, y_g=y_b / y_bg, y_b0=y_b0, y_bg=y_bg,
    )


def solve_ruin_limit(params: MarketParams, derived: DerivedConstants) -> Solution:
    _require(params.h == 0.0, f"ruin-limit regime needs h = 0, got {params.h}")
    d = derived
    y_0 = None
    if params.c > 0.0:
        y_0 = params.r * d.p0 / params.c  # phi_w(0) of the explicit branch
    return Solution(
        regime=Regime.RUIN_LIMIT_H_ZERO, params=params, derived=d, w_b=0.0, y_0=y_0
    )


_CONSTRUCTORS = {
    Regime.ZERO_CONSUMPTION: solve_zero_consumption,
    Regime.FULL_INSURANCE_BELOW_SAFE: solve_full_insurance,
    Regime.BUY_LEVEL_BELOW_BEQUEST_C_LOW: solve_buy_level_low_c,
    Regime.FULL_INSURANCE_BELOW_BEQUEST: solve_full_insurance_above_rb,
    Regime.BUY_LEVEL_ABOVE_RB: solve_buy_level_above_rb,
    Regime.RUIN_LIMIT_H_ZERO: solve_ruin_limit,
}


def solve(params: MarketParams) -> Solution:
    """Classify the parameters and construct the applicable solution."""
    derived = derive_constants(params)
    regime = classify_regime(params, derived)
    return _CONSTRUCTORS[regime](params, derived)


# ---------------------------------------------------------------------------
# deterministic benchmark (no risky asset, no consumption)
# ---------------------------------------------------------------------------


def solve_deterministic(params: MarketParams) -> DeterministicSolution:
    """Switch wealth and safe level of the insurance-only benchmark."""
    r, h, b, lam = params.r, params.h, params.b, params.lam
    w_s = h * b / (r + h) if (r + h) > 0.0 else 0.0
    if r >= lam:
        return DeterministicSolution(w_star=0.0, w_s_det=w_s)
    if r + h <= lam:
        return DeterministicSolution(w_star=w_s, w_s_det=w_s)
    e_buy = lam / (r + h)
    e_wait = lam / r

    def gap(x: float) -> float:
        # insured-branch value minus uninsured-branch value at w = x * w_s
        return 1.0 - (1.0 - x) ** e_buy - x ** e_wait

    eps = 1e-12
    bracket = Bracket.from_function(gap, eps, 1.0 - eps)
    x = solve_bracketed(gap, bracket, RootConfig(rel_tol=1e-13, abs_tol=1e-15))
    return DeterministicSolution(w_star=x * w_s, w_s_det=w_s)


def deterministic_phi(params: MarketParams, w: float) -> float:
    """Benchmark success probability with no risky asset and no consumption."""
    det = solve_deterministic(params)
    if math.isnan(w) or w < 0.0 or w > det.w_s_det:
        raise DomainError(f"wealth {w} outside [0, {det.w_s_det}]")
    if det.w_s_det == 0.0:
        return 1.0
    x = w / det.w_s_det
    if w < det.w_star:
        return 1.0 - (1.0 - x) ** (params.lam / (params.r + params.h))
    return x ** (params.lam / params.r) if params.r > 0.0 else (1.0 if x >= 1.0 else 0.0)
