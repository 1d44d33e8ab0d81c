"""Market model: parameters, derived constants, and regime classification.

An investor consumes at a constant rate ``c`` from an account split between a
riskless asset (rate ``r``) and one risky asset (drift ``mu``, volatility
``sigma``), and may continuously buy term life insurance at premium rate ``h``
per dollar of benefit.  Death arrives at an exponential time with hazard
``lam``; the game is won if wealth at death plus any benefit then in force
reaches the bequest goal ``b``, and lost if wealth hits zero first.

The optimal policy takes one of six closed-form shapes depending on where
``c`` sits relative to ``r*b`` and two consumption thresholds (``c1``,
``c2``), and on whether the premium is cheap relative to the hazard rate.
This module computes every constant those solutions need and classifies the
applicable regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .rootfind import Bracket, RootConfig, solve_bracketed


class ValidationError(ValueError):
    """Market parameters violate the model assumptions."""


class DomainError(ValueError):
    """An input lies outside the operation's domain."""


_ROOT_CFG = RootConfig(rel_tol=1e-15, abs_tol=1e-15, max_iter=200)


@dataclass(frozen=True)
class MarketParams:
    """Exogenous inputs.  ``lam`` is the mortality hazard rate (lambda)."""

    r: float      # riskless rate, per year
    mu: float     # risky drift, per year
    sigma: float  # risky volatility, per sqrt(year)
    lam: float    # mortality hazard rate, per year
    h: float      # insurance premium rate per dollar of benefit, per year
    b: float      # bequest goal, dollars
    c: float      # consumption rate, dollars per year

    def __post_init__(self) -> None:
        for name in ("r", "mu", "sigma", "lam", "h", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
        if self.sigma <= 0.0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.mu <= self.r:
            raise ValidationError(f"mu must exceed r, got mu={self.mu}, r={self.r}")
        if self.lam <= 0.0:
            raise ValidationError(f"lam must be positive, got {self.lam}")
        if self.b <= 0.0:
            raise ValidationError(f"b must be positive, got {self.b}")
        if self.r < 0.0:
            raise ValidationError(f"r must be non-negative, got {self.r}")
        if self.h < 0.0:
            raise ValidationError(f"h must be non-negative, got {self.h}")
        if self.c < 0.0:
            raise ValidationError(f"c must be non-negative, got {self.c}")
        if self.c > 0.0 and self.r == 0.0:
            # a positive perpetual consumption stream cannot be funded risklessly
            # at zero interest: the safe level would be infinite
            raise ValidationError("c must be zero when r is zero")

    def scaled(self, k: float) -> "MarketParams":
        """Scale the bequest problem jointly: b -> k*b, c -> k*c."""
        if not k > 0.0:
            raise ValidationError(f"scale factor must be positive, got {k}")
        return replace(self, b=k * self.b, c=k * self.c)


class Regime(Enum):
    """Which closed-form solution applies."""

    ZERO_CONSUMPTION = "ZeroConsumption"
    FULL_INSURANCE_BELOW_SAFE = "FullInsuranceBelowSafe"
    BUY_LEVEL_BELOW_BEQUEST_C_LOW = "BuyLevelBelowBequestCLow"
    FULL_INSURANCE_BELOW_BEQUEST = "FullInsuranceBelowBequest"
    BUY_LEVEL_ABOVE_RB = "BuyLevelAboveRb"
    RUIN_LIMIT_H_ZERO = "RuinLimitHZero"


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants, computed once per parameter set.

    ``q``/``p0`` are the roots of  r*x^2 - (r+lam+m)*x + lam = 0  (q in (0,1),
    p0 > 1) and ``p`` is the analogous upper root with r+h in place of r.
    ``alpha1 > 1 > 0 > alpha2`` solve  m*x^2 - (r-lam+m)*x - lam = 0  and
    ``beta1 > alpha1``, ``beta2 < 0`` the same with r+h in place of r, so
    p = beta1/(beta1-1) and p0 = alpha1/(alpha1-1) hold identically.
    """

    m: float                # half squared Sharpe ratio, ((mu-r)/sigma)^2 / 2
    q: float                # concave exponent of the uninsured branch, in (0,1)
    p: float                # convex exponent of the insured branch, > 1
    p0: float               # p at h = 0, exponent of the ruin-avoidance branch
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    w_s: float              # safe level: interest funds consumption + premium forever
    h_cut: float            # premium threshold r*lam/(r+m)
    c1: float               # consumption threshold: insure everywhere when c >= c1 (cheap premium)
    c2: Optional[float]     # threshold above r*b; defined only when h > h_cut

    @property
    def low_premium(self) -> bool:
        return self.h_cut is not None and self.c2 is None


def _upper_root(base: float, lam: float, m: float) -> float:
    """Upper root of  base*x^2 - (base+lam+m)*x + lam = 0;  +inf if base == 0."""
    if base == 0.0:
        return math.inf
    a = base + lam + m
    s = math.sqrt(a * a - 4.0 * base * lam)
    return (a + s) / (2.0 * base)


def _dual_roots(drift: float, lam: float, m: float) -> tuple[float, float]:
    """Both roots of  m*x^2 - drift*x - lam = 0,  as (positive, negative).

    Uses the product of roots (-lam/m) to avoid subtractive cancellation.
    """
    s = math.sqrt(drift * drift + 4.0 * m * lam)
    if drift >= 0.0:
        hi = (drift + s) / (2.0 * m)
        lo = -lam / (m * hi)
    else:
        lo = (drift - s) / (2.0 * m)
        hi = -lam / (m * lo)
    return hi, lo


def safe_level(params: MarketParams) -> float:
    """Wealth at which riskless interest covers consumption plus the premium
    on benefit (b - w)+ forever."""
    r, h, b, c = params.r, params.h, params.b, params.c
    if c <= r * b:
        return (c + h * b) / (r + h) if (r + h) > 0.0 else 0.0
    return c / r


def derive_constants(params: MarketParams) -> DerivedConstants:
    """Compute every derived constant; ``c2`` only when ``h > h_cut``."""
    r, lam, h = params.r, params.lam, params.h
    m = 0.5 * ((params.mu - r) / params.sigma) ** 2

    a0 = r + lam + m
    s0 = math.sqrt(a0 * a0 - 4.0 * r * lam)
    q = 2.0 * lam / (a0 + s0)
    p0 = _upper_root(r, lam, m)
    p = _upper_root(r + h, lam, m)

    alpha1, alpha2 = _dual_roots(r - lam + m, lam, m)
    beta1, beta2 = _dual_roots(r + h - lam + m, lam, m)

    h_cut = r * lam / (r + m)
    c1 = h * params.b * ((r + h) * p / lam - 1.0)

    partial = DerivedConstants(
        m=m, q=q, p=p, p0=p0,
        alpha1=alpha1, alpha2=alpha2, beta1=beta1, beta2=beta2,
        w_s=safe_level(params), h_cut=h_cut, c1=c1, c2=None,
    )
    # at r = 0 consumption is forced to zero, so the above-rb regimes that c2
    # separates are empty and its defining equation (which divides by r) moot
    if h > h_cut and r > 0.0:
        partial = replace(partial, c2=find_c2(params, partial))
    return partial


def g_func(beta: float, params: MarketParams, derived: DerivedConstants) -> float:
    """g(beta) = r - (r+h)*beta/alpha1 + h*beta; positive at beta1 and beta2."""
    return params.r - (params.r + params.h) * beta / derived.alpha1 + params.h * beta


def ell_func(alpha: float, beta: float, params: MarketParams) -> float:
    """ell(alpha, beta) = beta - (h*beta/lam + 1)*alpha."""
    return beta - (params.h * beta / params.lam + 1.0) * alpha


def _c2_imbalance(c: float, params: MarketParams, derived: DerivedConstants) -> float:
    """Left minus right side of the equation pinning ``c2``.

    Increases through zero on (r*b, c1): the left side grows with c while the
    right side falls to zero at c = c1.
    """
    r, h, b, lam = params.r, params.h, params.b, params.lam
    b1, b2 = derived.beta1, derived.beta2
    g1 = g_func(b1, params, derived)
    g2 = g_func(b2, params, derived)
    kappa = (c - r * b) / (r * (r + h))
    lvl = (c + h * b) / (r + h)
    denom = (h * b / lam) * b2 + lvl * (1.0 - b2)
    left = kappa * (kappa * g2 / denom) ** ((1.0 - b2) / (b1 - 1.0))
    right = ((h * b / lam) * b1 - lvl * (b1 - 1.0)) / g1
    return left - right


def find_c2(params: MarketParams, derived: DerivedConstants) -> float:
    """Unique consumption threshold in (r*b, c1); needs ``h > h_cut``."""
    if not params.h > derived.h_cut:
        raise DomainError(
            f"c2 is defined only for h > r*lam/(r+m) = {derived.h_cut}, got h = {params.h}"
        )
    rb = params.r * params.b
    lo = rb * (1.0 + 1e-12)
    hi = derived.c1 * (1.0 - 1e-12)
    f = lambda c: _c2_imbalance(c, params, derived)
    f_lo, f_hi = f(lo), f(hi)
    # the root can sit within float noise of either endpoint (c2 -> rb as the
    # left side's zero collides with rb, c2 -> c1 when the right side's zero
    # does); collapse to the endpoint in that case
    if f_lo >= 0.0:
        return lo
    if f_hi <= 0.0:
        at_c1 = f(derived.c1)
        if at_c1 <= 0.0:
            return derived.c1
        hi, f_hi = derived.c1, at_c1
    return solve_bracketed(f, Bracket(lo, hi, f_lo, f_hi), _ROOT_CFG)


def classify_regime(params: MarketParams, derived: DerivedConstants) -> Regime:
    """Total classification of valid parameters into the six regimes."""
    rb = params.r * params.b
    if params.h == 0.0:
        return Regime.RUIN_LIMIT_H_ZERO
    if params.c == 0.0:
        return Regime.ZERO_CONSUMPTION
    if params.c <= rb:
        if params.h <= derived.h_cut and params.c >= derived.c1:
            return Regime.FULL_INSURANCE_BELOW_SAFE
        return Regime.BUY_LEVEL_BELOW_BEQUEST_C_LOW
    if params.h <= derived.h_cut or params.c >= derived.c2:
        return Regime.FULL_INSURANCE_BELOW_BEQUEST
    return Regime.BUY_LEVEL_ABOVE_RB
