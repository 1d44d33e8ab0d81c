"""Independent correctness oracles for the closed-form solutions.

Three checks, none of which share code with the solver's formulas:

* an analytic residual of the dynamic-programming equation, evaluated with
  the solver's own derivatives (catches transcription errors in any branch),
* a finite-difference policy-iteration solver of the variational problem
  (catches wrong free boundaries or wrong branch selection), and
* a Monte Carlo simulation of the controlled wealth dynamics (catches
  everything else, at statistical resolution).

The Monte Carlo kernel derives an independent RNG stream from (seed, path
index), so estimates are bit-identical across runs and across any thread
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numba import njit, prange
from scipy.linalg import solve_banded

from .model import (
    DerivedConstants,
    DomainError,
    MarketParams,
    derive_constants,
    safe_level,
)
from .solver import Solution


class ConfigError(ValueError):
    """An oracle configuration violates its invariants."""


class NonConvergenceError(RuntimeError):
    """Policy iteration hit the sweep cap; carries the last value change."""

    def __init__(self, msg: str, last_change: float):
        super().__init__(msg)
        self.last_change = last_change


# ---------------------------------------------------------------------------
# analytic residual and smooth pasting
# ---------------------------------------------------------------------------


def hjb_residual_parts(
    params: MarketParams,
    derived: DerivedConstants,
    w_b: float,
    w: float,
    phi: float,
    phi_w: float,
    phi_ww: float,
) -> float:
    """Signed residual of the dynamic-programming equation at one point.

    Zero (to rounding) iff the supplied value/derivatives solve the equation
    with buy level ``w_b``.  Any non-solution triple produces an O(1)
    residual, so this doubles as a detector for injected fakes.
    """
    p = params
    insure = w_b <= w <= min(derived.w_s, p.b)
    succ = 1.0 if w >= w_b else 0.0
    drift = p.r * w - p.c - (p.h * (p.b - w) if insure else 0.0)
    risky = 0.0 if phi_w == 0.0 else derived.m * phi_w * phi_w / phi_ww
    return p.lam * (phi - succ) - drift * phi_w + risky


def hjb_residual(solution: Solution, w: float) -> float:
    """Residual of the closed-form solution at interior, non-pasting ``w``."""
    if not 0.0 < w < solution.w_s:
        raise DomainError(f"residual is defined on the open interval (0, {solution.w_s})")
    if any(w == wp for wp in solution.pasting_points):
        raise DomainError(f"{w} is a pasting point; derivatives are one-sided there")
    ev = solution.eval(w)
    return hjb_residual_parts(
        solution.params, solution.derived, solution.w_b, w, ev.phi, ev.phi_w, ev.phi_ww
    )


def residual_sup(solution: Solution, n: int = 1000) -> float:
    """Max |residual| over ``n`` interior points, skipping pasting points."""
    ws = solution.w_s
    pts = np.linspace(ws * 1e-4, ws * (1.0 - 1e-4), n)
    worst = 0.0
    for w in pts:
        if any(abs(w - wp) < 1e-12 * ws for wp in solution.pasting_points):
            continue
        worst = max(worst, abs(hjb_residual(solution, float(w))))
    return worst


@dataclass(frozen=True)
class PastingGap:
    """One-sided evaluation gaps at a branch boundary."""

    w: float
    d_phi: float
    d_phi_w: float
    d_phi_ww: float

    @property
    def max_gap(self) -> float:
        return max(self.d_phi, self.d_phi_w, self.d_phi_ww)


def smooth_pasting_check(solution: Solution) -> tuple[PastingGap, ...]:
    """Absolute one-sided gaps of (phi, phi_w, phi_ww) at each pasting point."""
    gaps = []
    for wp in solution.pasting_points:
        left = solution.eval(wp, side="-")
        right = solution.eval(wp, side="+")
        gaps.append(
            PastingGap(
                w=wp,
                d_phi=abs(left.phi - right.phi),
                d_phi_w=abs(left.phi_w - right.phi_w),
                d_phi_ww=abs(left.phi_ww - right.phi_ww),
            )
        )
    return tuple(gaps)


# ---------------------------------------------------------------------------
# finite-difference policy iteration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FdConfig:
    """Grid and convergence settings for the variational solver.

    ``insurance_allowed=False`` removes the insurance control entirely and
    solves the reach-the-goal problem on [0, max(c/r, b)] instead, i.e. the
    infinitely-expensive-premium limit.
    """

    n_grid: int = 2000
    tol: float = 1e-10
    max_sweeps: int = 10000
    insurance_allowed: bool = True

    def __post_init__(self) -> None:
        if self.n_grid < 10:
            raise ConfigError(f"n_grid must be at least 10, got {self.n_grid}")
        if not self.tol > 0.0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be at least 1, got {self.max_sweeps}")


@dataclass(frozen=True)
class FdResult:
    """Converged grid solution and the controls extracted from it."""

    w: np.ndarray        # full grid including both boundaries
    phi: np.ndarray      # value at every grid node
    pi: np.ndarray       # risky position at interior nodes
    insure: np.ndarray   # insurance indicator at interior nodes (bool)
    sweeps: int
    last_change: float
    residual: np.ndarray  # discrete-equation residual at interior nodes

    def interp_phi(self, x) -> np.ndarray:
        return np.interp(x, self.w, self.phi)

    def interp_pi(self, x) -> np.ndarray:
        return np.interp(x, self.w[1:-1], self.pi)

    def sup_error_vs(self, phi_exact: Callable[[float], float]) -> float:
        exact = np.array([phi_exact(float(x)) for x in self.w])
        return float(np.max(np.abs(self.phi - exact)))


def fd_solve(params: MarketParams, cfg: FdConfig = FdConfig()) -> FdResult:
    """Solve the discrete variational problem by Howard policy iteration.

    Alternates a tridiagonal solve for fixed controls with pointwise control
    updates: the risky position from the analytic maximizer (clipped to a
    stability bound) and the insurance decision as a binary argmax.  First
    derivatives are centered where diffusion dominates and effectively upwind
    where the drift sign demands it (via the minimal added diffusion that
    keeps the system an M-matrix).
    """
    if cfg.insurance_allowed and not params.h > 0.0:
        raise ConfigError("insurance_allowed requires h > 0")
    p = params
    if cfg.insurance_allowed:
        length = safe_level(p)
    else:
        length = max(p.c / p.r, p.b) if p.c > 0.0 else p.b
    n = cfg.n_grid
    w = np.linspace(0.0, length, n + 2)
    dx = length / (n + 1)
    wi = w[1:-1]
    mr_ss = (p.mu - p.r) / p.sigma ** 2
    pi_max = 10.0 * length / p.sigma

    phi = w / length  # linear ramp start
    benefit = np.where(wi < p.b, p.b - wi, 0.0)

    def controls(phi_full: np.ndarray):
        d1 = (phi_full[2:] - phi_full[:-2]) / (2.0 * dx)
        d2 = (phi_full[2:] - 2.0 * phi_full[1:-1] + phi_full[:-2]) / dx ** 2
        pi = np.where(d2 < 0.0, -mr_ss * np.divide(d1, d2, out=np.full_like(d1, -1.0), where=d2 < 0.0), pi_max)
        pi = np.clip(pi, 0.0, pi_max)
        if cfg.insurance_allowed:
            ins = (wi < p.b) & (p.lam - p.h * benefit * d1 >= 0.0)
        else:
            ins = np.zeros_like(wi, dtype=bool)
        return pi, ins

    def assemble(pi: np.ndarray, ins: np.ndarray):
        drift = p.r * wi - p.c - p.h * benefit * ins + (p.mu - p.r) * pi
        # centered differencing with just enough added diffusion to stay an
        # M-matrix: exactly the upwind scheme where it binds, second-order
        # where it does not, and continuous in the controls (no chattering)
        diff = np.maximum(0.5 * p.sigma ** 2 * pi ** 2, np.abs(drift) * dx * 0.5)
        lower = diff / dx ** 2 - drift / (2.0 * dx)
        upper = diff / dx ** 2 + drift / (2.0 * dx)
        diag = p.lam + lower + upper
        succ = ins | (wi >= p.b)
        rhs = p.lam * succ.astype(float)
        rhs[-1] += upper[-1] * 1.0  # phi = 1 at the far boundary
        return lower, diag, upper, rhs

    sweeps = 0
    change = math.inf
    for sweeps in range(1, cfg.max_sweeps + 1):
        pi, ins = controls(phi)
        lower, diag, upper, rhs = assemble(pi, ins)
        ab = np.zeros((3, n))
        ab[0, 1:] = -upper[:-1]
        ab[1, :] = diag
        ab[2, :-1] = -lower[1:]
        interior = solve_banded((1, 1), ab, rhs)
        change = float(np.max(np.abs(interior - phi[1:-1])))
        phi = phi.copy()
        phi[1:-1] = interior
        if change < cfg.tol:
            break
    else:
        raise NonConvergenceError(
            f"policy iteration did not converge in {cfg.max_sweeps} sweeps "
            f"(last change {change:.3e})",
            change,
        )

    pi, ins = controls(phi)
    lower, diag, upper, rhs = assemble(pi, ins)
    resid = diag * phi[1:-1] - lower * phi[:-2] - upper * phi[2:] - p.lam * (
        ins | (wi >= p.b)
    ).astype(float)
    return FdResult(
        w=w, phi=phi, pi=pi, insure=ins, sweeps=sweeps, last_change=change,
        residual=resid,
    )


# ---------------------------------------------------------------------------
# Monte Carlo simulation of the controlled wealth dynamics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    dt: float = 1.0 / 2500.0
    seed: int = 0
    w0: float = 0.0

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be at least 1, got {self.n_paths}")
        if not 0.0 < self.dt <= 0.01:
            raise ConfigError(f"dt must lie in (0, 0.01], got {self.dt}")
        if self.w0 < 0.0:
            raise ConfigError(f"w0 must be non-negative, got {self.w0}")


@dataclass(frozen=True)
class Strategy:
    """Feedback controls handed to the simulator.

    ``buy_threshold`` encodes the death-benefit rule D(w) = (b - w)+ for
    w >= buy_threshold (set it to +inf to never insure).  ``success_level``
    is the wealth at which the outcome is decided: with the benefit rule in
    force, ending at or above it guarantees the goal.
    """

    pi: Callable[[float], float]
    buy_threshold: float
    success_level: float


def optimal_strategy(solution: Solution) -> Strategy:
    def pi(w: float) -> float:
        return solution.pi(w)

    return Strategy(pi=pi, buy_threshold=solution.w_b, success_level=solution.w_s)


def ruin_min_strategy(params: MarketParams, derived: Optional[DerivedConstants] = None) -> Strategy:
    """Never insure; invest per the rule that minimizes the chance of ruin.

    Deliberately suboptimal for the bequest problem: success then requires
    wealth itself to reach the goal by death.
    """
    d = derived if derived is not None else derive_constants(params)
    mr_ss = (params.mu - params.r) / params.sigma ** 2
    cap = params.c / params.r if params.c > 0.0 else 0.0

    def pi(w: float) -> float:
        return max(0.0, mr_ss * (cap - w) / (d.p0 - 1.0)) if cap > 0.0 else 0.0

    return Strategy(pi=pi, buy_threshold=math.inf, success_level=max(params.b, cap))


@njit(cache=True, parallel=True)
def _mc_kernel(
    seed, n_paths, w0, dt, t_cap, r, mu_ex, sigma, lam, h, b, c,
    w_buy, success_level, pi_grid, grid_len,
):  # pragma: no cover - compiled
    n_grid = pi_grid.shape[0]
    inv_dx = (n_grid - 1) / grid_len
    sqrt_dt = np.sqrt(dt)
    wins = 0
    for i in prange(n_paths):
        np.random.seed((seed + 2654435761 * (i + 1)) % 4294967291)
        tau_d = -np.log(1.0 - np.random.random()) / lam
        w = w0
        t = 0.0
        while True:
            if w <= 0.0:
                break
            if w >= success_level:
                wins += 1
                break
            if tau_d < t + dt:
                benefit = b - w if (w >= w_buy and w <= b) else 0.0
                if w + benefit >= b:
                    wins += 1
                break
            x = w * inv_dx
            idx = int(x)
            if idx >= n_grid - 1:
                idx = n_grid - 2
                x = float(n_grid - 1)
            frac = x - idx
            pi = pi_grid[idx] * (1.0 - frac) + pi_grid[idx + 1] * frac
            benefit = b - w if (w >= w_buy and w <= b) else 0.0
            w += (r * w + mu_ex * pi - c - h * benefit) * dt \
                + sigma * pi * sqrt_dt * np.random.normal(0.0, 1.0)
            t += dt
            if t >= t_cap:
                break
    return wins


def mc_estimate(
    params: MarketParams, strategy: Strategy, cfg: McConfig
) -> tuple[float, float]:
    """Success probability under the strategy from ``cfg.w0``, with its
    binomial standard error.

    Euler steps of the wealth dynamics; one exponential death time per path;
    absorption at ruin, at the strategy's success level, and at a time cap of
    60 expected lifetimes (truncation mass e^-60).
    """
    ws = safe_level(params)
    if cfg.w0 > ws:
        raise ConfigError(f"w0 must lie in [0, {ws}], got {cfg.w0}")
    grid_len = max(strategy.success_level, 1e-12)
    grid = np.linspace(0.0, grid_len, 8193)
    pi_grid = np.array([strategy.pi(float(x)) for x in grid])
    t_cap = 60.0 / params.lam
    wins = _mc_kernel(
        cfg.seed, cfg.n_paths, cfg.w0, cfg.dt, t_cap,
        params.r, params.mu - params.r, params.sigma, params.lam,
        params.h, params.b, params.c,
        strategy.buy_threshold, strategy.success_level, pi_grid, grid_len,
    )
    est = wins / cfg.n_paths
    stderr = math.sqrt(max(est * (1.0 - est), 0.0) / cfg.n_paths)
    return est, stderr


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    residual_sup: float
    pasting_gaps: tuple[PastingGap, ...]
    fd_sup_error: float
    mc_estimate: float
    mc_stderr: float
    mc_z: float

    def failures(
        self,
        residual_tol: float = 1e-8,
        pasting_tol: float = 1e-8,
        fd_tol: float = 1e-3,
        z_max: float = 3.0,
    ) -> list[str]:
        out = []
        if not self.residual_sup < residual_tol:
            out.append(f"hjb-residual ({self.residual_sup:.3e} >= {residual_tol:.0e})")
        worst = max((g.max_gap for g in self.pasting_gaps), default=0.0)
        if not worst < pasting_tol:
            out.append(f"smooth-pasting ({worst:.3e} >= {pasting_tol:.0e})")
        if not self.fd_sup_error < fd_tol:
            out.append(f"fd-oracle ({self.fd_sup_error:.3e} >= {fd_tol:.0e})")
        if not abs(self.mc_z) <= z_max:
            out.append(f"monte-carlo (|z| = {abs(self.mc_z):.2f} > {z_max})")
        return out


def run_verification(
    solution: Solution,
    seed: int = 0,
    n_paths: int = 100_000,
    dt: float = 1.0 / 2500.0,
    fd_grid: int = 2000,
    w0: Optional[float] = None,
) -> VerificationReport:
    """Run all four oracles against one solved instance."""
    fd = fd_solve(solution.params, FdConfig(n_grid=fd_grid))
    fd_err = fd.sup_error_vs(solution.phi)
    w_start = 0.5 * solution.w_s if w0 is None else w0
    est, se = mc_estimate(
        solution.params, optimal_strategy(solution),
        McConfig(n_paths=n_paths, dt=dt, seed=seed, w0=w_start),
    )
    target = solution.phi(w_start)
    z = (est - target) / se if se > 0.0 else math.inf * (est - target) if est != target else 0.0
    return VerificationReport(
        residual_sup=residual_sup(solution),
        pasting_gaps=smooth_pasting_check(solution),
        fd_sup_error=fd_err,
        mc_estimate=est,
        mc_stderr=se,
        mc_z=z,
    )
