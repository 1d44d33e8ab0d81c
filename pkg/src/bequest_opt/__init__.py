"""Maximum probability of reaching a bequest goal while consuming, with
instantaneous term life insurance and one risky asset: closed-form solver,
independent numerical oracles, and a CLI."""

from .model import (
    DerivedConstants,
    DomainError,
    MarketParams,
    Regime,
    ValidationError,
    classify_regime,
    derive_constants,
    ell_func,
    find_c2,
    g_func,
    safe_level,
)
from .solver import (
    DeterministicSolution,
    RegimeMismatchError,
    RootFailure,
    Solution,
    StrategyEval,
    deterministic_phi,
    solve,
    solve_buy_level_above_rb,
    solve_buy_level_low_c,
    solve_deterministic,
    solve_full_insurance,
    solve_full_insurance_above_rb,
    solve_ruin_limit,
    solve_zero_consumption,
)
from .verify import (
    ConfigError,
    FdConfig,
    FdResult,
    McConfig,
    NonConvergenceError,
    PastingGap,
    Strategy,
    VerificationReport,
    fd_solve,
    hjb_residual,
    hjb_residual_parts,
    mc_estimate,
    optimal_strategy,
    residual_sup,
    ruin_min_strategy,
    run_verification,
    smooth_pasting_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
