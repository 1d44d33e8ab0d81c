import numpy as np
import pytest

from bequest_opt import (
    ConfigError,
    FdConfig,
    McConfig,
    NonConvergenceError,
    Regime,
    derive_constants,
    fd_solve,
    hjb_residual,
    hjb_residual_parts,
    mc_estimate,
    optimal_strategy,
    residual_sup,
    ruin_min_strategy,
    smooth_pasting_check,
    solve,
)

from cases import REGIME_CASES, ref_params


class TestHjbResidual:
    def test_reference_case_below_tolerance(self):
        sol = solve(ref_params(c=0.02))
        assert residual_sup(sol, n=100) < 1e-8

    def test_zero_consumption_both_branches(self):
        sol = solve(ref_params(c=0.0))
        for w in (sol.w_b * 0.5, sol.w_b * 1.5):  # one point per branch
            assert abs(hjb_residual(sol, w)) < 1e-8

    def test_detects_fake_solution(self):
        # a constant 0.5 "value function" leaves a residual of lam * (0.5 - s)
        p = ref_params(c=0.02)
        d = derive_constants(p)
        w_b = 0.35
        below = hjb_residual_parts(p, d, w_b, 0.1, 0.5, 0.0, 0.0)
        above = hjb_residual_parts(p, d, w_b, 0.5, 0.5, 0.0, 0.0)
        assert below == pytest.approx(p.lam * 0.5)
        assert above == pytest.approx(-p.lam * 0.5)

    def test_rejects_boundary_and_pasting_points(self):
        sol = solve(ref_params(c=0.02))
        from bequest_opt import DomainError

        with pytest.raises(DomainError):
            hjb_residual(sol, 0.0)
        with pytest.raises(DomainError):
            hjb_residual(sol, sol.w_b)


class TestSmoothPasting:
    def test_gaps_small_everywhere(self):
        for p in REGIME_CASES.values():
            for gap in smooth_pasting_check(solve(p)):
                assert gap.max_gap < 1e-8

    def test_three_branch_case_has_two_points(self):
        gaps = smooth_pasting_check(solve(ref_params(c=0.05)))
        assert len(gaps) == 2

    def test_single_branch_case_empty(self):
        assert smooth_pasting_check(solve(ref_params(c=0.02, h=0.02))) == ()


class TestFdSolve:
    def test_boundary_nodes_exact(self):
        fd = fd_solve(ref_params(c=0.02), FdConfig(n_grid=200))
        assert fd.phi[0] == 0.0
        assert fd.phi[-1] == 1.0

    def test_matches_closed_form(self):
        p = ref_params(c=0.02)
        sol = solve(p)
        fd = fd_solve(p, FdConfig(n_grid=500))
        assert fd.sup_error_vs(sol.phi) < 1e-3

    def test_refinement_improves(self):
        p = REGIME_CASES[Regime.BUY_LEVEL_ABOVE_RB]
        sol = solve(p)
        e_coarse = fd_solve(p, FdConfig(n_grid=500)).sup_error_vs(sol.phi)
        e_fine = fd_solve(p, FdConfig(n_grid=2000)).sup_error_vs(sol.phi)
        assert e_fine < e_coarse

    def test_no_insurance_mode_recovers_reference_controls(self):
        # expensive-cover limit: the oracle's control column at the probes
        fd = fd_solve(ref_params(c=0.02), FdConfig(n_grid=2000, insurance_allowed=False))
        expected = (1.407, 1.600, 1.833, 2.106, 2.406)
        for w, ref in zip((0.1, 0.3, 0.5, 0.7, 0.9), expected):
            assert float(fd.interp_pi(w)) == pytest.approx(ref, abs=0.02)

    def test_no_insurance_domain_extends_to_goal(self):
        fd = fd_solve(ref_params(c=0.02), FdConfig(n_grid=100, insurance_allowed=False))
        assert fd.w[-1] == pytest.approx(1.0)  # goal above c/r

    def test_insurance_mode_requires_positive_premium(self):
        with pytest.raises(ConfigError):
            fd_solve(ref_params(c=0.02, h=0.0), FdConfig(n_grid=100))

    def test_nonconvergence_reports_last_change(self):
        with pytest.raises(NonConvergenceError) as exc:
            fd_solve(ref_params(c=0.02), FdConfig(n_grid=200, max_sweeps=1, tol=1e-14))
        assert exc.value.last_change > 0.0

    def test_discrete_residual_small_away_from_pasting(self):
        p = ref_params(c=0.05)
        sol = solve(p)
        cfg = FdConfig(n_grid=500)
        fd = fd_solve(p, cfg)
        wi = fd.w[1:-1]
        keep = np.ones_like(wi, dtype=bool)
        dx = fd.w[1] - fd.w[0]
        for wp in (sol.w_b, p.b):
            keep &= np.abs(wi - wp) > 2 * dx
        assert np.max(np.abs(fd.residual[keep])) < 10 * cfg.tol

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            FdConfig(n_grid=5)
        with pytest.raises(ConfigError):
            FdConfig(tol=0.0)


class TestMcEstimate:
    def test_trivial_boundaries(self):
        p = REGIME_CASES[Regime.FULL_INSURANCE_BELOW_SAFE]
        sol = solve(p)
        strat = optimal_strategy(sol)
        est0, se0 = mc_estimate(p, strat, McConfig(n_paths=500, seed=1, w0=0.0))
        assert (est0, se0) == (0.0, 0.0)
        est1, _ = mc_estimate(p, strat, McConfig(n_paths=500, seed=1, w0=sol.w_s))
        assert est1 == 1.0

    def test_bit_identical_reruns(self):
        p = REGIME_CASES[Regime.FULL_INSURANCE_BELOW_SAFE]
        sol = solve(p)
        cfg = McConfig(n_paths=4000, seed=123, w0=0.5 * sol.w_s)
        a = mc_estimate(p, optimal_strategy(sol), cfg)
        b = mc_estimate(p, optimal_strategy(sol), cfg)
        assert a == b

    def test_seed_changes_estimate(self):
        p = REGIME_CASES[Regime.FULL_INSURANCE_BELOW_SAFE]
        sol = solve(p)
        strat = optimal_strategy(sol)
        a, _ = mc_estimate(p, strat, McConfig(n_paths=4000, seed=1, w0=0.5 * sol.w_s))
        b, _ = mc_estimate(p, strat, McConfig(n_paths=4000, seed=2, w0=0.5 * sol.w_s))
        assert a != b

    def test_consistent_with_closed_form(self):
        p = REGIME_CASES[Regime.BUY_LEVEL_ABOVE_RB]
        sol = solve(p)
        w0 = 0.5 * sol.w_s
        est, se = mc_estimate(p, optimal_strategy(sol),
                              McConfig(n_paths=20_000, seed=11, w0=w0))
        assert abs(est - sol.phi(w0)) <= 3.0 * se

    def test_suboptimal_strategy_bounded_by_value(self):
        p = REGIME_CASES[Regime.FULL_INSURANCE_BELOW_BEQUEST]
        sol = solve(p)
        w0 = 0.5 * sol.w_s
        est, se = mc_estimate(p, ruin_min_strategy(p),
                              McConfig(n_paths=10_000, seed=5, w0=w0))
        assert est <= sol.phi(w0) + 3.0 * max(se, 1e-3)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            McConfig(n_paths=0)
        with pytest.raises(ConfigError):
            McConfig(dt=0.02)
        with pytest.raises(ConfigError):
            McConfig(dt=0.0)
        p = ref_params(c=0.02)
        sol = solve(p)
        with pytest.raises(ConfigError):
            mc_estimate(p, optimal_strategy(sol),
                        McConfig(n_paths=10, w0=sol.w_s * 1.5))
