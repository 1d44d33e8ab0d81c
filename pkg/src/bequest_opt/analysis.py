"""Parameter sweeps, limiting-case checks, and the reference strategy tables.

The two tables sweep the reference market (r=3%, mu=6%, sigma=20%, lam=4%,
b=1) over consumption and over the premium rate, probing the risky position
at five wealth levels with the convention pi = 0 at and above the safe
level.  The printed values published for these tables are embedded as
fixtures so deviations can be reported cell by cell (``table_diff``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import DomainError, MarketParams, derive_constants
from .solver import Solution, solve
from .verify import FdConfig, fd_solve

PROBE_WEALTHS = (0.1, 0.3, 0.5, 0.7, 0.9)

TABLE_BASE = dict(r=0.03, mu=0.06, sigma=0.20, lam=0.04, b=1.0)
TABLE_C_GRID = (0.0, 0.0005, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.0629)
TABLE_H_GRID = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 0.20, 0.50)

# published cells: (w_b, w_s, pi at w = 0.1, 0.3, 0.5, 0.7, 0.9)
TABLE_C_PRINTED = {
    0.0:    (0.375, 0.625, 0.212, 0.637, 0.397, 0.0, 0.0),
    0.0005: (0.381, 0.631, 0.207, 0.622, 0.417, 0.0, 0.0),
    0.005:  (0.403, 0.688, 0.428, 0.724, 0.560, 0.0, 0.0),
    0.01:   (0.397, 0.750, 0.748, 0.983, 0.794, 0.159, 0.0),
    0.02:   (0.354, 0.875, 1.407, 1.597, 1.191, 0.556, 0.0),
    0.03:   (0.295, 1.000, 2.072, 2.223, 1.588, 0.953, 0.318),
    0.04:   (0.215, 1.333, 2.693, 2.575, 1.932, 1.284, 0.615),
    0.05:   (0.124, 1.667, 3.359, 2.893, 2.239, 1.573, 0.874),
    0.06:   (0.028, 2.000, 3.851, 3.194, 2.528, 1.846, 1.122),
    0.0629: (0.0,   2.097, 3.937, 3.278, 2.609, 1.923, 1.193),
}
TABLE_H_PRINTED = {
    0.0:  (0.0,   0.667, 0.400, 0.259, 0.118, 0.0,    0.0),
    0.01: (0.0,   0.750, 0.707, 0.490, 0.272, 0.0544, 0.0),
    0.02: (0.0,   0.800, 1.078, 0.770, 0.462, 0.154,  0.0),
    0.03: (0.133, 0.833, 1.407, 1.092, 0.683, 0.273,  0.0),
    0.04: (0.259, 0.857, 1.407, 1.447, 0.927, 0.408,  0.0),
    0.05: (0.357, 0.875, 1.407, 1.600, 1.191, 0.556,  0.0),
    0.10: (0.609, 0.923, 1.407, 1.600, 1.833, 1.402,  0.145),
    0.20: (0.782, 0.957, 1.407, 1.600, 1.833, 2.106,  0.724),
    0.50: (0.907, 0.981, 1.407, 1.600, 1.833, 2.106,  2.406),
}
# premium -> infinity row: no-insurance limit (w_b -> b, probed via the FD oracle)
TABLE_H_INF_PRINTED = (1.0, 1.000, 1.407, 1.600, 1.833, 2.106, 2.406)


def base_params(c: float = 0.02, h: float = 0.05) -> MarketParams:
    return MarketParams(c=c, h=h, **TABLE_BASE)


@dataclass(frozen=True)
class SweepRow:
    value: float
    regime: Optional[str]
    w_b: float
    w_s: float
    phi: tuple[float, ...]
    pi: tuple[float, ...]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    grid: tuple[float, ...]
    probes: tuple[float, ...]
    rows: tuple[SweepRow, ...]


def probe_point(sol: Solution, w: float) -> tuple[float, float]:
    """(phi, pi) at a probe wealth, with phi = 1 and pi = 0 above the safe level."""
    if w >= sol.w_s:
        return 1.0, 0.0
    ev = sol.eval(w)
    return ev.phi, ev.pi_star


def _sweep(axis: str, base: MarketParams, grid, probes) -> SweepResult:
    rows = []
    for v in grid:
        try:
            params = replace(base, **{axis: float(v)})
            sol = solve(params)
            phis, pis = zip(*(probe_point(sol, w) for w in probes))
            rows.append(SweepRow(
                value=float(v), regime=sol.regime.value, w_b=sol.w_b, w_s=sol.w_s,
                phi=phis, pi=pis,
            ))
        except Exception as exc:
            rows.append(SweepRow(
                value=float(v), regime=None, w_b=math.nan, w_s=math.nan,
                phi=(math.nan,) * len(probes), pi=(math.nan,) * len(probes),
                error=str(exc),
            ))
    return SweepResult(axis=axis, grid=tuple(float(v) for v in grid),
                       probes=tuple(probes), rows=tuple(rows))


def sweep_consumption(
    base: MarketParams, c_grid: Sequence[float], probes=PROBE_WEALTHS
) -> SweepResult:
    """Solve across a consumption grid; exposes the hump of the buy level."""
    return _sweep("c", base, c_grid, probes)


def sweep_premium(
    base: MarketParams, h_grid: Sequence[float], probes=PROBE_WEALTHS
) -> SweepResult:
    """Solve across a premium grid, including the h = 0 ruin-avoidance row."""
    return _sweep("h", base, h_grid, probes)


def limit_h_zero(params: MarketParams, w: float) -> tuple[float, float]:
    """Free-insurance limit: success probability and risky position at ``w``.

    These are one minus the minimum lifetime-ruin probability and the
    ruin-minimizing investment rule, on [0, c/r].
    """
    if not params.c > 0.0:
        raise DomainError("the free-insurance limit needs c > 0")
    cap = params.c / params.r
    if w < 0.0 or w > cap:
        raise DomainError(f"wealth {w} outside [0, {cap}]")
    d = derive_constants(replace(params, h=0.0))
    phi = 1.0 - (1.0 - w / cap) ** d.p0
    pi = (params.mu - params.r) / params.sigma ** 2 * (cap - w) / (d.p0 - 1.0)
    return phi, pi


@dataclass(frozen=True)
class PremiumLimitReport:
    """Closed form vs the no-insurance oracle for increasingly costly cover."""

    h_values: tuple[float, ...]
    sup_dev: tuple[float, ...]     # sup |phi_h - phi_no_insurance| on [0, w_s(h)]
    w_b: tuple[float, ...]         # buy levels, increasing toward b
    fd_pi_probes: tuple[float, ...]  # oracle controls at the probe wealths


def check_h_infinity(
    params: MarketParams,
    probes=PROBE_WEALTHS,
    h_values: Sequence[float] = (10.0, 100.0, 1000.0),
    n_grid: int = 2000,
) -> PremiumLimitReport:
    """Compare the solution at large premium rates to the no-insurance oracle."""
    if not params.c > 0.0:
        raise DomainError("the costly-insurance limit check needs c > 0")
    fd = fd_solve(params, FdConfig(n_grid=n_grid, insurance_allowed=False))
    sup_dev = []
    w_bs = []
    for h in h_values:
        sol = solve(replace(params, h=float(h)))
        mask = fd.w <= sol.w_s
        dev = np.abs([sol.phi(float(x)) for x in fd.w[mask]] - fd.phi[mask])
        sup_dev.append(float(np.max(dev)))
        w_bs.append(sol.w_b)
    return PremiumLimitReport(
        h_values=tuple(float(h) for h in h_values),
        sup_dev=tuple(sup_dev),
        w_b=tuple(w_bs),
        fd_pi_probes=tuple(float(fd.interp_pi(w)) for w in probes),
    )


def scaling_check(params: MarketParams, k: float, probes=PROBE_WEALTHS) -> float:
    """Max relative deviation from the joint (wealth, goal, consumption) scaling."""
    sol = solve(params)
    sol_k = solve(params.scaled(k))
    dev = abs(sol_k.w_s - k * sol.w_s) / (k * sol.w_s)
    dev = max(dev, abs(sol_k.w_b - k * sol.w_b) / (k * sol.w_s))
    for frac in probes:
        w = frac * sol.w_s
        if w >= sol.w_s:
            continue
        ev = sol.eval(w)
        ev_k = sol_k.eval(k * w)
        dev = max(dev, abs(ev_k.phi - ev.phi))
        dev = max(dev, abs(ev_k.pi_star / k - ev.pi_star) / max(abs(ev.pi_star), 1.0))
    return dev


@dataclass(frozen=True)
class StrategyTable:
    title: str
    axis: str
    row_labels: tuple[str, ...]
    cells: tuple[tuple[float, ...], ...]  # (w_b, w_s, pi at probes) per row
    probes: tuple[float, ...]

    def header(self) -> list[str]:
        return [self.axis, "w_b", "w_s"] + [f"pi({w:g})" for w in self.probes]

    def to_text(self, ndigits: int = 3) -> str:
        header = self.header()
        widths = [max(8, len(h) + 2) for h in header]
        widths[0] = max(widths[0], max(len(s) for s in self.row_labels) + 2)
        lines = [self.title, "".join(h.ljust(w) for h, w in zip(header, widths))]
        for label, row in zip(self.row_labels, self.cells):
            fields = [label] + [f"{v:.{ndigits}f}" for v in row]
            lines.append("".join(f.ljust(w) for f, w in zip(fields, widths)))
        return "\n".join(lines)


def _sweep_to_table(title: str, axis: str, sweep: SweepResult) -> StrategyTable:
    labels = tuple(f"{v:g}" for v in sweep.grid)
    cells = tuple((row.w_b, row.w_s) + row.pi for row in sweep.rows)
    return StrategyTable(title=title, axis=axis, row_labels=labels, cells=cells,
                         probes=sweep.probes)


def reproduce_tables(
    fd_row: bool = True, n_grid: int = 2000
) -> tuple[StrategyTable, StrategyTable]:
    """Recompute both reference tables (optionally with the oracle's
    no-insurance row appended to the premium table, labeled 'fd-oracle')."""
    sweep_c = sweep_consumption(base_params(h=0.05), TABLE_C_GRID)
    table_c = _sweep_to_table("strategies by consumption rate", "c", sweep_c)
    sweep_h = sweep_premium(base_params(c=0.02), TABLE_H_GRID)
    table_h = _sweep_to_table("strategies by premium rate", "h", sweep_h)
    if fd_row:
        fd = fd_solve(base_params(c=0.02), FdConfig(n_grid=n_grid, insurance_allowed=False))
        fd_pi = tuple(float(fd.interp_pi(w)) for w in PROBE_WEALTHS)
        table_h = StrategyTable(
            title=table_h.title, axis=table_h.axis,
            row_labels=table_h.row_labels + ("fd-oracle",),
            cells=table_h.cells + ((1.0, 1.0) + fd_pi,),
            probes=table_h.probes,
        )
    return table_c, table_h


def table_diff(table_c: StrategyTable, table_h: StrategyTable) -> list[tuple[str, str, float, float, float]]:
    """Cell-by-cell deviations (label, column, computed, printed, |diff|)
    against the published fixtures, largest first."""
    diffs = []
    for label, row in zip(table_c.row_labels, table_c.cells):
        printed = TABLE_C_PRINTED[float(label)]
        for name, mine, ref in zip(table_c.header()[1:], row, printed):
            diffs.append((f"c={label}", name, mine, ref, abs(mine - ref)))
    for label, row in zip(table_h.row_labels, table_h.cells):
        printed = (TABLE_H_INF_PRINTED if label == "fd-oracle"
                   else TABLE_H_PRINTED[float(label)])
        for name, mine, ref in zip(table_h.header()[1:], row, printed):
            diffs.append((f"h={label}", name, mine, ref, abs(mine - ref)))
    diffs.sort(key=lambda t: -t[4])
    return diffs
