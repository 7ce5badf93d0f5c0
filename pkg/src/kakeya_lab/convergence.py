"""Convergence harnesses: the normalized-difference triangle inequality,
agreement of raw and mollified winding fields outside a collar, and the
collar/exterior split of the total winding integral across mollification
scales.

All grids here are anchored to the raw (unmollified) loop of each slice, so
fields at different mollification scales are compared cell for cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gridding import grid_over, mark_near_polyline
from .maps import PositionMap, RegularityReport, holder_estimate
from .slices import loop_area, slice_loop
from .smoothing import mollify_on_sphere
from .sphere import SphereMesh
from .winding import winding_field


@dataclass(frozen=True)
class TriangleCheck:
    checked: int
    violations: int
    max_violation: float


def triangle_inequality_check(
    n_samples: int = 10**6, dim: int = 2, seed: int = 0, tol: float = 1e-12
) -> TriangleCheck:
    """Fuzz the two-term normalized-difference inequality.

    For u = a - x and w = b - x with |u| <= |w|, checks
    |u/|u| - w/|w||  <=  |u - w| (1/|u| + 1/|w|).
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n_samples, dim))
    a = rng.uniform(-1.0, 1.0, size=(n_samples, dim))
    b = rng.uniform(-1.0, 1.0, size=(n_samples, dim))
    u = a - x
    w = b - x
    nu = np.linalg.norm(u, axis=1)
    nw = np.linalg.norm(w, axis=1)
    ok = (nu > 1e-12) & (nw > 1e-12)
    u, w, nu, nw = u[ok], w[ok], nu[ok], nw[ok]
    swap = nu > nw
    u[swap], w[swap] = w[swap].copy(), u[swap].copy()
    nu[swap], nw[swap] = nw[swap].copy(), nu[swap].copy()
    lhs = np.linalg.norm(u / nu[:, None] - w / nw[:, None], axis=1)
    rhs = np.linalg.norm(u - w, axis=1) * (1.0 / nu + 1.0 / nw)
    gap = lhs - rhs
    return TriangleCheck(
        int(len(u)), int(np.sum(gap > tol)), float(max(gap.max(), 0.0))
    )


def _collar_radius(
    pmap: PositionMap,
    epsilon: float,
    delta_prime: float | None,
    regularity: RegularityReport | None,
) -> tuple[float, RegularityReport]:
    if regularity is None:
        regularity = holder_estimate(pmap)
    if regularity.degenerate:
        return 0.0, regularity
    exponent = (
        float(delta_prime)
        if delta_prime is not None
        else float(regularity.holder_exponent_estimate)
    )
    H = 2.0 * float(regularity.holder_constant_estimate)
    return H * epsilon**exponent, regularity


@dataclass(frozen=True)
class AgreementStats:
    compared_cells: int
    collar_cells: int
    mismatches: int
    collar_radius: float
    agreement_fraction: float


def winding_agreement(
    pmap: PositionMap,
    t: float,
    epsilon: float,
    mesh: SphereMesh,
    h: float,
    delta_prime: float | None = None,
    regularity: RegularityReport | None = None,
) -> AgreementStats:
    """Compare raw and mollified winding fields outside the deviation collar.

    The collar radius is twice the measured oscillation constant times
    epsilon^exponent, an upper bound for the mollification displacement, so
    outside it the two loops are homotopic around every cell center and the
    fields must agree exactly.
    """
    collar, _ = _collar_radius(pmap, epsilon, delta_prime, regularity)
    raw = pmap(mesh.vertices)
    smooth = mollify_on_sphere(raw, epsilon, mesh)
    loop_raw = slice_loop(pmap, t, mesh, samples=raw)
    loop_eps = slice_loop(pmap, t, mesh, samples=smooth)
    both = np.vstack([loop_raw.vertices, loop_eps.vertices])
    grid = grid_over(both, h, pad=max(2.0 * h, 0.1, collar))
    f_raw = winding_field(loop_raw, h, grid=grid)
    f_eps = winding_field(loop_eps, h, grid=grid)
    in_collar = (
        mark_near_polyline(grid, loop_raw.vertices, collar)
        if collar > 0.0
        else np.zeros(grid.shape, dtype=bool)
    )
    comparable = ~(f_raw.mask | f_eps.mask | in_collar)
    mism = int(np.sum(f_raw.values[comparable] != f_eps.values[comparable]))
    compared = int(comparable.sum())
    total_unmasked = int((~(f_raw.mask | f_eps.mask)).sum())
    agree_all = int(
        np.sum(
            f_raw.values[~(f_raw.mask | f_eps.mask)]
            == f_eps.values[~(f_raw.mask | f_eps.mask)]
        )
    )
    return AgreementStats(
        compared,
        int(in_collar.sum()),
        mism,
        collar,
        agree_all / max(total_unmasked, 1),
    )


@dataclass
class ConvergenceReport:
    epsilons: list
    total_integrals: list
    collar_integrals: list  # I1 per epsilon
    exterior_integrals: list  # I2 per epsilon
    i1_bounds: list  # collar-measure^(1/(n-1)) * max loop area per epsilon
    agreement_fractions: list
    calibration_constant: float
    cauchy_gaps: list
    cauchy_ok: bool
    i1_ok: bool
    diagnostics: dict = field(default_factory=dict)

    def gap_ratio(self) -> float:
        """Smallest shrink factor between successive total-integral gaps."""
        pairs = zip(self.cauchy_gaps, self.cauchy_gaps[1:])
        return min((g0 / g1 if g1 > 0 else np.inf) for g0, g1 in pairs)


def convergence_split(
    pmap: PositionMap,
    epsilons,
    t_grid,
    mesh: SphereMesh,
    h: float,
    delta_prime: float | None = None,
) -> ConvergenceReport:
    """Split the total winding integral into collar and exterior parts per
    mollification scale, and test the finite-scale convergence pattern.

    Checks: successive gaps of the totals shrink by at least 1.5x, and the
    collar part obeys the collar-measure bound with the constant calibrated
    at the largest scale and held fixed.
    """
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 3 or any(np.diff(epsilons) >= 0):
        raise ValueError("need at least three strictly decreasing scales")
    t_grid = np.asarray(t_grid, dtype=float)
    regularity = holder_estimate(pmap)
    raw_samples = pmap(mesh.vertices)
    raw_loops = [slice_loop(pmap, t, mesh, samples=raw_samples) for t in t_grid]
    grids = [
        grid_over(lp.vertices, h, pad=max(2.0 * h, 0.3)) for lp in raw_loops
    ]
    totals, i1s, i2s, bounds, agree = [], [], [], [], []
    for eps in epsilons:
        collar, _ = _collar_radius(pmap, eps, delta_prime, regularity)
        smooth = mollify_on_sphere(raw_samples, eps, mesh)
        total = 0.0
        collar_part = np.zeros(len(t_grid))
        total_part = np.zeros(len(t_grid))
        collar_area = np.zeros(len(t_grid))
        max_area = 0.0
        agree_cells = 0
        unmasked_cells = 0
        for i, t in enumerate(t_grid):
            lp = slice_loop(pmap, t, mesh, samples=smooth)
            grid = grids[i]
            f_eps = winding_field(lp, h, grid=grid)
            f_raw = winding_field(raw_loops[i], h, grid=grid)
            in_collar = (
                mark_near_polyline(grid, raw_loops[i].vertices, collar)
                if collar > 0.0
                else np.zeros(grid.shape, dtype=bool)
            )
            cell = grid.cell_measure
            vals = np.where(f_eps.mask, 0, f_eps.values)
            total_part[i] = vals.sum() * cell
            collar_part[i] = vals[in_collar].sum() * cell
            collar_area[i] = in_collar.sum() * cell
            max_area = max(max_area, loop_area(lp))
            both = ~(f_eps.mask | f_raw.mask)
            unmasked_cells += int(both.sum())
            agree_cells += int(np.sum(f_eps.values[both] == f_raw.values[both]))
        total = float(np.trapezoid(total_part, t_grid))
        i1 = float(np.trapezoid(collar_part, t_grid))
        collar_measure = float(np.trapezoid(collar_area, t_grid))
        totals.append(total)
        i1s.append(i1)
        i2s.append(total - i1)
        bounds.append(collar_measure ** (1.0 / (pmap.n - 1)) * max_area)
        agree.append(agree_cells / max(unmasked_cells, 1))
    gaps = [abs(totals[k + 1] - totals[k]) for k in range(len(totals) - 1)]
    cauchy_ok = all(
        gaps[k + 1] <= gaps[k] / 1.5 + 1e-12 for k in range(len(gaps) - 1)
    )
    if bounds[0] > 0.0:
        calibration = abs(i1s[0]) / bounds[0]
    else:
        calibration = 0.0
    i1_ok = all(
        abs(i1s[k]) <= calibration * bounds[k] * (1.0 + 1e-9) + 1e-12
        for k in range(len(epsilons))
    )
    return ConvergenceReport(
        epsilons,
        totals,
        i1s,
        i2s,
        bounds,
        agree,
        calibration,
        gaps,
        bool(cauchy_ok),
        bool(i1_ok),
        diagnostics={"grid_h": h, "mesh": mesh.n_vertices, "t_steps": len(t_grid)},
    )
