"""Piecewise-linear analysis of 1-D networks, error measurement, free-knot
piece counting, and the interval covering/packing demo calculators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .core import DimensionError, ReluNetwork, evaluate_batch, metrics

BREAK_MERGE_TOL = 1e-12


class ResolutionError(ValueError):
    """Grid too coarse for the requested computation."""


@dataclass(frozen=True)
class PwlFunction:
    """Continuous piecewise-linear function given by its breakpoints and
    values, with the one-sided slopes at the two ends."""

    breakpoints: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if bp.ndim != 1 or bp.shape != vals.shape or bp.size < 2:
            raise ValueError("need matching breakpoint and value arrays")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        return np.interp(x, self.breakpoints, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def piece_count(self, tol: float = 1e-9) -> int:
        """Number of maximal linearity intervals between the end breakpoints."""
        s = self.slopes()
        if s.size == 0:
            return 1
        scale = np.maximum(1.0, np.maximum(np.abs(s[1:]), np.abs(s[:-1])))
        return 1 + int(np.sum(np.abs(np.diff(s)) > tol * scale))


def _relu_pass(grid: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Insert zero crossings of each coordinate into the grid, then clip."""
    crossings = []
    for col in range(vals.shape[1]):
        v = vals[:, col]
        sign_change = (v[:-1] < 0) & (v[1:] > 0) | (v[:-1] > 0) & (v[1:] < 0)
        idx = np.nonzero(sign_change)[0]
        if idx.size:
            x0, x1 = grid[idx], grid[idx + 1]
            v0, v1 = v[idx], v[idx + 1]
            crossings.append(x0 + (x1 - x0) * (v0 / (v0 - v1)))
    if crossings:
        extra = np.concatenate(crossings)
        merged = np.union1d(grid, extra)
        # drop points closer than the merge tolerance to an existing one
        keep = np.empty(merged.shape, dtype=bool)
        keep[0] = True
        keep[1:] = np.diff(merged) > BREAK_MERGE_TOL
        merged = merged[keep]
        new_vals = np.empty((merged.size, vals.shape[1]))
        for col in range(vals.shape[1]):
            new_vals[:, col] = np.interp(merged, grid, vals[:, col])
        grid, vals = merged, new_vals
    return grid, np.maximum(vals, 0.0)


def exact_pwl(net: ReluNetwork, interval: tuple[float, float]) -> PwlFunction:
    """Exact piecewise-linear form of a 1-in 1-out network on [a, b].

    Breakpoints are propagated layer by layer: each neuron's preactivation is
    linear between current breakpoints, and its zero crossings become new
    breakpoints before the ReLU clip.
    """
    if net.in_dim != 1 or net.out_dim != 1:
        raise DimensionError("exact piecewise form needs a 1-D network")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    grid = np.array([a, b])
    layer_vals = grid.reshape(-1, 1)
    for i, layer in enumerate(net.layers):
        layer_vals = layer_vals @ layer.matrix.T + layer.bias
        if i < net.depth - 1:
            grid, layer_vals = _relu_pass(grid, layer_vals)
    out = layer_vals[:, 0]
    slopes = np.diff(out) / np.diff(grid)
    return PwlFunction(grid, out, float(slopes[0]), float(slopes[-1]))


def count_linear_regions(
    net: ReluNetwork, interval: tuple[float, float]
) -> tuple[int, int]:
    """Number of maximal linearity intervals on [a, b], together with the
    structural bound (2 * width) ** depth that every network respects."""
    pwl = exact_pwl(net, interval)
    stats = metrics(net)
    bound = (2 * stats.width) ** stats.depth
    count = pwl.piece_count()
    if count > bound:
        raise AssertionError(
            f"region count {count} exceeds structural bound {bound}"
        )
    return count, bound


def region_bound(net: ReluNetwork) -> int:
    """(2 * width) ** depth, the piece-count bound for 1-D networks."""
    stats = metrics(net)
    return (2 * stats.width) ** stats.depth


# --- error measurement --------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    """Grid-based sup and L2 error of a network against a reference."""

    domain: tuple
    grid_n: int
    sup_error: float
    l2_error: float
    argmax: tuple

    def csv_row(self) -> str:
        lo = "x".join(f"{float(a):.16e}" for a, _ in self.domain)
        hi = "x".join(f"{float(b):.16e}" for _, b in self.domain)
        arg = "x".join(f"{float(x):.16e}" for x in self.argmax)
        return (
            f"{lo},{hi},{self.grid_n},{self.sup_error:.16e},"
            f"{self.l2_error:.16e},{arg}"
        )


def _normalize_domain(domain) -> list[tuple[float, float]]:
    arr = np.asarray(domain, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    boxes = [(float(lo), float(hi)) for lo, hi in arr]
    for lo, hi in boxes:
        if not lo < hi:
            raise ValueError(f"empty domain [{lo}, {hi}]")
    return boxes


def _eval_grid(net: ReluNetwork, domain, grid_n: int):
    boxes = _normalize_domain(domain)
    if grid_n < 2:
        raise ValueError("need at least two grid points per axis")
    if len(boxes) != net.in_dim:
        raise DimensionError(
            f"domain has {len(boxes)} axes, network expects {net.in_dim}"
        )
    axes = [np.linspace(lo, hi, grid_n) for lo, hi in boxes]
    if len(boxes) == 1 and net.out_dim == 1:
        bp = exact_pwl(net, boxes[0]).breakpoints
        axes[0] = np.union1d(axes[0], bp)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return boxes, axes, pts


def _quad_weights(axes) -> np.ndarray:
    weights = np.ones(1)
    for ax in axes:
        w = np.empty(ax.size)
        gaps = np.diff(ax)
        w[0] = gaps[0] / 2
        w[-1] = gaps[-1] / 2
        w[1:-1] = (gaps[:-1] + gaps[1:]) / 2
        weights = np.multiply.outer(weights, w).ravel()
    return weights


def error_report(
    net: ReluNetwork, reference: Callable, domain, grid_n: int
) -> ErrorReport:
    """Sup and trapezoid-L2 error against a reference callable on a uniform
    grid (1-D grids also include all network breakpoints)."""
    boxes, axes, pts = _eval_grid(net, domain, grid_n)
    got = evaluate_batch(net, pts)[:, 0]
    if len(boxes) == 1:
        want = np.asarray([reference(float(x)) for x in pts[:, 0]])
    else:
        want = np.asarray([reference(*map(float, p)) for p in pts])
    err = got - want
    sup_idx = int(np.argmax(np.abs(err)))
    weights = _quad_weights(axes)
    l2 = math.sqrt(float(np.sum(weights * err ** 2)))
    return ErrorReport(
        domain=tuple(boxes),
        grid_n=grid_n,
        sup_error=float(np.abs(err[sup_idx])),
        l2_error=l2,
        argmax=tuple(float(x) for x in pts[sup_idx]),
    )


def sup_error(net, reference, domain, grid_n: int) -> ErrorReport:
    return error_report(net, reference, domain, grid_n)


def l2_error(net, reference, domain, grid_n: int) -> ErrorReport:
    return error_report(net, reference, domain, grid_n)


# --- free-knot piece counting ----------------------------------------------------


def _hull_indices(xs: np.ndarray, ys: np.ndarray, upper: bool) -> list[int]:
    # monotone chain over points already sorted by x
    out: list[int] = []
    for i in range(xs.size):
        while len(out) >= 2:
            i0, i1 = out[-2], out[-1]
            cross = (xs[i1] - xs[i0]) * (ys[i] - ys[i0]) - (xs[i] - xs[i0]) * (
                ys[i1] - ys[i0]
            )
            if (cross >= 0) if upper else (cross <= 0):
                out.pop()
            else:
                break
        out.append(i)
    return out


def minimax_line_error(xs: np.ndarray, ys: np.ndarray) -> float:
    """Smallest sup deviation of a line from the points (xs ascending).

    Equals half the least vertical width of a strip containing all points.
    The width as a function of the slope is convex piecewise-linear with
    breakpoints at the hull edge slopes, so the minimum is found by walking
    those slopes while tracking the supporting vertices of both hulls.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    n = xs.size
    if n <= 2:
        return 0.0
    upper = _hull_indices(xs, ys, upper=True)
    lower = _hull_indices(xs, ys, upper=False)
    slopes_u = [
        (ys[j] - ys[i]) / (xs[j] - xs[i]) for i, j in zip(upper, upper[1:])
    ]
    slopes_l = [
        (ys[j] - ys[i]) / (xs[j] - xs[i]) for i, j in zip(lower, lower[1:])
    ]
    candidates = sorted(slopes_u + slopes_l)
    # at slope -inf the max of y - c*x sits at the rightmost upper vertex and
    # the min at the leftmost lower vertex; both supports move monotonically
    # as the slope grows (upper slopes decrease rightward, lower increase)
    u = len(upper) - 1
    low = 0
    best = math.inf
    for c in candidates:
        while u > 0 and c >= slopes_u[u - 1]:
            u -= 1
        while low < len(lower) - 1 and c >= slopes_l[low]:
            low += 1
        iu, il = upper[u], lower[low]
        width = (ys[iu] - c * xs[iu]) - (ys[il] - c * xs[il])
        best = min(best, width)
    return best / 2.0


def min_pieces(
    f: Callable[[float], float],
    interval: tuple[float, float],
    eps: float,
    grid_n: int,
) -> int:
    """Greedy free-knot count of linear pieces achieving sup error eps on the
    discretized interval.

    Each piece is extended as far as possible before starting the next one;
    for interval covering, greedy maximal extension uses the fewest pieces.
    Raises when a piece would span fewer than 10 grid points.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if eps <= 0:
        raise ValueError("tolerance must be positive")
    xs = np.linspace(a, b, grid_n)
    ys = np.asarray([f(float(x)) for x in xs])
    count = 0
    start = 0
    while start < grid_n - 1:
        # exponential probe then binary search for the furthest feasible end
        lo = start + 1
        hi = min(grid_n - 1, start + 2)
        while (
            hi < grid_n - 1
            and minimax_line_error(xs[start : hi + 1], ys[start : hi + 1]) <= eps
        ):
            lo = hi
            hi = min(grid_n - 1, start + 2 * (hi - start))
        if minimax_line_error(xs[start : hi + 1], ys[start : hi + 1]) <= eps:
            end = hi
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if (
                    minimax_line_error(xs[start : mid + 1], ys[start : mid + 1])
                    <= eps
                ):
                    lo = mid
                else:
                    hi = mid
            end = lo
        if end - start < 10 and end < grid_n - 1:
            raise ResolutionError(
                f"piece {count} spans only {end - start} grid points; "
                "refine the grid"
            )
        count += 1
        start = end
    return count


def asymptotic_piece_constant(
    second_derivative: Callable[[float], float],
    interval: tuple[float, float],
) -> float:
    """The constant c = (1/4) * integral of sqrt|f''| governing the free-knot
    piece count s(eps) ~ c / sqrt(eps)."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    value, abserr = quad(
        lambda x: math.sqrt(abs(second_derivative(x))),
        a,
        b,
        epsrel=1e-8,
        limit=200,
    )
    if abserr > 1e-6 * max(1.0, abs(value)):
        raise ArithmeticError(
            f"quadrature failed to converge: estimate {value} +- {abserr}"
        )
    return value / 4.0


# --- covering / packing demos ------------------------------------------------------


def cover_interval(eps: float) -> np.ndarray:
    """Centers -1 + 2*(i-1)*eps, i = 1..floor(1/eps)+1, covering [-1, 1]."""
    if not 0.0 < eps < 1.0:
        raise ValueError("radius must lie in (0, 1)")
    count = math.floor(1.0 / eps) + 1
    centers = -1.0 + 2.0 * eps * np.arange(count)
    # every point of [-1, 1] lies within eps of a center
    assert count <= 1.0 / eps + 1.0
    assert centers[0] - (-1.0) <= eps + 1e-12
    assert 1.0 - centers[-1] <= eps + 1e-12
    assert np.all(np.diff(centers) <= 2.0 * eps + 1e-12)
    return centers


def pack_interval(eps: float) -> np.ndarray:
    """Maximal set of points in [-1, 1] with pairwise distances > eps."""
    if not 0.0 < eps < 1.0:
        raise ValueError("separation must lie in (0, 1)")
    count = math.floor(2.0 / eps) + 1
    if (count - 1) * eps >= 2.0:
        count -= 1
    return np.linspace(-1.0, 1.0, count)


def pack_exp_family(eps: float) -> np.ndarray:
    """Packing of the class {x -> 1 - exp(-theta x), theta in [0, 1]} under
    the sup norm: theta_0 = 0 and theta_i = -ln(1 - eps*i) while <= 1."""
    if not 0.0 < eps < 1.0:
        raise ValueError("separation must lie in (0, 1)")
    top = math.floor((1.0 - 1.0 / math.e) / eps)
    thetas = [0.0]
    for i in range(1, top + 1):
        thetas.append(-math.log(1.0 - eps * i))
    out = np.asarray(thetas)
    # class values at x = 1 are eps * i, so all pairs are eps-separated
    vals = 1.0 - np.exp(-out)
    assert np.all(np.diff(vals) >= eps - 1e-12)
    return out


def cover_exp_family(eps: float) -> np.ndarray:
    """Covering of the same class: theta_i = 2*eps*i up to floor(1/(2 eps)),
    plus the endpoint theta = 1."""
    if not 0.0 < eps < 1.0:
        raise ValueError("radius must lie in (0, 1)")
    top = math.floor(1.0 / (2.0 * eps))
    thetas = [2.0 * eps * i for i in range(top + 1)]
    thetas.append(1.0)
    return np.asarray(thetas)
