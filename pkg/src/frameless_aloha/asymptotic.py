"""Large-population limits of the resolution process.

With Poisson slot and user degrees, the erasure-decoding recursion collapses
to a scalar fixed point: x is the probability that a user stays unresolved
through one more round,

    x_{k+1} = exp(-ratio * g * exp(-g * x_k)),   x_0 = 1,

where g is the target slot degree and ratio is slots per user.  The iteration
is monotone non-increasing from 1, so it converges to the physically reached
fixed point.  Resolution probability is 1 - x*, throughput is (1 - x*)/ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import ParameterError


class FixedPointResult(NamedTuple):
    p_resolve: float
    throughput: float
    converged: bool
    iterations: int


class CurvePoint(NamedTuple):
    ratio: float
    p_resolve: float
    throughput: float


def and_or_fixed_point(target_degree: float, ratio: float, tol: float = 1e-12,
                       max_iter: int = 100_000) -> FixedPointResult:
    """Iterate the unresolved-probability map to within `tol`.

    Non-convergence (possible exactly at the avalanche ratio, where the fixed
    point is tangent) is reported via the `converged` flag; the last iterate
    is still returned.
    """
    if not target_degree > 0:
        raise ParameterError(f"target_degree must be positive, got {target_degree}")
    if not ratio > 0:
        raise ParameterError(f"ratio must be positive, got {ratio}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be a positive count, got {max_iter}")
    x = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = math.exp(-ratio * target_degree * math.exp(-target_degree * x))
        done = abs(nxt - x) < tol
        x = nxt
        if done:
            converged = True
            break
    p_resolve = 1.0 - x
    return FixedPointResult(p_resolve, p_resolve / ratio, converged, iterations)


@dataclass(frozen=True)
class AsymptoticCurve:
    """Fixed-point results over a grid of slots-per-user ratios."""

    target_degree: float
    points: tuple[CurvePoint, ...]
    best_ratio: float
    best_throughput: float
    avalanche_interval: tuple[float, float] | None
    unconverged_ratios: tuple[float, ...]


_AVALANCHE_JUMP = 0.2


def sweep_curve(target_degree: float, ratio_grid: Sequence[float], tol: float = 1e-12,
                max_iter: int = 100_000) -> AsymptoticCurve:
    """Evaluate the fixed point on `ratio_grid` (strictly increasing).

    Also locates the throughput argmax (earliest ratio on ties) and the first
    grid interval whose resolution-probability jump exceeds 0.2, which is the
    avalanche onset when the grid is fine enough.
    """
    ratios = [float(r) for r in ratio_grid]
    if not ratios:
        raise ParameterError("ratio_grid must be non-empty")
    if any(b <= a for a, b in zip(ratios, ratios[1:])):
        raise ParameterError("ratio_grid must be strictly increasing")
    points: list[CurvePoint] = []
    unconverged: list[float] = []
    for r in ratios:
        res = and_or_fixed_point(target_degree, r, tol=tol, max_iter=max_iter)
        points.append(CurvePoint(r, res.p_resolve, res.throughput))
        if not res.converged:
            unconverged.append(r)
    best = max(range(len(points)), key=lambda i: (points[i].throughput, -i))
    interval = None
    for a, b in zip(points, points[1:]):
        if b.p_resolve - a.p_resolve > _AVALANCHE_JUMP:
            interval = (a.ratio, b.ratio)
            break
    return AsymptoticCurve(
        target_degree=target_degree,
        points=tuple(points),
        best_ratio=points[best].ratio,
        best_throughput=points[best].throughput,
        avalanche_interval=interval,
        unconverged_ratios=tuple(unconverged),
    )
