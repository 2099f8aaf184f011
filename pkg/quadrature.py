"""
Numerical Kernels

Adaptive quadrature (QUADPACK through scipy) with explicit breakpoints and
semi-infinite ranges, a tolerance-halving check, and golden-section
maximisation seeded from a grid. Callers remove endpoint singularities by
substitution before handing integrands over; this module never sees a raw
t -> 0 limit.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import integrate

from errors import NonConvergenceError, PreconditionError

logger = logging.getLogger(__name__)

invphi = (math.sqrt(5) - 1) / 2  # 1 / phi
invphi2 = (3 - math.sqrt(5)) / 2  # 1 / phi^2

# Reported error estimates above this multiple of the requested tolerance
# turn a flagged QUADPACK result into a hard failure
FAILURE_FACTOR = 1e4


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive quadrature"""
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 200  # subinterval budget per call

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise PreconditionError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise PreconditionError("max_depth must be >= 1")

    def halved(self) -> 'QuadratureConfig':
        return QuadratureConfig(self.rel_tol / 2, self.abs_tol / 2, self.max_depth)


@dataclass(frozen=True)
class QuadResult:
    """A computed value with its error estimate and how it was obtained"""
    value: float
    abs_err_estimate: float
    method: str  # "closed_form" | "quadrature" | "optimization"

    def to_dict(self) -> dict:
        return {'value': self.value, 'abs_err_estimate': self.abs_err_estimate, 'method': self.method}


def integrate_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: QuadratureConfig
) -> Tuple[float, float]:
    """∫_a^b f with b possibly +inf; returns (value, error estimate)"""
    if a == b:
        return 0.0, 0.0
    # with full_output QUADPACK reports its status in the result, never as a warning
    result = integrate.quad(
        f, a, b,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_depth,
        full_output=1
    )
    value, err = result[0], result[1]
    if len(result) > 3:
        message = result[3]
        budget = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        if not math.isfinite(value) or err > FAILURE_FACTOR * budget:
            raise NonConvergenceError(
                f"quadrature on [{a!r}, {b!r}] stopped at error {err!r}: {message}",
                value=value,
                error_estimate=err
            )
        logger.debug("quadrature on [%r, %r] flagged (%s); error %r accepted", a, b, message, err)
    return value, err


def integrate_piecewise(
    f: Callable[[float], float],
    points: Sequence[float],
    cfg: QuadratureConfig
) -> Tuple[float, float]:
    """Sum of ∫ f over consecutive points; the last point may be +inf"""
    total, total_err = [], 0.0
    for a, b in zip(points[:-1], points[1:]):
        value, err = integrate_interval(f, a, b, cfg)
        total.append(value)
        total_err += err
    return math.fsum(total), total_err


def halving_shift(
    evaluate: Callable[[QuadratureConfig], QuadResult],
    cfg: QuadratureConfig
) -> Tuple[QuadResult, float]:
    """
    Evaluate at cfg and again with both tolerances halved. Returns the finer
    result and how far the value moved; a move beyond the two reported error
    estimates is logged.
    """
    coarse = evaluate(cfg)
    fine = evaluate(cfg.halved())
    shift = abs(fine.value - coarse.value)
    if shift > coarse.abs_err_estimate + fine.abs_err_estimate + cfg.abs_tol:
        logger.warning(
            "halving the tolerance moved %r to %r, beyond the error estimates %r and %r",
            coarse.value, fine.value, coarse.abs_err_estimate, fine.abs_err_estimate
        )
    return fine, shift


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12
) -> Tuple[float, float]:
    """
    Golden-section search for a maximum of f on [a, b].

    Reuses one function evaluation per iteration; returns (x, f(x)) for the
    best point seen, endpoints included.
    """
    (a, b) = (min(a, b), max(a, b))
    h = b - a
    best = max(((a, f(a)), (b, f(b))), key=lambda p: p[1])
    if h <= tol:
        return best

    n = int(math.ceil(math.log(tol / h) / math.log(invphi)))

    c = a + invphi2 * h
    d = a + invphi * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = invphi * h
            c = a + invphi2 * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = invphi * h
            d = a + invphi * h
            yd = f(d)

    return max((best, (c, yc), (d, yd)), key=lambda p: p[1])


def grid_seeded_max(
    f: Callable[[float], float],
    grid: Iterable[float],
    tol: float = 1e-12
) -> Tuple[float, float]:
    """
    Maximise f over the hull of `grid`: brute-force the grid, then refine by
    golden-section between the neighbours of the best grid point.

    f need not be unimodal; the grid guards the search.
    """
    xs = [float(x) for x in grid]
    if not xs:
        raise PreconditionError("grid_seeded_max needs a nonempty grid")
    ys = [f(x) for x in xs]
    finite = [i for i, y in enumerate(ys) if not math.isnan(y)]
    if not finite:
        return xs[0], float('nan')
    best = max(finite, key=lambda i: ys[i])
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, len(xs) - 1)]
    x, y = golden_section_max(f, lo, hi, tol=tol * max(1.0, abs(hi - lo)))
    if y >= ys[best]:
        return x, y
    return xs[best], ys[best]


def running_max(values: Sequence[float]) -> List[float]:
    """Prefix maxima"""
    return list(np.maximum.accumulate(np.asarray(values, dtype=float)))
