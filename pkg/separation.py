"""
Uniform Separation

The dilation functional Θ(λ) = sup_{0<t<λM} w(t/λ) / (λ w(t)), the
separation certificate ε_{r,R} it yields for Lambda spaces, the α-norm
bound, and a seeded falsifier that hunts for pairs with ‖g‖ >= R, ‖f‖ <= r
and ‖f + g‖ < ε.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import NoPositiveEpsilon, PreconditionError
from quadrature import grid_seeded_max
from rearrangement import CommonPartition, SimpleFunction, rearrangement
from rng import log_uniform, make_rng
from weights import (
    LambdaParams,
    PowerLogWeight,
    TabulatedWeight,
    Weight,
    lambda_quasinorm,
    lz_alpha_norm_exponent
)

logger = logging.getLogger(__name__)

# Θ above 1 by more than this at every sampled λ leaves inf Θ <= 1 unverified
HYPOTHESIS_SLACK = 1e-6
EPSILON_GRID_POINTS = 64
# Offsets from the lower end of the u-range at which Θ's ratio is sampled
THETA_OFFSETS = np.concatenate(([0.0], np.geomspace(1e-12, 1e15, 160)))


def theta_closed_form(weight: PowerLogWeight, lam: float) -> float:
    """Θ(λ) for power-log weights"""
    base = lam ** (-weight.q / weight.p)
    if weight.alpha >= 0:
        return base
    return base * (math.log(2) / math.log(2 / lam)) ** (weight.alpha * weight.q)


def _theta_tabulated(weight: TabulatedWeight, lam: float) -> float:
    """
    Exact Θ for a log-log piecewise power law: the ratio is a power of t
    between consecutive nodes of grid ∪ λ·grid, so its sup is at a node or at
    the t -> 0 limit λ^{-β₀ - 1} of the first segment.
    """
    M = weight.total_mass
    log_lam = math.log(lam)

    def log_ratio(t: float) -> float:
        return weight.log_w_ratio(weight.u_of(t), -log_lam) - log_lam

    nodes = {t for t in weight.grid if t < lam * M}
    nodes |= {lam * t for t in weight.grid if lam * t < lam * M}
    nodes.add(lam * M)
    best = max(log_ratio(t) for t in nodes)
    best = max(best, -(weight.first_slope + 1) * log_lam)
    return math.exp(best)


def _theta_numeric(weight: Weight, lam: float) -> float:
    """Grid-seeded golden-section sup of the ratio over u in (log(2/λ), ∞)"""
    shift = -math.log(lam)  # t/λ = t·e^{shift}
    u_min = math.log(2 / lam)

    def log_ratio(u: float) -> float:
        return weight.log_w_ratio(u, shift) + shift

    grid = u_min + THETA_OFFSETS
    _, best = grid_seeded_max(log_ratio, grid)
    tail = [log_ratio(u) for u in grid[-4:]]
    # still climbing steeply at the far end of the grid: the sup is not attained
    if tail[-1] > tail[0] + 1.0:
        logger.warning("Θ(%r) keeps growing at the end of the grid; reporting ∞", lam)
        return math.inf
    return math.exp(best)


def theta(weight: Weight, lam: float, method: str = 'auto') -> float:
    """
    Θ(λ) for λ in (0, 1); math.inf when the supremum diverges.

    method is 'closed' (power-log only), 'numeric', or 'auto' which picks the
    exact route available for the weight.
    """
    if not 0 < lam < 1:
        raise PreconditionError(f"λ must lie in (0, 1), got {lam!r}")
    if method not in ('auto', 'closed', 'numeric'):
        raise PreconditionError(f"unknown Θ method {method!r}")
    if method == 'closed' and not isinstance(weight, PowerLogWeight):
        raise PreconditionError("closed-form Θ is only known for power-log weights")

    if method in ('auto', 'closed') and isinstance(weight, PowerLogWeight):
        return theta_closed_form(weight, lam)
    if method == 'auto' and isinstance(weight, TabulatedWeight):
        return _theta_tabulated(weight, lam)
    return _theta_numeric(weight, lam)


def hypothesis_lambdas() -> List[float]:
    """λ-grid for the inf Θ <= 1 check, dense towards 1"""
    lams = list(np.linspace(0.01, 0.99, 99)) + [1 - 10.0 ** (-k) for k in range(3, 13)]
    return sorted(lams)


@dataclass(frozen=True)
class HypothesisCheck:
    theta_min: float
    lambda_at_min: float
    verified: bool


def theta_hypothesis_check(weight: Weight) -> HypothesisCheck:
    """Minimum of Θ on the λ-grid; verified when it is <= 1 + 1e-6"""
    values = [(theta(weight, lam), lam) for lam in hypothesis_lambdas()]
    theta_min, lam_min = min(values)
    verified = theta_min <= 1 + HYPOTHESIS_SLACK
    if not verified:
        logger.warning("inf Θ <= 1 unverified: min Θ = %r at λ = %r", theta_min, lam_min)
    return HypothesisCheck(theta_min, lam_min, verified)


@dataclass(frozen=True)
class SeparationCertificate:
    """ε_{r,R} with the λ₀ realising it"""
    r: float
    R: float
    lambda0: float
    epsilon: float
    q: float
    hypothesis_verified: bool = True
    theta_min: float = float('nan')
    alpha_norm_epsilon: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'r': self.r,
            'R': self.R,
            'lambda0': self.lambda0,
            'epsilon': self.epsilon,
            'q': self.q,
            'hypothesis_verified': self.hypothesis_verified,
            'theta_min': self.theta_min,
            'alpha_norm_epsilon': self.alpha_norm_epsilon
        }


def epsilon_of_lambda(weight: Weight, q: float, r: float, R: float, lam: float) -> float:
    """ε(λ₀) = Θ(λ₀)^{-1/q} (R - Θ(1 - λ₀)^{1/q} r)"""
    upper, lower = theta(weight, lam), theta(weight, 1 - lam)
    if math.isinf(upper) or math.isinf(lower):
        return -math.inf
    return upper ** (-1 / q) * (R - lower ** (1 / q) * r)


def separation_certificate(params: LambdaParams, r: float, R: float) -> SeparationCertificate:
    """
    Best ε(λ₀) over λ₀ in (0, 1), from a 64-point grid refined by
    golden-section search between the neighbours of the best grid point.
    """
    if not 0 < r < R:
        raise PreconditionError(f"need 0 < r < R, got r={r!r}, R={R!r}")
    weight, q = params.weight, params.q
    check = theta_hypothesis_check(weight)

    def objective(lam: float) -> float:
        if not 0 < lam < 1:
            return -math.inf
        return epsilon_of_lambda(weight, q, r, R, lam)

    grid = np.arange(1, EPSILON_GRID_POINTS + 1) / (EPSILON_GRID_POINTS + 1)
    if max(objective(lam) for lam in grid) <= 0:
        raise NoPositiveEpsilon(f"no λ₀ in the grid gives ε > 0 for r={r!r}, R={R!r}")
    lambda0, epsilon = grid_seeded_max(objective, grid)
    logger.debug("certificate r=%r R=%r: λ₀=%r ε=%r", r, R, lambda0, epsilon)
    return SeparationCertificate(
        r, R, lambda0, epsilon, q, check.verified, check.theta_min, _alpha_norm_reference(params, r, R)
    )


def _alpha_norm_reference(params: LambdaParams, r: float, R: float) -> Optional[float]:
    """(R^a - r^a)^{1/a} when the LZ quasinorm is itself an a-norm"""
    weight = params.weight
    if not isinstance(weight, PowerLogWeight) or params.q != weight.q:
        return None
    exponent = lz_alpha_norm_exponent(weight.p, weight.q, weight.alpha)
    return None if exponent is None else alpha_norm_epsilon(exponent, r, R)


def alpha_norm_epsilon(alpha: float, r: float, R: float) -> float:
    """(R^α - r^α)^{1/α}, the separation constant of an α-norm"""
    if not 0 < alpha <= 1:
        raise PreconditionError("α must lie in (0, 1]")
    if not 0 < r < R:
        raise PreconditionError("need 0 < r < R")
    return (R ** alpha - r ** alpha) ** (1 / alpha)


def plane_counterexample_qnorm(x: float, y: float) -> float:
    """A quasinorm on the plane that is not uniformly separating"""
    if y == 0:
        return 2 * abs(x)
    return abs(x) + abs(y)


@dataclass(frozen=True)
class VectorDomain:
    """Signed vectors of a fixed dimension with a quasinorm on them"""
    name: str
    dim: int
    qnorm: Callable[[np.ndarray], float] = field(compare=False)


def plane_domain() -> VectorDomain:
    return VectorDomain('plane', 2, lambda v: plane_counterexample_qnorm(float(v[0]), float(v[1])))


def euclidean_plane_domain() -> VectorDomain:
    return VectorDomain('euclidean', 2, lambda v: float(np.hypot(v[0], v[1])))


def step_profile_domain(params: LambdaParams, cell_masses: Sequence[float]) -> VectorDomain:
    """Vectors are cell values of simple functions on cells of the given masses"""
    masses = tuple(float(m) for m in cell_masses)
    M = params.total_mass
    if math.fsum(masses) > M * (1 + 1e-12):
        raise PreconditionError("cells exceed the total mass")

    def qnorm(v: np.ndarray) -> float:
        f = SimpleFunction(tuple((abs(float(x)), m) for x, m in zip(v, masses) if x != 0), M)
        return lambda_quasinorm(rearrangement(f), params).value

    return VectorDomain('lambda', len(masses), qnorm)


@dataclass(frozen=True)
class Counterexample:
    f: Tuple[float, ...]
    g: Tuple[float, ...]
    qnorm_f: float
    qnorm_g: float
    qnorm_sum: float
    trial: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'f': list(self.f),
            'g': list(self.g),
            'qnorm_f': self.qnorm_f,
            'qnorm_g': self.qnorm_g,
            'qnorm_sum': self.qnorm_sum,
            'trial': self.trial
        }


def _scaled_to(domain: VectorDomain, v: np.ndarray, target: float) -> Optional[np.ndarray]:
    size = domain.qnorm(v)
    if not size > 0 or math.isinf(size):
        return None
    return v * (target / size)


def _candidate(domain: VectorDomain, rng: np.random.Generator, r: float, R: float, eps: float, trial: int):
    """One (f, g) proposal; even trials are structured, odd trials random"""
    dim = domain.dim
    if trial % 2 == 0:
        # g on one axis at norm R, f = -g plus a small bump on another axis
        j = int(rng.integers(dim))
        k = int(rng.integers(dim - 1)) if dim > 1 else 0
        k = k + 1 if dim > 1 and k >= j else k
        axis = np.zeros(dim)
        axis[j] = 1.0
        g = _scaled_to(domain, axis, R)
        if g is None:
            return None
        delta = eps * 10 ** (-rng.uniform(0, 3))
        f = -g.copy()
        f[k] += delta * rng.choice((-1.0, 1.0))
        return f, g
    g = _scaled_to(domain, rng.standard_normal(dim), R * (1 + rng.uniform(0, 0.5)))
    if g is None:
        return None
    if rng.uniform() < 0.5:
        f = _scaled_to(domain, rng.standard_normal(dim), r * rng.uniform(0.05, 1))
    else:
        # near-cancelling f
        f = _scaled_to(domain, -g + rng.standard_normal(dim) * log_uniform(rng, 1e-6, 1e-1), r)
    if f is None:
        return None
    return f, g


def falsify_uniform_separation(
    domain: VectorDomain,
    r: float,
    R: float,
    eps_claimed: float,
    budget: int,
    seed: int = 0
) -> Optional[Counterexample]:
    """
    Search for ‖g‖ >= R, ‖f‖ <= r with ‖f + g‖ < eps_claimed.

    Returns the first pair found or None; deterministic for a given seed.
    """
    if budget < 1:
        raise PreconditionError("budget must be >= 1")
    if not 0 < r < R:
        raise PreconditionError("need 0 < r < R")
    rng = make_rng(seed)
    for trial in range(budget):
        pair = _candidate(domain, rng, r, R, eps_claimed, trial)
        if pair is None:
            continue
        f, g = pair
        qf, qg = domain.qnorm(f), domain.qnorm(g)
        if qf > r or qg < R:
            continue
        qs = domain.qnorm(f + g)
        if qs < eps_claimed * (1 - 1e-9):
            logger.info("counterexample at trial %d: ‖f+g‖ = %r", trial, qs)
            return Counterexample(tuple(map(float, f)), tuple(map(float, g)), qf, qg, qs, trial)
    logger.info("no counterexample within %d trials", budget)
    return None


def sample_separated_pair(
    params: LambdaParams,
    r: float,
    R: float,
    rng: np.random.Generator,
    layout: str = 'disjoint',
    cells: int = 4
) -> CommonPartition:
    """
    A pair (f, g) on an explicit cell layout with ‖f‖ <= r and ‖g‖ >= R.

    'disjoint' puts f and g on separate halves of the space; 'nested' puts f
    inside the support of g with random signs, so f + g may cancel.
    """
    if layout not in ('disjoint', 'nested'):
        raise PreconditionError(f"unknown layout {layout!r}")
    M = params.total_mass
    masses = rng.uniform(0.1, 1.0, size=2 * cells)
    masses = masses / masses.sum() * M * rng.uniform(0.5, 1.0)
    f_values = log_uniform(rng, 1e-2, 1e2, size=cells)
    g_values = log_uniform(rng, 1e-2, 1e2, size=2 * cells)

    if layout == 'disjoint':
        cell_list = [(a, 0.0, m) for a, m in zip(f_values, masses[:cells])]
        cell_list += [(0.0, b, m) for b, m in zip(g_values[cells:], masses[cells:])]
    else:
        signs = rng.choice((-1.0, 1.0), size=cells)
        cell_list = [(s * a, b, m) for s, a, b, m in zip(signs, f_values, g_values[:cells], masses[:cells])]
        cell_list += [(0.0, b, m) for b, m in zip(g_values[cells:], masses[cells:])]
    partition = CommonPartition(tuple(cell_list), M)

    norm_f = lambda_quasinorm(rearrangement(partition.f()), params).value
    norm_g = lambda_quasinorm(rearrangement(partition.g()), params).value
    scale_f = r * rng.uniform(0.1, 1.0) / norm_f
    scale_g = R * (1 + rng.uniform(0, 0.5)) / norm_g
    scaled = tuple((a * scale_f, b * scale_g, m) for a, b, m in partition.cells)
    return CommonPartition(scaled, M)
