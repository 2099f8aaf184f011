"""
Disjoint Superadditivity

Λ^q_w is γ-disjointly superadditive iff γ >= q and h(t) = W(t)·t^{-q/γ} is
equivalent to the nondecreasing envelope F(t) = sup_{s<=t} h(s). Both are
evaluated on a dyadic log grid over (0, M]; the behaviour of h as t -> 0 is
judged by pushing the grid's lower end from 1e-9·M to 1e-15·M.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from errors import PreconditionError
from quadrature import QuadratureConfig, golden_section_max, running_max
from rearrangement import SimpleFunction, StepProfile, disjoint_sum, rearrangement
from rng import log_uniform, make_rng
from weights import (
    ASYMPTOTIC_FLOORS,
    INCONCLUSIVE_CHANGE,
    LambdaParams,
    Weight,
    dyadic_grid,
    lambda_quasinorm,
    parse_exponent,
    primitive_on_grid
)

logger = logging.getLogger(__name__)

K_MAX = 1e6
PER_OCTAVE = 8
# growth of sup h per refinement below which h is treated as settled
SETTLED_GROWTH = 1 + INCONCLUSIVE_CHANGE
# a sustained power of log(2M/t) in the growth marks divergence
SUSTAINED_EXPONENT = 0.9


@dataclass(frozen=True)
class Envelope:
    """h = W t^{-q/γ} and its running sup F on an ascending grid"""
    ts: np.ndarray
    log_h: np.ndarray

    def running_log_sup(self, floor_mass: float) -> np.ndarray:
        """log F computed from the grid points >= floor_mass; -inf below"""
        out = np.full_like(self.log_h, -np.inf)
        mask = self.ts >= floor_mass
        out[mask] = running_max(self.log_h[mask])
        return out


def _envelope(weight: Weight, q: float, gamma: float, cfg: QuadratureConfig) -> Envelope:
    M = weight.total_mass
    ts = dyadic_grid(M, ASYMPTOTIC_FLOORS[-1], PER_OCTAVE)
    W = primitive_on_grid(weight, ts, cfg)
    if not np.all(np.isfinite(W)) or np.any(W <= 0):
        raise PreconditionError("weight is not admissible: W is not finite and positive on (0, M)")
    return Envelope(ts, np.log(W) - (q / gamma) * np.log(ts))


def _growth(env: Envelope, M: float) -> Tuple[List[float], List[float]]:
    """sup h over [floor·M, M] for each floor, and log(2M/floor·M) at each floor"""
    sups = [float(np.max(env.log_h[env.ts >= floor * M])) for floor in ASYMPTOTIC_FLOORS]
    us = [math.log(2 / floor) for floor in ASYMPTOTIC_FLOORS]
    return sups, us


def _tail_state(env: Envelope, M: float) -> str:
    """'settled', 'divergent' or 'inconclusive' for sup h as the floor drops"""
    log_sups, us = _growth(env, M)
    g1 = math.exp(log_sups[1] - log_sups[0])
    g2 = math.exp(log_sups[2] - log_sups[1])
    if g1 <= SETTLED_GROWTH and g2 <= SETTLED_GROWTH:
        return 'settled'
    if g1 > SETTLED_GROWTH and g2 > SETTLED_GROWTH:
        e1 = math.log(g1) / math.log(us[1] / us[0])
        e2 = math.log(g2) / math.log(us[2] / us[1])
        if e2 >= SUSTAINED_EXPONENT * e1:
            return 'divergent'
    return 'inconclusive'


def monotone_envelope(
    weight: Weight,
    q: float,
    gamma: float,
    t: float,
    cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """F(t) = sup_{s<=t} W(s) s^{-q/γ}; math.inf when the sup runs off towards 0"""
    M = weight.total_mass
    if not 0 < t <= M:
        raise PreconditionError(f"t must lie in (0, M], got {t!r}")
    grid = dyadic_grid(M, ASYMPTOTIC_FLOORS[-1], PER_OCTAVE)
    ts = np.concatenate((grid[grid < t], [t]))
    W = primitive_on_grid(weight, ts, cfg)
    log_h = np.log(W) - (q / gamma) * np.log(ts)

    rounds = [float(np.max(log_h[ts >= floor * M])) for floor in ASYMPTOTIC_FLOORS if np.any(ts >= floor * M)]
    if len(rounds) > 1 and abs(math.exp(rounds[-1] - rounds[-2]) - 1) > INCONCLUSIVE_CHANGE:
        logger.warning("envelope at t=%r keeps growing as s -> 0; reporting ∞", t)
        return math.inf

    best = int(np.argmax(log_h))
    lo, hi = ts[max(best - 1, 0)], ts[min(best + 1, len(ts) - 1)]

    def objective(log_s: float) -> float:
        s = math.exp(log_s)
        return math.log(weight.primitive(s, cfg).value) - (q / gamma) * log_s

    _, refined = golden_section_max(objective, math.log(lo), math.log(hi), tol=1e-10)
    return math.exp(max(float(log_h[best]), refined))


@dataclass(frozen=True)
class SuperaddVerdict:
    """Outcome of a superadditivity classification; superadditive is None when inconclusive"""
    superadditive: Optional[bool]
    gamma: float
    witness: Optional[str] = None
    equivalence_constants: Optional[Tuple[float, float]] = None
    envelope_ratio: float = math.nan
    delta2_index: float = math.nan
    q: float = math.nan

    @property
    def constant_bound(self) -> float:
        """Superadditivity constant 2·K₃·K₂^{γ/q}·K₁^{-γ/q} implied by the equivalence constants"""
        if not self.equivalence_constants:
            return math.inf
        k1, k2 = self.equivalence_constants
        e = self.gamma / self.q
        return 2 * self.delta2_index * k2 ** e * k1 ** (-e)

    @property
    def constant_lower_bound(self) -> float:
        """Any superadditivity constant is at least K^{γ/q}/2 with K the envelope ratio"""
        if math.isnan(self.envelope_ratio):
            return math.nan
        return self.envelope_ratio ** (self.gamma / self.q) / 2

    def to_dict(self) -> Dict[str, Any]:
        return {
            'superadditive': 'inconclusive' if self.superadditive is None else self.superadditive,
            'gamma': self.gamma,
            'q': self.q,
            'witness': self.witness,
            'equivalence_constants': list(self.equivalence_constants) if self.equivalence_constants else None,
            'envelope_ratio': self.envelope_ratio,
            'delta2_index': self.delta2_index
        }


def superadd_classify_lambda(
    weight: Weight,
    q: float,
    gamma: float,
    cfg: QuadratureConfig = QuadratureConfig()
) -> SuperaddVerdict:
    """
    True iff γ >= q and F/h stays below K_MAX on [1e-9·M, M] once sup h has
    settled under refinement; divergent sup h near 0 is a negative verdict.
    """
    if not (gamma > 0 and 0 < q < math.inf):
        raise PreconditionError("need γ > 0 and finite q > 0")
    if gamma < q:
        return SuperaddVerdict(False, gamma, witness='gamma < q', q=q)

    M = weight.total_mass
    env = _envelope(weight, q, gamma, cfg)
    W = np.exp(env.log_h + (q / gamma) * np.log(env.ts))
    delta2 = float(np.max(W[PER_OCTAVE:] / W[:-PER_OCTAVE]))

    state = _tail_state(env, M)
    if state == 'divergent':
        return SuperaddVerdict(
            False, gamma,
            witness='W(t) t^(-q/gamma) is unbounded as t -> 0',
            envelope_ratio=math.inf,
            delta2_index=delta2,
            q=q
        )
    if state == 'inconclusive':
        logger.warning("superadditivity envelope did not settle under refinement (q=%r, γ=%r)", q, gamma)
        return SuperaddVerdict(None, gamma, delta2_index=delta2, q=q)

    floor = ASYMPTOTIC_FLOORS[0] * M
    log_F = env.running_log_sup(ASYMPTOTIC_FLOORS[-1] * M)
    mask = env.ts >= floor
    K = float(np.exp(np.max(log_F[mask] - env.log_h[mask])))
    if K > K_MAX:
        return SuperaddVerdict(
            False, gamma,
            witness=f'envelope ratio {K!r} exceeds {K_MAX!r}',
            envelope_ratio=K,
            delta2_index=delta2,
            q=q
        )
    return SuperaddVerdict(True, gamma, equivalence_constants=(1 / K, 1.0), envelope_ratio=K, delta2_index=delta2, q=q)


def superadd_classify_lz(p, q, alpha: float, gamma: float) -> SuperaddVerdict:
    """Parameter rule for L^{p,q,α}; p = ∞ never qualifies"""
    p, q = parse_exponent(p), parse_exponent(q)
    if not (0 < q < math.inf and gamma > 0 and p > 0):
        raise PreconditionError("need 0 < q < ∞, γ > 0 and p > 0")
    if math.isinf(p) and not alpha + 1 / q < 0:
        raise PreconditionError("p = ∞ needs α + 1/q < 0")

    if p < q <= gamma:
        witness = 'p < q <= gamma'
    elif q <= p < gamma:
        witness = 'q <= p < gamma'
    elif q <= p == gamma and alpha <= 0:
        witness = 'q <= p = gamma, alpha <= 0'
    else:
        return SuperaddVerdict(False, gamma, q=q)
    return SuperaddVerdict(True, gamma, witness=witness, q=q)


def equal_split_family(t: float, k: int, total_mass: float = 1.0) -> List[StepProfile]:
    """k characteristic profiles of mass t/k, to be placed on disjoint sets"""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    if not 0 < t <= total_mass:
        raise PreconditionError("t must lie in (0, M]")
    return [StepProfile.characteristic(t / k, total_mass) for _ in range(k)]


def family_ratio(profiles: Sequence[StepProfile], params: LambdaParams, gamma: float) -> float:
    """Σ ‖f_j‖^γ / ‖Σ f_j‖^γ for disjointly supported f_j"""
    whole = lambda_quasinorm(disjoint_sum(profiles), params).value
    parts = math.fsum(lambda_quasinorm(f, params).value ** gamma for f in profiles)
    return parts / whole ** gamma


def equal_split_ratio(params: LambdaParams, gamma: float, t: float, k: int) -> float:
    """family_ratio of equal_split_family(t, k), without materialising k profiles"""
    M = params.total_mass
    member = lambda_quasinorm(StepProfile.characteristic(t / k, M), params).value
    whole = lambda_quasinorm(StepProfile.characteristic(math.fsum([t / k] * k), M), params).value
    return k * member ** gamma / whole ** gamma


def equal_split_series(params: LambdaParams, gamma: float, t: float, kmax: int) -> List[Tuple[int, float]]:
    """(k, ratio) for k = 1, 2, 4, ... up to kmax"""
    ks, k = [], 1
    while k <= kmax:
        ks.append(k)
        k *= 2
    return [(k, equal_split_ratio(params, gamma, t, k)) for k in ks]


def random_family(rng: np.random.Generator, total_mass: float) -> List[StepProfile]:
    """2 to 6 simple functions with at most 6 pieces each, jointly fitting in M"""
    members = int(rng.integers(2, 7))
    counts = rng.integers(1, 7, size=members)
    masses = rng.uniform(0.0, 1.0, size=int(counts.sum())) + 1e-3
    masses = masses / masses.sum() * total_mass * rng.uniform(0.1, 1.0)
    values = log_uniform(rng, 1e-3, 1e3, size=int(counts.sum()))
    family, start = [], 0
    for count in counts:
        pieces = tuple(zip(values[start:start + count], masses[start:start + count]))
        family.append(rearrangement(SimpleFunction(pieces, total_mass)))
        start += count
    return family


def generate_families(
    total_mass: float,
    seed: int = 0,
    kmax: int = 64,
    random_count: int = 64,
    split_masses: Sequence[float] = (0.9, 0.5, 0.1, 1e-3)
) -> Iterator[List[StepProfile]]:
    """
    Equal splits for k = 1..kmax at several masses, then seeded random
    families. Random family i draws from stream i, so a shorter run yields a
    prefix of a longer one.
    """
    for fraction in split_masses:
        for k in range(1, kmax + 1):
            yield equal_split_family(fraction * total_mass, k, total_mass)
    for i in range(random_count):
        yield random_family(make_rng(seed, stream=i), total_mass)


def empirical_superadd_constant(
    params: LambdaParams,
    gamma: float,
    seed: int = 0,
    kmax: int = 64,
    random_count: int = 64
) -> float:
    """Largest family_ratio over the generated families"""
    best = 0.0
    for family in generate_families(params.total_mass, seed, kmax, random_count):
        best = max(best, family_ratio(family, params, gamma))
    logger.debug("empirical superadditivity constant %r", best)
    return best


def envelope_primitive_V(
    weight: Weight,
    q: float,
    gamma: float,
    t: float,
    cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """
    V(t) = ∫_0^t F^{γ/q}, a convex (hence superadditive) function with
    V(0) = 0. F is taken on the envelope grid; below the grid it is bounded
    by its value at the lowest node.
    """
    M = weight.total_mass
    if not 0 < t <= M:
        raise PreconditionError("t must lie in (0, M]")
    env = _envelope(weight, q, gamma, cfg)
    log_F = env.running_log_sup(env.ts[0])
    keep = env.ts <= t
    ts = env.ts[keep]
    F_power = np.exp(log_F[keep] * (gamma / q))
    if not np.all(np.isfinite(F_power)):
        return math.inf
    head = F_power[0] * ts[0]
    if ts[-1] < t:
        ts = np.append(ts, t)
        F_power = np.append(F_power, F_power[-1])
    return float(head + integrate.trapezoid(F_power, ts))
