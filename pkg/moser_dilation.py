"""
Moser-type Dilations

v_κ(x) = g(ω_n |x|^n) with g(t) = κ^{-1+1/n} v*((2|B_R|)^{1-κ} t^κ) keeps
both the gradient Lⁿ-norm and the L^{∞,q,α} quasinorm (α = -1 + 1/n - 1/q)
of v while its support shrinks to a point as κ -> 0. The dilated side of
every check here is computed directly from the evaluator g, never through
the substitution that proves the invariance.

Supports shrink like exp(-c/κ) and underflow long before κ = 2^{-12}, so
masses and radii are carried as logarithms throughout.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from errors import MembershipViolation, PreconditionError, QuasinormBelowLambda
from quadrature import QuadResult, QuadratureConfig, halving_shift, integrate_piecewise
from radial_profile import (
    BallGeometry,
    RadialProfile,
    gradient_n_norm,
    radial_gradient_norm_quadrature,
    tail_points
)
from weights import lz_quasinorm, piece_sup

logger = logging.getLogger(__name__)

MEMBERSHIP_SLACK = 1e-9
LAMBDA_SLACK = 1e-8


def limiting_alpha(n: int, q: float) -> float:
    """α = -1 + 1/n - 1/q"""
    return -1 + 1 / n - (0.0 if math.isinf(q) else 1 / q)


@dataclass(frozen=True)
class DilatedProfile:
    """The evaluator g of v_κ; nothing is discretised at construction"""
    base: RadialProfile
    kappa: float
    geometry: BallGeometry

    def __post_init__(self):
        if not 0 < self.kappa < 1:
            raise PreconditionError(f"κ must lie in (0, 1), got {self.kappa!r}")
        if abs(self.base.total_mass - self.geometry.ball_measure) > 1e-12 * self.geometry.ball_measure:
            raise PreconditionError("profile does not live on this ball")

    @property
    def total_mass(self) -> float:
        return self.geometry.ball_measure

    @property
    def amplitude(self) -> float:
        return self.kappa ** (-1 + 1 / self.geometry.n)

    @property
    def log_A(self) -> float:
        """log (2|B_R|)^{1-κ}"""
        return (1 - self.kappa) * math.log(2 * self.total_mass)

    def inner_log(self, log_t: float) -> float:
        """log of the base argument (2|B_R|)^{1-κ} t^κ"""
        return self.log_A + self.kappa * log_t

    def value_log(self, log_t: float) -> float:
        return self.amplitude * self.base.value_log(self.inner_log(log_t))

    def __call__(self, t: float) -> float:
        if t <= 0:
            return self.amplitude * self.base.peak
        return self.value_log(math.log(t))

    def log_derivative(self, log_t: float) -> float:
        """t|g'(t)| = κ^{1/n} · s|v*'(s)| at s = A t^κ"""
        return self.kappa ** (1 / self.geometry.n) * self.base.log_derivative(self.inner_log(log_t))

    def log_breakpoints(self) -> List[float]:
        return [(lt - self.log_A) / self.kappa for lt in self.base.log_breakpoints()]

    def log_support_mass(self) -> float:
        """log of the measure of {g > 0}, from the base support"""
        return (self.base.log_support_mass() - self.log_A) / self.kappa


def dilate(profile: RadialProfile, geom: BallGeometry, kappa: float) -> DilatedProfile:
    if not profile.support_mass < geom.ball_measure:
        raise PreconditionError("profile must be compactly supported inside the ball")
    return DilatedProfile(profile, kappa, geom)


def log_support_radius(kappa: float, R_tilde: float, R: float, n: int) -> float:
    """log R_κ with R_κ = 2^{(κ-1)/(nκ)} (R̃/R)^{1/κ} R"""
    if not 0 < kappa < 1:
        raise PreconditionError("κ must lie in (0, 1)")
    if not 0 < R_tilde < R:
        raise PreconditionError("need 0 < R̃ < R")
    return (kappa - 1) / (n * kappa) * math.log(2) + math.log(R_tilde / R) / kappa + math.log(R)


def support_radius(kappa: float, R_tilde: float, R: float, n: int) -> float:
    return math.exp(log_support_radius(kappa, R_tilde, R, n))


def kappa_threshold(R_tilde: float, limit_radius: float, R: float, n: int, tol: float = 1e-14) -> float:
    """
    Largest κ₀ in (0, 1] with R_κ < limit_radius for every κ < κ₀, by
    bisection (R_κ increases with κ).
    """
    if not 0 < R_tilde < R:
        raise PreconditionError("need 0 < R̃ < R")
    if not limit_radius > 0:
        raise PreconditionError("limit radius must be > 0")
    target = math.log(limit_radius)
    if R_tilde <= limit_radius:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if log_support_radius(mid, R_tilde, R, n) < target:
            lo = mid
        else:
            hi = mid
    return lo


def measured_log_support_mass(d: DilatedProfile) -> float:
    """
    log of the measure of {g > 0} located by bisection on the evaluator,
    independent of the closed-form support law.
    """
    hi = math.log(d.total_mass)
    if d.value_log(hi) > 0:
        return hi
    step, lo = 1.0, hi - 1.0
    while d.value_log(lo) <= 0:
        step *= 2
        lo = hi - step
        if step > 1e300:
            return -math.inf
    for _ in range(4096):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if d.value_log(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dilated_gradient_norm_numeric(d: DilatedProfile, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """‖∇v_κ‖_{Lⁿ(B_R)} by radial quadrature of the dilated evaluator"""
    return radial_gradient_norm_quadrature(d, d.geometry, cfg)


def dilated_lz_quasinorm_numeric(d: DilatedProfile, q, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """
    ‖v_κ‖_{L^{∞,q,α}(B_R)} with α = -1 + 1/n - 1/q, from g directly.

    In u = log(2|B_R|/t) the quasinorm is (∫ g^q u^{αq} du)^{1/q} over
    u > log 2, and for q = ∞ the sup of g·u^α.
    """
    n = d.geometry.n
    q = math.inf if isinstance(q, str) else float(q)
    if not q >= n:
        raise PreconditionError(f"q must lie in [n, ∞], got {q!r}")
    alpha = limiting_alpha(n, q)
    log_2m = math.log(2 * d.total_mass)
    log_support = d.log_support_mass()
    u_support = max(log_2m - log_support, math.log(2))
    kinks = sorted({log_2m - lt for lt in d.log_breakpoints()} | {u_support})
    points = [u for u in kinks if u >= u_support]
    points += tail_points(points[-1], d.kappa)

    if math.isinf(q):
        def objective(u: float) -> float:
            v = d.value_log(log_2m - u)
            return math.log(v) + alpha * math.log(u) if v > 0 else -math.inf

        bounds = points + [math.inf]
        best = max(piece_sup(objective, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]))
        return QuadResult(math.exp(best) if best > -math.inf else 0.0, 0.0, 'optimization')

    def integrand(u: float) -> float:
        v = d.value_log(log_2m - u)
        if v <= 0:
            return 0.0
        return math.exp(q * math.log(v) + alpha * q * math.log(u))

    value, err = integrate_piecewise(integrand, points + [math.inf], cfg)
    if value <= 0:
        return QuadResult(0.0, err, 'quadrature')
    norm = value ** (1 / q)
    return QuadResult(norm, norm * err / (q * value), 'quadrature')


def base_lz_quasinorm(profile: RadialProfile, n: int, q, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """‖v‖_{L^{∞,q,α}(B_R)} with the limiting α"""
    q = math.inf if isinstance(q, str) else float(q)
    return lz_quasinorm(profile, math.inf, q, limiting_alpha(n, q), cfg)


@dataclass(frozen=True)
class InvarianceRow:
    kappa: float
    R_kappa: float
    grad_rel_err: float
    qnorm_rel_err: float
    qnorm_value: float
    support_mass: float
    log_support_mass_err: float = 0.0
    tolerance_shift: float = 0.0


def _rel_err(a: float, b: float) -> float:
    if b == 0:
        return abs(a)
    return abs(a - b) / abs(b)


def invariance_row(
    profile: RadialProfile,
    geom: BallGeometry,
    q,
    kappa: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    base_values: Optional[Tuple[float, float]] = None
) -> InvarianceRow:
    """Both invariances and the support law at one κ; the gradient side is also rerun at halved tolerance"""
    d = dilate(profile, geom, kappa)
    grad_base, qnorm_base = base_values or (gradient_n_norm(profile, geom), base_lz_quasinorm(profile, geom.n, q, cfg).value)
    grad, shift = halving_shift(lambda c: dilated_gradient_norm_numeric(d, c), cfg)
    qnorm = dilated_lz_quasinorm_numeric(d, q, cfg).value

    R_tilde = geom.radius_of_mass(profile.support_mass)
    log_R_kappa = log_support_radius(kappa, R_tilde, geom.R, geom.n)
    log_law_mass = math.log(geom.omega_n) + geom.n * log_R_kappa
    log_measured = measured_log_support_mass(d)
    return InvarianceRow(
        kappa=kappa,
        R_kappa=math.exp(log_R_kappa),
        grad_rel_err=_rel_err(grad.value, grad_base),
        qnorm_rel_err=_rel_err(qnorm, qnorm_base),
        qnorm_value=qnorm,
        support_mass=math.exp(log_measured),
        log_support_mass_err=abs(log_measured - log_law_mass),
        tolerance_shift=shift
    )


def invariance_report(
    profile: RadialProfile,
    geom: BallGeometry,
    q,
    kappas: Sequence[float],
    cfg: QuadratureConfig = QuadratureConfig()
) -> List[InvarianceRow]:
    """One row per κ, in input order"""
    if any(not 0 < k < 1 for k in kappas):
        raise PreconditionError("every κ must lie in (0, 1)")
    if not kappas:
        return []
    base_values = (gradient_n_norm(profile, geom), base_lz_quasinorm(profile, geom.n, q, cfg).value)
    return [invariance_row(profile, geom, q, k, cfg, base_values) for k in kappas]


@dataclass(frozen=True)
class NoncompactnessCertificate:
    """Witness sequence v_κ with shrinking supports and quasinorms >= λ"""
    lam: float
    kappas: Tuple[float, ...]
    log_support_radii: Tuple[float, ...]
    quasinorms: Tuple[float, ...]
    conditions_met: bool
    gradient_norm: float = math.nan
    support_limit: float = math.nan
    kappa0: float = 1.0

    @property
    def support_radii(self) -> Tuple[float, ...]:
        return tuple(math.exp(r) for r in self.log_support_radii)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda': self.lam,
            'kappas': list(self.kappas),
            'support_radii': list(self.support_radii),
            'log_support_radii': list(self.log_support_radii),
            'quasinorms': list(self.quasinorms),
            'gradient_norm': self.gradient_norm,
            'support_limit': self.support_limit,
            'kappa_threshold': self.kappa0,
            'conditions_met': self.conditions_met
        }


def geometric_kappas(ratio: float, count: int) -> List[float]:
    """ratio^j for j = 1..count"""
    if not 0 < ratio < 1 or count < 1:
        raise PreconditionError("geometric κ list needs ratio in (0, 1) and count >= 1")
    return [ratio ** j for j in range(1, count + 1)]


def check_membership(profile: RadialProfile, geom: BallGeometry) -> float:
    """‖∇v‖_{Lⁿ}, raising MembershipViolation outside the unit ball"""
    if profile.from_steps:
        raise MembershipViolation(math.inf)
    grad = gradient_n_norm(profile, geom)
    if grad > 1 + MEMBERSHIP_SLACK:
        raise MembershipViolation(grad)
    return grad


def certificate_quasinorm(
    profile: RadialProfile,
    geom: BallGeometry,
    q,
    kappa: float,
    lam: float,
    cfg: QuadratureConfig = QuadratureConfig()
) -> Tuple[float, float]:
    """(log R_κ, ‖v_κ‖) for one κ; raises QuasinormBelowLambda when ‖v_κ‖ < λ"""
    d = dilate(profile, geom, kappa)
    qnorm = dilated_lz_quasinorm_numeric(d, q, cfg).value
    R_tilde = geom.radius_of_mass(profile.support_mass)
    log_radius = log_support_radius(kappa, R_tilde, geom.R, geom.n)
    if qnorm < lam - LAMBDA_SLACK:
        raise QuasinormBelowLambda(kappa, qnorm, lam, {'kappa': kappa, 'log_support_radius': log_radius})
    return log_radius, qnorm


def noncompactness_certificate(
    profile: RadialProfile,
    geom: BallGeometry,
    q,
    kappas: Sequence[float],
    lam: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    evaluated: Optional[Sequence[Tuple[float, float]]] = None,
    support_limit: Optional[float] = None
) -> NoncompactnessCertificate:
    """
    Certify β(embedding) >= λ: v lies in the unit ball of the Sobolev space,
    every κ lies below the threshold κ₀ that keeps spt v_κ inside the ball of
    radius `support_limit` (default R), the supports shrink strictly along
    the κ sequence, and every ‖v_κ‖ is at least λ.

    `evaluated` lets a caller pass in per-κ (log R_κ, ‖v_κ‖) pairs computed
    concurrently with certificate_quasinorm.
    """
    grad = check_membership(profile, geom)
    kappas = tuple(float(k) for k in kappas)
    if not kappas:
        raise PreconditionError("the κ sequence must be nonempty")
    if any(not 0 < k < 1 for k in kappas):
        raise PreconditionError("every κ must lie in (0, 1)")
    if any(b >= a for a, b in zip(kappas, kappas[1:])):
        raise PreconditionError("κ sequence must be strictly decreasing")
    limit = geom.R if support_limit is None else float(support_limit)
    if not 0 < limit <= geom.R:
        raise PreconditionError(f"support limit must lie in (0, R], got {limit!r}")
    kappa0 = kappa_threshold(geom.radius_of_mass(profile.support_mass), limit, geom.R, geom.n)

    if evaluated is None:
        evaluated = [certificate_quasinorm(profile, geom, q, k, lam, cfg) for k in kappas]
    log_radii = tuple(r for r, _ in evaluated)
    quasinorms = tuple(v for _, v in evaluated)

    admissible = kappas[0] < kappa0
    if not admissible:
        logger.warning("κ = %r is not below κ₀ = %r for support limit %r", kappas[0], kappa0, limit)
    shrinking = all(b < a for a, b in zip(log_radii, log_radii[1:]))
    logger.info(
        "certificate λ=%r: %d κ values, κ₀ %r, smallest log R_κ %r, min quasinorm %r",
        lam, len(kappas), kappa0, log_radii[-1], min(quasinorms)
    )
    return NoncompactnessCertificate(
        lam, kappas, log_radii, quasinorms, admissible and shrinking, grad, limit, kappa0
    )
