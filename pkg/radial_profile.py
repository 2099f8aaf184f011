"""
Radial Profiles on a Ball

A radial function v(x) = v*(ω_n |x|^n) on B_R is stored through its profile
v* in the measure variable t ∈ (0, |B_R|). Profiles are continuous and
nonincreasing, built from segments that are linear either in t or in log t,
so the gradient Lⁿ-norm has a closed form and the Moser-type truncated
logarithms are represented exactly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from scipy import special

from errors import PreconditionError, SupportOverflow
from quadrature import QuadResult, QuadratureConfig, integrate_piecewise
from rearrangement import SimpleFunction, rearrangement

logger = logging.getLogger(__name__)

# Width of the ramps that embed a step as a continuous profile, as a fraction of |B_R|
RAMP_FRACTION = 1e-9


def unit_ball_volume(n: int) -> float:
    """ω_n = π^{n/2} / Γ(n/2 + 1), exact factorial form for even n"""
    if n % 2 == 0:
        return math.pi ** (n // 2) / math.factorial(n // 2)
    return math.pi ** (n / 2) / special.gamma(n / 2 + 1)


@dataclass(frozen=True)
class BallGeometry:
    """The ball B_R in R^n"""
    n: int
    R: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise PreconditionError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not self.R > 0:
            raise PreconditionError("radius must be > 0")

    @property
    def omega_n(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def ball_measure(self) -> float:
        return self.omega_n * self.R ** self.n

    def radius_of_mass(self, mass: float) -> float:
        """r with ω_n r^n = mass"""
        return (mass / self.omega_n) ** (1 / self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'R': self.R, 'omega_n': self.omega_n, 'ball_measure': self.ball_measure}


@dataclass(frozen=True)
class Segment:
    """v* from v_lo at t_lo to v_hi at t_hi, linear in t or in log t"""
    t_lo: float
    t_hi: float
    v_lo: float
    v_hi: float
    kind: str = 'linear'

    def __post_init__(self):
        if self.kind not in ('linear', 'log'):
            raise PreconditionError(f"unknown segment kind {self.kind!r}")
        if not (0 <= self.t_lo < self.t_hi):
            raise PreconditionError("segment needs 0 <= t_lo < t_hi")
        if self.kind == 'log' and self.t_lo == 0:
            raise PreconditionError("log segments cannot start at t = 0")
        if not (self.v_lo >= self.v_hi >= 0) or math.isinf(self.v_lo):
            raise PreconditionError("segment values must be finite, nonnegative and nonincreasing")

    @property
    def drop(self) -> float:
        return self.v_lo - self.v_hi

    def value_log(self, log_t: float) -> float:
        if self.kind == 'log':
            share = (log_t - math.log(self.t_lo)) / (math.log(self.t_hi) - math.log(self.t_lo))
        else:
            share = (math.exp(log_t) - self.t_lo) / (self.t_hi - self.t_lo)
        share = min(max(share, 0.0), 1.0)
        return self.v_lo - self.drop * share

    def log_derivative(self, log_t: float) -> float:
        """t·|v*'(t)|"""
        if self.kind == 'log':
            return self.drop / (math.log(self.t_hi) - math.log(self.t_lo))
        return math.exp(log_t) * self.drop / (self.t_hi - self.t_lo)

    def gradient_power(self, n: int, omega_n: float) -> float:
        """∫ |v*'|^n n^n ω_n t^{n-1} dt over the segment, the segment's share of ‖∇v‖ⁿ"""
        if self.drop == 0:
            return 0.0
        if self.kind == 'log':
            c = self.drop / math.log(self.t_hi / self.t_lo)
            return c ** n * n ** n * omega_n * math.log(self.t_hi / self.t_lo)
        c = self.drop / (self.t_hi - self.t_lo)
        return c ** n * n ** (n - 1) * omega_n * (self.t_hi ** n - self.t_lo ** n)

    def to_list(self) -> list:
        return [self.t_lo, self.t_hi, self.v_lo, self.v_hi, self.kind]


@dataclass(frozen=True)
class LinearProfile:
    """Continuous nonincreasing v* as consecutive segments starting at t = 0"""
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        segments = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        object.__setattr__(self, 'segments', segments)
        if not segments:
            return
        if segments[0].t_lo != 0:
            raise PreconditionError("the first segment must start at t = 0")
        if segments[-1].v_hi != 0:
            raise PreconditionError("the last segment must end at value 0")
        for a, b in zip(segments, segments[1:]):
            if a.t_hi != b.t_lo or a.v_hi != b.v_lo:
                raise PreconditionError("segments must join continuously")

    @property
    def support_mass(self) -> float:
        return self.segments[-1].t_hi if self.segments else 0.0

    def _locate(self, log_t: float) -> Optional[Segment]:
        for segment in self.segments:
            if log_t < math.log(segment.t_hi):
                return segment
        return None


@dataclass(frozen=True)
class RadialProfile:
    """
    v* on (0, M), M = |B_R|, vanishing from support_mass < M on.

    `from_steps` marks profiles embedded from step functions; their gradient
    norms are artefacts of the ramps and are not Sobolev data.
    """
    profile: LinearProfile
    total_mass: float
    from_steps: bool = False

    def __post_init__(self):
        if not isinstance(self.profile, LinearProfile):
            object.__setattr__(self, 'profile', LinearProfile(tuple(self.profile)))
        if not self.support_mass < self.total_mass:
            raise SupportOverflow(
                f"support mass {self.support_mass!r} must be strictly below |B_R| = {self.total_mass!r}"
            )

    @property
    def segments(self) -> Tuple[Segment, ...]:
        return self.profile.segments

    @property
    def support_mass(self) -> float:
        return self.profile.support_mass

    def log_support_mass(self) -> float:
        return math.log(self.support_mass) if self.support_mass > 0 else -math.inf

    @property
    def peak(self) -> float:
        """v*(0+)"""
        return self.segments[0].v_lo if self.segments else 0.0

    def value_log(self, log_t: float) -> float:
        segment = self.profile._locate(log_t)
        return segment.value_log(log_t) if segment else 0.0

    def __call__(self, t: float) -> float:
        if t <= 0:
            return self.peak
        return self.value_log(math.log(t))

    def log_derivative(self, log_t: float) -> float:
        segment = self.profile._locate(log_t)
        return segment.log_derivative(log_t) if segment else 0.0

    def log_breakpoints(self) -> List[float]:
        """log t at every segment end, the support end included"""
        return [math.log(s.t_hi) for s in self.segments]

    def scaled(self, c: float) -> 'RadialProfile':
        if c < 0:
            raise PreconditionError("scale factor must be >= 0")
        segments = tuple(Segment(s.t_lo, s.t_hi, c * s.v_lo, c * s.v_hi, s.kind) for s in self.segments)
        return RadialProfile(LinearProfile(segments if c > 0 else ()), self.total_mass, self.from_steps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'segments',
            'segments': [s.to_list() for s in self.segments],
            'total_mass': self.total_mass,
            'from_steps': self.from_steps
        }


def tent_profile(geom: BallGeometry, support_fraction: float = 0.5, height: float = 1.0) -> RadialProfile:
    """v*(t) = height·max(0, 1 - t/M̃) with M̃ = support_fraction·|B_R|"""
    if not 0 < support_fraction < 1:
        raise PreconditionError("support fraction must lie in (0, 1)")
    M = geom.ball_measure
    support = support_fraction * M
    return RadialProfile(LinearProfile((Segment(0.0, support, height, 0.0),)), M)


def moser_normalizing_length(n: int) -> float:
    """L with ‖∇v‖_{Lⁿ} = 1 for v*(t) = min(1, log(M̃/t)/L), i.e. (nⁿ ω_n)^{1/(n-1)}"""
    return (n ** n * unit_ball_volume(n)) ** (1 / (n - 1))


def moser_profile(
    geom: BallGeometry,
    support_fraction: float = 0.5,
    L: Optional[float] = None,
    height: float = 1.0
) -> RadialProfile:
    """height·min(1, log(M̃/t)/L); L defaults to the value giving unit gradient norm at height 1"""
    if not 0 < support_fraction < 1:
        raise PreconditionError("support fraction must lie in (0, 1)")
    if L is None:
        L = moser_normalizing_length(geom.n)
    if not L > 0:
        raise PreconditionError("L must be > 0")
    M = geom.ball_measure
    support = support_fraction * M
    knee = support * math.exp(-L)
    segments = (
        Segment(0.0, knee, height, height),
        Segment(knee, support, height, 0.0, 'log')
    )
    return RadialProfile(LinearProfile(segments), M)


def spherical_rearrangement(f: SimpleFunction, geom: BallGeometry) -> RadialProfile:
    """
    u★ as a radial profile: the rearrangement f* with every jump replaced
    by a linear ramp of measure width RAMP_FRACTION·|B_R| ending at the jump.
    """
    M = geom.ball_measure
    if f.total_mass > M * (1 + 1e-12):
        raise SupportOverflow(f"function lives on mass {f.total_mass!r} > |B_R| = {M!r}")
    steps = rearrangement(f)
    if not steps.values:
        return RadialProfile(LinearProfile(()), M, from_steps=True)

    edges = (0.0,) + steps.breakpoints
    width = min(RAMP_FRACTION * M, 0.5 * min(b - a for a, b in zip(edges, edges[1:])))
    values = steps.values + (0.0,)
    segments, t = [], 0.0
    for i, jump in enumerate(steps.breakpoints):
        ramp_start = jump - width
        if ramp_start > t:
            segments.append(Segment(t, ramp_start, values[i], values[i]))
        segments.append(Segment(ramp_start, jump, values[i], values[i + 1]))
        t = jump
    logger.debug("embedded %d steps with ramps of width %r", len(steps.values), width)
    return RadialProfile(LinearProfile(tuple(segments)), M, from_steps=True)


def gradient_n_norm(profile: RadialProfile, geom: BallGeometry) -> float:
    """‖∇v‖_{Lⁿ(B_R)} in closed form, segment by segment"""
    if abs(profile.total_mass - geom.ball_measure) > 1e-12 * geom.ball_measure:
        raise PreconditionError("profile does not live on this ball")
    if profile.from_steps:
        logger.warning("gradient norm of a step-embedded profile measures its ramps only")
    total = math.fsum(s.gradient_power(geom.n, geom.omega_n) for s in profile.segments)
    return total ** (1 / geom.n)


def radial_gradient_norm_quadrature(
    profile,
    geom: BallGeometry,
    cfg: QuadratureConfig = QuadratureConfig()
) -> QuadResult:
    """
    ‖∇v‖_{Lⁿ(B_R)} by adaptive quadrature in the radial variable σ = log(R/r).

    With t = ω_n r^n and D = t|v'(t)|, the integrand |∇v|ⁿ nω_n r^{n-1} dr
    becomes n^{n+1} ω_n D(t)ⁿ dσ. Works for any evaluator exposing
    log_derivative, log_breakpoints and log_support_mass.
    """
    n, omega_n = geom.n, geom.omega_n
    log_M = math.log(geom.ball_measure)
    log_support = profile.log_support_mass()
    if log_support == -math.inf:
        return QuadResult(0.0, 0.0, 'quadrature')

    def integrand(sigma: float) -> float:
        d = profile.log_derivative(log_M - n * sigma)
        if d <= 0:
            return 0.0
        return math.exp((n + 1) * math.log(n) + math.log(omega_n) + n * math.log(d))

    sigmas = sorted({(log_M - lt) / n for lt in profile.log_breakpoints() if lt <= log_support})
    points = sigmas + tail_points(sigmas[-1], getattr(profile, 'kappa', 1.0) * n) + [math.inf]
    value, err = integrate_piecewise(integrand, points, cfg)
    norm = value ** (1 / n)
    return QuadResult(norm, norm * err / (n * value) if value > 0 else 0.0, 'quadrature')


def tail_points(start: float, rate: float) -> List[float]:
    """Extra nodes past the last kink at a few multiples of the decay length 1/rate"""
    return [start + k / rate for k in (1.0, 10.0, 100.0)]


def profile_from_dict(data: Dict[str, Any], geom: BallGeometry) -> RadialProfile:
    """Profile JSON: tent, moser or explicit segments"""
    kind = data.get('kind')
    try:
        if kind == 'tent':
            return tent_profile(geom, float(data.get('support_fraction', 0.5)), float(data.get('height', 1.0)))
        if kind == 'moser':
            L = data.get('L')
            return moser_profile(
                geom,
                float(data.get('support_fraction', 0.5)),
                None if L is None else float(L),
                float(data.get('height', 1.0))
            )
        if kind == 'segments':
            segments = tuple(Segment(*s) for s in data['segments'])
            return RadialProfile(LinearProfile(segments), geom.ball_measure, bool(data.get('from_steps', False)))
        if kind == 'simple':
            return spherical_rearrangement(SimpleFunction.from_dict(data), geom)
    except (KeyError, TypeError) as e:
        raise PreconditionError(f"malformed profile JSON: {e}") from e
    raise PreconditionError(f"unknown profile kind {kind!r}")


def normalized(profile: RadialProfile, geom: BallGeometry) -> RadialProfile:
    """profile scaled to unit gradient norm"""
    norm = gradient_n_norm(profile, geom)
    if not norm > 0:
        raise PreconditionError("cannot normalise a profile with zero gradient")
    return profile.scaled(1 / norm)
