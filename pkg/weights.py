"""
Weights, Primitives and Lambda / Lorentz-Zygmund Quasinorms

A weight w on (0, M) is evaluated in the log-measure coordinate
u = log(2M/t), t = 2M·e^{-u}, which maps (0, M) onto (log 2, ∞). In that
coordinate dt = t du, so the log-singular behaviour of power-log weights at
t -> 0 turns into an exponentially decaying (p < ∞) or algebraically decaying
(p = ∞) tail that QUADPACK integrates directly.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import PreconditionError
from quadrature import (
    QuadResult,
    QuadratureConfig,
    grid_seeded_max,
    integrate_interval,
    integrate_piecewise
)
from rearrangement import SimpleFunction, StepProfile, distribution_map, rearrangement

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

# Lower ends of the t-grids used for asymptotic verdicts, as fractions of M
ASYMPTOTIC_FLOORS = (1e-9, 1e-12, 1e-15)
# Relative change in the last refinement that makes a verdict inconclusive
INCONCLUSIVE_CHANGE = 0.01


def parse_exponent(p) -> float:
    if p is None or (isinstance(p, str) and p.strip().upper() in ('INF', 'INFINITY', '∞')):
        return math.inf
    return float(p)


def format_exponent(p: float):
    return 'INF' if math.isinf(p) else p


class Weight:
    """Positive weight on (0, M) with its primitive W(t) = ∫_0^t w"""

    total_mass: float
    closed_form: bool = False

    def u_of(self, t: float) -> float:
        return math.log(2 * self.total_mass / t)

    def t_of(self, u: float) -> float:
        return 2 * self.total_mass * math.exp(-u)

    def log_w_u(self, u: float) -> float:
        """log w(t) at t = 2M e^{-u}"""
        raise NotImplementedError

    def log_density_u(self, u: float) -> float:
        """log(w(t)·t) at t = 2M e^{-u}; ∫ w dt = ∫ exp(log_density_u) du"""
        return self.log_w_u(u) + math.log(2 * self.total_mass) - u

    def log_w_ratio(self, u: float, shift: float) -> float:
        """log w(t·e^{shift}) - log w(t) at t = 2M e^{-u}"""
        return self.log_w_u(u - shift) - self.log_w_u(u)

    def __call__(self, t: float) -> float:
        return math.exp(self.log_w_u(self.u_of(t)))

    def mass_integral(self, t_lo: float, t_hi: float, cfg: QuadratureConfig) -> QuadResult:
        """∫_{t_lo}^{t_hi} w for 0 <= t_lo < t_hi <= M"""
        u_hi = math.inf if t_lo == 0 else self.u_of(t_lo)
        u_lo = self.u_of(t_hi)
        value, err = integrate_interval(lambda u: math.exp(self.log_density_u(u)), u_lo, u_hi, cfg)
        return QuadResult(value, err, 'quadrature')

    def primitive(self, t: float, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
        return self.mass_integral(0.0, t, cfg)

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLogWeight(Weight):
    """w(t) = t^{q/p - 1} · log(2M/t)^{αq}, the q-th power of the LZ weight"""

    p: float
    q: float
    alpha: float
    total_mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'p', parse_exponent(self.p))
        if not self.p > 0:
            raise PreconditionError("p must be in (0, ∞]")
        if not (0 < self.q < math.inf):
            raise PreconditionError("the weight needs a finite q > 0")
        if not self.total_mass > 0:
            raise PreconditionError("M must be > 0")

    @property
    def power(self) -> float:
        """Exponent of t in w"""
        return self.q / self.p - 1

    @property
    def log_power(self) -> float:
        """Exponent of log(2M/t) in w"""
        return self.alpha * self.q

    @property
    def closed_form(self) -> bool:
        return math.isinf(self.p) or self.alpha == 0

    def log_w_u(self, u: float) -> float:
        log_t = math.log(2 * self.total_mass) - u
        return self.power * log_t + self.log_power * math.log(u)

    def log_w_ratio(self, u: float, shift: float) -> float:
        # the t-powers cancel exactly; only the log factor is evaluated
        return self.power * shift + self.log_power * math.log1p(-shift / u)

    def _primitive_closed(self, t: float) -> float:
        if math.isinf(self.p):
            b = self.log_power
            if b >= -1:
                return math.inf
            return self.u_of(t) ** (b + 1) / (-b - 1)
        # α = 0: pure power
        s = self.q / self.p
        return t ** s / s

    def mass_integral(self, t_lo: float, t_hi: float, cfg: QuadratureConfig) -> QuadResult:
        if not self.closed_form:
            return super().mass_integral(t_lo, t_hi, cfg)
        hi = self._primitive_closed(t_hi)
        lo = 0.0 if t_lo == 0 else self._primitive_closed(t_lo)
        if math.isinf(hi):
            return QuadResult(math.inf, 0.0, 'closed_form')
        return QuadResult(hi - lo, 4 * np.finfo(float).eps * abs(hi), 'closed_form')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'powerlog',
            'p': format_exponent(self.p),
            'q': self.q,
            'alpha': self.alpha,
            'M': self.total_mass
        }


@dataclass(frozen=True)
class TabulatedWeight(Weight):
    """
    User-tabulated positive weight, interpolated linearly in log-log.

    Below the first and above the last grid point the end segments are
    extended, so w is a piecewise power law on (0, M) and W is exact.
    """

    grid: Tuple[float, ...]
    values: Tuple[float, ...]
    total_mass: float = 1.0
    closed_form = True
    _log_grid: np.ndarray = field(init=False, repr=False, compare=False)
    _log_values: np.ndarray = field(init=False, repr=False, compare=False)
    _slopes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = tuple(float(t) for t in self.grid)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)
        if not grid or len(grid) != len(values):
            raise PreconditionError("tabulated weight needs matching nonempty grid and values")
        if any(v <= 0 for v in values):
            raise PreconditionError("tabulated weight values must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
            raise PreconditionError("tabulated grid must be positive and strictly increasing")
        if grid[-1] > self.total_mass:
            raise PreconditionError("tabulated grid exceeds M")

        log_grid = np.log(grid)
        log_values = np.log(values)
        if len(grid) > 1:
            slopes = np.diff(log_values) / np.diff(log_grid)
        else:
            slopes = np.zeros(0)
        object.__setattr__(self, '_log_grid', log_grid)
        object.__setattr__(self, '_log_values', log_values)
        object.__setattr__(self, '_slopes', slopes)

    @property
    def first_slope(self) -> float:
        """Log-log slope of w as t -> 0"""
        return float(self._slopes[0]) if len(self._slopes) else 0.0

    def _segment(self, log_t: float) -> Tuple[float, float, float]:
        """(anchor log t, anchor log w, slope) of the power-law piece at log t"""
        if len(self.grid) == 1:
            return self._log_grid[0], self._log_values[0], 0.0
        k = int(np.searchsorted(self._log_grid, log_t, side='right')) - 1
        k = min(max(k, 0), len(self._slopes) - 1)
        return self._log_grid[k], self._log_values[k], float(self._slopes[k])

    def log_w_u(self, u: float) -> float:
        log_t = math.log(2 * self.total_mass) - u
        anchor_t, anchor_w, slope = self._segment(log_t)
        return anchor_w + slope * (log_t - anchor_t)

    def _nodes(self) -> List[float]:
        """Segment boundaries in t, 0 first"""
        return [0.0] + [t for t in self.grid if t < self.total_mass] + [self.total_mass]

    def mass_integral(self, t_lo: float, t_hi: float, cfg: QuadratureConfig = None) -> QuadResult:
        total = []
        nodes = self._nodes()
        for a, b in zip(nodes[:-1], nodes[1:]):
            s, e = max(a, t_lo), min(b, t_hi)
            if e <= s:
                continue
            anchor_t, anchor_w, slope = self._segment(-math.inf if s == 0 else 0.5 * (math.log(s) + math.log(e)))
            total.append(_power_segment_integral(anchor_t, anchor_w, slope, s, e))
        value = math.fsum(total)
        return QuadResult(value, 4 * np.finfo(float).eps * abs(value) if math.isfinite(value) else 0.0, 'closed_form')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'tabulated',
            'grid': list(self.grid),
            'values': list(self.values),
            'M': self.total_mass
        }


def _power_segment_integral(anchor_log_t: float, anchor_log_w: float, slope: float, s: float, e: float) -> float:
    """∫_s^e w_a (t/t_a)^β dt for the power law anchored at (t_a, w_a)"""
    exponent = slope + 1
    scale = math.exp(anchor_log_w + anchor_log_t)
    log_e = math.log(e) - anchor_log_t
    if s == 0:
        if exponent <= 0:
            return math.inf
        return scale * math.exp(exponent * log_e) / exponent
    log_s = math.log(s) - anchor_log_t
    if abs(exponent) < 1e-12:
        return scale * (log_e - log_s)
    # exp(x e) - exp(x s) = exp(x s)·expm1(x (e - s))
    return scale * math.exp(exponent * log_s) * math.expm1(exponent * (log_e - log_s)) / exponent


def weight_from_dict(data: Dict[str, Any]) -> Weight:
    kind = data.get('kind')
    try:
        if kind == 'powerlog':
            return PowerLogWeight(data['p'], float(data['q']), float(data['alpha']), float(data.get('M', 1.0)))
        if kind == 'tabulated':
            return TabulatedWeight(tuple(data['grid']), tuple(data['values']), float(data.get('M', 1.0)))
    except (KeyError, TypeError) as e:
        raise PreconditionError(f"malformed weight JSON: {e}") from e
    raise PreconditionError(f"unknown weight kind {kind!r}")


def constant_weight(total_mass: float = 1.0, value: float = 1.0) -> TabulatedWeight:
    """w ≡ value"""
    return TabulatedWeight((total_mass,), (value,), total_mass)


@dataclass(frozen=True)
class LambdaParams:
    """Exponent q and weight w of the Lambda space Λ^q_w"""
    q: float
    weight: Weight

    def __post_init__(self):
        if not (0 < self.q < math.inf):
            raise PreconditionError("Lambda spaces need a finite q > 0; use lz_quasinorm for q = ∞")
        if isinstance(self.weight, PowerLogWeight) and self.weight.q != self.q:
            raise PreconditionError("power-log weight was built for a different q")

    @property
    def total_mass(self) -> float:
        return self.weight.total_mass


def primitive_W(weight: Weight, t: float, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """W(t) = ∫_0^t w; math.inf when the integral diverges at 0"""
    if not (0 < t < weight.total_mass * (1 + 1e-12)):
        raise PreconditionError(f"t must lie in (0, M), got {t!r}")
    return weight.primitive(min(t, weight.total_mass), cfg)


def primitive_on_grid(weight: Weight, ts: Sequence[float], cfg: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """W at ascending points ts, accumulated segment by segment when W has no closed form"""
    ts = [float(t) for t in ts]
    if weight.closed_form:
        return np.array([weight.primitive(t, cfg).value for t in ts])
    out = []
    running = weight.primitive(ts[0], cfg).value
    out.append(running)
    for a, b in zip(ts[:-1], ts[1:]):
        running = running + weight.mass_integral(a, b, cfg).value
        out.append(running)
    return np.array(out)


def _power_result(total: List[float], err: float, q: float, method: str) -> QuadResult:
    s = math.fsum(total)
    if math.isinf(s):
        return QuadResult(math.inf, 0.0, method)
    if s <= 0:
        return QuadResult(0.0, err ** (1 / q) if err else 0.0, method)
    value = s ** (1 / q)
    return QuadResult(value, value * err / (q * s), method)


def lambda_quasinorm(profile, params: LambdaParams, cfg: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """
    (∫_0^M (f*)^q w dt)^{1/q}.

    Step profiles are integrated piece by piece through the weight's mass
    integrals; any other profile exposing value_log/log_breakpoints is
    integrated in the log-measure coordinate between its kinks.
    """
    weight, q = params.weight, params.q
    if abs(profile.total_mass - weight.total_mass) > 1e-12 * weight.total_mass:
        raise PreconditionError("profile and weight live on different total masses")

    if isinstance(profile, StepProfile):
        total, err = [], 0.0
        method = 'closed_form' if weight.closed_form else 'quadrature'
        for t_lo, t_hi, a in profile.pieces():
            piece = weight.mass_integral(t_lo, min(t_hi, weight.total_mass), cfg)
            total.append(a ** q * piece.value)
            err += a ** q * piece.abs_err_estimate
        return _power_result(total, err, q, method)

    log_2m = math.log(2 * weight.total_mass)

    def integrand(u: float) -> float:
        v = profile.value_log(log_2m - u)
        if v <= 0:
            return 0.0
        return math.exp(q * math.log(v) + weight.log_density_u(u))

    points = _u_points(profile, log_2m)
    if points is None:
        return QuadResult(0.0, 0.0, 'quadrature')
    value, err = integrate_piecewise(integrand, points, cfg)
    return _power_result([value], err, q, 'quadrature')


def _u_points(profile, log_2m: float) -> Optional[List[float]]:
    """Integration nodes in u for a log-evaluable profile, ending at +inf"""
    if profile.support_mass <= 0:
        return None
    u_support = log_2m - math.log(profile.support_mass)
    kinks = sorted({log_2m - lt for lt in profile.log_breakpoints()} | {u_support})
    points = [u for u in kinks if u >= u_support]
    return points + [math.inf]


def lambda_quasinorm_distributional(
    f: SimpleFunction,
    params: LambdaParams,
    cfg: QuadratureConfig = QuadratureConfig()
) -> QuadResult:
    """(q ∫_0^∞ W(f_*(λ)) λ^{q-1} dλ)^{1/q}, a finite sum since f_* is a step function"""
    weight, q = params.weight, params.q
    dist = distribution_map(f)
    thresholds = list(dist.thresholds) + [math.inf]
    total, err = [], 0.0
    for lo, hi, mass in zip(thresholds[:-1], thresholds[1:], dist.masses):
        if mass <= 0:
            continue
        w_value = weight.primitive(min(mass, weight.total_mass), cfg)
        # q ∫_lo^hi λ^{q-1} dλ = hi^q - lo^q
        span = hi ** q - lo ** q
        total.append(w_value.value * span)
        err += w_value.abs_err_estimate * span
    method = 'closed_form' if weight.closed_form else 'quadrature'
    return _power_result(total, err, q, method)


def _sup_log_factor(p: float, alpha: float, log_2m: float, u_lo: float, u_hi: float) -> float:
    """
    sup of log(t^{1/p} log(2M/t)^α) for u = log(2M/t) in [u_lo, u_hi].

    d/du [ (log 2M - u)/p + α log u ] = -1/p + α/u vanishes at u* = αp.
    """
    def h(u: float) -> float:
        if math.isinf(u):
            if math.isinf(p):
                return math.inf if alpha > 0 else (0.0 if alpha == 0 else -math.inf)
            return -math.inf
        first = 0.0 if math.isinf(p) else (log_2m - u) / p
        return first + alpha * math.log(u)

    candidates = [h(u_lo), h(u_hi)]
    if not math.isinf(p) and alpha > 0:
        u_star = alpha * p
        if u_lo < u_star < u_hi:
            candidates.append(h(u_star))
    return max(candidates)


def lz_quasinorm(
    profile,
    p,
    q,
    alpha: float,
    cfg: QuadratureConfig = QuadratureConfig()
) -> QuadResult:
    """
    ‖f‖_{L^{p,q,α}} = ‖f* t^{1/p - 1/q} log(2M/t)^α‖_{L^q(0, M)}.

    q < ∞ delegates to lambda_quasinorm; q = ∞ is a supremum, exact per step
    piece and golden-section refined per piece for other profiles.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    M = profile.total_mass
    if not math.isinf(q):
        return lambda_quasinorm(profile, LambdaParams(q, PowerLogWeight(p, q, alpha, M)), cfg)

    log_2m = math.log(2 * M)
    if isinstance(profile, StepProfile):
        best = -math.inf
        for t_lo, t_hi, a in profile.pieces():
            u_hi = math.inf if t_lo == 0 else log_2m - math.log(t_lo)
            u_lo = log_2m - math.log(t_hi)
            best = max(best, math.log(a) + _sup_log_factor(p, alpha, log_2m, u_lo, u_hi))
        value = 0.0 if best == -math.inf else math.exp(best)
        return QuadResult(value, 0.0, 'closed_form')

    points = _u_points(profile, log_2m)
    if points is None:
        return QuadResult(0.0, 0.0, 'optimization')

    def objective(u: float) -> float:
        v = profile.value_log(log_2m - u)
        if v <= 0:
            return -math.inf
        first = 0.0 if math.isinf(p) else (log_2m - u) / p
        return math.log(v) + first + alpha * math.log(u)

    best = -math.inf
    for u_lo, u_hi in zip(points[:-1], points[1:]):
        best = max(best, piece_sup(objective, u_lo, u_hi))
    value = 0.0 if best == -math.inf else math.exp(best)
    return QuadResult(value, 0.0, 'optimization')


def piece_sup(objective, u_lo: float, u_hi: float, count: int = 64) -> float:
    """sup of objective on [u_lo, u_hi] (u_hi may be inf) by seeded golden section"""
    if math.isinf(u_hi):
        # the far end is sampled out to a million widths of the current scale
        offsets = np.geomspace(1e-12, 1e6 * max(1.0, u_lo), count)
        grid = u_lo + offsets
        grid = np.concatenate(([u_lo], grid))
    else:
        grid = np.linspace(u_lo, u_hi, count)
    _, value = grid_seeded_max(objective, grid)
    return value


@dataclass(frozen=True)
class AdmissibilityReport:
    """Numerical verdicts on the standing assumptions for Λ^q_w"""
    nontrivial: bool
    delta2_index: float
    quasi_kothe: bool
    inconclusive: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'nontrivial': self.nontrivial,
            'delta2_index': 'INF' if math.isinf(self.delta2_index) else self.delta2_index,
            'quasi_kothe': self.quasi_kothe,
            'inconclusive': list(self.inconclusive)
        }


def dyadic_grid(total_mass: float, floor: float, per_octave: int = 8) -> np.ndarray:
    """Ascending t = M·2^{-j/per_octave} from about floor·M up to M, so 2t is a node for t <= M/2"""
    octaves = math.log2(1 / floor)
    count = int(math.ceil(octaves * per_octave)) + 1
    j = np.arange(count)[::-1]
    return total_mass * np.exp2(-j / per_octave)


def _refined_verdicts(values_by_floor: List[float]) -> Tuple[float, bool]:
    """Final value and whether the last refinement moved it by more than 1%"""
    last, previous = values_by_floor[-1], values_by_floor[-2]
    if math.isinf(last):
        return math.inf, False
    changed = abs(last - previous) > INCONCLUSIVE_CHANGE * abs(previous)
    return (math.inf if changed else last), changed


def weight_admissibility_report(params: LambdaParams, cfg: QuadratureConfig = QuadratureConfig()) -> AdmissibilityReport:
    """
    Nontriviality (0 < W < ∞), the Δ₂ index sup W(2t)/W(t) and the
    quasi-Köthe condition, evaluated on dyadic log grids whose lower end is
    pushed from 1e-9·M to 1e-15·M in two refinement rounds.
    """
    weight, q = params.weight, params.q
    M = weight.total_mass
    inconclusive = []

    tail = weight.primitive(ASYMPTOTIC_FLOORS[-1] * M, cfg).value
    if not (0 < tail < math.inf):
        return AdmissibilityReport(False, math.inf, False)

    per_octave = 8
    ts = dyadic_grid(M, ASYMPTOTIC_FLOORS[-1], per_octave)
    W = primitive_on_grid(weight, ts, cfg)
    if not np.all(np.isfinite(W)) or np.any(W <= 0):
        return AdmissibilityReport(False, math.inf, False)

    # ts[i + per_octave] = 2 ts[i]
    ratios = W[per_octave:] / W[:-per_octave]
    t_ratio = ts[:-per_octave]
    delta2_rounds = [float(np.max(ratios[t_ratio >= floor * M])) for floor in ASYMPTOTIC_FLOORS]
    delta2, changed = _refined_verdicts(delta2_rounds)
    if changed:
        inconclusive.append('delta2')

    a = M / 2
    if q <= 1:
        rounds = []
        for floor in ASYMPTOTIC_FLOORS:
            mask = (ts >= floor * M) & (ts <= a)
            rounds.append(float(np.max(ts[mask] ** q / W[mask])))
        kothe_value, changed = _refined_verdicts(rounds)
    else:
        log_2m = math.log(2 * M)

        def integrand(u: float) -> float:
            t = 2 * M * math.exp(-u)
            w_value = weight.primitive(t, cfg).value
            return math.exp((math.log(t) - math.log(w_value)) / (q - 1) + log_2m - u)

        rounds = []
        u_a = weight.u_of(a)
        running, previous_u = 0.0, u_a
        for floor in ASYMPTOTIC_FLOORS:
            u_floor = weight.u_of(floor * M)
            running += integrate_interval(integrand, previous_u, u_floor, cfg)[0]
            previous_u = u_floor
            rounds.append(running)
        kothe_value, changed = _refined_verdicts(rounds)
    if changed:
        inconclusive.append('quasi_kothe')
        logger.warning("quasi-Köthe condition did not settle under grid refinement")

    return AdmissibilityReport(True, delta2, math.isfinite(kothe_value), tuple(inconclusive))


def lz_quasi_kothe_classify(p, q, alpha: float) -> bool:
    """Parameter cases in which L^{p,q,α} is a quasi-Köthe function space"""
    p, q = parse_exponent(p), parse_exponent(q)
    if p == 1:
        if q <= 1:
            return alpha >= 0
        return alpha + 1 / q > 1
    if 1 < p < math.inf:
        return True
    if math.isinf(p):
        if math.isinf(q):
            return alpha <= 0
        return alpha + 1 / q < 0
    return False


def lz_normable_classify(p, q, alpha: float) -> bool:
    """Parameter cases in which the LZ quasinorm is equivalent to a norm"""
    p, q = parse_exponent(p), parse_exponent(q)
    if p == 1 and q == 1:
        return alpha >= 0
    if 1 < p < math.inf and 1 < q < math.inf:
        return True
    if math.isinf(p) and 1 <= q < math.inf:
        return alpha + 1 / q < 0
    return False


def lz_alpha_norm_exponent(p, q, alpha: float) -> Optional[float]:
    """
    a in (0, 1] for which the LZ quasinorm itself satisfies
    ‖f+g‖^a <= ‖f‖^a + ‖g‖^a, when a known case applies; None otherwise.

    α = 0 only: L^p is a min(p, 1)-norm, L^{1,q} with q < 1 is a q-norm, and
    1 <= q <= p < ∞ gives a decreasing weight and so a norm.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if alpha != 0 or math.isinf(p) or math.isinf(q):
        return None
    if p == q:
        return min(p, 1.0)
    if p == 1 and q < 1:
        return q
    if 1 <= q <= p:
        return 1.0
    return None


def absolute_continuity_trace(
    f: SimpleFunction,
    params: LambdaParams,
    masses: Sequence[float],
    cfg: QuadratureConfig = QuadratureConfig()
) -> List[float]:
    """‖f·χ_{E_n}‖ for sets E_n of the given (decreasing) measures"""
    if any(b > a for a, b in zip(masses, masses[1:])):
        raise PreconditionError("masses must be nonincreasing")
    return [lambda_quasinorm(rearrangement(f.restricted(m)), params, cfg).value for m in masses]
