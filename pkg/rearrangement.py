"""
Simple Functions, Distribution Functions and Nonincreasing Rearrangements

Exact representation of nonnegative simple functions on a nonatomic measure
space of total mass M, their distribution functions f_* and their
nonincreasing rearrangements f*.

Masses are accumulated with math.fsum, which rounds the exact real sum once;
every derived mass is therefore independent of the order of the pieces.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple, Any

from errors import PartitionMismatch, PreconditionError, SupportOverflow

# Equality tolerance for real comparisons in otherwise exact operations
TOL_EQ = 1e-12


@dataclass(frozen=True)
class SimpleFunction:
    """|f| given as finitely many (value, mass) pieces on a space of mass M"""

    pieces: Tuple[Tuple[float, float], ...]
    total_mass: float

    def __post_init__(self):
        pieces = tuple((float(v), float(m)) for v, m in self.pieces)
        object.__setattr__(self, 'pieces', pieces)
        object.__setattr__(self, 'total_mass', float(self.total_mass))

        if not self.total_mass > 0 or math.isinf(self.total_mass):
            raise PreconditionError(f"total mass must be positive and finite, got {self.total_mass!r}")
        for value, mass in pieces:
            if not value >= 0 or math.isinf(value):
                raise PreconditionError(f"piece value must be finite and >= 0, got {value!r}")
            if not mass > 0:
                raise PreconditionError(f"piece mass must be > 0, got {mass!r}")
        used = math.fsum(m for _, m in pieces)
        if used > self.total_mass * (1 + TOL_EQ):
            raise SupportOverflow(f"pieces carry mass {used!r} > total mass {self.total_mass!r}")

    @classmethod
    def from_pieces(cls, pieces: Sequence[Sequence[float]], total_mass: float = None) -> 'SimpleFunction':
        """Build from (value, mass) pairs; total mass defaults to the sum of masses"""
        pieces = tuple((float(v), float(m)) for v, m in pieces)
        if total_mass is None:
            total_mass = math.fsum(m for _, m in pieces)
        return cls(pieces, total_mass)

    @classmethod
    def zero(cls, total_mass: float = 1.0) -> 'SimpleFunction':
        return cls((), total_mass)

    @property
    def support_mass(self) -> float:
        return math.fsum(m for v, m in self.pieces if v > 0)

    def distinct_values(self) -> List[float]:
        """Distinct positive values, descending"""
        return sorted({v for v, _ in self.pieces if v > 0}, reverse=True)

    def scaled(self, c: float) -> 'SimpleFunction':
        """c·|f| for c >= 0"""
        if c < 0:
            raise PreconditionError("scale factor must be >= 0")
        return SimpleFunction(tuple((c * v, m) for v, m in self.pieces), self.total_mass)

    def restricted(self, mass: float) -> 'SimpleFunction':
        """
        f·χ_E where E is a set of measure `mass` on which |f| is largest.

        Shrinking `mass` to 0 gives a monotone decreasing-to-null family of
        sets, the mode of set convergence used for absolute continuity.
        """
        if mass < 0:
            raise PreconditionError("restriction mass must be >= 0")
        kept = []
        remaining = mass
        for value, piece_mass in sorted(self.pieces, key=lambda p: -p[0]):
            if remaining <= 0 or value == 0:
                break
            take = min(piece_mass, remaining)
            kept.append((value, take))
            remaining -= take
        return SimpleFunction(tuple(kept), self.total_mass)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'pieces': [[v, m] for v, m in self.pieces],
            'total_mass': self.total_mass
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SimpleFunction':
        try:
            return cls(tuple(tuple(p) for p in data['pieces']), data['total_mass'])
        except (KeyError, TypeError) as e:
            raise PreconditionError(f"malformed SimpleFunction JSON: {e}") from e


@dataclass(frozen=True)
class StepProfile:
    """
    Nonincreasing step function on (0, M).

    Value values[i] on [t_i, t_{i+1}) with t_0 = 0 and t_{i+1} =
    breakpoints[i]; zero from the last breakpoint on. The convention is
    right-continuous, matching f*(t) = inf{λ > 0 : f_*(λ) <= t}.
    """

    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]
    total_mass: float

    def __post_init__(self):
        object.__setattr__(self, 'breakpoints', tuple(float(t) for t in self.breakpoints))
        object.__setattr__(self, 'values', tuple(float(a) for a in self.values))
        object.__setattr__(self, 'total_mass', float(self.total_mass))

        if len(self.breakpoints) != len(self.values):
            raise PreconditionError("breakpoints and values must have equal length")
        if not self.total_mass > 0 or math.isinf(self.total_mass):
            raise PreconditionError(f"total mass must be positive and finite, got {self.total_mass!r}")
        previous_t, previous_a = 0.0, math.inf
        for t, a in zip(self.breakpoints, self.values):
            if not t > previous_t:
                raise PreconditionError("breakpoints must be strictly increasing and positive")
            if not 0 <= a <= previous_a or math.isinf(a):
                raise PreconditionError("values must be finite, nonnegative and nonincreasing")
            previous_t, previous_a = t, a
        if self.breakpoints and self.breakpoints[-1] > self.total_mass * (1 + TOL_EQ):
            raise SupportOverflow(
                f"last breakpoint {self.breakpoints[-1]!r} exceeds total mass {self.total_mass!r}"
            )

    @classmethod
    def characteristic(cls, mass: float, total_mass: float, value: float = 1.0) -> 'StepProfile':
        """value·χ_(0, mass)"""
        return cls((mass,), (value,), total_mass)

    @property
    def support_mass(self) -> float:
        for t, a in zip(reversed(self.breakpoints), reversed(self.values)):
            if a > 0:
                return t
        return 0.0

    def __call__(self, t: float) -> float:
        index = bisect_right(self.breakpoints, t)
        return self.values[index] if index < len(self.values) else 0.0

    def distribution(self, lam: float) -> float:
        """Measure of {f* > λ}"""
        count = sum(1 for a in self.values if a > lam)
        return self.breakpoints[count - 1] if count else 0.0

    def pieces(self) -> Iterator[Tuple[float, float, float]]:
        """(t_lo, t_hi, value) for every nonzero step"""
        t_lo = 0.0
        for t_hi, a in zip(self.breakpoints, self.values):
            if a > 0:
                yield t_lo, t_hi, a
            t_lo = t_hi

    def scaled(self, c: float) -> 'StepProfile':
        if c <= 0:
            if c == 0:
                return StepProfile((), (), self.total_mass)
            raise PreconditionError("scale factor must be >= 0")
        return StepProfile(self.breakpoints, tuple(c * a for a in self.values), self.total_mass)

    def to_simple_function(self) -> SimpleFunction:
        return SimpleFunction(tuple((a, t_hi - t_lo) for t_lo, t_hi, a in self.pieces()), self.total_mass)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'breakpoints': list(self.breakpoints),
            'values': list(self.values),
            'total_mass': self.total_mass
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StepProfile':
        try:
            return cls(tuple(data['breakpoints']), tuple(data['values']), data['total_mass'])
        except (KeyError, TypeError) as e:
            raise PreconditionError(f"malformed StepProfile JSON: {e}") from e


@dataclass(frozen=True)
class DistributionFunction:
    """λ ↦ f_*(λ) as a right-continuous nonincreasing step map"""

    thresholds: Tuple[float, ...]   # ascending jump points, 0 first
    masses: Tuple[float, ...]       # f_* on [thresholds[i], thresholds[i+1])

    def __call__(self, lam: float) -> float:
        index = bisect_right(self.thresholds, lam) - 1
        return self.masses[index] if index >= 0 else self.masses[0]


def distribution_function(f: SimpleFunction, lam: float) -> float:
    """μ({|f| > λ}) for λ > 0"""
    if not lam > 0:
        raise PreconditionError(f"λ must be > 0, got {lam!r}")
    return math.fsum(m for v, m in f.pieces if v > lam)


def distribution_map(f: SimpleFunction) -> DistributionFunction:
    """The whole step map f_* of a simple function"""
    values = sorted(f.distinct_values())
    thresholds = [0.0] + values
    masses = [math.fsum(m for v, m in f.pieces if v > lam) for lam in thresholds]
    return DistributionFunction(tuple(thresholds), tuple(masses))


def rearrangement(f: SimpleFunction) -> StepProfile:
    """
    Nonincreasing rearrangement f* of a simple function.

    Equal values merge into one step; the breakpoint of the step with value a
    is the mass of {|f| >= a}.
    """
    values = f.distinct_values()
    breakpoints = tuple(math.fsum(m for v, m in f.pieces if v >= a) for a in values)
    return StepProfile(breakpoints, tuple(values), f.total_mass)


def rearrangement_point_oracle(f: SimpleFunction, t: float) -> float:
    """f*(t) = inf{λ > 0 : f_*(λ) <= t} by a scan over the candidate thresholds"""
    if not t > 0:
        raise PreconditionError(f"t must be > 0, got {t!r}")
    # f_* is constant on [c_i, c_{i+1}) so the infimum is one of the candidates
    for candidate in [0.0] + sorted(f.distinct_values()):
        if math.fsum(m for v, m in f.pieces if v > candidate) <= t:
            return candidate
    return 0.0


def disjoint_sum(profiles: Sequence[StepProfile]) -> StepProfile:
    """
    Rearrangement of a sum of disjointly supported functions.

    Its distribution function is the pointwise sum of the inputs' distribution
    functions.
    """
    if not profiles:
        raise PreconditionError("disjoint_sum needs at least one profile")
    total_mass = profiles[0].total_mass
    for profile in profiles[1:]:
        if abs(profile.total_mass - total_mass) > TOL_EQ * total_mass:
            raise PreconditionError("profiles must share the same total mass")

    used = math.fsum(p.support_mass for p in profiles)
    if used > total_mass * (1 + TOL_EQ):
        raise SupportOverflow(
            f"supports carry mass {used!r} > {total_mass!r}; family cannot be disjointly realized"
        )

    values = sorted({a for p in profiles for a in p.values if a > 0}, reverse=True)
    breakpoints = []
    for a in values:
        # mass of {f_p >= a} for every profile, summed
        parts = []
        for p in profiles:
            count = sum(1 for b in p.values if b >= a)
            if count:
                parts.append(p.breakpoints[count - 1])
        breakpoints.append(math.fsum(parts))
    return StepProfile(tuple(breakpoints), tuple(values), total_mass)


@dataclass(frozen=True)
class CommonPartition:
    """
    Explicit overlay of two functions on cells of a nonatomic space.

    Each cell carries (f_value, g_value, mass). Values are signed so that
    cancellation inside f + g can be described; the derived simple functions
    hold absolute values.
    """

    cells: Tuple[Tuple[float, float, float], ...]
    total_mass: float

    def __post_init__(self):
        cells = tuple((float(a), float(b), float(m)) for a, b, m in self.cells)
        object.__setattr__(self, 'cells', cells)
        for _, _, m in cells:
            if not m > 0:
                raise PartitionMismatch("cell masses must be > 0")
        if math.fsum(m for _, _, m in cells) > self.total_mass * (1 + TOL_EQ):
            raise SupportOverflow("cells exceed the total mass")

    def _simple(self, pick) -> SimpleFunction:
        return SimpleFunction(
            tuple((abs(pick(a, b)), m) for a, b, m in self.cells if pick(a, b) != 0),
            self.total_mass
        )

    def f(self) -> SimpleFunction:
        return self._simple(lambda a, b: a)

    def g(self) -> SimpleFunction:
        return self._simple(lambda a, b: b)

    def sum(self) -> SimpleFunction:
        return self._simple(lambda a, b: a + b)

    @classmethod
    def disjoint(cls, f: SimpleFunction, g: SimpleFunction) -> 'CommonPartition':
        """f and g on disjoint supports"""
        cells = [(v, 0.0, m) for v, m in f.pieces] + [(0.0, v, m) for v, m in g.pieces]
        return cls(tuple(cells), f.total_mass)


def _same_rearrangement(a: SimpleFunction, b: SimpleFunction) -> bool:
    ra, rb = rearrangement(a), rearrangement(b)
    if len(ra.values) != len(rb.values):
        return False
    return all(
        abs(x - y) <= TOL_EQ * max(1.0, abs(x)) and abs(s - t) <= TOL_EQ * max(1.0, abs(s))
        for x, y, s, t in zip(ra.values, rb.values, ra.breakpoints, rb.breakpoints)
    )


def subadditivity_check(
    f: SimpleFunction,
    g: SimpleFunction,
    s: float,
    t: float,
    partition: CommonPartition
) -> bool:
    """
    Check (f + g)*(s + t) <= f*(s) + g*(t) with f + g formed on `partition`.

    The partition's marginals must be equimeasurable with f and g.
    """
    if not (s > 0 and t > 0):
        raise PreconditionError("s and t must be > 0")
    if not (_same_rearrangement(partition.f(), f) and _same_rearrangement(partition.g(), g)):
        raise PartitionMismatch("partition marginals do not match f and g")

    lhs = rearrangement(partition.sum())(s + t)
    rhs = rearrangement(f)(s) + rearrangement(g)(t)
    return lhs <= rhs + TOL_EQ
