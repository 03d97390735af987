import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from ergodic.core import InvalidParameter, TruncationOnSampledSystem
from ergodic.systems import (
    FiniteSystem,
    InvariantFunction,
    Observable,
    ObservableKind,
    SampledSystem,
    SystemKind,
    sample_orbit,
)

Number = Union[Fraction, float]

RELATIVE_TOLERANCE = 1e-9
ABSOLUTE_TOLERANCE = 1e-12


class Horizon(Enum):
    FULL = "full"


FULL = Horizon.FULL


def close(a: Number, b: Number) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(
        float(a), float(b), rel_tol=RELATIVE_TOLERANCE, abs_tol=ABSOLUTE_TOLERANCE
    )


class CompensatedSum(object):
    """Running float sum with Neumaier compensation."""

    def __init__(self, values: Iterable[float] = ()) -> None:
        self._sum = 0.0
        self._compensation = 0.0
        self.update(values)

    def add(self, value: float) -> None:
        value = float(value)
        total = self._sum + value
        if abs(self._sum) >= abs(value):
            self._compensation += (self._sum - total) + value
        else:
            self._compensation += (value - total) + self._sum
        self._sum = total

    def update(self, values: Iterable[float]) -> "CompensatedSum":
        for value in values:
            self.add(value)
        return self

    @property
    def value(self) -> float:
        return self._sum + self._compensation

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class BirkhoffProfile:
    x: Union[int, float, str]
    K: int
    values: tuple[Number, ...]
    terms: tuple[Number, ...]

    def telescoping_violations(self) -> list[int]:
        """Horizons k where k*A_k - (k-1)*A_{k-1} differs from f(T^{k-1}x)."""
        bad = []
        previous: Number = 0
        for k, (a, term) in enumerate(zip(self.values, self.terms), start=1):
            difference = k * a - (k - 1) * previous
            if isinstance(a, Fraction):
                holds = difference == term
            else:
                # Relative to the size of the orbit sum, which k*A_k carries
                scale = max(1.0, abs(k * a), abs(term))
                holds = abs(difference - term) <= RELATIVE_TOLERANCE * scale
            if not holds:
                bad.append(k)
            previous = a
        return bad


def birkhoff_profile(
    system: Union[FiniteSystem, SampledSystem],
    f: Observable,
    x: Optional[Union[int, float]],
    K: int,
) -> BirkhoffProfile:
    if K < 1:
        raise InvalidParameter(f"horizon K must be at least 1, got {K}")
    trace = sample_orbit(system, K, f, x0=x)

    values: list[Number] = []
    if isinstance(system, FiniteSystem):
        total = Fraction(0)
        for k, term in enumerate(trace.f_values, start=1):
            total += term
            values.append(total / k)
        terms = tuple(trace.f_values)
    else:
        running = CompensatedSum()
        for k, term in enumerate(trace.f_values.tolist(), start=1):
            running.add(term)
            values.append(running.value / k)
        terms = tuple(trace.f_values.tolist())
    return BirkhoffProfile(trace.x0, K, tuple(values), terms)


def maximal_function_at(
    system: FiniteSystem, f: Observable, x: int, horizon: int
) -> Fraction:
    """max over 1 <= k <= horizon of A_k f(x)."""
    best = None
    total = Fraction(0)
    for k, y in enumerate(system.orbit(x, horizon), start=1):
        total += f.values[y]
        average = total / k
        if best is None or average > best:
            best = average
    return best


@dataclass(frozen=True)
class MaximalProfile:
    N: Union[int, Horizon]
    values: tuple[Fraction, ...]


def maximal_profile(
    system: FiniteSystem, f: Observable, N: Union[int, Horizon]
) -> MaximalProfile:
    if N is not FULL and N < 1:
        raise InvalidParameter(f"horizon N must be at least 1, got {N}")
    # On a cycle of length p the averages A_{qp+r} interpolate between A_r and
    # the cycle mean A_p, so the full supremum is attained by k <= p.
    return MaximalProfile(
        N,
        tuple(
            maximal_function_at(system, f, x, system.period(x) if N is FULL else N)
            for x in range(system.n)
        ),
    )


@dataclass(frozen=True)
class ExceedanceSet:
    N: Union[int, Horizon]
    members: tuple[bool, ...]
    mass: Fraction

    @property
    def points(self) -> list[int]:
        return [x for x, member in enumerate(self.members) if member]

    def issubset(self, other: "ExceedanceSet") -> bool:
        return all(b or not a for a, b in zip(self.members, other.members))

    def symmetric_difference_mass(
        self, other: "ExceedanceSet", system: FiniteSystem
    ) -> Fraction:
        return system.mass([a != b for a, b in zip(self.members, other.members)])


def exceedance_set(
    system: FiniteSystem,
    f: Observable,
    N: Union[int, Horizon],
    lam: InvariantFunction,
    profile: Optional[MaximalProfile] = None,
) -> ExceedanceSet:
    if profile is None:
        profile = maximal_profile(system, f, N)
    members = tuple(profile.values[x] > lam.at(x) for x in range(system.n))
    return ExceedanceSet(N, members, system.mass(members))


def truncate_observable(f: Observable, s: int) -> Observable:
    if not f.is_exact:
        raise TruncationOnSampledSystem(
            f"cannot truncate {f.kind.value} observable; tables only"
        )
    if s < 1:
        raise InvalidParameter(f"truncation level must be at least 1, got {s}")
    return Observable.table(v if abs(v) <= s else Fraction(0) for v in f.values)


def l1_distance(system: FiniteSystem, f: Observable, g: Observable) -> Fraction:
    return system.integral([abs(a - b) for a, b in zip(f.values, g.values)])


def cycle_means(system: FiniteSystem, f: Observable) -> tuple[Fraction, ...]:
    """Per-point mean of f over the point's cycle."""
    means = [
        sum((f.values[x] for x in cycle), Fraction(0)) / len(cycle)
        for cycle in system.cycles
    ]
    return tuple(means[i] for i in system.cycle_index)


@dataclass(frozen=True)
class ConvergenceReport:
    upper: tuple[Fraction, ...]
    lower: tuple[Fraction, ...]
    integral_upper: Fraction
    integral_lower: Fraction
    integral_f: Fraction

    @property
    def ok(self) -> bool:
        return (
            self.upper == self.lower
            and self.integral_upper == self.integral_f == self.integral_lower
        )


def limit_averages(system: FiniteSystem, f: Observable) -> ConvergenceReport:
    # A_{qp} equals the cycle mean for every q, and A_k tends to it, so the
    # limsup and the liminf coincide with it exactly.
    upper = cycle_means(system, f)
    lower = upper
    return ConvergenceReport(
        upper=upper,
        lower=lower,
        integral_upper=system.integral(upper),
        integral_lower=system.integral(lower),
        integral_f=system.integral(f.values),
    )


def space_average(system: SampledSystem, f: Observable) -> float:
    """Integral of f against the invariant measure of a sampled system."""
    if f.kind is ObservableKind.FIRST_SYMBOL:
        if system.kind is SystemKind.BERNOULLI_SHIFT:
            return system.p if f.symbol == 1 else 1.0 - system.p
        return system.stationary[f.symbol]
    # Lebesgue measure: rotations and the doubling map
    if f.kind is ObservableKind.COORDINATE:
        return 0.5
    if f.kind is ObservableKind.COSINE:
        return 0.0
    edges = np.append(np.asarray(f.breakpoints), 1.0)
    return float(np.dot(np.diff(edges), f.heights))


def weyl_bound(alpha: float, k: int) -> float:
    """|A_k cos(2 pi .)(0)| <= 1 / (k sin(pi alpha)) for the rotation by alpha."""
    return 1.0 / (k * math.sin(math.pi * alpha))