"""
Measure-preserving systems in two regimes.

Finite systems are weighted permutations evaluated in exact rational
arithmetic. Sampled systems (rotations, Bernoulli and Markov shifts) are
evaluated numerically along generated orbits.
"""
import logging
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ergodic.core import (
    CycleCountMismatch,
    InvalidLambda,
    InvalidParameter,
    InvalidSampledSystem,
    NotAPermutation,
    PointOutOfRange,
    UnknownObservableForSystem,
    WeightsDontSumToOne,
    WeightsNotPositive,
)

logger = logging.getLogger(__name__)

RationalLike = Union[int, str, Fraction]

GOLDEN = (math.sqrt(5) - 1) / 2
MARKOV_TOLERANCE = 1e-12
# Rotations within this distance of a fraction with denominator <= 1000 count as rational
RATIONAL_TOLERANCE = 1e-9
# Bits of the symbol stream folded into one doubling-map coordinate
COORDINATE_BITS = 53


def to_rational(value: RationalLike) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidParameter(f"exact value expected, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InvalidParameter(f"not a rational number: {value!r}")


def cycle_decomposition(mapping: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Cycles listed by smallest point, each starting there and following the map."""
    cycles = []
    visited = [False] * len(mapping)
    for start in range(len(mapping)):
        if visited[start]:
            continue
        cycle = []
        x = start
        while not visited[x]:
            visited[x] = True
            cycle.append(x)
            x = mapping[x]
        cycles.append(tuple(cycle))
    return tuple(cycles)


@dataclass(frozen=True)
class FiniteSystem:
    mapping: tuple[int, ...]
    weights: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.mapping)

    @cached_property
    def cycles(self) -> tuple[tuple[int, ...], ...]:
        return cycle_decomposition(self.mapping)

    @cached_property
    def cycle_index(self) -> tuple[int, ...]:
        index = [0] * self.n
        for i, cycle in enumerate(self.cycles):
            for x in cycle:
                index[x] = i
        return tuple(index)

    @property
    def max_cycle_length(self) -> int:
        return max(len(c) for c in self.cycles)

    def period(self, x: int) -> int:
        return len(self.cycles[self.cycle_index[x]])

    def cycle_weights(self) -> tuple[Fraction, ...]:
        return tuple(self.weights[c[0]] for c in self.cycles)

    def check_point(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise PointOutOfRange(f"point {x} is outside 0..{self.n - 1}")

    def orbit(self, x: int, m: int) -> list[int]:
        self.check_point(x)
        points = []
        for _ in range(m):
            points.append(x)
            x = self.mapping[x]
        return points

    def integral(self, values: Sequence[Fraction]) -> Fraction:
        return sum((w * v for w, v in zip(self.weights, values)), Fraction(0))

    def mass(self, members: Sequence[bool]) -> Fraction:
        return sum((w for w, m in zip(self.weights, members) if m), Fraction(0))


@dataclass(frozen=True)
class PreimageViolation:
    point: int
    preimage_mass: Fraction
    point_mass: Fraction


@dataclass(frozen=True)
class MeasureReport:
    violations: tuple[PreimageViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def make_finite_system(
    mapping: Sequence[int], cycle_weights: Sequence[RationalLike]
) -> FiniteSystem:
    points = tuple(int(i) for i in mapping)
    n = len(points)
    if n == 0 or sorted(points) != list(range(n)):
        raise NotAPermutation(f"map {list(points)} is not a permutation of 0..{n - 1}")

    cycles = cycle_decomposition(points)
    per_cycle = [to_rational(w) for w in cycle_weights]
    if len(per_cycle) != len(cycles):
        raise CycleCountMismatch(
            f"{len(per_cycle)} cycle weight(s) given for {len(cycles)} cycle(s)"
        )
    if any(w <= 0 for w in per_cycle):
        raise WeightsNotPositive(f"cycle weights must be positive: {per_cycle}")
    total = sum((len(c) * w for c, w in zip(cycles, per_cycle)), Fraction(0))
    if total != 1:
        raise WeightsDontSumToOne(f"point masses sum to {total}, not 1")

    weights: list[Fraction] = [Fraction(0)] * n
    for cycle, w in zip(cycles, per_cycle):
        for x in cycle:
            weights[x] = w
    return FiniteSystem(points, tuple(weights))


def validate_measure_preserving(system: FiniteSystem) -> MeasureReport:
    preimage = [Fraction(0)] * system.n
    for x, target in enumerate(system.mapping):
        preimage[target] += system.weights[x]
    return MeasureReport(
        tuple(
            PreimageViolation(j, preimage[j], system.weights[j])
            for j in range(system.n)
            if preimage[j] != system.weights[j]
        )
    )


class ObservableKind(Enum):
    TABLE = "table"
    COORDINATE = "coordinate"
    COSINE = "cosine"
    FIRST_SYMBOL = "first_symbol"
    STEP = "step"


@dataclass(frozen=True)
class Observable:
    kind: ObservableKind
    values: tuple[Fraction, ...] = ()
    symbol: int = 1
    breakpoints: tuple[float, ...] = ()
    heights: tuple[float, ...] = ()

    @classmethod
    def table(cls, values: Iterable[RationalLike]) -> "Observable":
        return cls(ObservableKind.TABLE, values=tuple(to_rational(v) for v in values))

    @classmethod
    def coordinate(cls) -> "Observable":
        return cls(ObservableKind.COORDINATE)

    @classmethod
    def cosine(cls) -> "Observable":
        return cls(ObservableKind.COSINE)

    @classmethod
    def first_symbol(cls, symbol: int = 1) -> "Observable":
        return cls(ObservableKind.FIRST_SYMBOL, symbol=int(symbol))

    @classmethod
    def step(cls, breakpoints: Sequence[float], heights: Sequence[float]) -> "Observable":
        """Height ``heights[i]`` on ``[breakpoints[i], breakpoints[i + 1])``, the last
        interval closing at 1."""
        breakpoints = tuple(float(b) for b in breakpoints)
        heights = tuple(float(h) for h in heights)
        if (
            not breakpoints
            or len(breakpoints) != len(heights)
            or breakpoints[0] != 0.0
            or breakpoints[-1] >= 1.0
            or any(a >= b for a, b in zip(breakpoints, breakpoints[1:]))
            or not all(math.isfinite(h) for h in heights)
        ):
            raise InvalidParameter(
                f"bad step function: breakpoints={breakpoints}, heights={heights}"
            )
        return cls(ObservableKind.STEP, breakpoints=breakpoints, heights=heights)

    @property
    def is_exact(self) -> bool:
        return self.kind is ObservableKind.TABLE

    @property
    def sup_norm(self) -> Union[Fraction, float]:
        if self.kind is ObservableKind.TABLE:
            return max((abs(v) for v in self.values), default=Fraction(0))
        if self.kind is ObservableKind.STEP:
            return max(abs(h) for h in self.heights)
        return 1.0

    def __getitem__(self, x: int) -> Fraction:
        return self.values[x]

    def _require_table(self) -> None:
        if not self.is_exact:
            raise UnknownObservableForSystem(
                f"{self.kind.value} observable has no per-point table"
            )

    def negated(self) -> "Observable":
        self._require_table()
        return Observable(ObservableKind.TABLE, values=tuple(-v for v in self.values))

    def positive_part(self) -> "Observable":
        self._require_table()
        return Observable(
            ObservableKind.TABLE, values=tuple(max(v, Fraction(0)) for v in self.values)
        )

    def negative_part(self) -> "Observable":
        self._require_table()
        return Observable(
            ObservableKind.TABLE, values=tuple(max(-v, Fraction(0)) for v in self.values)
        )

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate a circle observable at points of [0, 1)."""
        if self.kind is ObservableKind.COORDINATE:
            return np.asarray(xs, dtype=float)
        if self.kind is ObservableKind.COSINE:
            return np.cos(2 * np.pi * np.asarray(xs, dtype=float))
        if self.kind is ObservableKind.STEP:
            index = np.searchsorted(self.breakpoints, xs, side="right") - 1
            return np.asarray(self.heights, dtype=float)[index]
        raise UnknownObservableForSystem(
            f"{self.kind.value} observable is not a function on the circle"
        )


@dataclass(frozen=True)
class InvariantFunction:
    per_point: tuple[Fraction, ...] = ()
    per_cycle: tuple[Fraction, ...] = ()
    constant: Optional[float] = None

    @classmethod
    def uniform(cls, value: RationalLike, system: FiniteSystem) -> "InvariantFunction":
        return make_invariant_function(system, [value] * len(system.cycles))

    @classmethod
    def sampled(cls, value: float) -> "InvariantFunction":
        return cls(constant=float(value))

    def at(self, x: Optional[int] = None) -> Union[Fraction, float]:
        if self.constant is not None:
            return self.constant
        return self.per_point[x]

    @property
    def plus(self) -> tuple[Fraction, ...]:
        return tuple(max(v, Fraction(0)) for v in self.per_point)

    def is_invariant_for(self, system: FiniteSystem) -> bool:
        if len(self.per_point) != system.n:
            return False
        return all(
            self.per_point[system.mapping[x]] == self.per_point[x]
            for x in range(system.n)
        )

    def describe(self) -> str:
        if self.constant is not None:
            return repr(self.constant)
        if self.per_cycle and len(set(self.per_cycle)) == 1:
            return str(self.per_cycle[0])
        return "cycles:" + ",".join(str(v) for v in self.per_cycle)


def make_invariant_function(
    system: FiniteSystem, per_cycle: Sequence[RationalLike]
) -> InvariantFunction:
    values = tuple(to_rational(v) for v in per_cycle)
    if len(values) != len(system.cycles):
        raise CycleCountMismatch(
            f"{len(values)} value(s) given for {len(system.cycles)} cycle(s)"
        )
    lam = InvariantFunction(
        per_point=tuple(values[i] for i in system.cycle_index), per_cycle=values
    )
    if not lam.is_invariant_for(system):
        raise InvalidLambda(f"lambda {lam.describe()} is not invariant")
    return lam


def random_finite_system(
    seed: int, n_max: int
) -> tuple[FiniteSystem, Observable, InvariantFunction]:
    if n_max < 1:
        raise InvalidParameter(f"n_max must be at least 1, got {n_max}")
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    mapping = list(range(n))
    rng.shuffle(mapping)
    cycles = cycle_decomposition(mapping)

    raw = [rng.randint(1, 20) for _ in cycles]
    total = sum(len(c) * a for c, a in zip(cycles, raw))
    system = make_finite_system(mapping, [Fraction(a, total) for a in raw])

    f = Observable.table(
        Fraction(rng.randint(-100, 100), rng.randint(1, 100)) for _ in range(n)
    )
    lo, hi = min(f.values), max(f.values)
    grid = [lo - 1, lo, (lo + hi) / 2, hi, hi + 1]
    lam = make_invariant_function(system, [rng.choice(grid) for _ in cycles])
    return system, f, lam


class SystemKind(Enum):
    ROTATION = "rotation"
    BERNOULLI_SHIFT = "bernoulli_shift"
    MARKOV_SHIFT = "markov_shift"


def stationary_distribution(matrix: Sequence[Sequence[float]]) -> tuple[float, ...]:
    p = np.asarray(matrix, dtype=float)
    eigenvalues, eigenvectors = np.linalg.eig(p.T)
    vector = np.real(eigenvectors[:, np.argmin(np.abs(eigenvalues - 1.0))])
    vector = vector / vector.sum()
    return tuple(float(v) for v in vector)


@dataclass(frozen=True)
class SampledSystem:
    kind: SystemKind
    alpha: float = 0.0
    p: float = 0.0
    matrix: tuple[tuple[float, ...], ...] = ()
    stationary: tuple[float, ...] = ()
    seed: int = 0

    @classmethod
    def rotation(cls, alpha: float) -> "SampledSystem":
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise InvalidSampledSystem(f"rotation angle must lie in (0, 1), got {alpha}")
        system = cls(SystemKind.ROTATION, alpha=alpha)
        if not system.equidistributing:
            logger.warning(
                f"Rotation by {alpha} looks rational; orbits will not equidistribute"
            )
        return system

    @classmethod
    def bernoulli_shift(cls, p: float, seed: int = 0) -> "SampledSystem":
        p = float(p)
        if not 0.0 < p < 1.0:
            raise InvalidSampledSystem(f"Bernoulli parameter must lie in (0, 1), got {p}")
        return cls(SystemKind.BERNOULLI_SHIFT, p=p, seed=int(seed))

    @classmethod
    def doubling_map(cls, seed: int = 0) -> "SampledSystem":
        return cls.bernoulli_shift(0.5, seed)

    @classmethod
    def markov_shift(
        cls,
        matrix: Sequence[Sequence[float]],
        stationary: Optional[Sequence[float]] = None,
        seed: int = 0,
    ) -> "SampledSystem":
        p = np.asarray(matrix, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
            raise InvalidSampledSystem(f"transition matrix must be square, got {p.shape}")
        if (p < 0).any() or np.abs(p.sum(axis=1) - 1.0).max() > MARKOV_TOLERANCE:
            raise InvalidSampledSystem("transition matrix rows must be stochastic")
        if stationary is None:
            stationary = stationary_distribution(p)
        pi = np.asarray(stationary, dtype=float)
        if (
            pi.shape != (p.shape[0],)
            or (pi < -MARKOV_TOLERANCE).any()
            or abs(pi.sum() - 1.0) > MARKOV_TOLERANCE
            or np.abs(pi @ p - pi).max() > MARKOV_TOLERANCE
        ):
            raise InvalidSampledSystem(f"{list(pi)} is not stationary for the matrix")
        return cls(
            SystemKind.MARKOV_SHIFT,
            matrix=tuple(tuple(float(v) for v in row) for row in p),
            stationary=tuple(float(v) for v in pi),
            seed=int(seed),
        )

    @property
    def equidistributing(self) -> bool:
        if self.kind is not SystemKind.ROTATION:
            return False
        approx = Fraction(self.alpha).limit_denominator(1000)
        return abs(float(approx) - self.alpha) > RATIONAL_TOLERANCE

    def supports(self, f: Observable) -> bool:
        if self.kind is SystemKind.ROTATION:
            return f.kind in (
                ObservableKind.COORDINATE,
                ObservableKind.COSINE,
                ObservableKind.STEP,
            )
        if f.kind is ObservableKind.FIRST_SYMBOL:
            states = 2 if self.kind is SystemKind.BERNOULLI_SHIFT else len(self.matrix)
            return 0 <= f.symbol < states
        # The doubling map is the Bernoulli(1/2) shift read as binary digits
        return self.kind is SystemKind.BERNOULLI_SHIFT and self.p == 0.5 and f.kind in (
            ObservableKind.COORDINATE,
            ObservableKind.COSINE,
            ObservableKind.STEP,
        )


@dataclass(frozen=True)
class OrbitTrace:
    x0: Union[int, float, str]
    m: int
    f_values: Sequence
    lambda_value: Optional[Union[Fraction, float]] = None


def _symbol_stream(system: SampledSystem, seed: int, length: int) -> np.ndarray:
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    if system.kind is SystemKind.BERNOULLI_SHIFT:
        return (rng.random(length) < system.p).astype(np.int64)

    cumulative = [list(np.cumsum(row)) for row in system.matrix]
    states = np.empty(length, dtype=np.int64)
    state = int(rng.choice(len(system.stationary), p=system.stationary))
    uniforms = rng.random(length)
    for k in range(length):
        states[k] = state
        row = cumulative[state]
        state = min(bisect_right(row, uniforms[k]), len(row) - 1)
    return states


def sample_orbit(
    system: Union[FiniteSystem, SampledSystem],
    m: int,
    f: Observable,
    x0: Optional[Union[int, float]] = None,
    lam: Optional[InvariantFunction] = None,
) -> OrbitTrace:
    if m < 1:
        raise InvalidParameter(f"orbit length must be at least 1, got {m}")

    if isinstance(system, FiniteSystem):
        if x0 is None:
            x = 0
        elif isinstance(x0, int) and not isinstance(x0, bool):
            x = x0
        else:
            raise PointOutOfRange(f"start point must be a point index, got {x0!r}")
        system.check_point(x)
        if not f.is_exact or len(f.values) != system.n:
            raise UnknownObservableForSystem(
                f"finite system on {system.n} points needs a table of {system.n} values"
            )
        values = tuple(f.values[y] for y in system.orbit(x, m))
        return OrbitTrace(x, m, values, lam.at(x) if lam is not None else None)

    if not system.supports(f):
        raise UnknownObservableForSystem(
            f"{f.kind.value} observable is not defined on {system.kind.value}"
        )
    lambda_value = lam.at() if lam is not None else None

    if system.kind is SystemKind.ROTATION:
        start = float(x0 or 0.0) % 1.0
        # Closed form of x_{k+1} = frac(x_k + alpha)
        xs = np.mod(start + system.alpha * np.arange(m), 1.0)
        values = f.evaluate(xs)
        descriptor: Union[float, str] = start
    else:
        seed = system.seed if x0 is None else int(x0)
        descriptor = f"seed={seed}"
        if f.kind is ObservableKind.FIRST_SYMBOL:
            stream = _symbol_stream(system, seed, m)
            values = (stream == f.symbol).astype(float)
        else:
            bits = _symbol_stream(system, seed, m + COORDINATE_BITS - 1)
            windows = np.lib.stride_tricks.sliding_window_view(bits, COORDINATE_BITS)
            scale = 2.0 ** -np.arange(1, COORDINATE_BITS + 1)
            values = f.evaluate(windows[:m] @ scale)

    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return OrbitTrace(descriptor, m, values, lambda_value)
