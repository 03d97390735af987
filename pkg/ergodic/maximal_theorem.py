"""
Exact checks of the maximal inequality on finite systems.

For an invariant lambda and every horizon N the integral of f - lambda over
E_N = {f*_N > lambda} is nonnegative. The checks here evaluate that integral
in rational arithmetic, sweep it over horizons and truncation levels, and run
the lambda constructions that turn it into the pointwise ergodic theorem.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from ergodic.averages import (
    FULL,
    ExceedanceSet,
    Horizon,
    MaximalProfile,
    cycle_means,
    exceedance_set,
    l1_distance,
    limit_averages,
    maximal_profile,
    truncate_observable,
)
from ergodic.core import InvalidLambda, InvalidParameter
from ergodic.systems import (
    FiniteSystem,
    InvariantFunction,
    Observable,
    make_invariant_function,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MaximalVerdict:
    N: Union[int, Horizon]
    lambda_descriptor: str
    integral_value: Fraction
    holds: bool
    mass: Fraction
    members: tuple[bool, ...]

    def same_outcome(self, other: "MaximalVerdict") -> bool:
        return (
            self.integral_value == other.integral_value
            and self.mass == other.mass
            and self.members == other.members
        )


def maximal_integral(
    system: FiniteSystem,
    f: Observable,
    N: Union[int, Horizon],
    lam: InvariantFunction,
    profile: Optional[MaximalProfile] = None,
) -> MaximalVerdict:
    if not lam.is_invariant_for(system):
        raise InvalidLambda(f"lambda {lam.describe()} is not T-invariant")
    exceed = exceedance_set(system, f, N, lam, profile)
    integral = sum(
        (
            system.weights[x] * (f.values[x] - lam.at(x))
            for x in range(system.n)
            if exceed.members[x]
        ),
        Fraction(0),
    )
    verdict = MaximalVerdict(
        N, lam.describe(), integral, integral >= 0, exceed.mass, exceed.members
    )
    if not verdict.holds:
        logger.error(
            f"Maximal inequality FAILED on validated input: N={N},"
            f" lambda={verdict.lambda_descriptor}, integral={integral},"
            f" map={list(system.mapping)}, f={[str(v) for v in f.values]}"
        )
    return verdict


@dataclass(frozen=True)
class TheoremSweep:
    verdicts: tuple[MaximalVerdict, ...]
    stabilized: MaximalVerdict
    nesting_violations: tuple[int, ...]
    stabilization_ok: bool

    @property
    def ok(self) -> bool:
        return (
            all(v.holds for v in self.verdicts)
            and self.stabilized.holds
            and not self.nesting_violations
            and self.stabilization_ok
        )


def verify_maximal_theorem(
    system: FiniteSystem,
    f: Observable,
    lam: InvariantFunction,
    N_range: Iterable[int],
) -> TheoremSweep:
    horizons = sorted(set(N_range))
    if not horizons:
        raise InvalidParameter("N_range must not be empty")

    verdicts = [maximal_integral(system, f, N, lam) for N in horizons]
    stabilized = maximal_integral(system, f, FULL, lam)

    nesting = []
    for before, after in zip(verdicts, verdicts[1:]):
        if not all(b or not a for a, b in zip(before.members, after.members)):
            nesting.append(before.N)

    settled = [v for v in verdicts if v.N >= system.max_cycle_length]
    stabilization_ok = all(v.same_outcome(stabilized) for v in settled)
    return TheoremSweep(tuple(verdicts), stabilized, tuple(nesting), stabilization_ok)


@dataclass(frozen=True)
class TruncationStep:
    s: int
    integral_value: Fraction
    symmetric_difference_mass: Fraction
    l1_distance: Fraction


@dataclass(frozen=True)
class TruncationReport:
    N: int
    target: Fraction
    steps: tuple[TruncationStep, ...]

    @property
    def integrals_nonnegative(self) -> bool:
        return all(step.integral_value >= 0 for step in self.steps)

    @property
    def reaches_target(self) -> bool:
        last = self.steps[-1]
        return last.integral_value == self.target and last.symmetric_difference_mass == 0

    @property
    def l1_nonincreasing(self) -> bool:
        distances = [step.l1_distance for step in self.steps]
        return all(a >= b for a, b in zip(distances, distances[1:])) and distances[-1] == 0

    @property
    def monotone(self) -> bool:
        # Reported only: the mass can grow before it drops to 0
        masses = [step.symmetric_difference_mass for step in self.steps]
        return all(a >= b for a, b in zip(masses, masses[1:]))

    @property
    def ok(self) -> bool:
        return self.integrals_nonnegative and self.reaches_target and self.l1_nonincreasing


def verify_truncation_extension(
    system: FiniteSystem, f: Observable, lam: InvariantFunction, N: int
) -> TruncationReport:
    target = maximal_integral(system, f, N, lam)
    exact = exceedance_set(system, f, N, lam)
    top = max(1, math.ceil(f.sup_norm))

    steps = []
    for s in range(1, top + 1):
        phi = truncate_observable(f, s)
        verdict = maximal_integral(system, phi, N, lam)
        truncated = ExceedanceSet(N, verdict.members, verdict.mass)
        steps.append(
            TruncationStep(
                s=s,
                integral_value=verdict.integral_value,
                symmetric_difference_mass=truncated.symmetric_difference_mass(
                    exact, system
                ),
                l1_distance=l1_distance(system, phi, f),
            )
        )
    return TruncationReport(N, target.integral_value, tuple(steps))


@dataclass(frozen=True)
class LambdaStep:
    n: Fraction
    lambda_integral: Fraction
    full_space: bool
    bound_holds: bool
    theorem_holds: bool


@dataclass(frozen=True)
class LambdaChain:
    """One run of the argument "int g >= int lambda_n, increasing to int A(g)"."""

    integral_g: Fraction
    limit: Fraction
    steps: tuple[LambdaStep, ...]
    saturated_at: Optional[Fraction]
    exact_after_saturation: bool

    @property
    def nondecreasing(self) -> bool:
        integrals = [step.lambda_integral for step in self.steps]
        return all(a <= b for a, b in zip(integrals, integrals[1:]))

    @property
    def ok(self) -> bool:
        return (
            all(s.full_space and s.bound_holds and s.theorem_holds for s in self.steps)
            and self.nondecreasing
            and self.exact_after_saturation
        )


def _lambda_chain(
    system: FiniteSystem,
    g: Observable,
    offsets: Sequence[Fraction],
    cap: bool,
) -> LambdaChain:
    """Run lambda = A(g) - eps (optionally capped at n = 1/eps) for every eps."""
    means = cycle_means(system, g)
    cycle_mean = [means[c[0]] for c in system.cycles]
    top = max(cycle_mean)
    stabilized = maximal_profile(system, g, FULL)
    integral_g = system.integral(g.values)
    limit = system.integral(means)

    steps = []
    saturated_at = None
    exact = True
    for eps in offsets:
        n = 1 / eps
        capped = [min(a, n) if cap else a for a in cycle_mean]
        lam = make_invariant_function(system, [a - eps for a in capped])
        exceed = exceedance_set(system, g, FULL, lam, stabilized)
        verdict = maximal_integral(system, g, FULL, lam, stabilized)
        lambda_integral = system.integral(lam.per_point)
        steps.append(
            LambdaStep(
                n=n,
                lambda_integral=lambda_integral,
                full_space=exceed.mass == 1,
                bound_holds=integral_g >= lambda_integral,
                theorem_holds=verdict.holds,
            )
        )
        if not cap or n >= top:
            if saturated_at is None:
                saturated_at = n
            exact = exact and lambda_integral + eps == limit
    return LambdaChain(integral_g, limit, tuple(steps), saturated_at, exact)


@dataclass(frozen=True)
class CorollaryReport:
    positive_chain: LambdaChain
    mean_chain: LambdaChain
    integrable_parts: bool
    liminf_side: bool
    convergence: bool

    @property
    def ok(self) -> bool:
        return (
            self.positive_chain.ok
            and self.mean_chain.ok
            and self.integrable_parts
            and self.liminf_side
            and self.convergence
        )


def integrability_check(system: FiniteSystem, f: Observable) -> bool:
    """(A)^+ <= A(f^+) and (A)^- <= A(f^-) pointwise."""
    upper = limit_averages(system, f).upper
    plus = cycle_means(system, f.positive_part())
    minus = cycle_means(system, f.negative_part())
    zero = Fraction(0)
    return all(
        max(a, zero) <= p and max(-a, zero) <= q
        for a, p, q in zip(upper, plus, minus)
    )


def corollary_lambda_sweep(
    system: FiniteSystem, f: Observable, n_max: int
) -> CorollaryReport:
    if n_max < 1:
        raise InvalidParameter(f"n_max must be at least 1, got {n_max}")
    offsets = [Fraction(1, n) for n in range(1, n_max + 1)]

    positive_chain = _lambda_chain(system, f.positive_part(), offsets, cap=True)
    mean_chain = _lambda_chain(system, f, offsets, cap=False)

    # Applying the argument to -f bounds the liminf from below
    report = limit_averages(system, f)
    negated = limit_averages(system, f.negated())
    liminf_side = negated.upper == tuple(-a for a in report.lower) and (
        -report.integral_lower <= -report.integral_f
    )
    return CorollaryReport(
        positive_chain=positive_chain,
        mean_chain=mean_chain,
        integrable_parts=integrability_check(system, f),
        liminf_side=liminf_side,
        convergence=report.ok,
    )


def epsilon_sweep(
    system: FiniteSystem, f: Observable, epsilons: Iterable[Fraction]
) -> LambdaChain:
    offsets = sorted((Fraction(e) for e in epsilons), reverse=True)
    if not offsets or any(e <= 0 for e in offsets):
        raise InvalidParameter("epsilons must be positive and nonempty")
    return _lambda_chain(system, f, offsets, cap=False)


def negation_check(
    system: FiniteSystem, f: Observable, lam: InvariantFunction, N: int
) -> MaximalVerdict:
    """The maximal inequality for -f against -lambda."""
    negated = make_invariant_function(system, [-v for v in lam.per_cycle])
    return maximal_integral(system, f.negated(), N, negated)


def strictness_check(
    system: FiniteSystem, f: Observable, N: int, epsilon: Fraction
) -> MaximalVerdict:
    """lambda just above max f*_N leaves E_N empty and the integral 0."""
    if epsilon <= 0:
        raise InvalidParameter(f"epsilon must be positive, got {epsilon}")
    profile = maximal_profile(system, f, N)
    lam = InvariantFunction.uniform(max(profile.values) + epsilon, system)
    return maximal_integral(system, f, N, lam, profile)


def lambda_grid(system: FiniteSystem, f: Observable) -> list[InvariantFunction]:
    """Invariant functions below, across and above the range of f*_N."""
    lo, hi = min(f.values), max(f.values)
    grid = [
        InvariantFunction.uniform(value, system)
        for value in (lo - 1, lo, (lo + hi) / 2, hi, hi + 1)
    ]
    means = cycle_means(system, f)
    grid.append(make_invariant_function(system, [means[c[0]] for c in system.cycles]))
    return grid
