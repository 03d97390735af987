import math
from fractions import Fraction

import numpy as np
import pytest

from ergodic.core import (
    CycleCountMismatch,
    InvalidSampledSystem,
    NotAPermutation,
    PointOutOfRange,
    UnknownObservableForSystem,
    WeightsDontSumToOne,
    WeightsNotPositive,
)
from ergodic.systems import (
    GOLDEN,
    FiniteSystem,
    Observable,
    SampledSystem,
    make_finite_system,
    make_invariant_function,
    random_finite_system,
    sample_orbit,
    validate_measure_preserving,
)


def test_identity_system():
    system = make_finite_system([0], [1])
    assert system.weights == (Fraction(1),)
    assert system.cycles == ((0,),)


def test_three_cycle(three_cycle):
    assert three_cycle.weights == (Fraction(1, 3),) * 3
    assert three_cycle.cycles == ((0, 1, 2),)
    assert three_cycle.period(2) == 3


def test_cycles_listed_by_smallest_point():
    system = make_finite_system([3, 2, 1, 0], ["1/4", "1/4"])
    assert system.cycles == ((0, 3), (1, 2))
    assert system.cycle_index == (0, 1, 1, 0)


@pytest.mark.parametrize("mapping", [[0, 0], [0, 2], [], [1, 1, 1]])
def test_rejects_non_bijections(mapping):
    with pytest.raises(NotAPermutation):
        make_finite_system(mapping, ["1"])


def test_rejects_bad_weights():
    with pytest.raises(WeightsNotPositive):
        make_finite_system([1, 0, 2], ["1/2", "0"])
    with pytest.raises(WeightsDontSumToOne):
        make_finite_system([1, 0], ["1/3"])
    with pytest.raises(CycleCountMismatch):
        make_finite_system([1, 0, 2], ["1/3"])


def test_measure_preserving_reports(three_cycle):
    assert validate_measure_preserving(three_cycle).ok
    identity = make_finite_system([0, 1, 2], ["1/2", "1/4", "1/4"])
    assert validate_measure_preserving(identity).ok


def test_unequal_weights_on_a_cycle_are_flagged():
    system = FiniteSystem((1, 2, 0), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    report = validate_measure_preserving(system)
    assert not report.ok
    # Point 2 has preimage 1 with the same mass 1/4; points 0 and 1 do not match
    assert [v.point for v in report.violations] == [0, 1]
    assert report.violations[0].preimage_mass == Fraction(1, 4)
    assert report.violations[0].point_mass == Fraction(1, 2)


def test_invariant_functions(three_cycle):
    lam = make_invariant_function(three_cycle, [0])
    assert lam.per_point == (0, 0, 0)

    system = make_finite_system([1, 0, 2], ["1/4", "1/2"])
    lam = make_invariant_function(system, ["1/2", -3])
    assert lam.per_point == (Fraction(1, 2), Fraction(1, 2), Fraction(-3))
    assert lam.is_invariant_for(system)
    assert all(lam.at(system.mapping[x]) == lam.at(x) for x in range(system.n))

    with pytest.raises(CycleCountMismatch):
        make_invariant_function(system, [0])


def test_random_system_is_deterministic():
    assert random_finite_system(1, 8) == random_finite_system(1, 8)


def test_random_system_single_point():
    system, f, lam = random_finite_system(2, 1)
    assert system.mapping == (0,)
    assert system.weights == (Fraction(1),)
    assert len(f.values) == 1


def test_random_systems_are_measure_preserving():
    for seed in range(1000):
        system, f, lam = random_finite_system(seed, 12)
        assert validate_measure_preserving(system).ok
        assert lam.is_invariant_for(system)
        assert all(
            abs(v.numerator) <= 100 and v.denominator <= 100 for v in f.values
        )


def test_finite_orbit_is_periodic():
    system, f, lam = random_finite_system(11, 12)
    for x in range(system.n):
        p = system.period(x)
        trace = sample_orbit(system, 3 * p, f, x0=x, lam=lam)
        assert trace.f_values[:p] * 3 == trace.f_values
        lambdas = [lam.at(y) for y in system.orbit(x, 3 * p)]
        assert max(lambdas) - min(lambdas) == 0
        assert system.orbit(x, p + 1)[-1] == x


def test_finite_orbit_rejects_bad_point(three_cycle, f3):
    with pytest.raises(PointOutOfRange):
        sample_orbit(three_cycle, 4, f3, x0=3)


@pytest.mark.parametrize("x0", [1.7, 1.0, "1", True])
def test_finite_orbit_rejects_non_index_start(three_cycle, f3, x0):
    with pytest.raises(PointOutOfRange):
        sample_orbit(three_cycle, 4, f3, x0=x0)


def test_rational_rotation_orbit():
    trace = sample_orbit(SampledSystem.rotation(0.25), 4, Observable.coordinate(), x0=0)
    assert list(trace.f_values) == [0.0, 0.25, 0.5, 0.75]


def test_golden_rotation_cosine():
    trace = sample_orbit(SampledSystem.rotation(GOLDEN), 3, Observable.cosine(), x0=0)
    expected = [1.0, math.cos(2 * math.pi * GOLDEN), math.cos(4 * math.pi * GOLDEN)]
    assert np.allclose(trace.f_values, expected, rtol=0, atol=1e-12)


def test_rotation_equidistribution_flag():
    assert SampledSystem.rotation(GOLDEN).equidistributing
    assert not SampledSystem.rotation(0.25).equidistributing


def test_bernoulli_orbit_is_reproducible():
    system = SampledSystem.bernoulli_shift(0.3, seed=42)
    first = sample_orbit(system, 16, Observable.first_symbol())
    second = sample_orbit(system, 16, Observable.first_symbol())
    assert list(first.f_values) == list(second.f_values)
    assert set(first.f_values) <= {0.0, 1.0}
    assert first.x0 == "seed=42"


def test_doubling_map_coordinates():
    system = SampledSystem.doubling_map(seed=5)
    xs = np.asarray(sample_orbit(system, 200, Observable.coordinate()).f_values)
    assert ((xs >= 0) & (xs < 1)).all()
    # x_{k+1} = 2 x_k mod 1 up to the one bit shifted in at the far end
    assert np.abs(xs[1:] - np.mod(2 * xs[:-1], 1.0)).max() <= 2.0**-53


def test_markov_shift_stationary_vector():
    system = SampledSystem.markov_shift([[0.9, 0.1], [0.5, 0.5]], seed=3)
    assert system.stationary == pytest.approx((5 / 6, 1 / 6), abs=1e-12)
    trace = sample_orbit(system, 100, Observable.first_symbol(0))
    assert set(trace.f_values) <= {0.0, 1.0}


def test_invalid_sampled_systems():
    with pytest.raises(InvalidSampledSystem):
        SampledSystem.rotation(1.5)
    with pytest.raises(InvalidSampledSystem):
        SampledSystem.bernoulli_shift(0.0)
    with pytest.raises(InvalidSampledSystem):
        SampledSystem.markov_shift([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(InvalidSampledSystem):
        SampledSystem.markov_shift([[0.9, 0.1], [0.5, 0.5]], stationary=[0.5, 0.5])


def test_unknown_observable_for_system():
    with pytest.raises(UnknownObservableForSystem):
        sample_orbit(SampledSystem.rotation(GOLDEN), 4, Observable.first_symbol())
    with pytest.raises(UnknownObservableForSystem):
        sample_orbit(SampledSystem.bernoulli_shift(0.3), 4, Observable.coordinate())
