import math
from fractions import Fraction

import pytest

from ergodic.averages import (
    FULL,
    CompensatedSum,
    birkhoff_profile,
    cycle_means,
    exceedance_set,
    l1_distance,
    limit_averages,
    maximal_profile,
    space_average,
    truncate_observable,
    weyl_bound,
)
from ergodic.core import InvalidParameter, PointOutOfRange, TruncationOnSampledSystem
from ergodic.systems import (
    GOLDEN,
    InvariantFunction,
    Observable,
    SampledSystem,
    make_finite_system,
    random_finite_system,
)


def test_birkhoff_three_cycle(three_cycle, f3):
    profile = birkhoff_profile(three_cycle, f3, 0, 3)
    assert profile.values == (Fraction(3), Fraction(1), Fraction(1, 3))
    assert profile.telescoping_violations() == []


def test_birkhoff_constant_observable(three_cycle):
    f = Observable.table(["2/5"] * 3)
    for x in range(3):
        profile = birkhoff_profile(three_cycle, f, x, 10)
        assert set(profile.values) == {Fraction(2, 5)}


def test_birkhoff_rejects_bad_input(three_cycle, f3):
    with pytest.raises(PointOutOfRange):
        birkhoff_profile(three_cycle, f3, 5, 3)
    with pytest.raises(InvalidParameter):
        birkhoff_profile(three_cycle, f3, 0, 0)


def test_golden_rotation_weyl_bound():
    system = SampledSystem.rotation(GOLDEN)
    profile = birkhoff_profile(system, Observable.cosine(), 0.0, 10000)
    for k, value in enumerate(profile.values, start=1):
        assert abs(value) <= weyl_bound(GOLDEN, k) + 1e-12
    assert profile.telescoping_violations() == []


def test_telescoping_catches_tampering(three_cycle, f3):
    profile = birkhoff_profile(three_cycle, f3, 0, 3)
    tampered = type(profile)(
        profile.x, profile.K, (Fraction(3), Fraction(2), Fraction(1, 3)), profile.terms
    )
    assert tampered.telescoping_violations() == [2, 3]


def test_maximal_profile(three_cycle, f3):
    assert maximal_profile(three_cycle, f3, 3).values == (3, Fraction(1, 3), 1)
    assert maximal_profile(three_cycle, f3, 1).values == f3.values
    assert maximal_profile(three_cycle, f3, FULL).values == maximal_profile(
        three_cycle, f3, 30
    ).values
    with pytest.raises(InvalidParameter):
        maximal_profile(three_cycle, f3, 0)


def test_maximal_profile_grows_with_horizon():
    for seed in range(50):
        system, f, _ = random_finite_system(seed, 8)
        previous = maximal_profile(system, f, 1).values
        for N in range(2, system.n + 2):
            current = maximal_profile(system, f, N).values
            assert all(a <= b for a, b in zip(previous, current))
            previous = current


def test_exceedance_sets(three_cycle, f3, zero_lambda):
    e1 = exceedance_set(three_cycle, f3, 1, zero_lambda)
    e2 = exceedance_set(three_cycle, f3, 2, zero_lambda)
    e3 = exceedance_set(three_cycle, f3, 3, zero_lambda)
    assert e1.points == [0] and e1.mass == Fraction(1, 3)
    assert e2.points == [0, 2] and e2.mass == Fraction(2, 3)
    assert e3.points == [0, 1, 2] and e3.mass == 1
    assert e1.issubset(e2) and e2.issubset(e3)
    assert not e3.issubset(e1)
    assert e1.symmetric_difference_mass(e3, three_cycle) == Fraction(2, 3)


def test_exceedance_is_strict(three_cycle, f3):
    lam = InvariantFunction.uniform(3, three_cycle)
    assert exceedance_set(three_cycle, f3, 3, lam).points == []


def test_truncation(two_cycle, three_cycle, f3):
    f = Observable.table([5, -1])
    phi = truncate_observable(f, 1)
    assert phi.values == (0, -1)
    assert l1_distance(two_cycle, phi, f) == Fraction(5, 2)
    assert truncate_observable(f3, 1).values == (0, -1, -1)
    assert truncate_observable(f3, 3).values == f3.values


def test_truncation_is_dominated():
    _, f, _ = random_finite_system(7, 12)
    for s in range(1, 5):
        phi = truncate_observable(f, s)
        assert all(abs(a) <= abs(b) for a, b in zip(phi.values, f.values))
        assert all(abs(a) <= s for a in phi.values)


def test_exceedance_indicator_dominates(three_cycle, f3):
    cases = [random_finite_system(seed, 9) for seed in range(1, 31)]
    cases.append((three_cycle, f3, InvariantFunction.uniform(-1, three_cycle)))
    equal_values = 0
    for system, f, lam in cases:
        for N in range(1, system.n + 1):
            members = exceedance_set(system, f, N, lam).members
            for x in range(system.n):
                raw = f.values[x] - lam.at(x)
                g = raw if members[x] else 0
                assert g >= raw
                assert (g == raw) == (members[x] or raw == 0)
                equal_values += raw == 0 and not members[x]
    assert equal_values > 0


def test_truncation_errors():
    with pytest.raises(TruncationOnSampledSystem):
        truncate_observable(Observable.cosine(), 1)
    with pytest.raises(InvalidParameter):
        truncate_observable(Observable.table([1]), 0)


def test_limit_averages(three_cycle, f3, mixed_system):
    report = limit_averages(three_cycle, f3)
    assert report.upper == (Fraction(1, 3),) * 3
    assert report.ok

    system, f = mixed_system
    assert cycle_means(system, f) == (-2, Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))
    report = limit_averages(system, f)
    assert report.integral_f == Fraction(-1, 4)
    assert report.integral_upper == report.integral_lower == Fraction(-1, 4)


def test_limit_matches_long_average():
    system, f, _ = random_finite_system(3, 10)
    report = limit_averages(system, f)
    for x in range(system.n):
        p = system.period(x)
        assert birkhoff_profile(system, f, x, 7 * p).values[-1] == report.upper[x]


def test_compensated_sum():
    assert CompensatedSum([1e16, 1.0, -1e16]).value == 1.0
    total = CompensatedSum([0.1] * 10)
    assert math.isclose(float(total), 1.0, abs_tol=1e-15)


def test_space_average():
    assert space_average(SampledSystem.bernoulli_shift(0.3), Observable.first_symbol()) == 0.3
    assert space_average(
        SampledSystem.bernoulli_shift(0.3), Observable.first_symbol(0)
    ) == pytest.approx(0.7)
    markov = SampledSystem.markov_shift([[0.9, 0.1], [0.5, 0.5]])
    assert space_average(markov, Observable.first_symbol()) == pytest.approx(1 / 6)
    rotation = SampledSystem.rotation(GOLDEN)
    assert space_average(rotation, Observable.coordinate()) == 0.5
    assert space_average(rotation, Observable.cosine()) == 0.0
    step = Observable.step([0.0, 0.25], [1.0, 3.0])
    assert space_average(rotation, step) == pytest.approx(2.5)


def test_identity_system_averages():
    system = make_finite_system([0, 1], ["1/2", "1/2"])
    f = Observable.table([4, "-1/2"])
    assert maximal_profile(system, f, FULL).values == f.values
    assert limit_averages(system, f).upper == f.values
