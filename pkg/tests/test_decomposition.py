from dataclasses import replace
from fractions import Fraction

import pytest

from ergodic.core import InternalContradiction, InvalidParameter, WindowTooShort
from ergodic.decomposition import (
    BlockChoice,
    DecompositionInput,
    build_input,
    decompose,
    integrated_bound_demo,
    verify_certificate,
)
from ergodic.systems import (
    GOLDEN,
    InvariantFunction,
    Observable,
    SampledSystem,
    random_finite_system,
)


@pytest.fixture
def window(three_cycle, f3, zero_lambda):
    return build_input(three_cycle, f3, zero_lambda, 0, 3, 7)


def test_build_input(window):
    assert window.raw == (3, -1, -1, 3, -1, -1, 3)
    assert window.membership == (True,) * 7
    assert window.g == window.raw
    assert window.f_sup == 3
    assert window.lambda_plus == 0
    assert window.exact


def test_build_input_outside_exceedance(three_cycle, f3, zero_lambda):
    data = build_input(three_cycle, f3, zero_lambda, 1, 1, 4)
    assert data.membership == (False, False, True, False)
    assert data.g == (0, 0, 3, 0)


def test_build_input_rejects_bad_windows(three_cycle, f3, zero_lambda):
    with pytest.raises(WindowTooShort):
        build_input(three_cycle, f3, zero_lambda, 0, 3, 2)
    with pytest.raises(InvalidParameter):
        build_input(three_cycle, f3, zero_lambda, 0, 0, 2)


def test_decompose_smallest(window):
    cert = decompose(window)
    assert cert.blocks == ((0, 1), (1, 3), (4, 3))
    assert cert.gaps == ()
    assert cert.tail_start == 7
    assert cert.block_sums == (3, 1, 1)
    assert cert.total_sum == 5
    assert cert.lower_bound == -9
    assert verify_certificate(cert, window).ok


def test_decompose_with_tail(three_cycle, f3, zero_lambda):
    data = build_input(three_cycle, f3, zero_lambda, 0, 3, 8)
    cert = decompose(data)
    assert cert.blocks == ((0, 1), (1, 3), (4, 3))
    assert cert.tail_start == 7
    assert cert.total_sum == 4
    assert cert.lower_bound == -9
    assert verify_certificate(cert, data).ok


def test_decompose_empty_exceedance(three_cycle, f3):
    lam = InvariantFunction.uniform(3, three_cycle)
    data = build_input(three_cycle, f3, lam, 0, 1, 3)
    cert = decompose(data)
    assert cert.blocks == ()
    assert cert.gaps == (0, 1, 2)
    assert cert.tail_start == 3
    assert cert.total_sum == 0
    assert cert.lower_bound == -6
    assert verify_certificate(cert, data).ok


def test_verify_rejects_raised_lower_bound(three_cycle, f3):
    data = build_input(three_cycle, f3, InvariantFunction.uniform(3, three_cycle), 0, 1, 3)
    cert = decompose(data)
    assert cert.total_sum == 0
    report = verify_certificate(replace(cert, lower_bound=Fraction(1)), data)
    assert not report.ok
    assert "f" in report.failed_clauses


def test_decompose_largest(window):
    cert = decompose(window, BlockChoice.LARGEST)
    assert cert.blocks == ((0, 3), (3, 3), (6, 1))
    assert cert.total_sum == 5
    assert verify_certificate(cert, window).ok


def test_tampered_total_fails(window):
    cert = replace(decompose(window), total_sum=Fraction(6))
    report = verify_certificate(cert, window)
    assert report.failed_clauses == {"f"}


def test_tampered_block_fails(window):
    cert = replace(
        decompose(window),
        blocks=((0, 1), (1, 2), (3, 1), (4, 3)),
        block_sums=(3, -2, 3, 1),
    )
    report = verify_certificate(cert, window)
    assert report.failed_clauses == {"a"}


def test_mismatched_certificate(window, three_cycle, f3, zero_lambda):
    other = build_input(three_cycle, f3, zero_lambda, 0, 3, 8)
    report = verify_certificate(decompose(other), window)
    assert report.failed_clauses == {"structure"}


def test_missing_block_is_caught(window):
    cert = replace(decompose(window), blocks=((0, 1), (4, 3)), block_sums=(3, 1))
    assert "structure" in verify_certificate(cert, window).failed_clauses


def test_internal_contradiction():
    data = DecompositionInput(
        m=2,
        N=1,
        g=(Fraction(-1), Fraction(0)),
        raw=(Fraction(-1), Fraction(-1)),
        membership=(True, False),
        f_sup=Fraction(1),
        lambda_plus=Fraction(0),
    )
    with pytest.raises(InternalContradiction):
        decompose(data)


def test_random_certificates():
    for seed in range(60):
        system, f, lam = random_finite_system(seed, 8)
        for N in range(1, system.n + 1):
            for x in range(system.n):
                for m in (N, 2 * N, 5 * N + 1):
                    data = build_input(system, f, lam, x, N, m)
                    for choice in BlockChoice:
                        cert = decompose(data, choice)
                        assert verify_certificate(cert, data).ok, (seed, N, x, m)
                        assert decompose(data, choice) == cert


def test_integrated_bound(three_cycle, f3, zero_lambda):
    report = integrated_bound_demo(three_cycle, f3, zero_lambda, 3, (30, 300, 3000))
    assert report.integral == Fraction(1, 3)
    assert report.rows[0].weighted_window_sum == 10
    assert report.rows[0].bound == Fraction(-3, 10)
    assert report.shrink_ratios == [10, 10]
    assert report.ok


def test_integrated_bound_zero_observable(three_cycle):
    f = Observable.table([0, 0, 0])
    report = integrated_bound_demo(
        three_cycle, f, InvariantFunction.uniform(0, three_cycle), 2, (4, 40)
    )
    assert report.shrink_ratios == [None]
    assert report.ok


def test_integrated_bound_schedule(three_cycle, f3, zero_lambda):
    with pytest.raises(InvalidParameter):
        integrated_bound_demo(three_cycle, f3, zero_lambda, 3, (30, 30))
    with pytest.raises(InvalidParameter):
        integrated_bound_demo(three_cycle, f3, zero_lambda, 3, ())


def test_sampled_rotation_certificate():
    system = SampledSystem.rotation(GOLDEN)
    data = build_input(
        system, Observable.cosine(), InvariantFunction.sampled(0.0), 0.0, 5, 200
    )
    assert not data.exact
    for choice in BlockChoice:
        cert = decompose(data, choice)
        assert verify_certificate(cert, data).ok
