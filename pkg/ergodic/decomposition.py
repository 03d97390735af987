"""
Orbit-window decomposition certificates.

A window of m terms g_k = (f - lambda) 1_{E_N} (T^k x) splits into blocks of at
most N terms with positive sum, zero gaps outside E_N, and a tail shorter than
N. The certificate records the split; ``verify_certificate`` rechecks it from
the input alone and shares no code with ``decompose``.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from ergodic.averages import close, exceedance_set
from ergodic.core import InternalContradiction, InvalidParameter, WindowTooShort
from ergodic.maximal_theorem import maximal_integral
from ergodic.systems import (
    FiniteSystem,
    InvariantFunction,
    Observable,
    SampledSystem,
    sample_orbit,
)

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]


@dataclass(frozen=True)
class DecompositionInput:
    m: int
    N: int
    g: tuple[Number, ...]
    raw: tuple[Number, ...]
    membership: tuple[bool, ...]
    f_sup: Number
    lambda_plus: Number

    @property
    def exact(self) -> bool:
        return isinstance(self.f_sup, Fraction)


def build_input(
    system: Union[FiniteSystem, SampledSystem],
    f: Observable,
    lam: InvariantFunction,
    x: Optional[Union[int, float]],
    N: int,
    m: int,
    exceedance=None,
) -> DecompositionInput:
    if N < 1:
        raise InvalidParameter(f"horizon N must be at least 1, got {N}")
    if m < N:
        raise WindowTooShort(f"window m={m} is shorter than horizon N={N}")

    if isinstance(system, FiniteSystem):
        trace = sample_orbit(system, m, f, x0=x, lam=lam)
        if exceedance is None:
            exceedance = exceedance_set(system, f, N, lam)
        zero = Fraction(0)
        lam_x = trace.lambda_value
        raw = tuple(v - lam_x for v in trace.f_values)
        membership = tuple(exceedance.members[y] for y in system.orbit(trace.x0, m))
        g = tuple(r if member else zero for r, member in zip(raw, membership))
        return DecompositionInput(m, N, g, raw, membership, f.sup_norm, max(lam_x, zero))

    # Sampled: extend the orbit N steps past the window to evaluate f*_N at its end
    trace = sample_orbit(system, m + N, f, x0=x, lam=lam)
    lam_x = float(trace.lambda_value)
    raw_all = (np.asarray(trace.f_values, dtype=float) - lam_x).tolist()
    # f*_N > lambda iff some partial sum of f - lambda over at most N terms is
    # positive; summed in scan order so membership agrees with decompose.
    membership = []
    for k in range(m):
        running = 0.0
        member = False
        for j in range(N):
            running += raw_all[k + j]
            if running > 0:
                member = True
                break
        membership.append(member)
    raw = tuple(raw_all[:m])
    return DecompositionInput(
        m,
        N,
        tuple(r if member else 0.0 for r, member in zip(raw, membership)),
        raw,
        tuple(membership),
        float(f.sup_norm),
        max(lam_x, 0.0),
    )


class BlockChoice(Enum):
    SMALLEST = "smallest"
    LARGEST = "largest"


@dataclass(frozen=True)
class DecompositionCertificate:
    m: int
    N: int
    blocks: tuple[tuple[int, int], ...]
    gaps: tuple[int, ...]
    tail_start: int
    block_sums: tuple[Number, ...]
    total_sum: Number
    lower_bound: Number


def decompose(
    data: DecompositionInput, choice: BlockChoice = BlockChoice.SMALLEST
) -> DecompositionCertificate:
    m, N = data.m, data.N
    zero = data.g[0] * 0
    blocks = []
    block_sums = []
    gaps = []
    tail_start = m

    k = 0
    while k < m:
        if not data.membership[k]:
            gaps.append(k)
            k += 1
            continue

        length = None
        running = zero
        for size in range(1, min(N, m - k) + 1):
            running += data.raw[k + size - 1]
            if running > 0:
                length = size
                if choice is BlockChoice.SMALLEST:
                    break

        if length is None:
            if k + N <= m:
                raise InternalContradiction(
                    f"position {k} is in E_{N} but no string of at most {N}"
                    " terms starting there has positive sum"
                )
            tail_start = k
            break

        blocks.append((k, length))
        block_sums.append(sum(data.g[k : k + length], zero))
        k += length

    total = sum(data.g, zero)
    logger.debug(
        f"Window m={m} N={N} ({choice.value}): {len(blocks)} block(s),"
        f" {len(gaps)} gap(s), tail at {tail_start}"
    )
    return DecompositionCertificate(
        m=m,
        N=N,
        blocks=tuple(blocks),
        gaps=tuple(gaps),
        tail_start=tail_start,
        block_sums=tuple(block_sums),
        total_sum=total,
        lower_bound=-N * (data.f_sup + data.lambda_plus),
    )


CLAUSES = {
    "structure": "blocks, gaps and tail tile the window",
    "a": "every block has positive raw sum",
    "b": "every block's weighted sum dominates its raw sum",
    "c": "gap positions lie outside E_N and contribute 0",
    "d": "the tail is shorter than N",
    "e": "tail weighted >= tail raw >= -(N-1)(|f| + lambda+) >= lower bound",
    "f": "total = blocks + gaps + tail >= lower bound",
}


@dataclass(frozen=True)
class ClauseFailure:
    clause: str
    detail: str


@dataclass(frozen=True)
class CertificateReport:
    failures: tuple[ClauseFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def failed_clauses(self) -> set[str]:
        return {failure.clause for failure in self.failures}


def verify_certificate(
    cert: DecompositionCertificate, data: DecompositionInput
) -> CertificateReport:
    failures: list[ClauseFailure] = []

    def fail(clause: str, detail: str) -> None:
        failures.append(ClauseFailure(clause, detail))

    def add(values: Sequence[Number]) -> Number:
        total = Fraction(0) if data.exact else 0.0
        for v in values:
            total = total + v
        return total

    m, N = data.m, data.N
    if (cert.m, cert.N) != (m, N):
        fail("structure", f"certificate is for m={cert.m}, N={cert.N}; input m={m}, N={N}")
        return CertificateReport(tuple(failures))
    if not 0 <= cert.tail_start <= m:
        fail("structure", f"tail_start {cert.tail_start} outside 0..{m}")
        return CertificateReport(tuple(failures))

    covered = [False] * m
    previous_end = 0
    for start, length in cert.blocks:
        if not 1 <= length <= N:
            fail("structure", f"block ({start},{length}) has length outside 1..{N}")
        if start < previous_end:
            fail("structure", f"block ({start},{length}) overlaps or is out of order")
        if start < 0 or start + length > cert.tail_start:
            fail("structure", f"block ({start},{length}) leaves [0, {cert.tail_start})")
            continue
        if not data.membership[start]:
            fail("structure", f"block ({start},{length}) starts outside E_N")
        for j in range(start, start + length):
            covered[j] = True
        previous_end = start + length

    uncovered = [j for j in range(cert.tail_start) if not covered[j]]
    if list(cert.gaps) != uncovered:
        fail("structure", f"gaps {list(cert.gaps)} differ from uncovered {uncovered}")
    if len(cert.block_sums) != len(cert.blocks):
        fail("structure", "one block sum per block expected")

    block_total = add([])
    for i, (start, length) in enumerate(cert.blocks):
        if start < 0 or start + length > m:
            continue
        raw_sum = add(data.raw[start : start + length])
        weighted_sum = add(data.g[start : start + length])
        block_total = block_total + weighted_sum
        if not raw_sum > 0:
            fail("a", f"block ({start},{length}) raw sum {raw_sum} is not positive")
        if not weighted_sum >= raw_sum:
            fail("b", f"block ({start},{length}) weighted {weighted_sum} < raw {raw_sum}")
        if i < len(cert.block_sums) and not close(cert.block_sums[i], weighted_sum):
            fail("b", f"block ({start},{length}) recorded sum {cert.block_sums[i]}"
                 f" != {weighted_sum}")

    for j in uncovered:
        if data.membership[j] or data.g[j] != 0:
            fail("c", f"gap position {j} is in E_N (g={data.g[j]})")

    tail = range(cert.tail_start, m)
    if len(tail) > N - 1:
        fail("d", f"tail of {len(tail)} terms is not shorter than N={N}")

    scale = data.f_sup + data.lambda_plus
    tail_weighted = add([data.g[j] for j in tail])
    tail_raw = add([data.raw[j] for j in tail])
    floor = -(N - 1) * scale
    if not tail_weighted >= tail_raw:
        fail("e", f"tail weighted sum {tail_weighted} < raw sum {tail_raw}")
    if not tail_raw >= floor and not close(tail_raw, floor):
        fail("e", f"tail raw sum {tail_raw} < -(N-1)(|f|+lambda+) = {floor}")
    if not floor >= cert.lower_bound:
        fail("e", f"-(N-1)(|f|+lambda+) = {floor} < lower bound {cert.lower_bound}")

    total = add(data.g)
    gap_total = add([data.g[j] for j in uncovered])
    if not close(cert.total_sum, total):
        fail("f", f"recorded total {cert.total_sum} != window sum {total}")
    if not close(block_total + gap_total + tail_weighted, total):
        fail("f", f"blocks + gaps + tail = {block_total + gap_total + tail_weighted}"
             f" != total {total}")
    if not cert.total_sum >= cert.lower_bound:
        fail("f", f"total {cert.total_sum} < lower bound {cert.lower_bound}")
    return CertificateReport(tuple(failures))


@dataclass(frozen=True)
class BoundRow:
    m: int
    weighted_window_sum: Fraction
    expected: Fraction
    bound: Fraction
    certificates_ok: bool

    @property
    def equal(self) -> bool:
        return self.weighted_window_sum == self.expected


@dataclass(frozen=True)
class IntegratedBoundReport:
    N: int
    integral: Fraction
    rows: tuple[BoundRow, ...]

    @property
    def shrink_ratios(self) -> list[Optional[Fraction]]:
        return [
            a.bound / b.bound if b.bound != 0 else None
            for a, b in zip(self.rows, self.rows[1:])
        ]

    @property
    def ok(self) -> bool:
        return self.integral >= 0 and all(
            row.equal and row.certificates_ok and self.integral >= row.bound
            for row in self.rows
        )


def integrated_bound_demo(
    system: FiniteSystem,
    f: Observable,
    lam: InvariantFunction,
    N: int,
    m_schedule: Sequence[int],
) -> IntegratedBoundReport:
    if not m_schedule or any(a >= b for a, b in zip(m_schedule, m_schedule[1:])):
        raise InvalidParameter(f"m_schedule must be increasing: {list(m_schedule)}")
    verdict = maximal_integral(system, f, N, lam)
    exceed = exceedance_set(system, f, N, lam)
    scale = f.sup_norm + system.integral(lam.plus)

    rows = []
    for m in m_schedule:
        weighted = Fraction(0)
        certificates_ok = True
        for x in range(system.n):
            data = build_input(system, f, lam, x, N, m, exceed)
            cert = decompose(data)
            weighted += system.weights[x] * cert.total_sum
            certificates_ok = certificates_ok and verify_certificate(cert, data).ok
        rows.append(
            BoundRow(
                m=m,
                weighted_window_sum=weighted,
                expected=m * verdict.integral_value,
                bound=-Fraction(N, m) * scale,
                certificates_ok=certificates_ok,
            )
        )
    return IntegratedBoundReport(N, verdict.integral_value, tuple(rows))
