import asyncio
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional


class ErgodicError(Exception):
    pass


class NotAPermutation(ErgodicError):
    pass


class WeightsNotPositive(ErgodicError):
    pass


class WeightsDontSumToOne(ErgodicError):
    pass


class CycleCountMismatch(ErgodicError):
    pass


class InvalidSampledSystem(ErgodicError):
    pass


class UnknownObservableForSystem(ErgodicError):
    pass


class PointOutOfRange(ErgodicError):
    pass


class TruncationOnSampledSystem(ErgodicError):
    pass


class InvalidParameter(ErgodicError):
    pass


class InvalidLambda(ErgodicError):
    pass


class WindowTooShort(ErgodicError):
    pass


class InternalContradiction(ErgodicError):
    """A member of E_N with no positive string of at most N terms.

    Only a broken f*_N or E_N computation can produce this.
    """


class ConfigParse(ErgodicError):
    pass


class FileIO(ErgodicError):
    pass


class CaseStatus(Enum):
    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CaseResult:
    key: tuple
    status: CaseStatus
    detail: dict[str, Any] = field(default_factory=dict)
    deviation: Optional[float] = None

    @property
    def failed(self) -> bool:
        return self.status is CaseStatus.FAILED

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "key": list(self.key),
            "status": self.status.value,
            "detail": self.detail,
        }
        if self.deviation is not None:
            doc["deviation"] = self.deviation
        return doc


@dataclass(frozen=True)
class Case:
    key: tuple
    fn: Callable[..., CaseResult]
    args: tuple = ()


@dataclass(frozen=True)
class ExperimentReport:
    command: str
    config: dict[str, Any]
    results: tuple[CaseResult, ...]
    duration: float

    def count(self, status: CaseStatus) -> int:
        return sum(1 for r in self.results if r.status is status)

    @property
    def max_deviation(self) -> Optional[float]:
        deviations = [r.deviation for r in self.results if r.deviation is not None]
        return max(deviations) if deviations else None

    @property
    def exit_code(self) -> int:
        if self.count(CaseStatus.FAILED) or self.count(CaseStatus.SKIPPED):
            return 1
        return 0

    def to_dict(self) -> dict[str, Any]:
        # Wall-clock duration is logged, not serialized, so reruns are byte-identical
        return {
            "command": self.command,
            "config": self.config,
            "cases": [r.to_dict() for r in self.results],
            "summary": {
                "passed": self.count(CaseStatus.PASSED),
                "failed": self.count(CaseStatus.FAILED),
                "skipped": self.count(CaseStatus.SKIPPED),
                "max_deviation": self.max_deviation,
            },
        }


def worker_count() -> int:
    threads = os.getenv("ERGO_THREADS", None)
    if threads is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(threads))
    except ValueError:
        raise ConfigParse(f"ERGO_THREADS must be an integer, got '{threads}'")


def _call(case: Case) -> CaseResult:
    try:
        return case.fn(*case.args)
    except ErgodicError as e:
        return CaseResult(
            case.key,
            CaseStatus.FAILED,
            {"error": type(e).__name__, "message": str(e)},
        )


def _skipped(case: Case) -> CaseResult:
    return CaseResult(case.key, CaseStatus.SKIPPED, {"reason": "campaign aborted"})


class Core(object):
    def __init__(self, command, logger):
        self.command = command
        self.logger = logger
        self.workers = worker_count()

    async def run(self) -> ExperimentReport:
        start = time.monotonic()
        cases = self.command.cases()
        self.logger.info(
            f"Running {len(cases)} case(s) for '{self.command.name}'"
            f" with {self.workers} worker(s)"
        )
        if self.workers == 1 or len(cases) < 2:
            results = self._run_inline(cases)
        else:
            results = await self._run_pool(cases)

        report = ExperimentReport(
            command=self.command.name,
            config=self.command.config.to_dict(),
            results=tuple(results[case.key] for case in sorted(cases, key=_sort_key)),
            duration=time.monotonic() - start,
        )
        self.command.summarize(report)
        self.logger.info(
            f"{report.count(CaseStatus.PASSED)} passed,"
            f" {report.count(CaseStatus.FAILED)} failed,"
            f" {report.count(CaseStatus.SKIPPED)} skipped"
            f" in {report.duration:.2f}s"
        )
        return report

    def _record(self, result: CaseResult) -> None:
        if result.failed:
            self.logger.error(f"Case {result.key} failed: {result.detail}")
        else:
            self.logger.debug(f"Case {result.key}: {result.status.value}")

    def _run_inline(self, cases: list[Case]) -> dict[tuple, CaseResult]:
        results: dict[tuple, CaseResult] = {}
        aborted = False
        for case in cases:
            if aborted:
                results[case.key] = _skipped(case)
                continue
            result = _call(case)
            self._record(result)
            results[case.key] = result
            aborted = result.failed and self.command.abort_on_failure
        return results

    async def _run_pool(self, cases: list[Case]) -> dict[tuple, CaseResult]:
        loop = asyncio.get_running_loop()
        results: dict[tuple, CaseResult] = {}
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            pending = {
                asyncio.ensure_future(loop.run_in_executor(pool, _call, case)): case
                for case in cases
            }
            while pending:
                done, _ = await asyncio.wait(
                    pending.keys(), return_when=asyncio.FIRST_COMPLETED
                )
                abort = False
                for task in done:
                    case = pending.pop(task)
                    result = task.result()
                    self._record(result)
                    results[case.key] = result
                    abort = abort or (result.failed and self.command.abort_on_failure)
                if abort and pending:
                    self.logger.error(
                        f"Aborting: cancelling {len(pending)} pending case(s)"
                    )
                    for task, case in pending.items():
                        task.cancel()
                        results[case.key] = _skipped(case)
                    pending.clear()
        return results


def _sort_key(case: Case) -> tuple:
    return tuple((0, k) if isinstance(k, int) else (1, str(k)) for k in case.key)
