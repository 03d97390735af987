import argparse
from pathlib import Path
from typing import Union

from ergodic.codec import (
    Scenario,
    certificate_from_dict,
    certificate_to_dict,
    parse_lambda,
    read_json,
    write_json,
)
from ergodic.commands.base import CommandBase
from ergodic.core import Case, CaseResult, CaseStatus, ExperimentReport
from ergodic.decomposition import (
    CLAUSES,
    BlockChoice,
    DecompositionCertificate,
    build_input,
    decompose,
    verify_certificate,
)
from ergodic.systems import InvariantFunction


def decompose_case(
    scenario: Scenario,
    lam: InvariantFunction,
    x: Union[int, float, None],
    N: int,
    m: int,
    choice: BlockChoice,
) -> CaseResult:
    data = build_input(scenario.system, scenario.f, lam, x, N, m)
    cert = decompose(data, choice)
    report = verify_certificate(cert, data)
    return CaseResult(
        ("decompose",),
        CaseStatus.PASSED if report.ok else CaseStatus.FAILED,
        {
            "certificate": certificate_to_dict(cert, x),
            "failed_clauses": sorted(report.failed_clauses),
        },
    )


def verify_case(
    scenario: Scenario,
    lam: InvariantFunction,
    cert: DecompositionCertificate,
    x: Union[int, float],
) -> CaseResult:
    data = build_input(scenario.system, scenario.f, lam, x, cert.N, cert.m)
    report = verify_certificate(cert, data)
    return CaseResult(
        ("verify",),
        CaseStatus.PASSED if report.ok else CaseStatus.FAILED,
        {
            "failed_clauses": sorted(report.failed_clauses),
            "failures": [
                {
                    "clause": failure.clause,
                    "requires": CLAUSES[failure.clause],
                    "detail": failure.detail,
                }
                for failure in report.failures
            ],
        },
    )


class DecomposeCommand(CommandBase):
    name = "decompose"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument("--lambda", dest="lambda_spec", default=None, help="Invariant lambda")
        parser.add_argument(
            "--x", default=None, help="Start point (index, coordinate or seed; default from the file)"
        )
        parser.add_argument("--N", type=int, required=True, help="Horizon N")
        parser.add_argument("--m", type=int, required=True, help="Window length m")
        parser.add_argument(
            "--largest",
            action="store_true",
            help="Take the longest positive block instead of the shortest",
        )
        parser.add_argument("--emit", type=Path, default=None, help="Certificate JSON path")

    def validate(self) -> None:
        self.require(self.scenario.f is not None, "the system defines no observable 'f'")
        self.require(self.args.N >= 1, "--N must be at least 1")
        self.require(self.args.m >= self.args.N, "--m must be at least --N")
        self.lam = parse_lambda(self.args.lambda_spec, self.scenario)
        self.x = self.start_point(self.args.x, "--x")
        self.choice = BlockChoice.LARGEST if self.args.largest else BlockChoice.SMALLEST

    def cases(self) -> list[Case]:
        return [
            Case(
                ("decompose",),
                decompose_case,
                (self.scenario, self.lam, self.x, self.args.N, self.args.m, self.choice),
            )
        ]

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        result = report.results[0]
        if self.args.emit is not None and "certificate" in result.detail:
            write_json(self.args.emit, result.detail["certificate"])


class VerifyCertCommand(CommandBase):
    name = "verify-cert"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument("--cert", type=Path, required=True, help="Certificate JSON path")
        parser.add_argument("--lambda", dest="lambda_spec", default=None, help="Invariant lambda")

    def validate(self) -> None:
        self.require(self.scenario.f is not None, "the system file defines no observable 'f'")
        self.lam = parse_lambda(self.args.lambda_spec, self.scenario)
        self.cert, x = certificate_from_dict(
            read_json(self.args.cert), str(self.args.cert), exact=self.scenario.finite
        )
        self.x = self.start_point(x, f"{self.args.cert}: x")
        if self.scenario.finite:
            self.require(
                isinstance(x, int) and 0 <= x < self.scenario.system.n,
                f"{self.args.cert}: 'x' must be a point index in range",
            )
        self.require(
            1 <= self.cert.N <= self.cert.m, f"{self.args.cert}: need 1 <= N <= m"
        )

    def cases(self) -> list[Case]:
        return [Case(("verify",), verify_case, (self.scenario, self.lam, self.cert, self.x))]
