import argparse
from pathlib import Path
from typing import Optional, Union

from ergodic.averages import FULL, birkhoff_profile, maximal_profile
from ergodic.codec import Scenario, format_number, rational_rows, write_csv, write_json
from ergodic.commands.base import CommandBase
from ergodic.core import Case, CaseResult, CaseStatus, ExperimentReport


def birkhoff_case(
    scenario: Scenario, x: Optional[Union[int, float]], K: int
) -> CaseResult:
    profile = birkhoff_profile(scenario.system, scenario.f, x, K)
    violations = profile.telescoping_violations()
    if scenario.finite:
        rows = rational_rows(enumerate(profile.values, start=1))
    else:
        rows = [[k, a] for k, a in enumerate(profile.values, start=1)]
    return CaseResult(
        ("profile",),
        CaseStatus.FAILED if violations else CaseStatus.PASSED,
        {
            "x": profile.x,
            "K": K,
            "last": format_number(profile.values[-1]),
            "telescoping_violations": violations[:20],
            "rows": [[format_number(v) for v in row] for row in rows],
        },
    )


def maximal_case(scenario: Scenario, N: Union[int, str]) -> CaseResult:
    horizon = FULL if N == "full" else int(N)
    profile = maximal_profile(scenario.system, scenario.f, horizon)
    monotone = True
    if horizon is not FULL and horizon > 1:
        below = maximal_profile(scenario.system, scenario.f, horizon - 1)
        monotone = all(a <= b for a, b in zip(below.values, profile.values))
    return CaseResult(
        ("maximal", str(N)),
        CaseStatus.PASSED if monotone else CaseStatus.FAILED,
        {
            "N": str(N),
            "rows": [
                [format_number(v) for v in row]
                for row in rational_rows(enumerate(profile.values))
            ],
        },
    )


class BirkhoffCommand(CommandBase):
    name = "birkhoff"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument(
            "--x", default=None, help="Start point (index, coordinate or seed; default from the file)"
        )
        parser.add_argument("--K", type=int, default=16, help="Largest horizon k")
        parser.add_argument(
            "--maximal",
            default=None,
            help="Emit f*_N per point instead (N or 'full'; finite systems)",
        )
        parser.add_argument("--out", type=Path, default=None, help="Output file")
        parser.add_argument(
            "--format", choices=["csv", "json"], default="csv", help="Output format"
        )

    def validate(self) -> None:
        self.require(self.scenario.f is not None, "the system file defines no observable 'f'")
        self.require(self.args.K >= 1, "--K must be at least 1")
        if self.args.maximal is not None:
            self.require(self.scenario.finite, "--maximal needs a finite system")
            self.require(
                self.args.maximal == "full"
                or (self.args.maximal.isdigit() and int(self.args.maximal) >= 1),
                "--maximal takes a positive integer or 'full'",
            )
        self.x = self.start_point(self.args.x, "--x")

    def cases(self) -> list[Case]:
        if self.args.maximal is not None:
            key = ("maximal", self.args.maximal)
            return [Case(key, maximal_case, (self.scenario, self.args.maximal))]
        return [Case(("profile",), birkhoff_case, (self.scenario, self.x, self.args.K))]

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        if self.args.out is None:
            return
        result = report.results[0]
        if "rows" not in result.detail:
            return
        if self.args.maximal is not None:
            header = ["point", "f_star_N", "f_star_N_decimal"]
            kind = f"maximal N={self.args.maximal}"
        elif self.scenario.finite:
            header = ["k", "A_k", "A_k_decimal"]
            kind = "birkhoff"
        else:
            header = ["k", "A_k"]
            kind = "birkhoff"
        if self.config.format == "json":
            write_json(self.args.out, {"columns": header, "rows": result.detail["rows"]})
        else:
            write_csv(self.args.out, kind, header, result.detail["rows"])
