import argparse
from pathlib import Path
from typing import Optional, Union

from ergodic.averages import (
    RELATIVE_TOLERANCE,
    birkhoff_profile,
    space_average,
    weyl_bound,
)
from ergodic.codec import Scenario, write_csv, write_json
from ergodic.commands.base import CommandBase
from ergodic.core import Case, CaseResult, CaseStatus, ExperimentReport
from ergodic.systems import ObservableKind, SystemKind


def convergence_case(
    scenario: Scenario,
    x0: Optional[Union[int, float]],
    exponents: tuple[int, int],
    threshold: Optional[float],
) -> CaseResult:
    system, f = scenario.system, scenario.f
    ks = [2**e for e in range(exponents[0], exponents[1] + 1)]
    profile = birkhoff_profile(system, f, x0, ks[-1])
    limit = space_average(system, f)
    weyl = (
        system.kind is SystemKind.ROTATION
        and f.kind is ObservableKind.COSINE
        and not x0
    )

    rows = []
    failures = []
    for k in ks:
        average = profile.values[k - 1]
        deviation = abs(average - limit)
        bound = weyl_bound(system.alpha, k) if weyl else None
        rows.append([k, average, deviation] + ([bound] if weyl else []))
        if weyl and abs(average) > bound * (1 + RELATIVE_TOLERANCE):
            failures.append(k)

    final = rows[-1][2]
    if threshold is not None and not final < threshold:
        failures.append(ks[-1])
    return CaseResult(
        ("converge",),
        CaseStatus.FAILED if failures else CaseStatus.PASSED,
        {
            "limit": limit,
            "weyl_bound": weyl,
            "threshold": threshold,
            "failed_k": failures,
            "rows": rows,
        },
        deviation=max(row[2] for row in rows),
    )


class ConvergeCommand(CommandBase):
    name = "converge"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument(
            "--x0", default=None, help="Start coordinate or seed (default from the file)"
        )
        parser.add_argument("--k-min", type=int, default=4, help="Smallest exponent of k = 2^e")
        parser.add_argument("--k-max", type=int, default=20, help="Largest exponent of k = 2^e")
        parser.add_argument(
            "--threshold",
            type=float,
            default=None,
            help="Fail when |A_k - limit| at the largest k is not below this",
        )
        parser.add_argument("--out", type=Path, default=None, help="Output file")
        parser.add_argument(
            "--format", choices=["csv", "json"], default="csv", help="Output format"
        )

    def validate(self) -> None:
        self.require(not self.scenario.finite, "needs a sampled system")
        self.require(self.scenario.f is not None, "the system defines no observable 'f'")
        self.require(
            self.scenario.system.supports(self.scenario.f),
            f"observable {self.scenario.f.kind.value} is not defined on"
            f" {self.scenario.system.kind.value}",
        )
        self.require(0 <= self.args.k_min <= self.args.k_max, "need 0 <= --k-min <= --k-max")
        self.x0 = self.start_point(self.args.x0, "--x0")

    def cases(self) -> list[Case]:
        return [
            Case(
                ("converge",),
                convergence_case,
                (self.scenario, self.x0, (self.args.k_min, self.args.k_max), self.args.threshold),
            )
        ]

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        result = report.results[0]
        if self.args.out is None or "rows" not in result.detail:
            return
        header = ["k", "A_k", "abs_error"]
        if result.detail["weyl_bound"]:
            header.append("bound")
        if self.config.format == "json":
            write_json(self.args.out, {"columns": header, "rows": result.detail["rows"]})
        else:
            write_csv(self.args.out, "converge", header, result.detail["rows"])
