import argparse
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ergodic.codec import (
    Scenario,
    format_number,
    parse_lambda,
    parse_rational,
    write_json,
)
from ergodic.commands.base import CommandBase, parse_range
from ergodic.core import Case, CaseResult, CaseStatus, ExperimentReport
from ergodic.maximal_theorem import (
    LambdaChain,
    corollary_lambda_sweep,
    epsilon_sweep,
    verify_maximal_theorem,
    verify_truncation_extension,
)
from ergodic.systems import InvariantFunction


def _status(ok: bool) -> CaseStatus:
    return CaseStatus.PASSED if ok else CaseStatus.FAILED


def theorem_case(scenario: Scenario, lam: InvariantFunction, horizons: range) -> CaseResult:
    sweep = verify_maximal_theorem(scenario.system, scenario.f, lam, horizons)
    return CaseResult(
        ("theorem",),
        _status(sweep.ok),
        {
            "lambda": lam.describe(),
            "verdicts": [
                {
                    "N": v.N,
                    "integral": format_number(v.integral_value),
                    "mass": format_number(v.mass),
                    "holds": v.holds,
                }
                for v in sweep.verdicts
            ],
            "stabilized_integral": format_number(sweep.stabilized.integral_value),
            "nesting_violations": list(sweep.nesting_violations),
            "stabilization_ok": sweep.stabilization_ok,
        },
    )


def truncation_case(scenario: Scenario, lam: InvariantFunction, N: int) -> CaseResult:
    report = verify_truncation_extension(scenario.system, scenario.f, lam, N)
    return CaseResult(
        ("truncation", N),
        _status(report.ok),
        {
            "target": format_number(report.target),
            "monotone": report.monotone,
            "steps": [
                {
                    "s": step.s,
                    "integral": format_number(step.integral_value),
                    "symmetric_difference_mass": format_number(
                        step.symmetric_difference_mass
                    ),
                    "l1_distance": format_number(step.l1_distance),
                }
                for step in report.steps
            ],
        },
    )


def _chain_detail(chain: LambdaChain) -> dict:
    return {
        "integral": format_number(chain.integral_g),
        "limit": format_number(chain.limit),
        "saturated_at": None if chain.saturated_at is None else format_number(chain.saturated_at),
        "nondecreasing": chain.nondecreasing,
        "lambda_integrals": [format_number(s.lambda_integral) for s in chain.steps],
        "ok": chain.ok,
    }


def corollary_case(
    scenario: Scenario, n_max: int, epsilons: Optional[tuple[Fraction, ...]]
) -> CaseResult:
    report = corollary_lambda_sweep(scenario.system, scenario.f, n_max)
    detail = {
        "positive_part": _chain_detail(report.positive_chain),
        "cycle_mean": _chain_detail(report.mean_chain),
        "integrable_parts": report.integrable_parts,
        "liminf_side": report.liminf_side,
        "convergence": report.convergence,
    }
    ok = report.ok
    if epsilons:
        chain = epsilon_sweep(scenario.system, scenario.f, epsilons)
        detail["epsilon"] = _chain_detail(chain)
        ok = ok and chain.ok
    return CaseResult(("corollary",), _status(ok), detail)


class VerifyMaximalCommand(CommandBase):
    name = "verify-maximal"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument(
            "--lambda",
            dest="lambda_spec",
            default=None,
            help="Invariant lambda: a constant or 'cycles:a,b,...' (default: from file)",
        )
        parser.add_argument("--n-range", default="1..8", help="Horizons N as A..B")
        parser.add_argument(
            "--truncation",
            action="store_true",
            help="Also run the truncation sweep s = 1..ceil(|f|) at every N",
        )
        parser.add_argument("--out", type=Path, default=None, help="Report JSON path")

    def validate(self) -> None:
        self.require(self.scenario.finite, "needs a finite system")
        self.require(self.scenario.f is not None, "the system file defines no observable 'f'")
        self.lam = parse_lambda(self.args.lambda_spec, self.scenario)
        self.horizons = parse_range(self.args.n_range, "--n-range")
        self.require(self.horizons[0] >= 1, "--n-range must start at 1 or more")

    def cases(self) -> list[Case]:
        cases = [Case(("theorem",), theorem_case, (self.scenario, self.lam, self.horizons))]
        if self.args.truncation:
            cases += [
                Case(("truncation", N), truncation_case, (self.scenario, self.lam, N))
                for N in self.horizons
            ]
        return cases

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        if self.args.out is not None:
            write_json(self.args.out, report.to_dict())


class CorollaryCommand(CommandBase):
    name = "corollary"

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        cls.add_system_arguments(parser)
        parser.add_argument("--n-max", type=int, default=10, help="Run lambda_n for n = 1..n_max")
        parser.add_argument(
            "--epsilons",
            default=None,
            help="Comma separated rationals for the lambda = A - eps sweep",
        )
        parser.add_argument("--out", type=Path, default=None, help="Report JSON path")

    def validate(self) -> None:
        self.require(self.scenario.finite, "needs a finite system")
        self.require(self.scenario.f is not None, "the system file defines no observable 'f'")
        self.require(self.args.n_max >= 1, "--n-max must be at least 1")
        self.epsilons = None
        if self.args.epsilons:
            self.epsilons = tuple(
                parse_rational(e, "--epsilons") for e in self.args.epsilons.split(",")
            )
            self.require(all(e > 0 for e in self.epsilons), "--epsilons must be positive")

    def cases(self) -> list[Case]:
        args = (self.scenario, self.args.n_max, self.epsilons)
        return [Case(("corollary",), corollary_case, args)]

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        if self.args.out is not None:
            write_json(self.args.out, report.to_dict())
