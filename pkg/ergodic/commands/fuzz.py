import argparse
from fractions import Fraction
from pathlib import Path

from ergodic.averages import (
    FULL,
    exceedance_set,
    limit_averages,
    maximal_function_at,
    maximal_profile,
)
from ergodic.codec import scenario_to_dict, write_json
from ergodic.commands.base import CommandBase, parse_range
from ergodic.core import Case, CaseResult, CaseStatus, ErgodicError, ExperimentReport
from ergodic.decomposition import (
    BlockChoice,
    build_input,
    decompose,
    integrated_bound_demo,
    verify_certificate,
)
from ergodic.maximal_theorem import (
    corollary_lambda_sweep,
    lambda_grid,
    negation_check,
    strictness_check,
    verify_maximal_theorem,
    verify_truncation_extension,
)
from ergodic.systems import (
    FiniteSystem,
    InvariantFunction,
    Observable,
    random_finite_system,
    validate_measure_preserving,
)

WINDOW_FACTORS = (1, 2, 17)


def check_theorem(system: FiniteSystem, f: Observable, lam: InvariantFunction) -> list[str]:
    failures = []
    horizons = range(1, system.n + 1)
    for candidate in [lam] + lambda_grid(system, f):
        sweep = verify_maximal_theorem(system, f, candidate, horizons)
        if not sweep.ok:
            failures.append(f"theorem lambda={candidate.describe()}")
    for N in horizons:
        if not negation_check(system, f, lam, N).holds:
            failures.append(f"negation N={N}")
        strict = strictness_check(system, f, N, Fraction(1, 7))
        if strict.mass != 0 or strict.integral_value != 0:
            failures.append(f"strictness N={N}")
    return failures


def check_limits(system: FiniteSystem, f: Observable) -> list[str]:
    failures = []
    full = maximal_profile(system, f, FULL)
    for x in range(system.n):
        if maximal_function_at(system, f, x, 10 * system.period(x)) != full.values[x]:
            failures.append(f"f* stabilization x={x}")
    if not limit_averages(system, f).ok:
        failures.append("ergodic limit")
    if not limit_averages(system, f.negated()).ok:
        failures.append("ergodic limit of -f")
    return failures


def check_decomposition(
    system: FiniteSystem, f: Observable, lam: InvariantFunction
) -> list[str]:
    failures = []
    for N in range(1, system.n + 1):
        exceed = exceedance_set(system, f, N, lam)
        for x in range(system.n):
            for factor in WINDOW_FACTORS:
                m = factor * N
                data = build_input(system, f, lam, x, N, m, exceed)
                choices = [BlockChoice.SMALLEST]
                if factor == WINDOW_FACTORS[-1]:
                    choices.append(BlockChoice.LARGEST)
                for choice in choices:
                    cert = decompose(data, choice)
                    report = verify_certificate(cert, data)
                    if not report.ok:
                        failures.append(
                            f"certificate x={x} N={N} m={m} {choice.value}:"
                            f" {sorted(report.failed_clauses)}"
                        )
    return failures


def fuzz_case(
    seed: int, n_max: int, truncation: bool, corollary: bool, integrated: bool
) -> CaseResult:
    system, f, lam = random_finite_system(seed, n_max)
    failures = []
    if not validate_measure_preserving(system).ok:
        failures.append("measure preservation")
    try:
        failures += check_theorem(system, f, lam)
        failures += check_limits(system, f)
        failures += check_decomposition(system, f, lam)
        if truncation:
            for N in range(1, system.n + 1):
                if not verify_truncation_extension(system, f, lam, N).ok:
                    failures.append(f"truncation N={N}")
        if corollary and not corollary_lambda_sweep(system, f, 10).ok:
            failures.append("corollary")
        if integrated:
            N = system.max_cycle_length
            report = integrated_bound_demo(system, f, lam, N, (10 * N, 100 * N, 1000 * N))
            ratios = [r for r in report.shrink_ratios if r is not None]
            if not report.ok or any(r != 10 for r in ratios):
                failures.append("integrated bound")
    except ErgodicError as e:
        failures.append(f"{type(e).__name__}: {e}")

    detail = {"n": system.n, "cycles": len(system.cycles), "failures": failures}
    if failures:
        detail["system"] = scenario_to_dict(system, f, lam)
    return CaseResult(
        (seed,), CaseStatus.FAILED if failures else CaseStatus.PASSED, detail
    )


class FuzzCommand(CommandBase):
    name = "fuzz"
    abort_on_failure = True
    needs_system = False

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        super().add_parser(parser)
        parser.add_argument("--seeds", default="1..1000", help="Seed range A..B")
        parser.add_argument("--n-max", type=int, default=12, help="Largest system size")
        parser.add_argument(
            "--truncation-seeds",
            type=int,
            default=200,
            help="Run the truncation sweep on the first K seeds",
        )
        parser.add_argument(
            "--corollary-seeds",
            type=int,
            default=200,
            help="Run the corollary lambda sweep on the first K seeds",
        )
        parser.add_argument(
            "--integrated-seeds",
            type=int,
            default=100,
            help="Run the integrated bound check on the first K seeds",
        )
        parser.add_argument(
            "--out", type=Path, default=Path("failures"), help="Directory for repro files"
        )

    def validate(self) -> None:
        self.seeds = parse_range(self.args.seeds, "--seeds")
        self.require(self.args.n_max >= 1, "--n-max must be at least 1")

    def cases(self) -> list[Case]:
        first = self.seeds[0]
        return [
            Case(
                (seed,),
                fuzz_case,
                (
                    seed,
                    self.args.n_max,
                    seed - first < self.args.truncation_seeds,
                    seed - first < self.args.corollary_seeds,
                    seed - first < self.args.integrated_seeds,
                ),
            )
            for seed in self.seeds
        ]

    def summarize(self, report: ExperimentReport) -> None:
        super().summarize(report)
        for result in report.results:
            if "system" not in result.detail:
                continue
            path = self.args.out / f"seed-{result.key[0]}.json"
            write_json(
                path,
                {
                    "seed": result.key[0],
                    "n_max": self.args.n_max,
                    "system": result.detail["system"],
                    "failures": result.detail["failures"],
                },
            )
            self.logger.error(f"Counterexample for seed {result.key[0]} written to {path}")
