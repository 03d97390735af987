import argparse
import json
import logging
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from ergodic.codec import Scenario, load_scenario, parse_float, parse_scenario, write_json
from ergodic.core import Case, ConfigParse, ExperimentReport
from ergodic.systems import SystemKind

# Per-command settings that are not parameters of the computation
NON_PARAMETERS = {"command", "system", "inline", "verbose", "report", "format"}


@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    system: Optional[Path]
    inline: Optional[str]
    parameters: dict[str, Any] = field(default_factory=dict)
    report: Optional[Path] = None
    format: str = "csv"

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "ScenarioConfig":
        values = vars(args)
        return cls(
            command=args.command,
            system=values.get("system"),
            inline=values.get("inline"),
            parameters={
                k: v for k, v in sorted(values.items()) if k not in NON_PARAMETERS
            },
            report=values.get("report"),
            format=values.get("format") or "csv",
        )

    def to_dict(self) -> dict[str, Any]:
        def plain(value: Any) -> Any:
            if isinstance(value, Path):
                return str(value)
            if isinstance(value, (list, tuple)):
                return [plain(v) for v in value]
            return value

        return {
            "command": self.command,
            "system": plain(self.system),
            "inline": self.inline,
            "parameters": {k: plain(v) for k, v in self.parameters.items()},
            "format": self.format,
        }


def parse_range(text: str, flag: str) -> range:
    """"A..B" (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            first, last = int(a), int(b)
        else:
            first = last = int(text)
    except ValueError:
        raise ConfigParse(f"{flag}: expected A..B, got '{text}'")
    if last < first:
        raise ConfigParse(f"{flag}: empty range '{text}'")
    return range(first, last + 1)


class CommandBase(metaclass=ABCMeta):
    name: str = ""
    abort_on_failure: bool = False
    needs_system: bool = True

    def __init__(self, args: argparse.Namespace, logger: logging.Logger) -> None:
        self.args = args
        self.logger = logger
        self.config = ScenarioConfig.from_namespace(args)
        self.scenario: Optional[Scenario] = None
        if self.needs_system:
            self.scenario = self.load()
        self.validate()

    @classmethod
    def add_parser(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--report",
            type=Path,
            default=None,
            help="Write the experiment report as JSON to this path",
        )

    @classmethod
    def add_system_arguments(cls, parser: argparse.ArgumentParser) -> None:
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--system", type=Path, help="System description file (JSON)")
        source.add_argument(
            "--inline",
            help='Inline system description, e.g. \'{"type":"rotation","alpha":"golden"}\'',
        )

    def load(self) -> Scenario:
        if self.config.system is not None:
            return load_scenario(self.config.system)
        try:
            document = json.loads(self.config.inline)
        except json.JSONDecodeError as e:
            raise ConfigParse(f"--inline:{e.lineno}: {e.msg}")
        return parse_scenario(document, "--inline")

    def require(self, condition: bool, message: str) -> None:
        if not condition:
            raise ConfigParse(f"{self.name}: {message}")

    def start_point(self, value: Any, where: str) -> Union[int, float]:
        """Orbit start: a point index, a rotation coordinate or a shift seed.

        Without an explicit value the system file decides: its 'x0' for a
        rotation, its 'seed' for a shift and point 0 for a finite system.
        """
        system = self.scenario.system
        if not self.scenario.finite and system.kind is SystemKind.ROTATION:
            if value is None:
                return self.scenario.x0 if self.scenario.x0 is not None else 0.0
            return parse_float(value, where)
        if value is None:
            return 0 if self.scenario.finite else system.seed
        if isinstance(value, bool) or not isinstance(value, (str, int)):
            raise ConfigParse(f"{where}: expected an integer start, got {value!r}")
        try:
            return int(value)
        except ValueError:
            raise ConfigParse(f"{where}: not a valid start point {value!r}")

    def validate(self) -> None:
        return

    @abstractmethod
    def cases(self) -> list[Case]:
        raise NotImplementedError("You need to write this!")

    def summarize(self, report: ExperimentReport) -> None:
        if self.config.report is not None:
            write_json(self.config.report, report.to_dict())
