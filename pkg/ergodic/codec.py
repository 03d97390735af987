"""
Text formats: system description files, certificates, repro files and CSV.

Rationals are written as "p/q" strings (integers without a denominator),
floats as their shortest round-trip repr.
"""
import csv
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from ergodic.core import ConfigParse, ErgodicError, FileIO
from ergodic.decomposition import DecompositionCertificate
from ergodic.systems import (
    GOLDEN,
    FiniteSystem,
    InvariantFunction,
    Observable,
    SampledSystem,
    make_finite_system,
    make_invariant_function,
)

logger = logging.getLogger(__name__)

CSV_VERSION = "ergodic-maximal csv v1"

FINITE_KEYS = {"type", "map", "cycle_weights", "f", "lambda"}
SAMPLED_KEYS = {
    "rotation": {"type", "alpha", "f", "lambda", "x0"},
    "bernoulli_shift": {"type", "p", "seed", "f", "lambda"},
    "markov_shift": {"type", "matrix", "stationary", "seed", "f", "lambda"},
}
OBSERVABLE_KEYS = {"kind", "symbol", "breakpoints", "heights"}
CERTIFICATE_KEYS = {
    "x",
    "m",
    "N",
    "blocks",
    "gaps",
    "block_sums",
    "tail_start",
    "total_sum",
    "lower_bound",
}


@dataclass(frozen=True)
class Scenario:
    system: Union[FiniteSystem, SampledSystem]
    f: Optional[Observable] = None
    lam: Optional[InvariantFunction] = None
    x0: Optional[Union[int, float]] = None

    @property
    def finite(self) -> bool:
        return isinstance(self.system, FiniteSystem)


def format_number(value: Union[Fraction, float, int]) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_rational(text: Any, where: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ConfigParse(f"{where}: expected a rational string like \"1/3\", got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigParse(f"{where}: not a rational number: {text!r}")


def parse_float(text: Any, where: str) -> float:
    if text == "golden":
        return GOLDEN
    try:
        return float(Fraction(text)) if isinstance(text, str) and "/" in text else float(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigParse(f"{where}: not a number: {text!r}")


def read_json(path: Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FileIO(f"{path}: {e.strerror or e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParse(f"{path}:{e.lineno}: {e.msg}")


def write_json(path: Path, document: Any) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise FileIO(f"{path}: {e.strerror or e}")
    logger.info(f"Wrote {path}")


def _check_keys(document: Any, allowed: set, where: str) -> None:
    if not isinstance(document, dict):
        raise ConfigParse(f"{where}: expected a JSON object")
    unknown = sorted(set(document) - allowed)
    if unknown:
        raise ConfigParse(f"{where}: unknown field(s) {unknown}")


def parse_observable(document: Any, where: str) -> Observable:
    _check_keys(document, OBSERVABLE_KEYS, where)
    kind = document.get("kind")
    try:
        if kind == "coordinate":
            return Observable.coordinate()
        if kind == "cosine":
            return Observable.cosine()
        if kind == "first_symbol":
            return Observable.first_symbol(int(document.get("symbol", 1)))
        if kind == "step":
            return Observable.step(
                [parse_float(b, where) for b in document.get("breakpoints", [])],
                [parse_float(h, where) for h in document.get("heights", [])],
            )
    except ErgodicError as e:
        raise ConfigParse(f"{where}: {e}")
    raise ConfigParse(f"{where}: unknown observable kind {kind!r}")


def parse_scenario(document: Any, where: str) -> Scenario:
    if not isinstance(document, dict):
        raise ConfigParse(f"{where}: expected a JSON object")
    kind = document.get("type")
    try:
        if kind == "finite":
            _check_keys(document, FINITE_KEYS, where)
            if "map" not in document or "cycle_weights" not in document:
                raise ConfigParse(f"{where}: finite systems need 'map' and 'cycle_weights'")
            system = make_finite_system(
                document["map"],
                [parse_rational(w, f"{where}: cycle_weights") for w in document["cycle_weights"]],
            )
            f = None
            if "f" in document:
                f = Observable.table(parse_rational(v, f"{where}: f") for v in document["f"])
                if len(f.values) != system.n:
                    raise ConfigParse(
                        f"{where}: f has {len(f.values)} values for {system.n} points"
                    )
            lam = None
            if "lambda" in document:
                lam = make_invariant_function(
                    system,
                    [parse_rational(v, f"{where}: lambda") for v in document["lambda"]],
                )
            return Scenario(system, f, lam)

        if kind not in SAMPLED_KEYS:
            raise ConfigParse(f"{where}: unknown system type {kind!r}")
        _check_keys(document, SAMPLED_KEYS[kind], where)
        if kind == "rotation":
            system = SampledSystem.rotation(parse_float(document.get("alpha"), where))
        elif kind == "bernoulli_shift":
            system = SampledSystem.bernoulli_shift(
                parse_float(document.get("p"), where), int(document.get("seed", 0))
            )
        else:
            stationary = document.get("stationary")
            system = SampledSystem.markov_shift(
                [[parse_float(v, where) for v in row] for row in document.get("matrix", [])],
                None if stationary is None else [parse_float(v, where) for v in stationary],
                int(document.get("seed", 0)),
            )
        f = parse_observable(document["f"], f"{where}: f") if "f" in document else None
        lam = None
        if "lambda" in document:
            lam = InvariantFunction.sampled(parse_float(document["lambda"], where))
        x0 = parse_float(document["x0"], where) if "x0" in document else None
        return Scenario(system, f, lam, x0)
    except ConfigParse:
        raise
    except ErgodicError as e:
        # Validation errors keep their type; the message gains the file
        raise type(e)(f"{where}: {e}")
    except (TypeError, ValueError) as e:
        raise ConfigParse(f"{where}: {e}")


def load_scenario(path: Path) -> Scenario:
    return parse_scenario(read_json(path), str(path))


def scenario_to_dict(system: FiniteSystem, f: Observable, lam: InvariantFunction) -> dict:
    return {
        "type": "finite",
        "map": list(system.mapping),
        "cycle_weights": [format_number(w) for w in system.cycle_weights()],
        "f": [format_number(v) for v in f.values],
        "lambda": [format_number(v) for v in lam.per_cycle],
    }


def parse_lambda(spec: Optional[str], scenario: Scenario) -> InvariantFunction:
    """``None`` keeps the file's lambda; "c" is a constant; "cycles:a,b,..." per cycle."""
    if spec is None:
        if scenario.lam is None:
            raise ConfigParse("no lambda given on the command line or in the system file")
        return scenario.lam
    if not scenario.finite:
        return InvariantFunction.sampled(parse_float(spec, "--lambda"))
    try:
        if spec.startswith("cycles:"):
            values = [parse_rational(v, "--lambda") for v in spec[len("cycles:") :].split(",")]
            return make_invariant_function(scenario.system, values)
        return InvariantFunction.uniform(parse_rational(spec, "--lambda"), scenario.system)
    except ConfigParse:
        raise
    except ErgodicError as e:
        raise ConfigParse(f"--lambda: {e}")


def certificate_to_dict(cert: DecompositionCertificate, x: Union[int, float]) -> dict:
    return {
        "x": x,
        "m": cert.m,
        "N": cert.N,
        "blocks": [list(block) for block in cert.blocks],
        "gaps": list(cert.gaps),
        "block_sums": [format_number(s) for s in cert.block_sums],
        "tail_start": cert.tail_start,
        "total_sum": format_number(cert.total_sum),
        "lower_bound": format_number(cert.lower_bound),
    }


def certificate_from_dict(
    document: Any, where: str, exact: bool = True
) -> tuple[DecompositionCertificate, Union[int, float]]:
    _check_keys(document, CERTIFICATE_KEYS, where)
    missing = sorted(CERTIFICATE_KEYS - set(document) - {"gaps", "block_sums"})
    if missing:
        raise ConfigParse(f"{where}: missing field(s) {missing}")
    number = parse_rational if exact else parse_float
    try:
        cert = DecompositionCertificate(
            m=int(document["m"]),
            N=int(document["N"]),
            blocks=tuple((int(s), int(n)) for s, n in document["blocks"]),
            gaps=tuple(int(j) for j in document.get("gaps", [])),
            tail_start=int(document["tail_start"]),
            block_sums=tuple(
                number(v, f"{where}: block_sums") for v in document.get("block_sums", [])
            ),
            total_sum=number(document["total_sum"], f"{where}: total_sum"),
            lower_bound=number(document["lower_bound"], f"{where}: lower_bound"),
        )
    except (TypeError, ValueError) as e:
        raise ConfigParse(f"{where}: {e}")
    return cert, document["x"]


def write_csv(
    path: Path, kind: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            handle.write(f"# {CSV_VERSION} {kind}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_number(v) for v in row])
    except OSError as e:
        raise FileIO(f"{path}: {e.strerror or e}")
    logger.info(f"Wrote {path}")


def rational_rows(pairs: Iterable[tuple[Any, Union[Fraction, float]]]) -> list[list[Any]]:
    """(index, value) pairs with a decimal convenience column for rationals."""
    return [[index, value, float(value)] for index, value in pairs]
