from ergodic.commands.birkhoff import BirkhoffCommand
from ergodic.commands.certificate import DecomposeCommand, VerifyCertCommand
from ergodic.commands.converge import ConvergeCommand
from ergodic.commands.fuzz import FuzzCommand
from ergodic.commands.maximal import CorollaryCommand, VerifyMaximalCommand

__all__ = [
    "BirkhoffCommand",
    "ConvergeCommand",
    "CorollaryCommand",
    "DecomposeCommand",
    "FuzzCommand",
    "VerifyCertCommand",
    "VerifyMaximalCommand",
]
