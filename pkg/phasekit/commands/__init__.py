"""Subcommands of the phasekit command line."""

from .generate import GenerateCommand
from .solve import SolveCommand
from .bench import BenchCommand
from .diagnose import DiagnoseCommand

COMMANDS = [GenerateCommand, SolveCommand, BenchCommand, DiagnoseCommand]

__all__ = [
    'GenerateCommand',
    'SolveCommand',
    'BenchCommand',
    'DiagnoseCommand',
    'COMMANDS'
]
