"""`diagnose` subcommand: uniqueness and conditioning checks on files."""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from phasekit.diagnostics.uniqueness import (
    coherence_mu,
    collision_free_check,
    complement_property_check,
    rip_delta,
)
from phasekit.storage.result_store import ResultStore
from phasekit.storage.signal_io import read_signal
from phasekit.utils.constants import EXIT_OK

logger = logging.getLogger(__name__)


def _matrix(path: str) -> np.ndarray:
    values = read_signal(path).values
    if values.ndim != 2:
        raise ValueError(f"{path} must hold a 2D matrix")
    return np.real(values) if not np.any(np.imag(values)) else values


class DiagnoseCommand:
    """Print the requested diagnostics, one `name: value` line each."""

    name = "diagnose"
    help = "coherence, RIP, complement property and collision checks"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--coherence", action="store_true", help="mutual coherence of --matrix")
        parser.add_argument("--rip", type=int, metavar="K", help="RIP constant of order K of --matrix")
        parser.add_argument("--complement", action="store_true", help="complement property of --vectors")
        parser.add_argument("--collision-free", dest="collision_free", action="store_true", help="check --signal")
        parser.add_argument("--matrix", help="dictionary or sensing matrix file (columns are atoms)")
        parser.add_argument("--vectors", help="M x N measurement vectors file")
        parser.add_argument("--signal", help="1D signal file (.bin or .csv)")
        parser.add_argument("--out", help="also write diagnostics.json into this directory")

    def __init__(self, args: argparse.Namespace):
        """Initialize with parsed arguments."""
        self.args = args

    @staticmethod
    def _need(value: Any, option: str, check: str) -> Any:
        if not value:
            raise ValueError(f"{check} needs {option}")
        return value

    def run(self) -> int:
        args = self.args
        if not (args.coherence or args.rip is not None or args.complement or args.collision_free):
            raise ValueError("choose at least one of --coherence, --rip, --complement, --collision-free")

        results: Dict[str, Any] = {}
        if args.coherence:
            results["coherence"] = coherence_mu(_matrix(self._need(args.matrix, "--matrix", "--coherence")))
        if args.rip is not None:
            results["rip_delta"] = rip_delta(_matrix(self._need(args.matrix, "--matrix", "--rip")), args.rip)
            results["rip_k"] = args.rip
        if args.complement:
            check = complement_property_check(_matrix(self._need(args.vectors, "--vectors", "--complement")))
            results["complement_property"] = check.holds
            results["complement_witness"] = list(check.witness) if check.witness is not None else None
        if args.collision_free:
            signal = read_signal(self._need(args.signal, "--signal", "--collision-free"))
            check = collision_free_check(signal)
            results["collision_free"] = check.collision_free
            results["witness"] = list(check.quadruple) if check.quadruple is not None else None

        for key, value in results.items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, list):
                value = " ".join(str(v) for v in value)
            print(f"{key}: {value}")

        if args.out:
            ResultStore(Path(args.out)).write_json("diagnostics.json", results)
        return EXIT_OK
