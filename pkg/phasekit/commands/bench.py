"""`bench` subcommand: run an experiment spec and write its summary."""

import argparse
import json
import logging
from pathlib import Path

from phasekit.bench.experiment import ExperimentSpec, run_experiment
from phasekit.storage.result_store import ResultStore
from phasekit.utils.config import get_settings
from phasekit.utils.constants import EXIT_OK

logger = logging.getLogger(__name__)


class BenchCommand:
    """Run a Monte-Carlo experiment described by a JSON spec."""

    name = "bench"
    help = "run an experiment spec and write summary.csv, trials.csv and summary.json"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--spec", help="ExperimentSpec JSON file")
        parser.add_argument("--out", help="output directory")
        parser.add_argument("--threads", type=int, help="worker threads (overrides PHASEKIT_THREADS)")
        parser.add_argument("--schema", action="store_true", help="print the ExperimentSpec JSON schema and exit")

    def __init__(self, args: argparse.Namespace):
        """Initialize with parsed arguments."""
        self.args = args

    def run(self) -> int:
        args = self.args
        if args.schema:
            print(json.dumps(ExperimentSpec.model_json_schema(), indent=2))
            return EXIT_OK
        if not args.spec:
            raise ValueError("bench needs --spec (or --schema)")
        if args.threads is not None and args.threads < 1:
            raise ValueError("--threads must be at least 1")

        spec = ExperimentSpec.model_validate_json(Path(args.spec).read_text())
        out = Path(args.out or get_settings().output_dir)
        store = ResultStore(out, protected=[args.spec])
        result = run_experiment(spec, threads=args.threads)
        store.write_experiment(result)

        for row in result.analytics().success_table().to_dict("records"):
            logger.info("%s", ", ".join(f"{k}={v}" for k, v in row.items() if k != "format_version"))
        return EXIT_OK
