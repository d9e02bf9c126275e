"""`solve` subcommand: run one solver on one observation."""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from phasekit.bench.registry import TrialContext, get_solver, run_solver
from phasekit.core.forward import GeneralLinear, model_from_observation
from phasekit.diagnostics.metrics import evaluate_reconstruction
from phasekit.storage.result_store import ResultStore
from phasekit.storage.signal_io import read_dictionary, read_observation, read_signal, read_support
from phasekit.utils.config import get_settings
from phasekit.utils.constants import EXIT_NUMERICAL_FAILURE, EXIT_OK, Algorithm
from phasekit.utils.errors import NumericalFailure

logger = logging.getLogger(__name__)


class SolveCommand:
    """Reconstruct a signal from an observation file and report its metrics."""

    name = "solve"
    help = "run one solver on an observation and write recon.bin and metrics.json"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--alg", required=True, choices=[a.value for a in Algorithm if a != Algorithm.TRUTH])
        parser.add_argument("--obs", required=True, help="observation file (.bin or .csv)")
        parser.add_argument("--support", help="support mask file; nonzero samples are in support")
        parser.add_argument("--magnitude", help="object-domain magnitude for gs")
        parser.add_argument("--vectors", help="K x N measurement vectors; Fourier measurements when absent")
        parser.add_argument("--dictionary", help="dictionary file for sparse_fienup")
        parser.add_argument("--truth", help="true signal, enables aligned residual and E")
        parser.add_argument("--n", type=int, help="signal length for 1D Fourier lifted/greedy solvers")
        parser.add_argument("--sparsity", type=int)
        parser.add_argument("--config", help="JSON file of solver parameters")
        parser.add_argument("--params", help="JSON object of solver parameters, applied after --config")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out", help="output directory")

    def __init__(self, args: argparse.Namespace):
        """Initialize with parsed arguments."""
        self.args = args
        self.out = Path(args.out or get_settings().output_dir)

    def _params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {}
        if self.args.config:
            params.update(json.loads(Path(self.args.config).read_text()))
        if self.args.params:
            params.update(json.loads(self.args.params))
        return params

    def _inputs(self) -> List[str]:
        names = ["obs", "support", "magnitude", "vectors", "dictionary", "truth", "config"]
        return [getattr(self.args, n) for n in names if getattr(self.args, n)]

    def run(self) -> int:
        args = self.args
        params = self._params()
        get_solver(args.alg).validate(params)

        obs = read_observation(args.obs)
        model = GeneralLinear(read_signal(args.vectors).values) if args.vectors else model_from_observation(obs)
        truth = read_signal(args.truth) if args.truth else None
        ctx = TrialContext(
            obs,
            model,
            args.seed,
            params,
            support=read_support(args.support) if args.support else None,
            n=args.n if args.n is not None else (truth.size if truth is not None else None),
            sparsity=args.sparsity,
            magnitude=np.abs(read_signal(args.magnitude).values) if args.magnitude else None,
            dictionary=read_dictionary(args.dictionary) if args.dictionary else None,
            truth=truth,
        )

        store = ResultStore(self.out, protected=self._inputs())
        try:
            outcome = run_solver(args.alg, ctx)
        except NumericalFailure as exc:
            logger.error("%s failed: %s", args.alg, exc)
            store.write_json("metrics.json", {"algorithm": args.alg, "seed": args.seed, "error": str(exc)})
            return EXIT_NUMERICAL_FAILURE

        recon = outcome.reconstruction
        report = evaluate_reconstruction(
            recon, obs, truth, model if isinstance(model, GeneralLinear) else None
        )
        store.write_signal("recon.bin", recon)
        if outcome.trace is not None:
            store.write_trace("trace.csv", outcome.trace)
        metrics = report.to_dict()
        metrics.update({"algorithm": args.alg, "seed": args.seed, "iterations": outcome.iterations, "params": params})
        store.write_json("metrics.json", metrics)
        logger.info("%s finished after %d iterations (R_F=%.4g)", args.alg, outcome.iterations, report.R_F)
        return EXIT_OK
