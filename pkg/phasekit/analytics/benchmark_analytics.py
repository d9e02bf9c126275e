"""Analytics over per-trial benchmark reports: success rates and paired comparisons."""

import logging
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from phasekit.utils.constants import SUMMARY_COLUMNS, SUMMARY_FORMAT_VERSION
from phasekit.utils.helpers import wilson_interval

logger = logging.getLogger(__name__)


def _none_if_nan(value: float) -> Optional[float]:
    return None if value is None or not np.isfinite(value) else float(value)


class BenchmarkAnalytics:
    """Summaries of one experiment's trial table.

    The frame holds one row per (solver, trial[, sweep value]) with at least
    the columns solver, trial, success, E and aligned_residual.
    """

    def __init__(self, trials: pd.DataFrame, parameter: Optional[str] = None, solvers: Optional[Sequence[str]] = None):
        """Initialize with the trial table, the swept parameter name and the solver order."""
        self.trials = trials
        self.parameter = parameter
        if solvers is None:
            solvers = list(pd.unique(trials["solver"])) if not trials.empty else []
        self.solvers = list(solvers)

    def _sweep_values(self) -> List[Any]:
        if self.parameter is None or self.trials.empty:
            return [None]
        return list(pd.unique(self.trials[self.parameter]))

    def _select(self, solver: str, value: Any) -> pd.DataFrame:
        rows = self.trials[self.trials["solver"] == solver]
        if self.parameter is not None:
            rows = rows[rows[self.parameter] == value]
        return rows

    def success_table(self) -> pd.DataFrame:
        """Per solver (and sweep value): trials, successes, rate and Wilson interval."""
        records = []
        for solver in self.solvers:
            for value in self._sweep_values():
                rows = self._select(solver, value)
                trials = int(len(rows))
                if trials == 0:
                    continue
                successes = int(rows["success"].astype(bool).sum())
                lo, hi = wilson_interval(successes, trials)
                record: Dict[str, Any] = {"solver": solver}
                if self.parameter is not None:
                    record[self.parameter] = value
                record.update({
                    "trials": trials,
                    "successes": successes,
                    "rate": successes / trials,
                    "ci_lo": lo,
                    "ci_hi": hi,
                    "format_version": SUMMARY_FORMAT_VERSION,
                })
                records.append(record)
        parameter = [self.parameter] if self.parameter is not None else []
        return pd.DataFrame(records, columns=[SUMMARY_COLUMNS[0], *parameter, *SUMMARY_COLUMNS[1:]])

    def medians(self, metric: str = "E") -> Dict[str, Dict[str, Optional[float]]]:
        """Median of `metric` per solver, keyed by sweep value (as a string)."""
        result: Dict[str, Dict[str, Optional[float]]] = {}
        for solver in self.solvers:
            result[solver] = {}
            for value in self._sweep_values():
                rows = self._select(solver, value)
                values = rows[metric].to_numpy(dtype=float)
                median = float(np.nanmedian(values)) if np.isfinite(values).any() else float("nan")
                result[solver][str(value)] = _none_if_nan(median)
        return result

    def paired_comparisons(self, metric: str = "E") -> List[Dict[str, Any]]:
        """Win rate of solver A over B on `metric`, trial by trial on the same scenes.

        A failed run (NaN) loses against any finite value.
        """
        comparisons = []
        for value in self._sweep_values():
            for a, b in permutations(self.solvers, 2):
                left = self._select(a, value)[["trial", metric]]
                right = self._select(b, value)[["trial", metric]]
                paired = left.merge(right, on="trial", suffixes=("_a", "_b"))
                if paired.empty:
                    continue
                score_a = paired[f"{metric}_a"].to_numpy(dtype=float)
                score_b = paired[f"{metric}_b"].to_numpy(dtype=float)
                wins = np.where(np.isnan(score_a), np.inf, score_a) < np.where(np.isnan(score_b), np.inf, score_b)
                comparisons.append({
                    "a": a,
                    "b": b,
                    "parameter": self.parameter,
                    "value": value,
                    "metric": metric,
                    "pairs": int(len(paired)),
                    "win_rate": float(wins.mean()),
                    "median_a": _none_if_nan(float(np.nanmedian(score_a))) if np.isfinite(score_a).any() else None,
                    "median_b": _none_if_nan(float(np.nanmedian(score_b))) if np.isfinite(score_b).any() else None,
                })
        return comparisons

    def failure_count(self) -> int:
        if "error" not in self.trials or self.trials.empty:
            return 0
        return int((self.trials["error"].fillna("") != "").sum())

    def summary(self) -> Dict[str, Any]:
        """JSON-ready summary: success table, medians and paired comparisons."""
        table = self.success_table()
        return {
            "format_version": SUMMARY_FORMAT_VERSION,
            "parameter": self.parameter,
            "success": table.to_dict("records"),
            "median_E": self.medians("E"),
            "median_aligned_residual": self.medians("aligned_residual"),
            "paired": self.paired_comparisons("E"),
            "failures": self.failure_count(),
        }
