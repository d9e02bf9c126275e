"""Result directory manager for benchmark and solve runs."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

from phasekit.core.signal import Signal
from phasekit.solvers.altproj import IterateTrace
from phasekit.storage.signal_io import write_prtf_csv, write_signal, write_signal_csv, write_trace_csv
from phasekit.utils.constants import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


def _json_default(value: Any) -> Any:
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _clean_floats(value: Any) -> Any:
    """Plain Python values with non-finite floats replaced by None (strict JSON)."""
    if isinstance(value, np.ndarray):
        value = value.tolist()
    elif isinstance(value, np.bool_):
        return bool(value)
    elif isinstance(value, np.integer):
        return int(value)
    elif isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float):
        return value if np.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _clean_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean_floats(v) for v in value]
    return value


def dumps(payload: Any) -> str:
    return json.dumps(_clean_floats(payload), indent=2, sort_keys=True, default=_json_default)


class ResultStore:
    """Writes the artefacts of one run into a directory.

    Paths listed as `protected` (the run's inputs) are never overwritten.
    """

    def __init__(self, root: Union[str, Path], protected: Optional[Iterable[Union[str, Path]]] = None):
        """Initialize the store and create its directory."""
        self.root = Path(root)
        self.protected = {Path(p).resolve() for p in (protected or [])}
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        target = (self.root / name).resolve()
        if target in self.protected:
            raise ValueError(f"refusing to overwrite input file {target}")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        target = self.path(name)
        frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.debug("Wrote %s (%d rows)", target, len(frame))
        return target

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        target = self.path(name)
        target.write_text(dumps(payload) + "\n")
        logger.debug("Wrote %s", target)
        return target

    def write_signal(self, name: str, signal: Signal) -> Path:
        """Binary record, or a Signal CSV when `name` ends in .csv."""
        target = self.path(name)
        if target.suffix.lower() == ".csv":
            return write_signal_csv(target, signal)
        return write_signal(target, signal)

    def write_trace(self, name: str, trace: IterateTrace) -> Path:
        return write_trace_csv(self.path(name), trace)

    def write_prtf(self, name: str, curve: np.ndarray) -> Path:
        return write_prtf_csv(self.path(name), curve)

    def write_experiment(self, result) -> Dict[str, Path]:
        """summary.csv, trials.csv and summary.json for an ExperimentResult."""
        analytics = result.analytics()
        written = {
            "summary": self.write_frame("summary.csv", analytics.success_table()),
            "trials": self.write_frame("trials.csv", result.trial_frame()),
        }
        payload = analytics.summary()
        payload["experiment"] = result.spec.model_dump(mode="json")
        written["summary_json"] = self.write_json("summary.json", payload)
        return written
