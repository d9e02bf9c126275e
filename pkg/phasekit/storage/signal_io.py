"""Binary and CSV codecs for signals, observations, dictionaries and traces.

Binary record layout (little endian):
    b"PKSG" | version u8 | ndim u8 | dims u64 * ndim | re/im float64 pairs
A file is a concatenation of records.
"""

import json
import logging
import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from phasekit.core.forward import Observation
from phasekit.core.signal import Signal, SupportMask
from phasekit.solvers.altproj import IterateTrace
from phasekit.solvers.greedy import Dictionary
from phasekit.utils.constants import CSV_FLOAT_FORMAT, SIGNAL_FORMAT_VERSION, SIGNAL_MAGIC
from phasekit.utils.errors import SignalFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_HEADER = struct.Struct("<4sBB")


def encode_signal(signal: Signal) -> bytes:
    values = np.ascontiguousarray(signal.values, dtype="<c16")
    dims = struct.pack(f"<{signal.ndim}Q", *signal.shape)
    return _HEADER.pack(SIGNAL_MAGIC, SIGNAL_FORMAT_VERSION, signal.ndim) + dims + values.tobytes()


def decode_signals(data: bytes) -> List[Signal]:
    """Every record in `data`, in order."""
    signals = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < _HEADER.size:
            raise SignalFormatError(f"truncated record header at byte {offset}")
        magic, version, ndim = _HEADER.unpack_from(data, offset)
        if magic != SIGNAL_MAGIC:
            raise SignalFormatError(f"bad magic {magic!r} at byte {offset}")
        if version != SIGNAL_FORMAT_VERSION:
            raise SignalFormatError(f"unsupported signal format version {version}")
        if ndim not in (1, 2):
            raise SignalFormatError(f"signals are 1D or 2D, record says {ndim}")
        offset += _HEADER.size
        dims_size = 8 * ndim
        if len(data) - offset < dims_size:
            raise SignalFormatError("truncated dimension block")
        shape = struct.unpack_from(f"<{ndim}Q", data, offset)
        offset += dims_size
        count = int(np.prod(shape))
        payload = 16 * count
        if count == 0 or len(data) - offset < payload:
            raise SignalFormatError(f"record of shape {shape} has a missing or empty payload")
        values = np.frombuffer(data, dtype="<c16", count=count, offset=offset).reshape(shape)
        offset += payload
        signals.append(Signal(values))
    return signals


def write_signals(path: PathLike, signals: Sequence[Signal]) -> Path:
    path = Path(path)
    path.write_bytes(b"".join(encode_signal(s) for s in signals))
    logger.debug("Wrote %d signal record(s) to %s", len(signals), path)
    return path


def read_signals(path: PathLike) -> List[Signal]:
    signals = decode_signals(Path(path).read_bytes())
    if not signals:
        raise SignalFormatError(f"{path} contains no signal records")
    return signals


def write_signal(path: PathLike, signal: Signal) -> Path:
    return write_signals(path, [signal])


def read_signal(path: PathLike) -> Signal:
    """A signal from a binary file (first record) or a Signal CSV (by suffix)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_signal_csv(path)
    return read_signals(path)[0]


def _index_columns(ndim: int) -> List[str]:
    return [f"i{axis}" for axis in range(ndim)]


def _index_frame(shape) -> pd.DataFrame:
    index = np.indices(shape).reshape(len(shape), -1)
    return pd.DataFrame({name: index[axis] for axis, name in enumerate(_index_columns(len(shape)))})


def _shape_from_index(frame: pd.DataFrame, columns: List[str]) -> tuple:
    if not columns:
        raise SignalFormatError("CSV has no index columns")
    if (frame[columns] < 0).any().any():
        raise SignalFormatError("negative sample index")
    shape = tuple(int(frame[c].max()) + 1 for c in columns)
    if len(frame) != int(np.prod(shape)) or frame.duplicated(subset=columns).any():
        raise SignalFormatError(f"CSV does not list every sample of a {shape} grid exactly once")
    return shape


def _read_indexed_csv(path: PathLike, value_columns: List[str]) -> tuple:
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SignalFormatError(f"cannot parse {path}: {exc}") from exc
    missing = [c for c in value_columns if c not in frame.columns]
    if missing:
        raise SignalFormatError(f"{path} lacks column(s) {', '.join(missing)}")
    columns = [c for c in ("i0", "i1") if c in frame.columns]
    shape = _shape_from_index(frame, columns)
    flat = np.ravel_multi_index(tuple(frame[c].to_numpy() for c in columns), shape)
    return frame, shape, flat


def write_signal_csv(path: PathLike, signal: Signal) -> Path:
    frame = _index_frame(signal.shape)
    frame["re"] = np.real(signal.flat())
    frame["im"] = np.imag(signal.flat())
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return Path(path)


def read_signal_csv(path: PathLike) -> Signal:
    frame, shape, flat = _read_indexed_csv(path, ["re", "im"])
    values = np.zeros(int(np.prod(shape)), dtype=np.complex128)
    values[flat] = frame["re"].to_numpy(dtype=float) + 1j * frame["im"].to_numpy(dtype=float)
    return Signal(values.reshape(shape))


def write_observation_csv(path: PathLike, obs: Observation) -> Path:
    frame = _index_frame(obs.shape)
    frame["y"] = obs.y.ravel()
    frame["valid"] = obs.valid_mask.ravel().astype(int)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return Path(path)


def read_observation_csv(path: PathLike) -> Observation:
    frame, shape, flat = _read_indexed_csv(path, ["y"])
    y = np.zeros(int(np.prod(shape)))
    y[flat] = frame["y"].to_numpy(dtype=float)
    valid = np.ones(y.size, dtype=bool)
    if "valid" in frame.columns:
        valid[flat] = frame["valid"].to_numpy() != 0
    return Observation(y.reshape(shape), valid.reshape(shape))


def write_observation(path: PathLike, obs: Observation) -> Path:
    """Binary observation: intensities, then the validity mask as 0/1."""
    if Path(path).suffix.lower() == ".csv":
        return write_observation_csv(path, obs)
    return write_signals(path, [Signal(obs.y), Signal(obs.valid_mask.astype(float))])


def read_observation(path: PathLike) -> Observation:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_observation_csv(path)
    records = read_signals(path)
    y = records[0].values
    if np.any(np.imag(y) != 0):
        raise SignalFormatError("observation intensities must be real")
    valid = None
    if len(records) > 1:
        if records[1].shape != records[0].shape:
            raise SignalFormatError("validity mask shape differs from the intensities")
        valid = np.real(records[1].values) != 0
    return Observation(np.real(y), valid)


def read_support(path: PathLike) -> SupportMask:
    """Support mask from any signal file: nonzero samples are in support."""
    return SupportMask(np.abs(read_signal(path).values) > 0)


def write_dictionary(path: PathLike, dictionary: Dictionary) -> Path:
    """One record per atom plus a JSON sidecar next to `path`."""
    path = Path(path)
    write_signals(path, [Signal(dictionary.psi[:, j]) for j in range(dictionary.atoms)])
    sidecar = {"n": dictionary.n, "atoms": dictionary.atoms, "metadata": dictionary.metadata}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path


def read_dictionary(path: PathLike) -> Dictionary:
    path = Path(path)
    atoms = read_signals(path)
    if len({a.shape for a in atoms}) != 1 or atoms[0].ndim != 1:
        raise SignalFormatError("dictionary atoms must be 1D records of equal length")
    psi = np.stack([a.values for a in atoms], axis=1)
    if not np.any(np.imag(psi)):
        psi = np.real(psi)
    metadata = []
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        info = json.loads(sidecar.read_text())
        metadata = info.get("metadata", [])
    return Dictionary(psi, metadata)


def write_trace_csv(path: PathLike, trace: IterateTrace) -> Path:
    trace.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return Path(path)


def write_prtf_csv(path: PathLike, curve: np.ndarray) -> Path:
    curve = np.asarray(curve, dtype=float)
    frame = _index_frame(curve.shape)
    frame["value"] = curve.ravel()
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return Path(path)
