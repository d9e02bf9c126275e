"""Constants used throughout the toolkit."""

from enum import Enum
from typing import Dict, List


class FienupVariant(str, Enum):
    """Real-space correction rules for the Fienup family."""
    ER = "er"
    HIO = "hio"
    IO = "io"
    OO = "oo"


class ModelKind(str, Enum):
    """Measurement model variants."""
    OVERSAMPLED_FOURIER = "oversampled_fourier"
    GENERAL_LINEAR = "general_linear"
    LOW_PASS_FOURIER = "low_pass_fourier"
    MULTI_PLANE = "multi_plane"


class NoiseKind(str, Enum):
    """Noise models an observation can carry."""
    NONE = "none"
    POISSON = "poisson"


class SceneKind(str, Enum):
    """Scene generators known to the benchmark harness."""
    SPARSE = "sparse"
    PHANTOM = "phantom"
    CIRCLES = "circles"
    GAUSSIAN = "gaussian"


class Algorithm(str, Enum):
    """Solver identifiers accepted by `solve` and experiment specs."""
    GS = "gs"
    ER = "er"
    HIO = "hio"
    IO = "io"
    OO = "oo"
    OSS = "oss"
    PHASELIFT = "phaselift"
    CPRL = "cprl"
    QCS = "qcs"
    GESPAR = "gespar"
    SPARSE_FIENUP = "sparse_fienup"
    TRUTH = "truth"


# Signal binary format
SIGNAL_MAGIC = b"PKSG"
SIGNAL_FORMAT_VERSION = 1

# Summary CSV format
SUMMARY_FORMAT_VERSION = 1
SUMMARY_COLUMNS: List[str] = ["solver", "trials", "successes", "rate", "ci_lo", "ci_hi", "format_version"]
TRIAL_COLUMNS: List[str] = [
    "solver",
    "trial",
    "seed",
    "success",
    "aligned_residual",
    "E",
    "R_F",
    "wall_time",
    "iterations",
    "error",
]
CSV_FLOAT_FORMAT = "%.10g"

# Alternating projection defaults
DEFAULT_BETA = 0.9
DEFAULT_OSS_STAGES = 10
DEFAULT_SHRINKWRAP_SIGMA = 1.0
DEFAULT_SHRINKWRAP_THRESHOLD = 0.2

# Harness defaults
DEFAULT_SUCCESS_THRESHOLD = 1e-4
SPARSE_SUPPORT_TOLERANCE = 1e-3  # relative to the largest magnitude
WILSON_CONFIDENCE = 0.95
PRTF_MISALIGNMENT_WARNING = 0.5

# Sparse generator value band: |value| uniform on [low, high]
SPARSE_VALUE_BANDS: Dict[str, float] = {"low": 3.0, "high": 4.0}

# Circle dictionary defaults
CIRCLE_GRID_POINTS = 225
CIRCLE_IMAGE_SIZE = 195
CIRCLE_DIAMETER = 13
CIRCLE_ACTIVE = 15

# Desk-scale guards for exhaustive diagnostics
RIP_MAX_K = 12
RIP_MAX_SUBSETS = 1_000_000
COMPLEMENT_MAX_VECTORS = 20
COLLISION_MAX_QUADRUPLES = 100_000_000

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL_FAILURE = 2

# Files written by `generate` and read back by `solve`
GENERATED_FILES: Dict[str, str] = {
    "truth": "truth.bin",
    "truth_csv": "truth.csv",
    "observation": "obs.bin",
    "support": "support.bin",
    "vectors": "vectors.bin",
    "dictionary": "dictionary.bin",
    "scene": "scene.json",
}
