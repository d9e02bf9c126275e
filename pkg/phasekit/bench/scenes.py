"""Scene generators for the benchmark harness."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from phasekit.core.signal import Signal, SupportMask
from phasekit.solvers.greedy import Dictionary
from phasekit.utils.constants import (
    CIRCLE_ACTIVE,
    CIRCLE_DIAMETER,
    CIRCLE_GRID_POINTS,
    CIRCLE_IMAGE_SIZE,
    SPARSE_VALUE_BANDS,
    SceneKind,
)
from phasekit.utils.helpers import make_rng

logger = logging.getLogger(__name__)


def gen_sparse_vector(n: int, k: int, seed: int) -> Signal:
    """Real length-n vector with k nonzeros of modulus uniform on [3, 4] and random sign."""
    if k < 0 or k > n:
        raise ValueError(f"sparsity k={k} must be in [0, {n}]")
    rng = make_rng(seed)
    x = np.zeros(n)
    support = rng.choice(n, size=k, replace=False)
    magnitude = rng.uniform(SPARSE_VALUE_BANDS["low"], SPARSE_VALUE_BANDS["high"], size=k)
    sign = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    x[support] = sign * magnitude
    return Signal(x)


def gen_gaussian_vector(n: int, seed: int) -> Signal:
    """Dense complex Gaussian vector with unit-variance real and imaginary parts."""
    rng = make_rng(seed)
    return Signal(rng.standard_normal(n) + 1j * rng.standard_normal(n))


def circle_dictionary(
    grid_points: int = CIRCLE_GRID_POINTS,
    image_size: int = CIRCLE_IMAGE_SIZE,
    diameter: int = CIRCLE_DIAMETER,
) -> Dictionary:
    """Disc atoms centred on a square grid of cells, flattened row-major.

    Atom metadata records the grid cell, the centre in pixels and the diameter.
    """
    side = math.isqrt(grid_points)
    if side * side != grid_points or side < 1:
        raise ValueError(f"grid points must form a square grid, got {grid_points}")
    pitch = image_size // side
    if pitch < diameter or diameter < 1:
        raise ValueError(
            f"{side}x{side} circles of diameter {diameter} do not fit a {image_size}-pixel image"
        )

    rows, cols = np.mgrid[0:image_size, 0:image_size]
    radius = diameter / 2.0
    atoms, metadata = [], []
    for i in range(side):
        for j in range(side):
            cy = i * pitch + (pitch - 1) / 2.0
            cx = j * pitch + (pitch - 1) / 2.0
            disc = (rows - cy) ** 2 + (cols - cx) ** 2 <= radius * radius
            atoms.append(disc.ravel().astype(np.float64))
            metadata.append({"row": i, "col": j, "center": [cy, cx], "diameter": diameter})
    return Dictionary(np.stack(atoms, axis=1), metadata)


def gen_circle_image(
    grid_points: int = CIRCLE_GRID_POINTS,
    image_size: int = CIRCLE_IMAGE_SIZE,
    diameter: int = CIRCLE_DIAMETER,
    s: int = CIRCLE_ACTIVE,
    seed: int = 0,
) -> Tuple[Signal, Dictionary, np.ndarray]:
    """Image of s circles with random positive values; returns (image, dictionary, code)."""
    dictionary = circle_dictionary(grid_points, image_size, diameter)
    if not 0 <= s <= dictionary.atoms:
        raise ValueError(f"s={s} must be in [0, {dictionary.atoms}]")
    rng = make_rng(seed)
    alpha = np.zeros(dictionary.atoms)
    alpha[rng.choice(dictionary.atoms, size=s, replace=False)] = rng.uniform(1.0, 2.0, size=s)
    image = (dictionary.psi @ alpha).reshape(image_size, image_size)
    return Signal(np.real(image)), dictionary, alpha


def gen_phantom(size: int, seed: int) -> Signal:
    """Nonnegative vesicle-like blob: a textured ellipse with a few denser inclusions.

    Semi-axes are drawn from [0.18, 0.24] of the size, so the support spans
    less than half the image along each axis. Samples outside are exactly 0.
    """
    if size < 32:
        raise ValueError(f"phantom size must be at least 32, got {size}")
    rng = make_rng(seed)
    a, b = rng.uniform(0.18, 0.24, size=2) * size
    angle = rng.uniform(0.0, np.pi)
    center = (size - 1) / 2.0
    rows, cols = np.mgrid[0:size, 0:size] - center
    u = rows * np.cos(angle) + cols * np.sin(angle)
    v = -rows * np.sin(angle) + cols * np.cos(angle)
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0

    texture = ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma=2.0)
    texture = (texture - texture.min()) / max(float(np.ptp(texture)), 1e-12)
    image = 1.0 + 0.5 * texture

    for _ in range(3):
        r = rng.uniform(0.1, 0.25) * min(a, b)
        offset = rng.uniform(-0.5, 0.5, size=2) * np.array([a, b])
        blob = (rows - offset[0]) ** 2 + (cols - offset[1]) ** 2 <= r * r
        image = image + 0.8 * blob

    return Signal(np.where(inside, image, 0.0))


class SceneSpec(BaseModel):
    """Scene descriptor of an experiment; only the fields of `kind` are used."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SceneKind = SceneKind.SPARSE
    n: int = Field(default=64, ge=1)
    k: int = Field(default=5, ge=0)
    size: int = Field(default=64, ge=32)
    grid_points: int = Field(default=CIRCLE_GRID_POINTS, ge=1)
    image_size: int = Field(default=CIRCLE_IMAGE_SIZE, ge=1)
    diameter: int = Field(default=CIRCLE_DIAMETER, ge=1)
    s: int = Field(default=CIRCLE_ACTIVE, ge=0)


@dataclass
class Scene:
    """Ground truth of one trial plus what the solvers may know about it."""

    truth: Signal
    dictionary: Optional[Dictionary] = None
    code: Optional[np.ndarray] = None

    @property
    def support(self) -> SupportMask:
        if self.truth.norm() == 0:
            return SupportMask.full(self.truth.shape)
        return SupportMask.from_signal(self.truth)

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(self.truth.values))


def generate_scene(spec: SceneSpec, seed: int) -> Scene:
    if spec.kind == SceneKind.SPARSE:
        return Scene(gen_sparse_vector(spec.n, spec.k, seed))
    if spec.kind == SceneKind.GAUSSIAN:
        return Scene(gen_gaussian_vector(spec.n, seed))
    if spec.kind == SceneKind.PHANTOM:
        return Scene(gen_phantom(spec.size, seed))
    image, dictionary, code = gen_circle_image(spec.grid_points, spec.image_size, spec.diameter, spec.s, seed)
    return Scene(image, dictionary, code)
