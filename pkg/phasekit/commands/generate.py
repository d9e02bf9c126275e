"""`generate` subcommand: emit a scene, its observation and solver inputs."""

import argparse
import logging
from pathlib import Path

import numpy as np

from phasekit.bench.experiment import ModelSpec, NoiseSpec, measure
from phasekit.bench.scenes import SceneSpec, generate_scene
from phasekit.core.forward import GeneralLinear
from phasekit.core.signal import Signal
from phasekit.storage.result_store import ResultStore
from phasekit.storage.signal_io import write_dictionary, write_observation
from phasekit.utils.config import get_settings
from phasekit.utils.constants import EXIT_OK, GENERATED_FILES, ModelKind, NoiseKind, SceneKind

logger = logging.getLogger(__name__)


def _given(args: argparse.Namespace, names) -> dict:
    """Only the options the user set, so model defaults stay in one place."""
    return {name: getattr(args, name) for name in names if getattr(args, name) is not None}


class GenerateCommand:
    """Generate one scene and measure it."""

    name = "generate"
    help = "generate a scene, its observation and support files"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--scene", dest="kind", choices=[k.value for k in SceneKind], default=SceneKind.SPARSE.value)
        parser.add_argument("--n", type=int, help="signal length (sparse, gaussian)")
        parser.add_argument("--k", type=int, help="number of nonzeros (sparse)")
        parser.add_argument("--size", type=int, help="phantom side length")
        parser.add_argument("--grid-points", dest="grid_points", type=int)
        parser.add_argument("--image-size", dest="image_size", type=int)
        parser.add_argument("--diameter", type=int)
        parser.add_argument("--s", type=int, help="active circles")
        parser.add_argument(
            "--model",
            choices=[k.value for k in ModelKind if k != ModelKind.MULTI_PLANE],
            default=ModelKind.OVERSAMPLED_FOURIER.value,
        )
        parser.add_argument("--oversampling", type=float)
        parser.add_argument("--m", type=int, help="Fourier grid size per axis")
        parser.add_argument("--measurements", type=int, help="general linear vector count")
        parser.add_argument("--cutoff", type=float)
        parser.add_argument("--missing-center", dest="missing_center", type=int)
        parser.add_argument("--noise", choices=[k.value for k in NoiseKind], default=NoiseKind.NONE.value)
        parser.add_argument("--photon-budget", dest="photon_budget", type=float)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out", help="output directory")

    def __init__(self, args: argparse.Namespace):
        """Initialize with parsed arguments."""
        self.args = args
        self.out = Path(args.out or get_settings().output_dir)

    def run(self) -> int:
        args = self.args
        scene_spec = SceneSpec(**_given(args, ["kind", "n", "k", "size", "grid_points", "image_size", "diameter", "s"]))
        model_spec = ModelSpec(
            kind=args.model, **_given(args, ["oversampling", "m", "measurements", "cutoff", "missing_center"])
        )
        noise_spec = NoiseSpec(kind=args.noise, **_given(args, ["photon_budget"]))

        scene = generate_scene(scene_spec, args.seed)
        model, obs = measure(scene, model_spec, noise_spec, args.seed)

        store = ResultStore(self.out)
        store.write_signal(GENERATED_FILES["truth"], scene.truth)
        if scene.truth.ndim == 1:
            store.write_signal(GENERATED_FILES["truth_csv"], scene.truth)
        write_observation(store.path(GENERATED_FILES["observation"]), obs)
        store.write_signal(GENERATED_FILES["support"], Signal(scene.support.mask.astype(float)))
        if isinstance(model, GeneralLinear):
            store.write_signal(GENERATED_FILES["vectors"], Signal(model.vectors))
        if scene.dictionary is not None:
            write_dictionary(store.path(GENERATED_FILES["dictionary"]), scene.dictionary)
        store.write_json(GENERATED_FILES["scene"], {
            "seed": args.seed,
            "scene": scene_spec.model_dump(mode="json"),
            "model": model_spec.model_dump(mode="json"),
            "noise": noise_spec.model_dump(mode="json"),
            "shape": list(scene.truth.shape),
            "observation_shape": list(obs.shape),
            "sparsity": scene.sparsity,
            "code": None if scene.code is None else np.flatnonzero(scene.code).tolist(),
        })
        logger.info("Generated %s scene of shape %s into %s", scene_spec.kind.value, scene.truth.shape, self.out)
        return EXIT_OK
