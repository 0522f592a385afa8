"""Saving and loading trained models as JSON.

Floats are written with ``repr`` (shortest round-tripping decimal), so every
float64 weight reads back bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .data import FeatureTransform
from .mlp import Network, NetworkConfig
from .numeric import Matrix

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """The model document is unreadable or inconsistent."""


@dataclass
class SavedModel:
    network: Network
    transform: FeatureTransform
    seed: Optional[int] = None
    training: dict = field(default_factory=dict)
    run_config: dict = field(default_factory=dict)

    def predict(self, distance: float, frequency: float) -> float:
        from .mlp import predict

        return predict(self.network, self.transform.point(distance, frequency))[0, 0]


def to_dict(model: SavedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "config": model.network.config.to_dict(),
        "weights": [w.tolist() for w in model.network.weights],
        "seed": model.seed,
        "preprocessing": model.transform.to_dict(),
        "training": model.training,
        "run_config": model.run_config,
    }


def from_dict(d: dict) -> SavedModel:
    try:
        if d["format_version"] != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {d['format_version']}")
        config = NetworkConfig.from_dict(d["config"])
        weights = tuple(Matrix.from_rows(w) for w in d["weights"])
        for w in weights:
            if not all(math.isfinite(v) for v in w.data):
                raise ModelFormatError("model weights contain non-finite values")
        net = Network(config, weights)
        transform = FeatureTransform.from_dict(d["preprocessing"])
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    return SavedModel(net, transform, d.get("seed"), d.get("training", {}), d.get("run_config", {}))


def dumps(model: SavedModel) -> str:
    return json.dumps(to_dict(model), indent=1, sort_keys=True, allow_nan=False) + "\n"


def save(model: SavedModel, path) -> Path:
    path = Path(path)
    path.write_text(dumps(model), encoding="utf-8")
    return path


def load(path) -> SavedModel:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path}: not UTF-8 text") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    return from_dict(d)
