"""Checkpoints: a JSON header plus named float64 arrays in one ``.npz`` file.

The header records the format version, the model configuration, the variable
vocabulary and the optimiser step.  Arrays are stored as ``param/<name>``,
``adam_m/<name>`` and ``adam_v/<name>``; ``.npz`` keeps them bit-exact.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .model import ModelConfig, ParameterStore, parameter_shapes

FORMAT_VERSION = 1


class FormatVersionMismatchError(ValueError):
    """The checkpoint does not match the expected format or configuration."""


def save(store: ParameterStore, filename) -> None:
    header = {"format_version": FORMAT_VERSION, "config": store.config.to_dict(),
              "vocab": store.vocab, "step": store.step}
    arrays = {"header": np.array(json.dumps(header, sort_keys=True))}
    for name in sorted(store.params):
        arrays[f"param/{name}"] = store.params[name]
        arrays[f"adam_m/{name}"] = store.m[name]
        arrays[f"adam_v/{name}"] = store.v[name]
    with open(filename, "wb") as f:
        np.savez(f, **arrays)


def load(filename, expected_config: Optional[ModelConfig] = None) -> ParameterStore:
    """Read a checkpoint; raise if its version or configuration is unexpected."""
    with np.load(filename, allow_pickle=False) as data:
        if "header" not in data.files:
            raise FormatVersionMismatchError("no checkpoint header")
        header = json.loads(str(data["header"]))
        if header.get("format_version") != FORMAT_VERSION:
            raise FormatVersionMismatchError(
                f"checkpoint format {header.get('format_version')}, expected {FORMAT_VERSION}")
        config = ModelConfig.from_dict(header["config"])
        if expected_config is not None and config != expected_config:
            raise FormatVersionMismatchError(
                f"checkpoint was written for {config}, not {expected_config}")
        shapes = parameter_shapes(config)
        params, m, v = {}, {}, {}
        for name, shape in shapes.items():
            try:
                params[name] = data[f"param/{name}"]
                m[name] = data[f"adam_m/{name}"]
                v[name] = data[f"adam_v/{name}"]
            except KeyError as e:
                raise FormatVersionMismatchError(f"missing tensor {name}") from e
            if params[name].shape != tuple(shape):
                raise FormatVersionMismatchError(
                    f"tensor {name} has shape {params[name].shape}, expected {shape}")
    return ParameterStore(config, params, m, v, int(header["step"]),
                          {k: int(n) for k, n in header["vocab"].items()})
