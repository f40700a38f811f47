"""Linear classifier head shared by both model kinds, plus checkpoint IO."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import EmbeddingFormatError

CHECKPOINT_FORMAT = "nerduo-head"
CHECKPOINT_VERSION = 1


@dataclass
class LinearHead:
    """Dense map from input vectors to one logit per output label."""

    weights: np.ndarray  # (n_out, in_dim)
    bias: np.ndarray  # (n_out,)
    out_labels: tuple[str, ...]

    def __post_init__(self):
        self.out_labels = tuple(self.out_labels)
        if self.weights.shape != (len(self.out_labels), self.in_dim):
            raise ValueError("weight shape does not match the output labels")
        if self.bias.shape != (len(self.out_labels),):
            raise ValueError("bias shape does not match the output labels")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("head parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return len(self.out_labels)

    def params(self) -> dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    def copy(self) -> "LinearHead":
        return LinearHead(self.weights.copy(), self.bias.copy(), self.out_labels)


def init_head(out_labels, in_dim: int, seed: int) -> LinearHead:
    """Seeded uniform init in [-1/sqrt(d), 1/sqrt(d)] (fan-in scaling)."""
    out_labels = tuple(out_labels)
    bound = 1.0 / np.sqrt(in_dim)
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-bound, bound, size=(len(out_labels), in_dim))
    bias = rng.uniform(-bound, bound, size=len(out_labels))
    return LinearHead(weights=weights, bias=bias, out_labels=out_labels)


def forward(head: LinearHead, inputs: np.ndarray) -> np.ndarray:
    """Row-wise logits: inputs @ W.T + bias, shape (n, n_out)."""
    if inputs.ndim != 2 or inputs.shape[1] != head.in_dim:
        raise ValueError(
            f"input dim {inputs.shape[1] if inputs.ndim == 2 else inputs.shape} "
            f"does not match head dim {head.in_dim}"
        )
    return inputs @ head.weights.T + head.bias


def config_digest(config: dict) -> str:
    """Stable sha256 over a canonical JSON rendering of a config map."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_checkpoint(path, head: LinearHead, model_kind: str, seed: int, config: dict) -> None:
    """Write a self-describing JSON checkpoint (byte-stable for fixed inputs)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model_kind": model_kind,
        "out_labels": list(head.out_labels),
        "dim": head.in_dim,
        "weights": [float(x) for x in head.weights.reshape(-1)],
        "bias": [float(x) for x in head.bias],
        "seed": seed,
        "config_hash": config_digest(config),
        "config": config,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Read a checkpoint; returns (head, model_kind, config)."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise EmbeddingFormatError(f"{path}: not a {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION} file")
    labels = tuple(payload["out_labels"])
    dim = payload["dim"]
    weights = np.asarray(payload["weights"], dtype=np.float64).reshape(len(labels), dim)
    bias = np.asarray(payload["bias"], dtype=np.float64)
    head = LinearHead(weights=weights, bias=bias, out_labels=labels)
    return head, payload["model_kind"], payload.get("config", {})
