"""Sine-activated coordinate MLP with hand-written exact reverse-mode gradients.

Every sine layer L0..L{depth-1} applies sin(omega * (W a + b)) — the frequency
factor multiplies each pre-activation, which is what the U(±sqrt(6/fan)/omega)
weight rule compensates for, keeping activation distributions stable across
depth. The final layer L{depth} is linear with a single output. "depth" counts
the sine layers, so a depth-4 network has five weight/bias pairs L0..L4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CheckpointError, ConfigurationError
from .model import CoordinateGrid

__all__ = [
    "SirenNetwork",
    "init_network",
    "forward",
    "forward_with_cache",
    "backward",
    "flatten_params",
    "unflatten_params",
    "layer_names",
    "save_checkpoint",
    "load_checkpoint",
]

IN_FEATURES = 2


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SirenNetwork:
    """Immutable parameter container. weights[i] has shape (fan_out, fan_in)."""

    weights: tuple
    biases: tuple
    omega: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(_frozen(w) for w in self.weights))
        object.__setattr__(self, "biases", tuple(_frozen(b) for b in self.biases))

    @property
    def depth(self) -> int:
        return len(self.weights) - 1

    @property
    def width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def with_params(self, weights, biases) -> "SirenNetwork":
        return SirenNetwork(tuple(weights), tuple(biases), self.omega, self.seed)


def init_network(
    depth: int,
    width: int,
    omega: float,
    seed: int,
    zero_final: bool = True,
) -> SirenNetwork:
    """Sine-network initialization.

    Every sine layer draws weights and biases ~ U(-b, b) with
    b = sqrt(6/fan_in)/omega — the same omega-scaled rule for the coordinate
    layer as for the hidden layers, so all layers start at norms an Adam run
    can actually displace, which is what makes the trained-vs-initial
    similarity diagnostics informative. The output layer (weights and bias) is
    zero-initialized by default so an untrained network maps every coordinate
    to exactly 0 and training starts exactly at the base model; pass
    zero_final=False for the uniform rule on the output layer too.
    """
    if depth < 1 or width < 1:
        raise ConfigurationError(f"need depth >= 1 and width >= 1, got depth={depth} width={width}")
    if omega <= 0:
        raise ConfigurationError(f"omega must be positive, got {omega}")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    fan_in = IN_FEATURES
    bias_bound = np.sqrt(6.0 / width) / omega  # biases scale with layer width
    for _ in range(depth):
        bound = np.sqrt(6.0 / fan_in) / omega
        weights.append(rng.uniform(-bound, bound, size=(width, fan_in)))
        biases.append(rng.uniform(-bias_bound, bias_bound, size=width))
        fan_in = width
    if zero_final:
        weights.append(np.zeros((1, width)))
        biases.append(np.zeros(1))
    else:
        bound = np.sqrt(6.0 / width) / omega
        weights.append(rng.uniform(-bound, bound, size=(1, width)))
        biases.append(rng.uniform(-bound, bound, size=1))
    return SirenNetwork(tuple(weights), tuple(biases), float(omega), int(seed))


def forward_with_cache(net: SirenNetwork, grid: CoordinateGrid):
    """Network output at every grid point plus the activations backward needs.

    Returns (out, cache): out has shape (nz*nx,); cache holds the per-layer
    inputs and pre-activations.
    """
    a = grid.points
    inputs = []
    preacts = []
    for i in range(net.depth):
        inputs.append(a)
        z = a @ net.weights[i].T + net.biases[i]
        preacts.append(z)
        a = np.sin(net.omega * z)
    inputs.append(a)
    out = a @ net.weights[-1].T + net.biases[-1]
    return out[:, 0], (inputs, preacts)


def forward(net: SirenNetwork, grid: CoordinateGrid) -> np.ndarray:
    out, _ = forward_with_cache(net, grid)
    return out


def backward(
    net: SirenNetwork,
    grid: CoordinateGrid,
    output_gradient: np.ndarray,
    cache=None,
):
    """Exact reverse-mode gradients of sum(output_gradient * forward(net, grid)).

    Returns (weight_grads, bias_grads) shaped like net.weights / net.biases.
    Pass the cache from forward_with_cache to skip the recomputation.
    """
    g = np.asarray(output_gradient, dtype=np.float64)
    if g.shape != (grid.points.shape[0],):
        raise ConfigurationError(
            f"output_gradient shape {g.shape} != ({grid.points.shape[0]},)"
        )
    if cache is None:
        _, cache = forward_with_cache(net, grid)
    inputs, preacts = cache

    weight_grads = [None] * (net.depth + 1)
    bias_grads = [None] * (net.depth + 1)

    dy = g[:, None]
    weight_grads[-1] = dy.T @ inputs[-1]
    bias_grads[-1] = dy.sum(axis=0)
    da = dy @ net.weights[-1]
    for i in range(net.depth - 1, -1, -1):
        dz = da * (net.omega * np.cos(net.omega * preacts[i]))
        weight_grads[i] = dz.T @ inputs[i]
        bias_grads[i] = dz.sum(axis=0)
        if i > 0:
            da = dz @ net.weights[i]
    return weight_grads, bias_grads


def flatten_params(net: SirenNetwork) -> np.ndarray:
    """All parameters as one float64 vector, layer order W0 b0 W1 b1 ..."""
    parts = []
    for w, b in zip(net.weights, net.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def unflatten_params(net: SirenNetwork, flat: np.ndarray) -> SirenNetwork:
    """Rebuild a network with the same architecture from a flat vector."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (net.n_params,):
        raise ConfigurationError(f"flat vector has {flat.size} entries, expected {net.n_params}")
    weights = []
    biases = []
    pos = 0
    for w, b in zip(net.weights, net.biases):
        weights.append(flat[pos : pos + w.size].reshape(w.shape))
        pos += w.size
        biases.append(flat[pos : pos + b.size].reshape(b.shape))
        pos += b.size
    return net.with_params(weights, biases)


def flatten_grads(weight_grads, bias_grads) -> np.ndarray:
    parts = []
    for w, b in zip(weight_grads, bias_grads):
        parts.append(np.asarray(w).ravel())
        parts.append(np.asarray(b).ravel())
    return np.concatenate(parts)


def layer_names(net: SirenNetwork) -> list[str]:
    return [f"L{i}" for i in range(net.depth + 1)]


def save_checkpoint(net: SirenNetwork, path: str | Path) -> Path:
    """Flat float64 little-endian parameter vector plus a JSON header sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    flat = flatten_params(net)
    flat.astype("<f8").tofile(path)
    header = {
        "depth": net.depth,
        "width": net.width,
        "omega": net.omega,
        "seed": net.seed,
        "n_params": int(flat.size),
    }
    path.with_name(path.name + ".json").write_text(json.dumps(header, indent=2) + "\n")
    return path


def load_checkpoint(path: str | Path) -> SirenNetwork:
    path = Path(path)
    header_path = path.with_name(path.name + ".json")
    if not header_path.exists():
        raise CheckpointError(f"missing checkpoint header {header_path}")
    header = json.loads(header_path.read_text())
    for key in ("depth", "width", "omega", "seed", "n_params"):
        if key not in header:
            raise CheckpointError(f"checkpoint header missing key '{key}'")
    flat = np.fromfile(path, dtype="<f8")
    if flat.size != header["n_params"]:
        raise CheckpointError(
            f"{path} holds {flat.size} parameters, header says {header['n_params']}"
        )
    skeleton = init_network(header["depth"], header["width"], header["omega"], header["seed"])
    if skeleton.n_params != flat.size:
        raise CheckpointError(
            f"architecture depth={header['depth']} width={header['width']} implies "
            f"{skeleton.n_params} parameters, file holds {flat.size}"
        )
    return unflatten_params(skeleton, flat)
