"""Fixed-topology feedforward policy network.

A genome is a flat float64 vector holding every weight of the network, layer by
layer; within a layer the block is a row-major ``(n_out, n_in)`` matrix, i.e.
output-neuron major. There are no biases, so the default 16-10-10-4 shape has
exactly 300 parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ShapeError

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class NetworkShape:
    layer_sizes: tuple[int, ...] = (16, 10, 10, 4)
    activation: str = "relu"
    _slices: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ShapeError("a network needs at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ShapeError(f"layer sizes must be positive, got {sizes}")
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        object.__setattr__(self, "layer_sizes", sizes)
        slices = []
        start = 0
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            slices.append((start, start + n_in * n_out, n_out, n_in))
            start += n_in * n_out
        object.__setattr__(self, "_slices", tuple(slices))

    @property
    def parameter_count(self) -> int:
        return self._slices[-1][1]

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def matrices(self, genome: np.ndarray) -> list[np.ndarray]:
        """Views of ``genome`` as per-layer ``(n_out, n_in)`` weight matrices."""
        genome = self.check(genome)
        return [genome[a:b].reshape(n_out, n_in) for a, b, n_out, n_in in self._slices]

    def batch_matrices(self, members: np.ndarray) -> list[np.ndarray]:
        """Like :meth:`matrices` for a ``(n, parameter_count)`` stack of genomes."""
        members = np.asarray(members, dtype=np.float64)
        if members.ndim != 2 or members.shape[1] != self.parameter_count:
            raise ShapeError(f"expected (n, {self.parameter_count}) genomes, got {members.shape}")
        n = members.shape[0]
        return [members[:, a:b].reshape(n, n_out, n_in) for a, b, n_out, n_in in self._slices]

    def check(self, genome) -> np.ndarray:
        genome = np.asarray(genome, dtype=np.float64)
        if genome.ndim != 1 or genome.shape[0] != self.parameter_count:
            raise ShapeError(f"genome has shape {genome.shape}, expected ({self.parameter_count},)")
        return genome

    def slice_of_layer(self, layer: int) -> slice:
        a, b, _, _ = self._slices[layer]
        return slice(a, b)


DEFAULT_SHAPE = NetworkShape()


def _activate(x: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(x, 0.0)
    return np.tanh(x)


def forward(genome, shape: NetworkShape, state_index: int) -> np.ndarray:
    """Action values for a one-hot encoded state."""
    mats = shape.matrices(genome)
    if not 0 <= state_index < shape.n_inputs:
        raise InputError(f"state_index {state_index} outside [0, {shape.n_inputs})")
    # A one-hot input selects one column of the first matrix.
    x = mats[0][:, state_index]
    for w in mats[1:]:
        x = w @ _activate(x, shape.activation)
    return x.copy() if len(mats) == 1 else x


def select_action(genome, shape: NetworkShape, state_index: int) -> int:
    # np.argmax returns the first maximum, so ties go to the lowest index.
    return int(np.argmax(forward(genome, shape, state_index)))


def action_values_table(members: np.ndarray, shape: NetworkShape) -> np.ndarray:
    """Action values for every state and every genome, shape ``(n, n_outputs, n_inputs)``."""
    mats = shape.batch_matrices(members)
    x = mats[0]
    for w in mats[1:]:
        x = w @ _activate(x, shape.activation)
    return x


def policy_table(members: np.ndarray, shape: NetworkShape) -> np.ndarray:
    """Greedy action for every (genome, state) pair as an ``(n, n_inputs)`` int32 array."""
    members = np.atleast_2d(members)
    return np.argmax(action_values_table(members, shape), axis=1).astype(np.int32)
