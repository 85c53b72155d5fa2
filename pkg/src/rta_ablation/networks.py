# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Small dense networks with hand-written reverse-mode gradients and the Adam
optimizer. Inputs are batches of row vectors; layer i computes
z = x W_i^T + b_i followed by its nonlinearity.
"""

# Imports #####################################################################

import logging
from typing import Dict, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ACTIVATIONS = ("tanh", "relu", "linear")

# Functions ###################################################################


def activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    return z


def activate_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    """Derivative of the nonlinearity, from the pre-activation z and output a"""
    if kind == "tanh":
        return 1.0 - a**2
    if kind == "relu":
        return np.where(z > 0, 1.0, 0.0)
    return np.ones_like(z)


def orthogonal(shape, gain: float, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix of the given (rows, cols) shape scaled by gain"""
    rows, cols = shape
    flat = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


# Classes #####################################################################


class Mlp:
    """
    Multilayer perceptron with cached activations for backprop

    Parameters
    ----------
    sizes : sequence of int
        Layer widths, input first, e.g. (3, 64, 64, 1)
    hidden : str
        Hidden nonlinearity, one of ACTIVATIONS
    output : str
        Output nonlinearity, one of ACTIVATIONS
    rng : np.random.Generator, optional
        Initialisation generator; zero weights when omitted
    hidden_gain, output_gain : float
        Orthogonal initialisation gains
    """

    def __init__(
        self,
        sizes: Sequence[int],
        hidden: str = "tanh",
        output: str = "linear",
        rng: Optional[np.random.Generator] = None,
        hidden_gain: float = np.sqrt(2.0),
        output_gain: float = 0.01,
    ):
        if hidden not in ACTIVATIONS or output not in ACTIVATIONS:
            raise ValueError(f"activations must be one of {ACTIVATIONS}")
        if len(sizes) < 2:
            raise ValueError("an Mlp needs at least an input and an output width")
        self.sizes = tuple(int(size) for size in sizes)
        self.hidden = hidden
        self.output = output
        self.params: Dict[str, np.ndarray] = {}
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            last = i == len(self.sizes) - 2
            if rng is None:
                weight = np.zeros((fan_out, fan_in))
            else:
                weight = orthogonal((fan_out, fan_in), output_gain if last else hidden_gain, rng)
            self.params[f"W{i}"] = weight
            self.params[f"b{i}"] = np.zeros(fan_out)

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    @property
    def parameter_count(self) -> int:
        return int(sum(param.size for param in self.params.values()))

    def _kind(self, layer: int) -> str:
        return self.output if layer == self.n_layers - 1 else self.hidden

    def forward(self, x):
        """
        Returns
        -------
        y : np.ndarray
            Shape (batch, sizes[-1]), or (sizes[-1],) for a single input
        cache : dict
            Everything backward needs
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        a = np.atleast_2d(x)
        if a.shape[1] != self.sizes[0]:
            raise ValueError(f"Mlp expects {self.sizes[0]} inputs, got {a.shape[1]}")
        inputs, pre = [a], []
        for i in range(self.n_layers):
            z = a @ self.params[f"W{i}"].T + self.params[f"b{i}"]
            a = activate(z, self._kind(i))
            pre.append(z)
            inputs.append(a)
        cache = {"inputs": inputs, "pre": pre, "single": single}
        return (a[0] if single else a), cache

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache: dict, dy):
        """
        Reverse-mode pass for an upstream gradient dL/dy

        Returns
        -------
        grads : dict
            dL/dparam with the same keys and shapes as ``params``
        dx : np.ndarray
            dL/dx, shaped like the forward input
        """
        delta = np.atleast_2d(np.asarray(dy, dtype=np.float64))
        grads = {}
        for i in reversed(range(self.n_layers)):
            z, a = cache["pre"][i], cache["inputs"][i + 1]
            delta = delta * activate_grad(z, a, self._kind(i))
            grads[f"W{i}"] = delta.T @ cache["inputs"][i]
            grads[f"b{i}"] = delta.sum(axis=0)
            delta = delta @ self.params[f"W{i}"]
        dx = delta[0] if cache["single"] else delta
        return grads, dx

    def copy(self) -> "Mlp":
        clone = Mlp(self.sizes, self.hidden, self.output)
        clone.load_state({key: value for key, value in self.params.items()})
        return clone

    def state(self) -> Dict[str, np.ndarray]:
        return {key: value.copy() for key, value in self.params.items()}

    def load_state(self, state: Dict[str, np.ndarray]) -> None:
        """Copy values into the existing arrays so optimizer references stay valid"""
        for key, value in state.items():
            if self.params[key].shape != np.shape(value):
                raise ValueError(f"shape mismatch for {key}: {self.params[key].shape} vs {np.shape(value)}")
            self.params[key][...] = value


class Adam:
    """
    Adam over a dict of arrays, updated in place

    Parameters
    ----------
    params : dict of np.ndarray
        The arrays to optimise; they are mutated by ``step``
    lr : float
        Learning rate
    """

    def __init__(self, params: Dict[str, np.ndarray], lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {key: np.zeros_like(value) for key, value in params.items()}
        self.v = {key: np.zeros_like(value) for key, value in params.items()}

    def step(self, grads: Dict[str, np.ndarray]) -> None:
        """One descent step on the loss whose gradients are given"""
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for key, grad in grads.items():
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * grad
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * grad**2
            m_hat = self.m[key] / correction1
            v_hat = self.v[key] / correction2
            self.params[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state(self) -> dict:
        return {
            "t": self.t,
            "m": {key: value.copy() for key, value in self.m.items()},
            "v": {key: value.copy() for key, value in self.v.items()},
        }

    def load_state(self, state: dict) -> None:
        self.t = state["t"]
        self.m = {key: value.copy() for key, value in state["m"].items()}
        self.v = {key: value.copy() for key, value in state["v"].items()}


def mlp_forward(net: Mlp, x):
    return net.forward(x)


def mlp_backward(net: Mlp, cache: dict, dy):
    return net.backward(cache, dy)


def polyak_update(target: Mlp, online: Mlp, polyak: float) -> None:
    """target <- polyak * target + (1 - polyak) * online, in place"""
    for key, value in online.params.items():
        target.params[key] *= polyak
        target.params[key] += (1.0 - polyak) * value


def all_finite(*values) -> bool:
    return all(np.all(np.isfinite(value)) for value in values)
