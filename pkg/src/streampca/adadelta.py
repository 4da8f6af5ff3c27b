"""Adadelta: per-parameter steps scaled by decaying RMS ratios (Zeiler 2012).

No learning rate to tune; the step size adapts from the ratio of the RMS of
past steps to the RMS of past gradients.  The same decay/epsilon constants
are reused by the scalar accumulators elsewhere in the package.
"""

from __future__ import annotations

import numpy as np

DECAY = 0.95
EPS = 1e-6


class Adadelta:
    """Stateful optimizer for a flat parameter vector."""

    def __init__(self, n_params: int, decay: float = DECAY, eps: float = EPS):
        self.decay = decay
        self.eps = eps
        self.avg_sq_grad = np.zeros(n_params)
        self.avg_sq_step = np.zeros(n_params)

    def step(self, grad: np.ndarray) -> np.ndarray:
        """Return the parameter increment for this gradient."""
        g = np.asarray(grad, dtype=float)
        self.avg_sq_grad = self.decay * self.avg_sq_grad + (1.0 - self.decay) * g * g
        delta = (
            -np.sqrt(self.avg_sq_step + self.eps)
            / np.sqrt(self.avg_sq_grad + self.eps)
            * g
        )
        self.avg_sq_step = (
            self.decay * self.avg_sq_step + (1.0 - self.decay) * delta * delta
        )
        return delta
