"""Small feedforward network with a Gaussian (mu, log sigma) head.

Forward, analytic backprop, and AdamW live here so the trainer stays a plain
loop.  The gradient path is verified against central finite differences in
the test suite.
"""

import math

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class GaussianMlp:
    """tanh hidden layers, linear 2-unit head: out[:, 0] = mu, out[:, 1] = log sigma."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise ValueError("weights and biases must be non-empty and parallel")
        if weights[-1].shape[1] != 2:
            raise ValueError("output layer must have width 2 (mu, log sigma)")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @classmethod
    def create(cls, d_in: int, hidden: list[int], rng: np.random.Generator) -> "GaussianMlp":
        """Fan-in uniform init over layers d_in -> hidden... -> 2."""
        sizes = [d_in] + list(hidden) + [2]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "GaussianMlp":
        return GaussianMlp([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def forward(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Features (n, d_in) -> (mu, log_sigma), each shape (n,)."""
        h = np.asarray(features, dtype=np.float64)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ w + b)
        out = h @ self.weights[-1] + self.biases[-1]
        return out[:, 0], out[:, 1]

    def loss_and_grads(self, features, targets, sigma_grad: bool = True):
        """Mean Gaussian NLL over the batch plus gradients per layer.

        Returns (loss, grad_weights, grad_biases).  With sigma_grad False the
        log-sigma head is treated as frozen: its gradient is zeroed before
        backprop so no sigma-path signal reaches earlier layers.
        """
        targets = np.asarray(targets, dtype=np.float64)
        activations = [np.asarray(features, dtype=np.float64)]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            activations.append(np.tanh(activations[-1] @ w + b))
        out = activations[-1] @ self.weights[-1] + self.biases[-1]
        mu, log_sigma = out[:, 0], out[:, 1]

        n = targets.size
        resid = targets - mu
        inv_var = np.exp(-2.0 * log_sigma)
        loss = float(np.mean(0.5 * LOG_2PI + log_sigma + 0.5 * resid * resid * inv_var))

        # Head gradients of the mean NLL.
        delta = np.empty_like(out)
        delta[:, 0] = -resid * inv_var / n
        delta[:, 1] = (1.0 - resid * resid * inv_var) / n if sigma_grad else 0.0

        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grad_w[i] = activations[i].T @ delta
            grad_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (1.0 - activations[i] ** 2)
        return loss, grad_w, grad_b

    def mean_nll(self, features, targets) -> float:
        targets = np.asarray(targets, dtype=np.float64)
        mu, log_sigma = self.forward(features)
        resid = targets - mu
        return float(np.mean(0.5 * LOG_2PI + log_sigma
                             + 0.5 * resid * resid * np.exp(-2.0 * log_sigma)))


class AdamW:
    """Adaptive-moment steps with decoupled weight decay.

    Decay applies to weight matrices only; biases are left unregularized so
    the head can carry the series mean.
    """

    def __init__(self, model: GaussianMlp, lr: float, weight_decay: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p) for p in model.weights + model.biases]
        self._v = [np.zeros_like(p) for p in model.weights + model.biases]

    def step(self, model: GaussianMlp, grad_w, grad_b) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        params = model.weights + model.biases
        grads = grad_w + grad_b
        n_weights = len(model.weights)
        for i, (p, g) in enumerate(zip(params, grads)):
            m = self._m[i]
            v = self._v[i]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if i < n_weights and self.weight_decay:
                p -= self.lr * self.weight_decay * p
