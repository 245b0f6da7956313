"""
Q-сеть агента: один скрытый слой с ReLU, ручные прямой и обратный проходы.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from shared.core.exceptions import DomainError

PARAMETER_NAMES = ("w1", "b1", "w2", "b2")


@dataclass(eq=False)
class QNetwork:
    """
    Q = W₂·relu(W₁·s + b₁) + b₂.

    Attributes:
        w1: Веса вход→скрытый слой, форма (hidden, inputs).
        b1: Смещения скрытого слоя, форма (hidden,).
        w2: Веса скрытый слой→выход, форма (outputs, hidden).
        b2: Смещения выхода, форма (outputs,).
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def xavier(
        cls, n_inputs: int, n_hidden: int, n_outputs: int, rng: np.random.Generator
    ) -> "QNetwork":
        """Инициализация Xavier (равномерная), нулевые смещения."""
        limit1 = np.sqrt(6.0 / (n_inputs + n_hidden))
        limit2 = np.sqrt(6.0 / (n_hidden + n_outputs))
        return cls(
            w1=rng.uniform(-limit1, limit1, (n_hidden, n_inputs)),
            b1=np.zeros(n_hidden),
            w2=rng.uniform(-limit2, limit2, (n_outputs, n_hidden)),
            b2=np.zeros(n_outputs),
        )

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.w1.shape[1], self.w1.shape[0], self.w2.shape[0]

    def parameters(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def copy(self) -> "QNetwork":
        return QNetwork(*(p.copy() for p in self.parameters().values()))


def _hidden(net: QNetwork, states: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pre = states @ net.w1.T + net.b1
    return pre, np.maximum(pre, 0.0)


def forward(net: QNetwork, s: np.ndarray) -> np.ndarray:
    """
    Q-значения для состояния (вектор) или батча состояний (матрица).

    Raises:
        DomainError: Неконечные значения во входе.
    """
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise DomainError("состояние содержит неконечные значения")
    _, hidden = _hidden(net, s)
    return hidden @ net.w2.T + net.b2


def loss_and_gradients(
    net: QNetwork, states: np.ndarray, actions: np.ndarray, targets: np.ndarray
) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Среднеквадратичная ошибка mean((Q(s, a) − y)²) и ее градиенты.

    Returns:
        Tuple[float, Dict[str, np.ndarray]]: Потеря и градиенты по именам параметров.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    actions = np.asarray(actions, dtype=int)
    batch = states.shape[0]
    rows = np.arange(batch)

    pre, hidden = _hidden(net, states)
    q = hidden @ net.w2.T + net.b2
    error = q[rows, actions] - targets
    loss = float(np.mean(error**2))

    d_q = np.zeros_like(q)
    d_q[rows, actions] = 2.0 * error / batch
    d_hidden = (d_q @ net.w2) * (pre > 0)

    grads = {
        "w2": d_q.T @ hidden,
        "b2": d_q.sum(axis=0),
        "w1": d_hidden.T @ states,
        "b1": d_hidden.sum(axis=0),
    }
    return loss, grads


def sgd_update(net: QNetwork, grads: Dict[str, np.ndarray], learn_rate: float) -> None:
    for name, grad in grads.items():
        getattr(net, name)[...] -= learn_rate * grad
