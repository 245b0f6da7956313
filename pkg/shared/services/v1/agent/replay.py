from collections import deque
from typing import Deque, List, NamedTuple

import numpy as np

from shared.core.exceptions import PreconditionError


class Transition(NamedTuple):
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayBuffer:
    """
    Память воспроизведения фиксированной емкости; старые переходы вытесняются.
    """

    def __init__(self, capacity: int = 1000):
        self.capacity = capacity
        self._items: Deque[Transition] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        self._items.append(transition)

    def sample(self, rng: np.random.Generator, size: int) -> List[Transition]:
        """
        Равномерная выборка без возвращения.

        Raises:
            PreconditionError: В памяти меньше `size` переходов.
        """
        if size > len(self._items):
            raise PreconditionError(
                "в памяти меньше переходов, чем размер мини-батча",
                extra={"size": size, "stored": len(self._items)},
            )
        indices = rng.choice(len(self._items), size=size, replace=False)
        return [self._items[i] for i in indices]

    def __iter__(self):
        return iter(self._items)
