"""Common learner plumbing."""

from __future__ import annotations

import inspect

import numpy as np


class OnlineClassifier:
    """Anything that predicts class probabilities and learns one sample at a time.

    Subclasses implement ``predict_proba`` and ``learn_one``. ``reset`` rebuilds
    the learner from its constructor arguments.
    """

    n_classes: int

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        init = cls.__init__

        def __init__(self, *args, **kw):
            if not hasattr(self, "_params"):
                bound = inspect.signature(init).bind(self, *args, **kw)
                bound.apply_defaults()
                self._params = {k: v for k, v in bound.arguments.items() if k != "self"}
            init(self, *args, **kw)

        __init__.__wrapped__ = init
        __init__.__doc__ = init.__doc__
        cls.__init__ = __init__

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0):
        raise NotImplementedError

    def predict(self, x: np.ndarray) -> int:
        return int(np.argmax(self.predict_proba(x)))

    def reset(self):
        params = dict(self._params)
        state = self.__dict__
        state.clear()
        self._params = params
        type(self).__init__.__wrapped__(self, **params)
        return self

    def clone(self):
        return type(self)(**self._params)

    def uniform(self) -> np.ndarray:
        return np.full(self.n_classes, 1.0 / self.n_classes)
