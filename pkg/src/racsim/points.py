"""Decreasing enumeration of the points of a Poisson random measure.

If ``eps_1, eps_2, ...`` are iid unit exponentials, the sequence
``S^{-1}(eps_1 + ... + eps_k)`` has the law of the points of a Poisson
random measure with mean measure ``nu``, listed in decreasing order. For
finite ``nu`` only the partial sums not exceeding ``u_nu`` produce points.
"""

from __future__ import annotations

import numpy as np

from .errors import RacsimError
from .radial import RadialMeasure

__all__ = ["PointStream", "exponential_draw", "exponential_from_uniform", "next_point"]


def exponential_from_uniform(u):
    """Inverse transform ``-log(1 - u)`` of a uniform on [0, 1)."""
    return -np.log1p(-np.asarray(u, dtype=float))


def exponential_draw(rng: np.random.Generator, size=None):
    """Unit exponential(s) from ``rng.random``, safe when the uniform is 0."""
    if rng is None:
        raise RacsimError("no random number generator available")
    u = rng.random(size)
    if size is None:
        return float(exponential_from_uniform(u))
    return exponential_from_uniform(u)


class PointStream:
    """Resumable stream ``R_1 >= R_2 >= ...`` for one measure.

    ``next()`` returns the next point or ``None`` once a finite measure is
    exhausted. A stream belongs to a single consumer.
    """

    def __init__(self, measure: RadialMeasure, rng: np.random.Generator):
        if rng is None:
            raise RacsimError("no random number generator available")
        self.measure = measure
        self.rng = rng
        self.cumulative_time = 0.0
        self.count = 0
        self.exhausted = False

    def __iter__(self):
        return self

    def __next__(self):
        r = self.next()
        if r is None:
            raise StopIteration
        return r

    def next(self):
        if self.exhausted:
            return None
        self.cumulative_time += exponential_draw(self.rng)
        if self.cumulative_time > self.measure.total_mass:
            self.exhausted = True
            return None
        self.count += 1
        return self.measure.pseudo_inverse(self.cumulative_time)


def next_point(stream: PointStream):
    return stream.next()
