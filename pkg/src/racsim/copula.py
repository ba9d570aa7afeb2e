"""Closed-form and Monte Carlo distribution functions.

The reciprocal Archimedean copula is evaluated in log space::

    log C_F(u) = sum_{A != {}} (-1)^|A| Lambda( sum_{k in A} F^{-1}(u_k) )

which is the product over odd subsets divided by the product over even
subsets, with ``log F = -Lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, DomainError
from .generator import Generator
from .radial import RadialMeasure
from .simplex import SimplexLaw

__all__ = [
    "CopulaSpec",
    "copula_cdf",
    "log_copula_cdf",
    "subset_sums",
    "maxid_cdf_monte_carlo",
    "MaxIdEstimate",
    "MAX_EXACT_DIM",
]

MAX_EXACT_DIM = 20


def subset_sums(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sums over all subsets of ``x`` and their cardinalities.

    Built by doubling, so every sum uses at most ``len(x)`` additions and
    entry ``mask`` is the sum over the set bits of ``mask``.
    """
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int64)
    for v in np.asarray(x, dtype=float):
        sums = np.concatenate((sums, sums + v))
        sizes = np.concatenate((sizes, sizes + 1))
    return sums, sizes


@dataclass(frozen=True)
class CopulaSpec:
    generator: Generator

    @property
    def dim(self) -> int:
        return self.generator.dim

    @classmethod
    def from_measure(cls, measure: RadialMeasure, dim: int) -> "CopulaSpec":
        return cls(Generator(measure, dim))

    def cdf(self, u):
        return copula_cdf(self, u)


def log_copula_cdf(spec: CopulaSpec, u) -> float:
    g = spec.generator
    u = np.asarray(u, dtype=float).ravel()
    if u.size != g.dim:
        raise DomainError(f"expected {g.dim} coordinates, got {u.size}")
    if not np.all((u >= 0) & (u <= 1)):
        raise DomainError("copula arguments must lie in [0, 1]")
    if np.any(u == 0):
        return -np.inf
    # coordinates equal to 1 drop out
    u = u[u < 1]
    if u.size == 0:
        return 0.0
    if u.size > MAX_EXACT_DIM:
        raise CapacityError(
            f"exact evaluation enumerates 2^{u.size} subsets; use Monte Carlo "
            "(maxid_cdf_monte_carlo) instead"
        )
    x = np.asarray(g.quantile(u), dtype=float)
    sums, sizes = subset_sums(x)
    sums, sizes = sums[1:], sizes[1:]
    lam = np.asarray(g.exponent(sums), dtype=float)
    signs = np.where(sizes % 2 == 1, -1.0, 1.0)
    # np.sum uses pairwise summation
    return float(np.sum(signs * lam))


def copula_cdf(spec: CopulaSpec, u) -> float:
    """``C_F(u)`` for one point ``u`` in [0, 1]^d."""
    return float(np.exp(log_copula_cdf(spec, u)))


class MaxIdEstimate(NamedTuple):
    estimate: float
    std_error: float
    overflow: bool = False


def maxid_cdf_monte_carlo(
    measure: RadialMeasure,
    law: SimplexLaw,
    y,
    n_mc: int,
    rng: np.random.Generator,
) -> MaxIdEstimate:
    """Monte Carlo ``P(Y <= y) = exp(-E[S(min_i y_i / Q_i)])``.

    The standard error applies the delta method to the outer exponential.
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size != law.dim:
        raise DomainError(f"expected {law.dim} coordinates, got {y.size}")
    if not np.all(y > 0):
        raise DomainError("max-id distribution function needs y > 0")
    if n_mc < 1:
        raise DomainError("n_mc must be >= 1")
    q = law.sample(rng, int(n_mc))
    with np.errstate(divide="ignore"):
        t = np.min(y / q, axis=1)
    values = np.zeros_like(t)
    finite = np.isfinite(t)
    values[finite] = measure.survival(t[finite])
    mean = float(np.mean(values))
    if not np.isfinite(mean):
        return MaxIdEstimate(0.0, 0.0, True)
    sd = float(np.std(values, ddof=1)) if n_mc > 1 else 0.0
    est = float(np.exp(-mean))
    return MaxIdEstimate(est, est * sd / np.sqrt(n_mc), False)
