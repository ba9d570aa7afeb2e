"""Random vectors on the unit simplex ``{q >= 0 : q_1 + ... + q_d = 1}``."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .points import exponential_draw
from .radial import _check_dim

__all__ = ["SimplexLaw", "sample_uniform_simplex", "sample_dirichlet", "law_from_spec"]


def _normalize(e):
    return e / e.sum(axis=-1, keepdims=True)


def sample_uniform_simplex(d: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform law via normalised iid unit exponentials.

    Returns shape ``(d,)`` or ``(size, d)``.
    """
    d = _check_dim(d)
    shape = d if size is None else (size, d)
    return _normalize(exponential_draw(rng, shape))


def sample_dirichlet(alpha, rng: np.random.Generator, size=None) -> np.ndarray:
    """Dirichlet law via normalised independent Gamma(alpha_i, 1) draws."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size < 2:
        raise DomainError("alpha must be a vector of length >= 2")
    if not np.all(alpha > 0):
        raise DomainError("Dirichlet parameters must be positive")
    shape = alpha.shape if size is None else (size, alpha.size)
    return _normalize(rng.standard_gamma(alpha, size=shape))


@dataclass(frozen=True)
class SimplexLaw:
    """Distribution of the angular vectors; uniform unless ``alpha`` is set."""

    dim: int
    alpha: tuple[float, ...] | None = None

    def __post_init__(self):
        _check_dim(self.dim)
        if self.alpha is not None:
            alpha = tuple(float(a) for a in self.alpha)
            if len(alpha) != self.dim:
                raise DomainError(f"alpha has length {len(alpha)}, expected {self.dim}")
            if not all(a > 0 for a in alpha):
                raise DomainError("Dirichlet parameters must be positive")
            object.__setattr__(self, "alpha", alpha)

    @property
    def is_uniform(self) -> bool:
        return self.alpha is None

    @property
    def variant(self) -> str:
        return "uniform" if self.alpha is None else "dirichlet"

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        if self.alpha is None:
            return sample_uniform_simplex(self.dim, rng, size)
        return sample_dirichlet(self.alpha, rng, size)

    def to_spec(self) -> dict:
        if self.alpha is None:
            return {"simplex": "uniform"}
        return {"simplex": "dirichlet", "alpha": list(self.alpha)}


def law_from_spec(spec, dim: int) -> SimplexLaw:
    """``{"simplex": "uniform"}`` or ``{"simplex": "dirichlet", "alpha": [...]}``."""
    if spec is None:
        return SimplexLaw(dim)
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"simplex spec is not valid JSON: {exc}", key="simplex") from exc
    if not isinstance(spec, dict) or "simplex" not in spec:
        raise ConfigError("simplex spec needs key 'simplex'", key="simplex")
    kind = spec["simplex"]
    try:
        if kind == "uniform":
            extra = set(spec) - {"simplex"}
            if extra:
                raise ConfigError(f"unexpected key {sorted(extra)[0]!r}", key=sorted(extra)[0])
            return SimplexLaw(dim)
        if kind == "dirichlet":
            extra = set(spec) - {"simplex", "alpha"}
            if extra:
                raise ConfigError(f"unexpected key {sorted(extra)[0]!r}", key=sorted(extra)[0])
            if "alpha" not in spec:
                raise ConfigError("dirichlet law needs 'alpha'", key="alpha")
            return SimplexLaw(dim, tuple(spec["alpha"]))
    except DomainError as exc:
        raise ConfigError(f"invalid simplex law: {exc}", key="alpha") from exc
    raise ConfigError(f"unknown simplex law {kind!r}", key="simplex")
