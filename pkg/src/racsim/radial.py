"""Radial measures on (0, inf] described by their survival function.

A radial measure ``nu`` enters the sampler only through

* the survival function ``S(t) = nu((t, inf])``, non-increasing and
  right-continuous, finite for every ``t > 0``;
* its pseudo-inverse ``S^{-1}(y) = inf{x > 0 : S(x) <= y}``;
* the total mass ``u_nu = nu((0, inf])``, possibly infinite.

Both ``survival`` and ``pseudo_inverse`` accept scalars or numpy arrays and
return the same shape. They are linked by the Galois relation
``y < S(x)  <=>  S^{-1}(y) > x``, which every concrete family here honours
exactly in floating point (up to rounding of the closed forms).
"""

from __future__ import annotations

import enum
import json
import math
from abc import ABC, abstractmethod
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    OutOfRangeError,
    UnsupportedMeasureError,
)

__all__ = [
    "RadialMeasure",
    "GalambosRadial",
    "HarmonicRadial",
    "DiscreteRadial",
    "PiecewiseConstantApprox",
    "CustomRadial",
    "ScaledRadial",
    "TailClass",
    "survival",
    "pseudo_inverse",
    "galambos_constant",
    "approximate_piecewise_constant",
    "numeric_pseudo_inverse",
    "runtime_tail_classification",
    "make_grid",
    "measure_from_spec",
]


def _prepare(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _finish(out, scalar):
    if scalar:
        return float(np.asarray(out).reshape(()))
    return out


class RadialMeasure(ABC):
    """Radon measure on (0, inf] with no atom at infinity.

    Subclasses implement the vectorised ``_survival`` and ``_pseudo_inverse``
    on pre-validated float arrays. Instances are immutable.
    """

    #: ``nu((0, inf])``; ``math.inf`` for the non-finite measures that
    #: generate proper reciprocal Archimedean copulas.
    total_mass: float = math.inf
    #: Smallest ``t`` with ``S(t) = 0``; ``math.inf`` for unbounded support.
    support_max: float = math.inf
    #: True when ``S`` is a step function.
    discrete: bool = False
    #: True when ``density`` is implemented.
    has_density: bool = False

    def survival(self, t):
        """Return ``S(t)`` for ``t > 0``."""
        t, scalar = _prepare(t)
        if not np.all(t > 0):
            raise DomainError("survival function is only defined for t > 0")
        return _finish(self._survival(t), scalar)

    def pseudo_inverse(self, y):
        """Return ``inf{x > 0 : S(x) <= y}`` for ``0 <= y <= total_mass``."""
        y, scalar = _prepare(y)
        if not np.all(y >= 0):
            raise DomainError("pseudo-inverse is only defined for y >= 0")
        if np.any(y > self.total_mass):
            raise OutOfRangeError(
                f"argument exceeds total mass {self.total_mass!r}; "
                "the point stream is exhausted"
            )
        return _finish(self._pseudo_inverse(y), scalar)

    def density(self, x):
        raise UnsupportedMeasureError(
            f"{type(self).__name__} has no Lebesgue density"
        )

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.total_mass)

    @abstractmethod
    def _survival(self, t: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _pseudo_inverse(self, y: np.ndarray) -> np.ndarray: ...


def survival(m: RadialMeasure, t):
    return m.survival(t)


def pseudo_inverse(m: RadialMeasure, y):
    return m.pseudo_inverse(y)


# --------------------------------------------------------------------------
# Galambos


def _check_theta(theta):
    theta = float(theta)
    if not (theta > 0 and math.isfinite(theta)):
        raise DomainError(f"theta must be a positive finite real, got {theta!r}")
    return theta


def _check_dim(d):
    if isinstance(d, bool) or int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def galambos_constant(theta: float, d: int) -> float:
    """Scale ``c`` in the Galambos pseudo-inverse ``S^{-1}(t) = c t^(-theta)``.

    ``c = (Gamma(d) Gamma(1/theta) / (Gamma(d + 1/theta) theta))^(-theta)``,
    evaluated through log-Gamma so that large ``d`` or small ``theta`` do not
    overflow. For ``theta = 1`` the constant equals ``d``.
    """
    theta = _check_theta(theta)
    d = _check_dim(d)
    inv = 1.0 / theta
    log_inner = gammaln(d) + gammaln(inv) - gammaln(d + inv) - math.log(theta)
    return math.exp(-theta * log_inner)


class GalambosRadial(RadialMeasure):
    """Power-law radial measure of the ``d``-variate Galambos copula.

    Density ``Gamma(d + 1/theta) / (Gamma(d) Gamma(1/theta)) x^(-1/theta - 1)``
    so that ``S(t) = (t / c)^(-1/theta)`` and ``S^{-1}(y) = c y^(-theta)``.
    """

    has_density = True

    def __init__(self, theta: float, dim: int):
        self.theta = _check_theta(theta)
        self.dim = _check_dim(dim)
        self.constant = galambos_constant(self.theta, self.dim)
        inv = 1.0 / self.theta
        self.log_density_scale = float(
            gammaln(self.dim + inv) - gammaln(self.dim) - gammaln(inv)
        )

    def __repr__(self):
        return f"GalambosRadial(theta={self.theta!r}, dim={self.dim!r})"

    def _survival(self, t):
        return (t / self.constant) ** (-1.0 / self.theta)

    def _pseudo_inverse(self, y):
        with np.errstate(divide="ignore"):
            return self.constant * y ** (-self.theta)

    def density(self, x):
        x, scalar = _prepare(x)
        if not np.all(x > 0):
            raise DomainError("density is only defined for x > 0")
        out = np.exp(self.log_density_scale) * x ** (-1.0 / self.theta - 1.0)
        return _finish(out, scalar)


# --------------------------------------------------------------------------
# Discrete families


class HarmonicRadial(RadialMeasure):
    """Atoms ``1/k`` of equal weight ``theta``, ``k = 1, 2, ...``.

    ``S(t) = theta * #{k : 1/k > t}`` (the right limit of
    ``theta * floor(1/u)`` as ``u`` decreases to ``t``) and
    ``S^{-1}(y) = 1 / (floor(y/theta) + 1)``, the right-continuous form of
    ``1 / ceil(y/theta)``; the two differ only at multiples of ``theta``.
    """

    discrete = True
    support_max = 1.0

    def __init__(self, theta: float):
        self.theta = _check_theta(theta)

    def __repr__(self):
        return f"HarmonicRadial(theta={self.theta!r})"

    @staticmethod
    def atom_count(t: np.ndarray) -> np.ndarray:
        """Number of atoms ``1.0/k`` (as floats) strictly above ``t``."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            k = np.ceil(1.0 / t) - 1.0
            k = np.maximum(k, 0.0)
            # ceil(1/t) can be off by one against the rounded atoms 1.0/k
            over = (k >= 1) & (1.0 / np.maximum(k, 1.0) <= t)
            k = np.where(over, k - 1.0, k)
            under = 1.0 / (k + 1.0) > t
            k = np.where(under, k + 1.0, k)
        return k

    def atoms(self, n: int) -> np.ndarray:
        return 1.0 / np.arange(1, n + 1, dtype=float)

    def weights(self, n: int) -> np.ndarray:
        return np.full(n, self.theta)

    def _survival(self, t):
        return self.theta * self.atom_count(t)

    def _pseudo_inverse(self, y):
        return 1.0 / (np.floor(y / self.theta) + 1.0)


class DiscreteRadial(RadialMeasure):
    """Finite discrete measure ``sum_k b_k delta_{a_k}`` with ``a_1 > a_2 > ...``.

    ``S`` is the step function ``sum_{k : a_k > t} b_k`` and ``S^{-1}`` maps
    ``[b_1 + ... + b_{k-1}, b_1 + ... + b_k)`` to ``a_k``. The total mass is
    finite, so as a point stream it is eventually exhausted.
    """

    discrete = True

    def __init__(self, atoms: Sequence[float], weights: Sequence[float]):
        atoms = np.array(atoms, dtype=float).ravel()
        weights = np.array(weights, dtype=float).ravel()
        if atoms.size == 0:
            raise DomainError("a discrete measure needs at least one atom")
        if atoms.shape != weights.shape:
            raise DomainError("atoms and weights must have equal length")
        if not (np.all(np.isfinite(atoms)) and np.all(atoms > 0)):
            raise DomainError("atoms must be positive and finite")
        if np.any(np.diff(atoms) >= 0):
            raise DomainError("atoms must be strictly decreasing")
        if not (np.all(np.isfinite(weights)) and np.all(weights >= 0)):
            raise DomainError("weights must be non-negative and finite")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        self.atoms = atoms
        self.weights = weights
        self._cum = np.cumsum(weights)
        self._ascending = atoms[::-1].copy()
        self.total_mass = float(self._cum[-1])
        positive = np.flatnonzero(weights > 0)
        self.support_max = float(atoms[positive[0]]) if positive.size else 0.0

    def __repr__(self):
        return f"DiscreteRadial(atoms={self.atoms.tolist()!r}, weights={self.weights.tolist()!r})"

    def atom_count(self, t: np.ndarray) -> np.ndarray:
        n = self.atoms.size
        return n - np.searchsorted(self._ascending, t, side="right")

    def _survival(self, t):
        k = self.atom_count(t)
        return np.where(k > 0, self._cum[np.maximum(k - 1, 0)], 0.0)

    def _pseudo_inverse(self, y):
        n = self.atoms.size
        idx = np.searchsorted(self._cum, y, side="right")
        # y == total mass: every x > 0 qualifies, the infimum is 0
        return np.where(idx < n, self.atoms[np.minimum(idx, n - 1)], 0.0)


class PiecewiseConstantApprox(DiscreteRadial):
    """Discrete approximation of ``source`` on a decreasing grid.

    Each grid point ``t_j`` carries the mass ``S(t_j) - S(t_{j-1})`` of the
    cell to its right (the first point takes all of ``S(t_1)``). Hence the
    approximating survival function equals ``S(t_j)`` on ``[t_{j+1}, t_j)``,
    never exceeds ``S``, and mass below the last grid point is dropped.
    """

    def __init__(self, source: RadialMeasure, grid: Sequence[float]):
        grid = np.array(grid, dtype=float).ravel()
        if grid.size == 0:
            raise DomainError("approximation grid is empty")
        if not np.all(grid > 0) or np.any(np.diff(grid) >= 0):
            raise DomainError("grid must be positive and strictly decreasing")
        values = np.asarray(source.survival(grid), dtype=float)
        weights = np.diff(np.concatenate(([0.0], values)))
        super().__init__(grid, np.maximum(weights, 0.0))
        self.source = source
        self.grid = self.atoms

    def __repr__(self):
        return f"PiecewiseConstantApprox(source={self.source!r}, points={self.grid.size})"

    def max_cell_oscillation(self) -> float:
        """Upper bound of ``|S_approx - S|`` on ``[t_m, t_1)``."""
        if self.grid.size < 2:
            return 0.0
        return float(np.max(self.weights[1:]))


def approximate_piecewise_constant(m: RadialMeasure, grid: Sequence[float]) -> DiscreteRadial:
    """Replace ``m`` by a discrete measure supported on ``grid``.

    Discrete inputs are returned unchanged.
    """
    if m.discrete:
        return m
    return PiecewiseConstantApprox(m, grid)


def make_grid(lo: float, hi: float, points: int, spacing: str = "log") -> np.ndarray:
    """Strictly decreasing grid from ``hi`` down to ``lo``."""
    if not (0 < lo < hi) or points < 1:
        raise DomainError("grid needs 0 < lo < hi and points >= 1")
    if spacing == "log":
        grid = np.geomspace(hi, lo, int(points))
    elif spacing == "linear":
        grid = np.linspace(hi, lo, int(points))
    else:
        raise DomainError(f"unknown grid spacing {spacing!r}")
    return grid


# --------------------------------------------------------------------------
# Numeric inversion and user-supplied measures


def numeric_pseudo_inverse(
    S: Callable[[float], float],
    y: float,
    bracket: tuple[float, float],
    tol: float = 1e-12,
    max_iter: int = 200,
    expand: bool = False,
    max_expansions: int = 40,
) -> float:
    """Bisection for ``inf{x : S(x) <= y}`` with ``S`` non-increasing.

    The invariant ``S(lo) > y >= S(hi)`` is kept throughout and ``hi`` is
    returned, so jumps of ``S`` are handled by converging onto the jump
    location from the right. With ``expand=True`` the bracket is widened
    geometrically (x10 per step) before giving up.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 < lo < hi):
        raise DomainError("bracket must satisfy 0 < lo < hi")
    expansions = 0
    while not S(lo) > y:
        if not expand or expansions >= max_expansions:
            raise BracketError(
                f"target {y!r} is not below S(lo) = {S(lo)!r}; lower the bracket", lo, hi
            )
        lo /= 10.0
        expansions += 1
    while not S(hi) <= y:
        if not expand or expansions >= max_expansions:
            raise BracketError(
                f"target {y!r} is below S(hi) = {S(hi)!r}; raise the bracket", lo, hi
            )
        hi *= 10.0
        expansions += 1
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if S(mid) <= y:
            hi = mid
        else:
            lo = mid
    return hi


class CustomRadial(RadialMeasure):
    """Radial measure from a user-supplied survival function.

    The pseudo-inverse is computed by bisection; ``density`` is optional and
    enables quadrature-based generators and tail classification.
    """

    def __init__(
        self,
        survival: Callable[[float], float],
        density: Callable[[float], float] | None = None,
        total_mass: float = math.inf,
        support_max: float = math.inf,
        bracket: tuple[float, float] = (1e-6, 1e6),
        discrete: bool = False,
    ):
        self._S = survival
        self._f = density
        self.has_density = density is not None
        self.total_mass = float(total_mass)
        self.support_max = float(support_max)
        self.bracket = bracket
        self.discrete = discrete

    def _survival(self, t):
        return np.array([float(self._S(float(x))) for x in t.ravel()]).reshape(t.shape)

    def _inverse_one(self, y):
        if y == 0.0:
            return self.support_max
        if y == self.total_mass:
            return 0.0
        return numeric_pseudo_inverse(
            lambda x: float(self._S(x)), y, self.bracket, expand=True
        )

    def _pseudo_inverse(self, y):
        return np.array([self._inverse_one(float(v)) for v in y.ravel()]).reshape(y.shape)

    def density(self, x):
        if self._f is None:
            return super().density(x)
        x, scalar = _prepare(x)
        out = np.array([float(self._f(float(v))) for v in x.ravel()]).reshape(x.shape)
        return _finish(out, scalar)


class ScaledRadial(RadialMeasure):
    """The measure ``factor * base``."""

    def __init__(self, base: RadialMeasure, factor: float):
        factor = float(factor)
        if not (factor > 0 and math.isfinite(factor)):
            raise DomainError("scale factor must be positive and finite")
        self.base = base
        self.factor = factor
        self.total_mass = factor * base.total_mass
        self.support_max = base.support_max
        self.discrete = base.discrete
        self.has_density = base.has_density

    def __repr__(self):
        return f"ScaledRadial({self.base!r}, {self.factor!r})"

    def _survival(self, t):
        return self.factor * self.base._survival(t)

    def _pseudo_inverse(self, y):
        return self.base._pseudo_inverse(np.minimum(y / self.factor, self.base.total_mass))

    def density(self, x):
        return self.factor * self.base.density(x)


# --------------------------------------------------------------------------
# Runtime heuristic


class TailClass(str, enum.Enum):
    HEAVIER = "heavier-than-benchmark"
    LIGHTER = "lighter-than-benchmark"
    INDETERMINATE = "indeterminate"


def runtime_tail_classification(
    m: RadialMeasure, probes: Sequence[float], rtol: float = 1e-9
) -> TailClass:
    """Compare ``x f(x)`` with ``S(x)`` at the probe points.

    ``x f(x) <= S(x)`` everywhere means ``x -> S^{-1}(x) x`` is decreasing and
    the expected loop count is below the Galambos ``theta = 1`` benchmark
    (heavier tail); ``>=`` everywhere means above it. Equality at every probe
    is the benchmark itself and is reported as indeterminate.
    """
    if not m.has_density:
        raise UnsupportedMeasureError("tail classification needs a density")
    probes = np.asarray(probes, dtype=float).ravel()
    if probes.size == 0:
        raise DomainError("probe list is empty")
    lhs = probes * np.asarray(m.density(probes), dtype=float)
    rhs = np.asarray(m.survival(probes), dtype=float)
    scale = rtol * np.maximum(np.abs(lhs), np.abs(rhs))
    below = lhs < rhs - scale
    above = lhs > rhs + scale
    if not below.any() and not above.any():
        return TailClass.INDETERMINATE
    if not above.any():
        return TailClass.HEAVIER
    if not below.any():
        return TailClass.LIGHTER
    return TailClass.INDETERMINATE


# --------------------------------------------------------------------------
# JSON specifications

_KEYS = {
    "galambos": {"type", "theta", "dim"},
    "harmonic": {"type", "theta"},
    "discrete": {"type", "atoms", "weights"},
    "approx": {"type", "of", "grid"},
}


def _require(spec, key):
    if key not in spec:
        raise ConfigError(f"measure spec is missing key {key!r}", key=key)
    return spec[key]


def measure_from_spec(spec, dim: int | None = None) -> RadialMeasure:
    """Build a measure from its JSON description (dict or JSON text).

    ``dim`` fills in the Galambos dimension when the JSON omits it.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"measure spec is not valid JSON: {exc}", key="measure") from exc
    if not isinstance(spec, dict):
        raise ConfigError("measure spec must be a JSON object", key="measure")
    kind = _require(spec, "type")
    if kind not in _KEYS:
        raise ConfigError(f"unknown measure type {kind!r}", key="type")
    extra = set(spec) - _KEYS[kind]
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unexpected key {key!r} for measure type {kind!r}", key=key)
    try:
        if kind == "galambos":
            d = spec.get("dim", dim)
            if d is None:
                raise ConfigError("galambos measure needs 'dim'", key="dim")
            if dim is not None and "dim" in spec and int(spec["dim"]) != int(dim):
                raise ConfigError(
                    f"galambos dim {spec['dim']} conflicts with dimension {dim}", key="dim"
                )
            return GalambosRadial(_require(spec, "theta"), d)
        if kind == "harmonic":
            return HarmonicRadial(_require(spec, "theta"))
        if kind == "discrete":
            return DiscreteRadial(_require(spec, "atoms"), _require(spec, "weights"))
        source = measure_from_spec(_require(spec, "of"), dim)
        grid = _require(spec, "grid")
        if isinstance(grid, dict):
            unknown = set(grid) - {"lo", "hi", "points", "spacing"}
            if unknown:
                raise ConfigError(f"unexpected grid key {sorted(unknown)[0]!r}", key="grid")
            grid = make_grid(
                float(_require(grid, "lo")),
                float(_require(grid, "hi")),
                int(_require(grid, "points")),
                grid.get("spacing", "log"),
            )
        return approximate_piecewise_constant(source, grid)
    except DomainError as exc:
        raise ConfigError(f"invalid {kind} measure: {exc}", key=kind) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {kind} measure: {exc}", key=kind) from exc
