"""The generator ``F = exp(-Lambda)`` of a reciprocal Archimedean copula.

For a radial measure ``nu`` and dimension ``d``::

    Lambda(t) = int_t^inf (1 - t/x)^(d-1) nu(dx)

``Lambda`` is non-increasing and d-monotone, ``Lambda(0) = nu((0, inf])``
and ``F(t) = exp(-Lambda(t))`` is a distribution function on [0, inf).
The survival function of ``nu`` is recovered from ``Lambda`` and its first
``d - 1`` derivatives by inverting the Williamson transform.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import comb, gammaln

from .errors import DomainError, NumericError, UnsupportedMeasureError
from .radial import (
    DiscreteRadial,
    GalambosRadial,
    HarmonicRadial,
    RadialMeasure,
    ScaledRadial,
    _check_dim,
    _finish,
    _prepare,
    numeric_pseudo_inverse,
)

__all__ = [
    "Generator",
    "exponent_lambda",
    "generator_F",
    "generator_F_inverse",
    "williamson_survival_from_lambda",
    "finite_difference_weights",
]

QUAD_RTOL = 1e-10
_CHUNK = 1 << 21


@lru_cache(maxsize=None)
def _bernoulli_plus(n: int) -> tuple[Fraction, ...]:
    """Exact Bernoulli numbers ``B_0..B_n`` with the convention ``B_1 = +1/2``."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    if n >= 1:
        b[1] = Fraction(1, 2)
    return tuple(b)


@lru_cache(maxsize=None)
def _power_sum_coefficients(j: int) -> np.ndarray:
    """Coefficients (highest degree first) of ``K -> 1^j + ... + K^j``."""
    b = _bernoulli_plus(j)
    coeffs = [math.comb(j + 1, i) * b[i] / (j + 1) for i in range(j + 1)]
    # degrees j+1 down to 1; the constant term is zero
    return np.array([float(c) for c in coeffs] + [0.0])


def _power_sum(K: np.ndarray, j: int) -> np.ndarray:
    if j == 0:
        return K
    return np.polyval(_power_sum_coefficients(j), K)


class Generator:
    """``Lambda``, ``F`` and ``F^{-1}`` for a radial measure in dimension ``d``."""

    def __init__(self, measure: RadialMeasure, dim: int):
        self.measure = measure
        self.dim = _check_dim(dim)
        self.support_max = float(measure.support_max)
        if math.isfinite(self.support_max):
            self.bracket = (self.support_max * 1e-3, self.support_max)
        else:
            self.bracket = (1e-3, 1e3)
        if isinstance(measure, GalambosRadial):
            a = 1.0 / measure.theta
            self._galambos_scale = math.exp(
                measure.log_density_scale + gammaln(a) + gammaln(self.dim) - gammaln(a + self.dim)
            )

    def __repr__(self):
        return f"Generator({self.measure!r}, dim={self.dim})"

    # ------------------------------------------------------------------ Lambda

    def exponent(self, t):
        """``Lambda(t)`` for ``t >= 0``."""
        t, scalar = _prepare(t)
        if not np.all(t >= 0):
            raise DomainError("Lambda is defined for t >= 0")
        return _finish(self._lambda_value(t), scalar)

    def _lambda_value(self, t):
        zero = t == 0
        if not zero.any():
            return self._lambda(t, 0)
        out = np.asarray(self._lambda(np.where(zero, 1.0, t), 0), dtype=float)
        return np.where(zero, self.measure.total_mass, out)

    def exponent_derivative(self, t, order: int):
        """Analytic ``Lambda^{(order)}(t)``; right-hand derivative at kinks."""
        t, scalar = _prepare(t)
        if not np.all(t > 0):
            raise DomainError("derivatives are taken at t > 0")
        if order < 0 or order > self.dim - 1:
            raise DomainError(f"derivative order must lie in 0..{self.dim - 1}")
        return _finish(self._lambda(t, order, analytic_only=True), scalar)

    @property
    def has_analytic_derivatives(self) -> bool:
        m = self.measure
        while isinstance(m, ScaledRadial):
            m = m.base
        return isinstance(m, (GalambosRadial, HarmonicRadial, DiscreteRadial))

    def _lambda(self, t, r, analytic_only=False, measure=None):
        m = self.measure if measure is None else measure
        if isinstance(m, ScaledRadial):
            return m.factor * self._lambda(t, r, analytic_only, m.base)
        if isinstance(m, GalambosRadial):
            return self._lambda_galambos(t, r, m)
        if isinstance(m, HarmonicRadial):
            return self._lambda_harmonic(t, r, m)
        if isinstance(m, DiscreteRadial):
            return self._lambda_discrete(t, r, m)
        if analytic_only or r != 0:
            raise UnsupportedMeasureError(
                f"no analytic derivatives of Lambda for {type(m).__name__}"
            )
        return self._lambda_quadrature(t, m)

    def _lambda_galambos(self, t, r, m):
        a = 1.0 / m.theta
        scale = self._galambos_scale
        if r:
            # (-1)^r a (a+1) ... (a+r-1)
            scale *= (-1) ** r * math.exp(gammaln(a + r) - gammaln(a))
        with np.errstate(divide="ignore"):
            return scale * t ** (-a - r)

    def _lambda_harmonic(self, t, r, m):
        n = self.dim - 1
        K = HarmonicRadial.atom_count(t)
        if r == 0 and n == 1:
            return m.theta * K * (1.0 - t * (K + 1.0) / 2.0)
        # sum_k (-k)^r n!/(n-r)! (1 - k t)^(n-r), expanded in powers of t
        out = np.zeros_like(t)
        for j in range(n - r + 1):
            out += comb(n - r, j, exact=True) * (-t) ** j * _power_sum(K, r + j)
        factor = m.theta * math.perm(n, r) * (-1) ** r
        out = factor * out
        return np.where(K > 0, out, 0.0)

    def _lambda_discrete(self, t, r, m):
        n = self.dim - 1
        atoms, weights = m.atoms, m.weights
        flat = t.ravel()
        out = np.empty_like(flat)
        rows = max(1, _CHUNK // atoms.size)
        coef = weights * math.perm(n, r) * (-1.0 / atoms) ** r
        for start in range(0, flat.size, rows):
            tc = flat[start:start + rows, None]
            base = np.clip(1.0 - tc / atoms, 0.0, None)
            terms = np.where(atoms > tc, coef * base ** (n - r), 0.0)
            out[start:start + rows] = terms.sum(axis=1)
        return out.reshape(t.shape)

    def _lambda_quadrature(self, t, m):
        if not m.has_density:
            raise UnsupportedMeasureError(
                f"{type(m).__name__} needs a density or a closed-form Lambda"
            )
        n = self.dim - 1
        flat = t.ravel()
        out = np.empty_like(flat)
        for i, tv in enumerate(flat):
            if tv == 0.0:
                out[i] = m.total_mass
                continue
            if tv >= m.support_max:
                out[i] = 0.0
                continue

            # x = t / (1 - s) maps (t, inf) onto (0, 1)
            def integrand(s, tv=tv):
                x = tv / (1.0 - s)
                return s**n * m.density(x) * x / (1.0 - s)

            res = integrate.quad(
                integrand, 0.0, 1.0, epsrel=QUAD_RTOL, epsabs=0.0, limit=500, full_output=1
            )
            value, abserr = res[0], res[1]
            # a fourth element is the warning message of a non-converged run
            if not np.isfinite(value) or (len(res) > 3 and abserr > 1e-8 * abs(value)):
                raise NumericError(
                    f"quadrature for Lambda({tv!r}) did not converge", residual=abserr
                )
            out[i] = value
        return out.reshape(t.shape)

    # ---------------------------------------------------------------- F, F^-1

    def cdf(self, t):
        """``F(t) = exp(-Lambda(t))``; equals 1 for ``t = inf``."""
        t, scalar = _prepare(t)
        if not np.all(t >= 0):
            raise DomainError("F is defined for t >= 0")
        inside = np.isfinite(t) & (t < self.support_max)
        lam = np.zeros_like(t)
        if inside.any():
            lam[inside] = self._lambda_value(t[inside])
        with np.errstate(over="ignore"):
            return _finish(np.exp(-lam), scalar)

    def quantile(self, u):
        """``F^{-1}(u) = inf{t >= 0 : F(t) >= u}``.

        ``F^{-1}(0) = 0`` and ``F^{-1}(1)`` is the right end of the support
        (``inf`` when unbounded).
        """
        u, scalar = _prepare(u)
        if not np.all((u >= 0) & (u <= 1)):
            raise DomainError("F^{-1} is defined on [0, 1]")
        if isinstance(self.measure, GalambosRadial):
            with np.errstate(divide="ignore"):
                # adding 0.0 turns -log(1) = -0.0 into +0.0
                target = -np.log(u) + 0.0
                out = (self._galambos_scale / target) ** self.measure.theta
            return _finish(out, scalar)
        out = np.array([self._quantile_one(float(v)) for v in u.ravel()]).reshape(u.shape)
        return _finish(out, scalar)

    def _quantile_one(self, u):
        if u == 0.0:
            return 0.0
        if u == 1.0:
            return self.support_max
        target = -math.log(u)
        if target >= self.measure.total_mass:
            # F(0) = exp(-u_nu) >= u
            return 0.0

        def lam(x):
            return float(self._lambda_value(np.array([x]))[0])

        return numeric_pseudo_inverse(lam, target, self.bracket, tol=0.0, expand=True)


def exponent_lambda(g: Generator, t):
    return g.exponent(t)


def generator_F(g: Generator, t):
    return g.cdf(t)


def generator_F_inverse(g: Generator, u):
    return g.quantile(u)


# ------------------------------------------------------------------ Williamson


def finite_difference_weights(nodes, order: int) -> np.ndarray:
    """Weights ``w`` with ``f^{(order)}(0) ~ sum_j w_j f(nodes_j)`` (Fornberg)."""
    z = np.asarray(nodes, dtype=float)
    n = z.size
    if order >= n:
        raise DomainError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, z[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _fd_derivative(g: Generator, t: float, order: int, one_sided: bool, step: float | None):
    if order == 0:
        return float(g.exponent(t))
    h = step if step is not None else t * 10.0 ** (-16.0 / (order + 4))
    if not h > 0 or t + h == t:
        raise NumericError(f"finite-difference step underflow at t={t!r}")
    if one_sided:
        nodes = np.arange(0, order + 4, dtype=float)
    else:
        r = order // 2 + 2
        nodes = np.arange(-r, r + 1, dtype=float)
        if t + nodes[0] * h <= 0:
            raise NumericError(f"central stencil leaves (0, inf) at t={t!r}")
    w = finite_difference_weights(nodes, order)
    values = np.asarray(g.exponent(t + nodes * h), dtype=float)
    return float(np.dot(w, values) / h**order)


def williamson_survival_from_lambda(
    g: Generator, t: float, derivative_scheme: str = "auto", step: float | None = None
) -> float:
    """Recover ``S(t)`` from ``Lambda`` and its derivatives.

    ``S(t) = sum_{k=0}^{d-2} (-1)^k Lambda^{(k)}(t) t^k / k!
    + (-1)^{d-1} Lambda_+^{(d-1)}(t) t^{d-1} / (d-1)!``

    ``derivative_scheme`` is ``"analytic"``, ``"finite_difference"`` or
    ``"auto"`` (analytic when available). Finite differences are central
    for orders below ``d - 1`` and right-sided for the top order, which is
    a right-hand derivative.
    """
    t = float(t)
    if not t > 0:
        raise DomainError("Williamson inversion needs t > 0")
    if derivative_scheme == "auto":
        derivative_scheme = "analytic" if g.has_analytic_derivatives else "finite_difference"
    n = g.dim - 1
    total = 0.0
    for k in range(n + 1):
        if derivative_scheme == "analytic":
            dk = float(g.exponent_derivative(t, k))
        elif derivative_scheme == "finite_difference":
            dk = _fd_derivative(g, t, k, one_sided=(k == n), step=step)
        else:
            raise DomainError(f"unknown derivative scheme {derivative_scheme!r}")
        total += (-1) ** k * dk * t**k / math.factorial(k)
    return total
