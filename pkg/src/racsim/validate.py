"""Statistical self-checks of the sampler.

Besides the building blocks (KS statistics, empirical copula, brute-force
truncation oracle, singular-set census, loop-count benchmark) this module
holds the named validation suites behind ``racsim validate``. Every suite
runs on pinned seeds, so its report is reproducible bit for bit.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import stats

from .copula import CopulaSpec, copula_cdf, maxid_cdf_monte_carlo
from .errors import DomainError, UnsupportedMeasureError
from .generator import Generator, williamson_survival_from_lambda
from .points import PointStream, exponential_draw
from .radial import (
    DiscreteRadial,
    GalambosRadial,
    HarmonicRadial,
    RadialMeasure,
)
from .sampler import expected_loops_galambos_theta1, simulate
from .simplex import SimplexLaw

__all__ = [
    "ValidationReport",
    "truncated_oracle_sample",
    "ks_uniform",
    "empirical_cdf",
    "empirical_copula_discrepancy",
    "singular_component_census",
    "loop_count_benchmark",
    "LoopBenchmark",
    "poisson_count_test",
    "SUITES",
    "run_suite",
]

# --------------------------------------------------------------------------
# building blocks


def truncated_oracle_sample(
    m: RadialMeasure,
    d: int,
    K: int,
    rng: np.random.Generator,
    law: SimplexLaw | None = None,
    size: int | None = None,
) -> np.ndarray:
    """Componentwise maximum of ``R_k Q^(k)`` over the first ``K`` points.

    Returns shape ``(d,)`` or ``(size, d)``. Approaches the exact law as
    ``K`` grows; points beyond the mass of a finite measure contribute 0.
    Draws are consumed point by point, so the run with ``K`` points is a
    prefix of the run with ``K + 1`` points on the same stream.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    law = SimplexLaw(d) if law is None else law
    rows = 1 if size is None else int(size)
    y = np.zeros((rows, d))
    T = np.zeros(rows)
    for _ in range(K):
        T += exponential_draw(rng, rows)
        if m.is_finite:
            R = np.zeros(rows)
            live = T <= m.total_mass
            R[live] = m.pseudo_inverse(T[live])
        else:
            R = m.pseudo_inverse(T)
        np.maximum(y, R[:, None] * law.sample(rng, rows), out=y)
    return y[0] if size is None else y


def ks_uniform(samples) -> float:
    """Kolmogorov distance between the empirical CDF and U(0, 1)."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("empty sample")
    if x[0] < 0 or x[-1] > 1 or np.isnan(x).any():
        raise DomainError("samples must lie in [0, 1]")
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def empirical_cdf(samples: np.ndarray, point) -> float:
    return float(np.mean(np.all(samples <= np.asarray(point, dtype=float), axis=1)))


def empirical_copula_discrepancy(samples: np.ndarray, spec: CopulaSpec, grid: Iterable) -> float:
    """Largest ``|P_n(U <= u) - C(u)|`` over the grid points.

    ``spec`` is anything with a ``cdf(u)`` method; grid coordinates above 1
    are clipped, which reduces the dimension of the reference copula.
    """
    samples = np.asarray(samples, dtype=float)
    grid = [np.asarray(p, dtype=float) for p in grid]
    if not grid:
        raise DomainError("grid is empty")
    worst = 0.0
    for p in grid:
        worst = max(worst, abs(empirical_cdf(samples, p) - spec.cdf(np.minimum(p, 1.0))))
    return worst


def _reference_levels(m: RadialMeasure, K: int) -> np.ndarray:
    if isinstance(m, HarmonicRadial):
        return m.atoms(K)
    if isinstance(m, DiscreteRadial):
        return m.atoms[:K]
    return 1.0 / np.arange(1, K + 1, dtype=float)


def singular_component_census(
    samples_raw: np.ndarray, m: RadialMeasure, K: int, tol: float = 1e-12
) -> np.ndarray:
    """Count bivariate draws with ``y_1 + y_2`` equal to the ``k``-th atom.

    Such draws come from a single point attaining both maxima and lie on the
    singular set ``A_k``. For continuous measures the atoms ``1/k`` serve as
    reference levels and every count should be zero.
    """
    y = np.asarray(samples_raw, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2:
        raise UnsupportedMeasureError("singular-set census is bivariate only")
    s = y.sum(axis=1)
    levels = _reference_levels(m, K)
    return np.array([int(np.sum(np.abs(s - a) <= tol)) for a in levels])


@dataclass
class LoopBenchmark:
    mean: float
    ci: tuple[float, float]
    reference: float | None
    n: int
    wall_time: float


def loop_count_benchmark(
    m: RadialMeasure,
    d: int,
    law: SimplexLaw | None,
    n: int,
    rng,
    confidence: float = 0.99,
) -> LoopBenchmark:
    """Mean loop count with a normal-approximation confidence interval.

    The analytic reference is attached only for Galambos ``theta = 1`` with
    uniform angles, the case where it is known.
    """
    if n < 1000:
        raise DomainError("loop benchmark needs n >= 1000")
    res = simulate(m, d, law, n, rng, copula=not m.is_finite)
    loops = res.loops.astype(float)
    mean = float(loops.mean())
    half = float(stats.norm.ppf(0.5 + confidence / 2) * loops.std(ddof=1) / math.sqrt(n))
    reference = None
    if isinstance(m, GalambosRadial) and m.theta == 1.0 and m.dim == d and (law is None or law.is_uniform):
        reference = expected_loops_galambos_theta1(d)
    return LoopBenchmark(mean, (mean - half, mean + half), reference, n, res.wall_time)


def poisson_count_test(measure: RadialMeasure, streams: int, rng: np.random.Generator):
    """Chi-square test of point counts of finite-mass streams against Poisson.

    Returns ``(statistic, p_value, counts)``. Cells are merged from the top
    until each expected count is at least 5.
    """
    if not measure.is_finite:
        raise UnsupportedMeasureError("point counts are only finite for finite measures")
    counts = np.empty(streams, dtype=np.int64)
    for i in range(streams):
        s = PointStream(measure, rng)
        while s.next() is not None:
            pass
        counts[i] = s.count
    mu = measure.total_mass
    top = int(stats.poisson.ppf(1 - 5.0 / streams, mu)) if streams > 5 else 1
    while top > 1 and streams * stats.poisson.sf(top - 1, mu) < 5:
        top -= 1
    observed = np.bincount(np.minimum(counts, top), minlength=top + 1)
    expected = streams * np.append(stats.poisson.pmf(np.arange(top), mu), stats.poisson.sf(top - 1, mu))
    chi2, p = stats.chisquare(observed, expected)
    return float(chi2), float(p), counts


# --------------------------------------------------------------------------
# reports


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)

    def add(self, test, statistic, threshold, passed, seed, n, **extra):
        entry = {
            "test": test,
            "statistic": float(statistic),
            "threshold": float(threshold),
            "pass": bool(passed),
            "seed": seed,
            "n": int(n),
        }
        entry.update(extra)
        self.entries.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        return all(e["pass"] for e in self.entries)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e) for e in self.entries)

    def extend(self, other: "ValidationReport"):
        self.entries.extend(other.entries)


class _BiasedInverse(RadialMeasure):
    """Negative control: ``S^{-1}`` inflated by a constant factor."""

    def __init__(self, base: RadialMeasure, factor: float = 1.25):
        self.base = base
        self.factor = factor
        self.total_mass = base.total_mass
        self.support_max = base.support_max
        self.discrete = base.discrete

    def _survival(self, t):
        return self.base._survival(t)

    def _pseudo_inverse(self, y):
        return self.factor * self.base._pseudo_inverse(y)


# --------------------------------------------------------------------------
# suites

MARGIN_CONFIGS = [("galambos", th, d) for th in (0.5, 1.0, 2.0) for d in (2, 3)] + [
    ("harmonic", 0.5, 2),
    ("harmonic", 0.025, 2),
]
KS_THRESHOLD = 0.0061
COPULA_THRESHOLD = 0.01
LOOP_RTOL = 0.03
ORACLE_P = 0.01
POISSON_P = 0.001
WILLIAMSON_RTOL = 1e-6
MAXID_SIGMAS = 3.0

SEEDS = {
    "margins": 1001,
    "oracle": 2002,
    "loops": 3003,
    "poisson": 4004,
    "singular": 5005,
    "maxid": 6006,
}


def build_measure(kind: str, theta: float, d: int) -> RadialMeasure:
    if kind == "galambos":
        return GalambosRadial(theta, d)
    if kind == "harmonic":
        return HarmonicRadial(theta)
    raise ValueError(kind)


def copula_grid(d: int) -> list:
    levels = (0.1, 0.3, 0.5, 0.7, 0.9) if d == 2 else (0.25, 0.5, 0.75)
    return [np.array(p) for p in itertools.product(levels, repeat=d)]


def margin_samples(n: int = 100_000):
    """Pinned-seed copula samples for every margin configuration."""
    out = {}
    for i, (kind, theta, d) in enumerate(MARGIN_CONFIGS):
        m = build_measure(kind, theta, d)
        seed = SEEDS["margins"] + i
        res = simulate(m, d, None, n, seed)
        out[(kind, theta, d)] = (m, seed, res)
    return out


def _label(kind, theta, d):
    return f"{kind}(theta={theta:g},d={d})"


def suite_margins(samples=None, n=100_000) -> ValidationReport:
    rep = ValidationReport()
    samples = samples or margin_samples(n)
    for (kind, theta, d), (m, seed, res) in samples.items():
        for i in range(d):
            stat = ks_uniform(res.u[:, i])
            rep.add(f"margin_ks:{_label(kind, theta, d)}:u{i + 1}", stat, KS_THRESHOLD,
                    stat < KS_THRESHOLD, seed, len(res.u))
    return rep


def suite_copula(samples=None, n=100_000, n_mc=100_000) -> ValidationReport:
    rep = ValidationReport()
    samples = samples or margin_samples(n)
    for (kind, theta, d), (m, seed, res) in samples.items():
        spec = CopulaSpec(Generator(m, d))
        stat = empirical_copula_discrepancy(res.u, spec, copula_grid(d))
        rep.add(f"copula_grid:{_label(kind, theta, d)}", stat, COPULA_THRESHOLD,
                stat < COPULA_THRESHOLD, seed, len(res.u))
    rep.extend(suite_maxid(n_mc))
    return rep


MAXID_PROBES = [
    (0.5, 0.5), (1.0, 1.0), (2.0, 2.0), (0.5, 2.0), (2.0, 0.5),
    (1.0, 3.0), (0.3, 0.8), (4.0, 1.5), (0.7, 0.7), (1.5, 6.0),
]


def suite_maxid(n_mc=100_000) -> ValidationReport:
    """Monte Carlo max-id formula against the copula formula, Galambos theta=1, d=2."""
    rep = ValidationReport()
    m = GalambosRadial(1.0, 2)
    g = Generator(m, 2)
    spec = CopulaSpec(g)
    law = SimplexLaw(2)
    seed = SEEDS["maxid"]
    rng = np.random.default_rng(seed)
    for y in MAXID_PROBES:
        est = maxid_cdf_monte_carlo(m, law, y, n_mc, rng)
        exact = copula_cdf(spec, g.cdf(np.array(y)))
        z = abs(est.estimate - exact) / est.std_error
        rep.add(f"maxid:y={y}", z, MAXID_SIGMAS, z < MAXID_SIGMAS, seed, n_mc,
                estimate=est.estimate, exact=exact)
    return rep


ORACLE_MEASURES = [("galambos", 1.0, 2), ("harmonic", 0.5, 2)]


def suite_oracle(n=10_000, K=10_000, corrupt=False, poisson_streams=100_000) -> ValidationReport:
    rep = ValidationReport()
    for i, (kind, theta, d) in enumerate(ORACLE_MEASURES):
        m = build_measure(kind, theta, d)
        sampled = _BiasedInverse(m) if corrupt else m
        seed = SEEDS["oracle"] + i
        exact = simulate(sampled, d, None, n, seed, generator=Generator(m, d)).y
        oracle = truncated_oracle_sample(m, d, K, np.random.default_rng(seed + 500), size=n)
        columns = {f"y{j + 1}": (exact[:, j], oracle[:, j]) for j in range(d)}
        columns["min"] = (exact.min(axis=1), oracle.min(axis=1))
        columns["max"] = (exact.max(axis=1), oracle.max(axis=1))
        for name, (a, b) in columns.items():
            p = stats.ks_2samp(a, b).pvalue
            rep.add(f"oracle_ks2:{_label(kind, theta, d)}:{name}", p, ORACLE_P, p > ORACLE_P,
                    seed, n, K=K)
    seed = SEEDS["poisson"]
    chi2, p, _ = poisson_count_test(DiscreteRadial([1.0], [2.0]), poisson_streams,
                                    np.random.default_rng(seed))
    rep.add("poisson_count:u_nu=2", p, POISSON_P, p > POISSON_P, seed, poisson_streams, chi2=chi2)
    return rep


def suite_loops(n=100_000, dims=(2, 3, 5)) -> ValidationReport:
    rep = ValidationReport()
    for d in dims:
        seed = SEEDS["loops"] + d
        bench = loop_count_benchmark(GalambosRadial(1.0, d), d, None, n, seed)
        rel = abs(bench.mean - bench.reference) / bench.reference
        rep.add(f"loops:galambos(theta=1,d={d})", rel, LOOP_RTOL, rel < LOOP_RTOL, seed, n,
                mean=bench.mean, reference=bench.reference)
    return rep


def suite_singular(n=2000, K=10) -> ValidationReport:
    rep = ValidationReport()
    seed = SEEDS["singular"]
    m = HarmonicRadial(0.5)
    y = simulate(m, 2, None, n, seed).y
    c = singular_component_census(y, m, K)
    rep.add("singular:harmonic(theta=0.5):c1>0", c[0], 0, c[0] > 0, seed, n, counts=c.tolist())
    for k in range(2):
        gap = c[k + 1] - c[k]
        sigma = math.sqrt(max(c[k] + c[k + 1], 1))
        rep.add(f"singular:harmonic(theta=0.5):c{k + 1}>=c{k + 2}", gap / sigma, 3.0,
                gap / sigma <= 3.0, seed, n)
    control = GalambosRadial(1.0, 2)
    yc = simulate(control, 2, None, n, seed + 1).y
    cc = singular_component_census(yc, control, K)
    rep.add("singular:galambos_control:zero", int(cc.sum()), 0, cc.sum() == 0, seed + 1, n)
    return rep


def suite_williamson(probes=20) -> ValidationReport:
    rep = ValidationReport()
    ts = np.geomspace(0.05, 20.0, probes)
    for d in (2, 3):
        m = GalambosRadial(1.0, d)
        g = Generator(m, d)
        exact = m.survival(ts)
        for scheme in ("analytic", "finite_difference"):
            rec = np.array([williamson_survival_from_lambda(g, t, scheme) for t in ts])
            err = float(np.max(np.abs(rec - exact) / exact))
            rep.add(f"williamson:{scheme}:galambos(theta=1,d={d})", err, WILLIAMSON_RTOL,
                    err < WILLIAMSON_RTOL, None, probes)
    return rep


SUITES = ("margins", "copula", "oracle", "loops", "singular", "williamson", "all")


def run_suite(name: str, corrupt: bool = False, K: int = 10_000) -> ValidationReport:
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rep = ValidationReport()
    names = SUITES[:-1] if name == "all" else (name,)
    samples = margin_samples() if {"margins", "copula"} & set(names) else None
    for s in names:
        if s == "margins":
            rep.extend(suite_margins(samples))
        elif s == "copula":
            rep.extend(suite_copula(samples))
        elif s == "oracle":
            rep.extend(suite_oracle(K=K, corrupt=corrupt))
        elif s == "loops":
            rep.extend(suite_loops())
        elif s == "singular":
            rep.extend(suite_singular())
        elif s == "williamson":
            rep.extend(suite_williamson())
    return rep
