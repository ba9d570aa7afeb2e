import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gamma

from racsim.errors import (
    BracketError,
    ConfigError,
    DomainError,
    OutOfRangeError,
    UnsupportedMeasureError,
)
from racsim.radial import (
    CustomRadial,
    DiscreteRadial,
    GalambosRadial,
    HarmonicRadial,
    PiecewiseConstantApprox,
    ScaledRadial,
    TailClass,
    approximate_piecewise_constant,
    galambos_constant,
    make_grid,
    measure_from_spec,
    numeric_pseudo_inverse,
    runtime_tail_classification,
)


def galambos_density(theta, d):
    k = gamma(d + 1 / theta) / (gamma(d) * gamma(1 / theta))
    return lambda x: k * x ** (-1 / theta - 1)


def quad_survival(density, t):
    return integrate.quad(density, t, np.inf, epsrel=1e-12)[0]


class TestSurvival:
    def test_galambos_theta1(self):
        m = GalambosRadial(1.0, 2)
        assert m.survival(0.5) == pytest.approx(4.0, rel=1e-14)
        # oracle: integrate the density 2 x^-2 over (0.5, inf)
        assert quad_survival(galambos_density(1.0, 2), 0.5) == pytest.approx(4.0, rel=1e-10)

    @pytest.mark.parametrize("theta,d", [(0.5, 2), (2.0, 3), (0.3, 5)])
    @pytest.mark.parametrize("t", [0.2, 1.0, 7.5])
    def test_galambos_matches_integrated_density(self, theta, d, t):
        m = GalambosRadial(theta, d)
        assert m.survival(t) == pytest.approx(quad_survival(galambos_density(theta, d), t), rel=1e-9)

    def test_harmonic(self):
        m = HarmonicRadial(1.0)
        assert m.survival(0.4) == 2.0
        # right limit of theta * floor(1/u)
        assert 1.0 * math.floor(1 / (0.4 + 1e-9)) == 2.0

    def test_harmonic_right_continuous_at_atoms(self):
        m = HarmonicRadial(0.5)
        # atom 1/2 is not in (1/2, inf]
        assert m.survival(0.5) == 0.5
        assert m.survival(0.5 - 1e-12) == 1.0
        assert m.survival(1.0) == 0.0
        assert m.survival(1 / 3) == 2 * 0.5

    def test_discrete_above_all_atoms(self):
        assert DiscreteRadial([2, 1], [3, 5]).survival(2.5) == 0.0

    def test_discrete_step_values(self):
        m = DiscreteRadial([2, 1], [3, 5])
        assert m.survival(2.0) == 0.0
        assert m.survival(1.5) == 3.0
        assert m.survival(1.0) == 3.0
        assert m.survival(0.3) == 8.0

    def test_vectorised_shape(self, measure):
        t = np.linspace(0.05, 4, 12).reshape(3, 4)
        out = measure.survival(t)
        assert out.shape == (3, 4)
        assert isinstance(measure.survival(0.3), float)

    def test_domain(self, measure):
        with pytest.raises(DomainError):
            measure.survival(0.0)
        with pytest.raises(DomainError):
            measure.survival(np.array([1.0, -1.0]))

    def test_non_increasing(self, measure):
        t = np.sort(np.random.default_rng(0).uniform(1e-3, 5, 5000))
        s = measure.survival(t)
        assert np.all(np.diff(s) <= 0)
        assert np.all(np.isfinite(s))


class TestPseudoInverse:
    def test_harmonic(self):
        m = HarmonicRadial(0.5)
        assert m.pseudo_inverse(0.7) == 0.5
        # oracle: inf{x : S(x) <= 0.7} by scanning a fine grid
        xs = np.linspace(1e-4, 1.5, 150_001)
        ok = xs[m.survival(xs) <= 0.7]
        assert ok.min() == pytest.approx(0.5, abs=1e-4)

    def test_harmonic_right_continuous_in_y(self):
        m = HarmonicRadial(0.5)
        # at multiples of theta the next atom takes over
        assert m.pseudo_inverse(0.0) == 1.0
        assert m.pseudo_inverse(0.5) == 0.5
        assert m.pseudo_inverse(0.5 - 1e-12) == 1.0
        assert m.pseudo_inverse(1.0) == 1 / 3

    def test_galambos(self):
        assert GalambosRadial(1.0, 2).pseudo_inverse(4.0) == pytest.approx(0.5, rel=1e-14)
        assert GalambosRadial(1.0, 2).pseudo_inverse(0.0) == math.inf

    def test_galois_direction(self, measure):
        xs = np.geomspace(0.01, 3.0, 50)
        s = measure.survival(xs)
        for delta in (1e-3, 0.1):
            y = s + delta
            keep = y <= measure.total_mass
            assert np.all(measure.pseudo_inverse(y[keep]) <= xs[keep])

    def test_galois_random_pairs(self, measure):
        rng = np.random.default_rng(2024)
        x = np.exp(rng.uniform(np.log(1e-3), np.log(1e2), 10_000))
        top = measure.total_mass if measure.is_finite else 60.0
        y = rng.uniform(0, top, 10_000)
        lhs = y < measure.survival(x)
        rhs = measure.pseudo_inverse(y) > x
        assert np.array_equal(lhs, rhs)

    def test_galois_on_atoms_and_steps(self):
        # pairs sitting exactly on jump locations
        m = HarmonicRadial(0.25)
        x = m.atoms(40)
        y = 0.25 * np.arange(0, 40)
        X, Y = np.meshgrid(x, y)
        assert np.array_equal(Y < m.survival(X), m.pseudo_inverse(Y) > X)
        d = DiscreteRadial([3.0, 2.0, 1.0], [1.0, 0.0, 2.0])
        X, Y = np.meshgrid(d.atoms, np.array([0.0, 1.0, 2.0, 3.0]))
        assert np.array_equal(Y < d.survival(X), d.pseudo_inverse(Y) > X)

    def test_non_increasing(self, measure):
        top = measure.total_mass if measure.is_finite else 50.0
        y = np.sort(np.random.default_rng(1).uniform(0, top, 5000))
        r = measure.pseudo_inverse(y)
        assert np.all(np.diff(r) <= 0)

    def test_round_trip_continuous(self):
        rng = np.random.default_rng(3)
        for m in (GalambosRadial(1.0, 2), GalambosRadial(0.4, 4), GalambosRadial(3.0, 3)):
            y = rng.uniform(0.01, 100, 1000)
            assert np.allclose(m.survival(m.pseudo_inverse(y)), y, rtol=1e-9, atol=0)

    def test_out_of_range(self):
        m = DiscreteRadial([1.0], [2.0])
        assert m.pseudo_inverse(2.0) == 0.0
        with pytest.raises(OutOfRangeError):
            m.pseudo_inverse(2.0000001)
        with pytest.raises(DomainError):
            m.pseudo_inverse(-0.1)

    def test_discrete_image_in_atoms(self):
        m = DiscreteRadial([3.0, 2.0, 1.0, 0.5, 0.1], [0.5, 1.0, 0.0, 2.0, 1.5])
        y = np.random.default_rng(4).uniform(0, m.total_mass, 10_000)
        assert set(np.unique(m.pseudo_inverse(y))) <= set(m.atoms.tolist())
        # zero-weight atom 1.0 is never hit
        assert 1.0 not in set(np.unique(m.pseudo_inverse(y)))

    def test_discrete_constant_between_atoms(self):
        m = DiscreteRadial([3.0, 2.0, 1.0, 0.5], [0.5, 1.0, 0.7, 2.0])
        for hi, lo in zip(m.atoms[:-1], m.atoms[1:]):
            t = np.linspace(lo, hi, 101)[:-1]
            assert np.ptp(m.survival(t)) == 0.0


def test_harmonic_agrees_with_truncated_discrete():
    h = HarmonicRadial(0.3)
    n = 1000
    disc = DiscreteRadial(h.atoms(n), h.weights(n))
    rng = np.random.default_rng(5)
    t = rng.uniform(1.0 / n + 1e-9, 2.0, 20_000)
    # cumulative weight sums drift by a few ulps against theta * count
    assert np.allclose(h.survival(t), disc.survival(t), rtol=1e-12, atol=0)
    y = rng.uniform(0, 0.3 * n * 0.999, 20_000)
    assert np.array_equal(h.pseudo_inverse(y), disc.pseudo_inverse(y))


class TestGalambosConstant:
    @pytest.mark.parametrize("d", range(2, 11))
    def test_theta_one_is_dimension(self, d):
        assert galambos_constant(1.0, d) == pytest.approx(d, rel=1e-12)

    def test_theta_two(self):
        expected = (gamma(2) * gamma(0.5) / (gamma(2.5) * 2)) ** -2
        assert expected == pytest.approx(2.25, rel=1e-14)
        assert galambos_constant(2.0, 2) == pytest.approx(expected, rel=1e-13)

    def test_theta_two_by_numeric_inversion(self):
        # oracle: invert the integrated density numerically, c = S^{-1}(1)
        dens = galambos_density(2.0, 2)
        c = numeric_pseudo_inverse(lambda x: quad_survival(dens, x), 1.0, (1e-3, 1e3), tol=1e-13)
        assert galambos_constant(2.0, 2) == pytest.approx(c, rel=1e-9)

    def test_large_dimension_no_overflow(self):
        c = galambos_constant(0.01, 200)
        assert math.isfinite(c) and c > 0

    def test_invalid(self):
        with pytest.raises(DomainError):
            galambos_constant(0.0, 2)
        with pytest.raises(DomainError):
            galambos_constant(1.0, 1)


class TestPiecewiseConstant:
    def test_example_weights(self):
        m = GalambosRadial(1.0, 2)
        approx = approximate_piecewise_constant(m, [2.0, 1.0, 0.5])
        assert isinstance(approx, PiecewiseConstantApprox)
        assert approx.atoms.tolist() == [2.0, 1.0, 0.5]
        assert np.allclose(approx.weights, [1.0, 1.0, 2.0], rtol=1e-14)
        assert approx.total_mass == pytest.approx(4.0)

    def test_discrete_unchanged(self):
        d = DiscreteRadial([1.0], [2.0])
        assert approximate_piecewise_constant(d, [1.0, 0.5]) is d
        h = HarmonicRadial(1.0)
        assert approximate_piecewise_constant(h, [1.0, 0.5]) is h

    def test_left_limits_match_and_dominated(self):
        m = GalambosRadial(0.7, 3)
        grid = make_grid(0.05, 10.0, 200)
        approx = approximate_piecewise_constant(m, grid)
        # S_approx(t_j-) = S(t_j); S_approx <= S everywhere
        assert np.allclose(approx.survival(grid * (1 - 1e-12)), m.survival(grid), rtol=1e-9)
        t = np.geomspace(0.01, 20, 3000)
        assert np.all(approx.survival(t) <= m.survival(t) * (1 + 1e-12))
        # pseudo-inverse of the approximation is the Example-type closed form
        y = m.survival(grid[1:]) * (1 - 1e-9)
        assert np.array_equal(approx.pseudo_inverse(y), grid[1:])

    def test_error_bound(self):
        m = GalambosRadial(1.0, 2)
        grid = make_grid(0.5, 2.0, 31, "linear")
        approx = approximate_piecewise_constant(m, grid)
        t = np.linspace(0.5, 2.0, 20_001)[:-1]
        err = np.max(np.abs(approx.survival(t) - m.survival(t)))
        assert err <= approx.max_cell_oscillation() * (1 + 1e-12)

    def test_refinement_halves_error(self):
        m = GalambosRadial(1.0, 2)
        probe = np.linspace(0.5, 2.0, 200_001)[:-1]
        errs = []
        for cells in (50, 100, 200):
            grid = np.linspace(2.0, 0.5, cells + 1)
            approx = approximate_piecewise_constant(m, grid)
            errs.append(np.max(np.abs(approx.survival(probe) - m.survival(probe))))
        assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.03)
        assert errs[2] / errs[1] == pytest.approx(0.5, abs=0.03)

    def test_tail_truncated(self):
        m = GalambosRadial(1.0, 2)
        approx = approximate_piecewise_constant(m, [2.0, 1.0, 0.5])
        assert approx.survival(0.01) == pytest.approx(m.survival(0.5))
        assert approx.is_finite

    def test_bad_grids(self):
        m = GalambosRadial(1.0, 2)
        with pytest.raises(DomainError):
            approximate_piecewise_constant(m, [])
        with pytest.raises(DomainError):
            approximate_piecewise_constant(m, [0.5, 1.0])


class TestNumericPseudoInverse:
    def test_power(self):
        x = numeric_pseudo_inverse(lambda t: 2 / t, 4.0, (1e-6, 1e6), tol=1e-12)
        assert x == pytest.approx(0.5, abs=1e-12)

    def test_step_function(self):
        h = HarmonicRadial(1.0)
        x = numeric_pseudo_inverse(h.survival, 1.5, (1e-6, 1e6))
        assert x == pytest.approx(1 / math.ceil(1.5), abs=1e-12)
        assert h.survival(x) <= 1.5

    def test_out_of_bracket(self):
        S = lambda t: 2 / t  # noqa: E731
        with pytest.raises(BracketError):
            numeric_pseudo_inverse(S, S(1e-6) * 2, (1e-6, 1e6))

    def test_expansion(self):
        S = lambda t: 2 / t  # noqa: E731
        x = numeric_pseudo_inverse(S, 1e-9, (1.0, 2.0), expand=True)
        assert x == pytest.approx(2e9, rel=1e-12)
        with pytest.raises(BracketError):
            numeric_pseudo_inverse(S, 1e-60, (1.0, 2.0), expand=True, max_expansions=5)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_galois_within_tol(self, y):
        m = GalambosRadial(0.7, 3)
        x = numeric_pseudo_inverse(m.survival, y, (1e-8, 1e8), tol=0.0, expand=True)
        assert m.survival(x) <= y
        assert m.survival(x * (1 - 1e-12)) >= y * (1 - 1e-9)


class TestTailClassification:
    def test_benchmark_boundary(self):
        m = GalambosRadial(1.0, 2)
        x = np.array([0.1, 1.0, 10.0])
        # x f(x) = 2/x = S(x)
        assert np.allclose(x * m.density(x), m.survival(x), rtol=1e-14)
        assert runtime_tail_classification(m, x) is TailClass.INDETERMINATE

    def test_one_sided(self):
        probes = [0.1, 1.0, 10.0]
        m = GalambosRadial(2.0, 2)
        # x f(x) = S(x) / 2 here
        assert np.all(np.asarray(probes) * m.density(probes) < m.survival(probes))
        assert runtime_tail_classification(m, probes) is TailClass.HEAVIER
        assert runtime_tail_classification(GalambosRadial(0.5, 2), probes) is TailClass.LIGHTER

    def test_mixed(self):
        # heavier below 1, lighter above: S(t) = t^-1/2 then t^-3
        S = lambda t: t**-0.5 if t < 1 else t**-3  # noqa: E731
        f = lambda t: 0.5 * t**-1.5 if t < 1 else 3 * t**-4  # noqa: E731
        m = CustomRadial(S, f)
        assert runtime_tail_classification(m, [0.5, 2.0]) is TailClass.INDETERMINATE
        assert runtime_tail_classification(m, [2.0, 4.0]) is TailClass.LIGHTER
        assert runtime_tail_classification(m, [0.2, 0.5]) is TailClass.HEAVIER
        # equality at one probe does not override a strict side elsewhere
        eq = CustomRadial(lambda t: 1 / t if t < 1 else t**-3, lambda t: t**-2 if t < 1 else 3 * t**-4)
        assert runtime_tail_classification(eq, [0.5, 2.0]) is TailClass.LIGHTER

    def test_errors(self):
        with pytest.raises(DomainError):
            runtime_tail_classification(GalambosRadial(1.0, 2), [])
        with pytest.raises(UnsupportedMeasureError):
            runtime_tail_classification(HarmonicRadial(1.0), [0.5])


class TestOtherMeasures:
    def test_custom_matches_galambos(self):
        g = GalambosRadial(0.8, 2)
        c = CustomRadial(lambda t: float(g.survival(t)), lambda x: float(g.density(x)))
        y = np.array([0.05, 1.0, 30.0])
        assert np.allclose(c.pseudo_inverse(y), g.pseudo_inverse(y), rtol=1e-10)
        assert c.pseudo_inverse(0.0) == math.inf

    def test_scaled(self):
        base = HarmonicRadial(0.5)
        m = ScaledRadial(base, 3.0)
        t = np.array([0.05, 0.3, 0.7])
        assert np.allclose(m.survival(t), 3 * base.survival(t))
        y = np.array([0.2, 4.0, 9.5])
        assert np.array_equal(m.pseudo_inverse(y), base.pseudo_inverse(y / 3))
        fin = ScaledRadial(DiscreteRadial([1.0], [2.0]), 0.5)
        assert fin.total_mass == 1.0

    def test_density_missing(self):
        with pytest.raises(UnsupportedMeasureError):
            HarmonicRadial(1.0).density(0.5)


class TestSpec:
    def test_galambos(self):
        m = measure_from_spec('{"type":"galambos","theta":1.0,"dim":2}')
        assert isinstance(m, GalambosRadial) and m.dim == 2

    def test_galambos_dim_fallback_and_conflict(self):
        assert measure_from_spec({"type": "galambos", "theta": 1.0}, dim=4).dim == 4
        with pytest.raises(ConfigError) as exc:
            measure_from_spec({"type": "galambos", "theta": 1.0})
        assert exc.value.key == "dim"
        with pytest.raises(ConfigError):
            measure_from_spec({"type": "galambos", "theta": 1.0, "dim": 2}, dim=3)

    def test_harmonic_discrete(self):
        assert isinstance(measure_from_spec({"type": "harmonic", "theta": 0.5}), HarmonicRadial)
        d = measure_from_spec({"type": "discrete", "atoms": [2, 1], "weights": [1, 1]})
        assert d.total_mass == 2

    def test_approx(self):
        spec = {
            "type": "approx",
            "of": {"type": "galambos", "theta": 1.0, "dim": 2},
            "grid": {"lo": 1e-4, "hi": 1e2, "points": 1000, "spacing": "log"},
        }
        m = measure_from_spec(spec)
        assert isinstance(m, PiecewiseConstantApprox)
        assert m.atoms.size == 1000
        assert m.atoms[0] == pytest.approx(1e2) and m.atoms[-1] == pytest.approx(1e-4)

    @pytest.mark.parametrize(
        "spec,key",
        [
            ({"type": "gumbel", "theta": 1}, "type"),
            ({"theta": 1}, "type"),
            ({"type": "harmonic"}, "theta"),
            ({"type": "harmonic", "theta": 1, "beta": 2}, "beta"),
            ({"type": "approx", "of": {"type": "harmonic", "theta": 1}, "grid": {"lo": 1, "hi": 2, "n": 3}}, "grid"),
        ],
    )
    def test_errors_name_key(self, spec, key):
        with pytest.raises(ConfigError) as exc:
            measure_from_spec(spec)
        assert exc.value.key == key

    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            measure_from_spec({"type": "harmonic", "theta": -1})
        with pytest.raises(ConfigError):
            measure_from_spec("{not json")
