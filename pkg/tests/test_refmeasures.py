"""Reference-measure moments against closed forms."""

import numpy as np
import pytest

from tmoment.monomials import basis
from tmoment.refmeasures import (ReferenceSpec, SamplingError,
                                 ball_uniform_moments, box_uniform_moments,
                                 default_reference, gaussian_moments,
                                 monte_carlo_moments)
from tmoment.semialg import SemialgebraicSet, ball_set


def _val(y, alpha):
    return y.values[basis(y.n, y.d).index_of(alpha)]


def test_gaussian_moments_closed_form():
    # E[x^(2k)] = (2k-1)!!, odd moments 0, coordinates independent
    y = gaussian_moments(2, 6)
    assert _val(y, (0, 0)) == pytest.approx(1.0)
    assert _val(y, (1, 0)) == 0.0
    assert _val(y, (2, 0)) == pytest.approx(1.0)
    assert _val(y, (4, 0)) == pytest.approx(3.0)
    assert _val(y, (6, 0)) == pytest.approx(15.0)
    assert _val(y, (2, 2)) == pytest.approx(1.0)
    assert _val(y, (4, 2)) == pytest.approx(3.0)
    assert _val(y, (3, 1)) == 0.0


def test_unit_disk_moments_closed_form():
    # uniform measure on the unit disk: moments from the polar integrals
    y = ball_uniform_moments(2, 6)
    expect = {
        (0, 0): 1.0,
        (2, 0): 1.0 / 4.0, (0, 2): 1.0 / 4.0,
        (4, 0): 1.0 / 8.0, (2, 2): 1.0 / 24.0, (0, 4): 1.0 / 8.0,
        (6, 0): 5.0 / 64.0, (4, 2): 1.0 / 64.0,
        (2, 4): 1.0 / 64.0, (0, 6): 5.0 / 64.0,
    }
    for alpha, v in expect.items():
        assert _val(y, alpha) == pytest.approx(v, abs=1e-12), alpha
    # every odd moment vanishes by symmetry
    b = basis(2, 6)
    for i in range(len(b)):
        a = b.exponent(i)
        if a[0] % 2 or a[1] % 2:
            assert y.values[i] == pytest.approx(0.0, abs=1e-14)


def test_shifted_ball_moments_binomial():
    # center (1, 0): E[x1] = 1, E[x1^2] = 1 + 1/4, E[x1 x2] = 0
    y = ball_uniform_moments(2, 2, center=np.array([1.0, 0.0]))
    assert _val(y, (1, 0)) == pytest.approx(1.0)
    assert _val(y, (2, 0)) == pytest.approx(1.25)
    assert _val(y, (1, 1)) == pytest.approx(0.0, abs=1e-14)
    assert _val(y, (0, 2)) == pytest.approx(0.25)


def test_box_moments_closed_form():
    y = box_uniform_moments(2, 4)
    assert _val(y, (2, 0)) == pytest.approx(1.0 / 3.0)
    assert _val(y, (4, 0)) == pytest.approx(1.0 / 5.0)
    assert _val(y, (2, 2)) == pytest.approx(1.0 / 9.0)
    assert _val(y, (1, 0)) == 0.0
    # asymmetric box [0, 1]: E[x^k] = 1/(k+1)
    z = box_uniform_moments(1, 3, lo=0.0, hi=1.0)
    np.testing.assert_allclose(z.values, [1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0])


def test_monte_carlo_is_deterministic_and_consistent():
    K = ball_set(2, 1.0)
    a = monte_carlo_moments(K, 4, samples=200_000, seed=7)
    b = monte_carlo_moments(K, 4, samples=200_000, seed=7)
    np.testing.assert_array_equal(a.values, b.values)
    c = monte_carlo_moments(K, 4, samples=200_000, seed=8)
    assert not np.array_equal(a.values, c.values)
    # sampling error ~ 1/sqrt(N) for bounded integrands
    exact = ball_uniform_moments(2, 4)
    assert np.max(np.abs(a.values - exact.values)) <= 1e-2


def test_monte_carlo_guards():
    K = ball_set(2, 1.0)
    with pytest.raises(ValueError):
        monte_carlo_moments(K, 2, samples=10)
    with pytest.raises(ValueError):
        monte_carlo_moments(SemialgebraicSet(n=2), 2)
    # thin slab inside a huge proposal ball: acceptance collapses
    from tmoment.moments import Polynomial
    x = Polynomial.variable(2, 0)
    thin = SemialgebraicSet(n=2, generators=[x, 1e-6 - x], radius=100.0)
    with pytest.raises(SamplingError):
        monte_carlo_moments(thin, 2, samples=100_000)


def test_reference_spec_round_trip_and_dispatch():
    spec = ReferenceSpec("ball", {"center": [0.5, 0.0], "radius": 2.0})
    back = ReferenceSpec.from_json(spec.to_json())
    assert back.kind == "ball" and back.params["radius"] == 2.0
    K = ball_set(2, 5.0)
    y = back.moments(K, 2)
    direct = ball_uniform_moments(2, 2, center=np.array([0.5, 0.0]), radius=2.0)
    np.testing.assert_allclose(y.values, direct.values)
    with pytest.raises(ValueError):
        ReferenceSpec("dirac").moments(K, 2)


def test_default_reference_selection():
    K = ball_set(2, 5.0, center=np.array([1.0, 0.0]))
    _, spec = default_reference(K, 2)
    assert spec.kind == "ball" and spec.params["center"] == [1.0, 0.0]

    _, spec = default_reference(SemialgebraicSet(n=2), 2)
    assert spec.kind == "gaussian"

    from tmoment.moments import Polynomial
    x1 = Polynomial.variable(2, 0)
    K3 = SemialgebraicSet(n=2, generators=[x1], radius=1.0)   # no witness given
    y3, spec3 = default_reference(K3, 2)
    assert spec3.kind == "monte_carlo"
    # half-disk: E[x1] = 4/(3 pi) under the uniform measure
    assert _val(y3, (1, 0)) == pytest.approx(4.0 / (3.0 * np.pi), abs=1e-2)
