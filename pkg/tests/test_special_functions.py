import math

import mpmath
import numpy as np
import pytest
import tomli
from scipy.special import erfcx

from fracvisco.errors import DomainError, PoleArgumentError, ValidationError
from fracvisco.special_functions import MLEvalPolicy, gamma_fn, ml, ml_deriv, rgamma_fn


def load_oracle():
    with open('tests/fixtures/ml_oracle.toml', 'rb') as fp_oracle:
        return tomli.load(fp_oracle)


def ml_reference(alpha, x, derivative=False):
    """
    E_alpha(-x) (or E_alpha'(-x)) as the inverse Laplace transform at t = 1 of
    s**(alpha-1) / (s**alpha + x) (squared denominator for the derivative),
    by the mpmath Talbot rule at 60 digits.
    """
    with mpmath.workdps(60):
        alpha = mpmath.mpf(alpha)
        x = mpmath.mpf(x)
        power = 2 if derivative else 1
        value = mpmath.invertlaplace(lambda s: s**(alpha - 1) / (s**alpha + x)**power, 1,
                                     method='talbot')
        return float(mpmath.re(value))


def test_gamma_oracle():
    """
    Lanczos Gamma against the mpmath table, including the reflection branch.
    """
    for entry in load_oracle()['gamma']:
        assert gamma_fn(entry['x']) == pytest.approx(entry['value'], rel=1e-13)


def test_gamma_vectorised():
    x = np.array([[0.5, 1.5], [-0.5, 5.0]])
    result = gamma_fn(x)
    assert result.shape == (2, 2)
    np.testing.assert_allclose(result, [[math.sqrt(math.pi), 0.5 * math.sqrt(math.pi)],
                                        [-2.0 * math.sqrt(math.pi), 24.0]],
                               rtol=1e-13)


@pytest.mark.parametrize('x', [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleArgumentError):
        gamma_fn(x)
    assert rgamma_fn(x) == 0.0


def test_rgamma_matches_gamma():
    x = np.linspace(-3.7, 6.3, 41)
    np.testing.assert_allclose(rgamma_fn(x) * gamma_fn(x), 1.0, rtol=1e-13)


def test_ml_oracle():
    """
    Closed-form values for alpha = 1 and alpha = 1/2.
    """
    for entry in load_oracle()['ml']:
        assert ml(entry['alpha'], entry['z']) == pytest.approx(entry['value'], abs=1e-12)
        assert ml_deriv(entry['alpha'], entry['z']) == pytest.approx(entry['derivative'],
                                                                     abs=1e-10)


def test_ml_exponential():
    z = np.linspace(-50.0, 0.0, 501)
    np.testing.assert_allclose(ml(1.0, z), np.exp(z), rtol=1e-12, atol=0.0)
    np.testing.assert_allclose(ml_deriv(1.0, z), np.exp(z), rtol=1e-12, atol=0.0)


def test_ml_half_against_erfcx():
    """
    E_1/2(-x) = erfcx(x) across all evaluation regimes.
    """
    x = np.linspace(0.0, 50.0, 2001)
    np.testing.assert_allclose(ml(0.5, -x), erfcx(x), rtol=0.0, atol=1e-9)


def test_ml_half_derivative_against_erfcx():
    x = np.linspace(0.0, 50.0, 1001)
    expected = 2.0 / math.sqrt(math.pi) - 2.0 * x * erfcx(x)
    np.testing.assert_allclose(ml_deriv(0.5, -x), expected, rtol=0.0, atol=1e-9)


@pytest.mark.parametrize('alpha', [0.2, 0.35, 0.5, 0.75, 0.9])
@pytest.mark.parametrize('x', [0.05, 0.7, 3.0, 8.0, 15.0, 40.0])
def test_ml_against_mpmath(alpha, x):
    assert ml(alpha, -x) == pytest.approx(ml_reference(alpha, x), abs=1e-9)


@pytest.mark.parametrize('alpha', [0.3, 0.6, 0.85])
@pytest.mark.parametrize('x', [0.5, 5.0, 25.0])
def test_ml_deriv_against_mpmath(alpha, x):
    assert ml_deriv(alpha, -x) == pytest.approx(ml_reference(alpha, x, derivative=True),
                                                abs=1e-9)


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.8])
def test_ml_properties(alpha):
    """
    E_alpha(0) = 1, E_alpha'(0) = 1/Gamma(1 + alpha), E_alpha(-x) decreasing in (0, 1].
    """
    assert ml(alpha, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert ml_deriv(alpha, 0.0) == pytest.approx(1.0 / math.gamma(1.0 + alpha), rel=1e-13)

    x = np.linspace(0.0, 50.0, 1001)
    values = ml(alpha, -x)
    assert np.all(values > 0.0)
    assert np.all(values <= 1.0 + 1e-14)
    assert np.all(np.diff(values) < 0.0)
    assert np.all(ml_deriv(alpha, -x) > 0.0)


@pytest.mark.parametrize('alpha', [0.4, 0.7])
def test_ml_deriv_finite_difference(alpha):
    z = np.array([-0.3, -2.0, -6.0, -12.0, -30.0])
    h = 1e-4
    difference = (ml(alpha, z + h) - ml(alpha, z - h)) / (2.0 * h)
    np.testing.assert_allclose(ml_deriv(alpha, z), difference, atol=1e-5)


def test_ml_shapes():
    assert isinstance(ml(0.5, -1.0), float)
    z = -np.arange(12.0).reshape(3, 4)
    assert ml(0.5, z).shape == (3, 4)
    assert ml_deriv(0.5, z).shape == (3, 4)


def test_ml_domain():
    with pytest.raises(DomainError):
        ml(0.5, 0.1)
    with pytest.raises(DomainError):
        ml(0.0, -1.0)
    with pytest.raises(DomainError):
        ml_deriv(1.5, -1.0)
    with pytest.raises(DomainError):
        ml(0.5, np.array([-1.0, np.nan]))


def test_ml_policy():
    """
    A policy without series headroom still matches the default one.
    """
    policy = MLEvalPolicy(crossover_argument=0.5, contour_nodes=32)
    z = -np.array([0.2, 1.0, 4.0, 9.0, 20.0])
    np.testing.assert_allclose(ml(0.6, z, policy), ml(0.6, z), atol=1e-9)

    with pytest.raises(ValidationError):
        MLEvalPolicy(series_max_terms=1)
    with pytest.raises(ValidationError):
        MLEvalPolicy(contour_nodes=4)


def test_reference_values():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_fn(4.7) == pytest.approx(math.gamma(4.7), rel=1e-13)
    assert ml(1.0, -1.0) == pytest.approx(math.exp(-1.0), rel=1e-13)
    assert ml(0.7, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert ml(0.5, -1.0) == pytest.approx(0.4275835761, abs=1e-10)
    assert ml_deriv(1.0, -2.0) == pytest.approx(0.1353352832, abs=1e-10)
    assert ml_deriv(0.5, 0.0) == pytest.approx(1.1283791671, abs=1e-10)
    assert ml_deriv(0.4, -3.0) == pytest.approx(ml_reference(0.4, 3.0, derivative=True), abs=1e-9)
