import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pac_topopt.material import (IsotropicElasticity, Stage, default_material,
                                 fixity, fixity_prime, lame_from_youngs,
                                 potential, potential_prime)


def symmetric_basis(d):
    basis = []
    for a in range(d):
        for b in range(a, d):
            m = np.zeros((d, d))
            m[a, b] = m[b, a] = 1.0
            basis.append(m)
    return basis


def test_lame_values():
    assert lame_from_youngs(1.0, 0.0) == pytest.approx((0.0, 0.5), abs=1e-15)
    lam, mu = lame_from_youngs(3.0, 0.45)
    # closed-form conversion, frozen: 3*0.45/(1.45*0.1), 3/(2*1.45)
    assert lam == pytest.approx(9.310344827586207, rel=1e-12)
    assert mu == pytest.approx(1.0344827586206897, rel=1e-12)
    lam, mu = lame_from_youngs(13.0, 0.45)
    assert lam == pytest.approx(40.344827586206895, rel=1e-12)
    assert mu == pytest.approx(4.482758620689655, rel=1e-12)


def test_lame_domain_errors():
    with pytest.raises(ValueError):
        lame_from_youngs(0.0, 0.3)
    with pytest.raises(ValueError):
        lame_from_youngs(1.0, 0.5)
    with pytest.raises(ValueError):
        lame_from_youngs(1.0, -1.0)
    with pytest.raises(ValueError):
        IsotropicElasticity(1.0, 0.7)


def test_stress_active_identity_2d():
    mat = default_material()
    sigma = mat.stress(Stage.PROGRAMMING, 1.0, np.eye(2))
    # 2*(mu + lambda) on the diagonal for the active programming tensor
    lam, mu = lame_from_youngs(3.0, 0.45)
    expected = 2.0 * (mu + lam)
    assert sigma == pytest.approx(np.diag([expected, expected]), rel=1e-12)
    assert expected == pytest.approx(20.689655172413794, rel=1e-12)


def test_stress_endpoints_and_midpoint(rng):
    mat = default_material()
    a = rng.normal(size=(2, 2))
    a = 0.5 * (a + a.T)
    minus = mat.stress(Stage.PROGRAMMED, -1.0, a)
    lam, mu = lame_from_youngs(0.6, 0.45)
    assert minus == pytest.approx(2 * mu * a + lam * np.trace(a) * np.eye(2), rel=1e-12)
    plus = mat.stress(Stage.PROGRAMMED, 1.0, a)
    mid = mat.stress(Stage.PROGRAMMED, 0.0, a)
    assert mid == pytest.approx(0.5 * (plus + minus), rel=1e-12)


def test_phase_derivative_matches_endpoint_difference():
    mat = default_material()
    a = np.eye(2)
    diff = mat.stress_phase_derivative(Stage.PROGRAMMING, a)
    plus = mat.stress(Stage.PROGRAMMING, 1.0, a)
    minus = mat.stress(Stage.PROGRAMMING, -1.0, a)
    assert diff == pytest.approx(0.5 * (plus - minus), rel=1e-12)
    # frozen via the endpoint-difference oracle: (mu+lam)_+ - (mu+lam)_-
    assert diff[0, 0] == pytest.approx(7.931034482758621, rel=1e-12)
    assert mat.stress_phase_derivative(Stage.PROGRAMMED, np.zeros((2, 2))) == pytest.approx(
        np.zeros((2, 2)), abs=1e-15)


def test_phase_derivative_finite_difference(rng):
    mat = default_material()
    a = rng.normal(size=(3, 3))
    a = 0.5 * (a + a.T)
    delta = 1e-4
    for stage in Stage:
        fd = (mat.stress(stage, 0.2 + delta, a) - mat.stress(stage, 0.2 - delta, a)) / (2 * delta)
        assert np.max(np.abs(fd - mat.stress_phase_derivative(stage, a))) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(s=st.floats(-1.0, 1.0))
def test_stress_affine_in_phase(s):
    mat = default_material()
    a = np.array([[0.3, -0.1], [-0.1, 0.7]])
    expected = mat.stress(Stage.PROGRAMMING, 0.0, a) + s * mat.stress_phase_derivative(
        Stage.PROGRAMMING, a)
    assert np.max(np.abs(mat.stress(Stage.PROGRAMMING, s, a) - expected)) <= 1e-12


def test_coercivity_on_symmetric_basis():
    mat = default_material()
    for stage in Stage:
        plus, minus = mat.endpoints(stage)
        mu_min = min(plus.lame_mu, minus.lame_mu)
        assert mu_min > 0
        for d in (2, 3):
            for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
                for a in symmetric_basis(d):
                    quad = float(np.tensordot(mat.stress(stage, s, a), a))
                    assert quad >= 2.0 * mu_min * np.sum(a * a) - 1e-12


def test_tensor_symmetry(rng):
    mat = default_material()
    for _ in range(5):
        a = rng.normal(size=(3, 3))
        a = 0.5 * (a + a.T)
        b = rng.normal(size=(3, 3))
        b = 0.5 * (b + b.T)
        left = float(np.tensordot(mat.stress(Stage.PROGRAMMED, 0.3, a), b))
        right = float(np.tensordot(mat.stress(Stage.PROGRAMMED, 0.3, b), a))
        assert left == pytest.approx(right, rel=1e-12, abs=1e-12)


def test_fixity_and_potential_values():
    assert fixity(-1.0) == pytest.approx(0.0, abs=1e-15)
    assert fixity(1.0) == pytest.approx(0.8, rel=1e-15)
    assert fixity(0.0) == pytest.approx(0.4, rel=1e-15)
    assert float(fixity_prime(0.3)) == pytest.approx(0.4, rel=1e-15)
    assert potential(1.0) == pytest.approx(0.0, abs=1e-15)
    assert potential(-1.0) == pytest.approx(0.0, abs=1e-15)
    assert potential(0.0) == pytest.approx(0.5, rel=1e-15)
    assert float(potential_prime(0.3)) == pytest.approx(-0.3, rel=1e-15)


def test_fixity_bounds_on_admissible_range():
    s = np.linspace(-1, 1, 201)
    chi = fixity(s)
    assert np.all(chi >= 0.0)
    assert np.all(chi <= 0.8 + 1e-15)
