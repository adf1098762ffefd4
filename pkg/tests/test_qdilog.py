import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichtqft.errors import ArgumentOutOfCalibratedRange, NonPositiveB, PoleProximity
from teichtqft.qdilog import (QDilogParams, QuadratureConfig, log_phi, log_phi_exchanged,
                              param_map, phi, phi_bar)

from oracles import phi_contour, phi_reference


def test_param_map_values():
    p = param_map(1.0)
    assert p.hbar == 0.25 and p.c_b == 1j and p.h == 1.0
    p2 = param_map(2.0)
    assert abs(p2.hbar - 4 / 25) < 1e-15 and abs(p2.h - 1.25) < 1e-15
    assert param_map(0.5) == p2


@pytest.mark.parametrize("hbar", [0.25, 0.1, 0.03])
def test_from_hbar_round_trip(hbar):
    p = QDilogParams.from_hbar(hbar)
    assert p.b >= 1 and abs(p.hbar - hbar) < 1e-14


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_rejects_bad_b(bad):
    with pytest.raises(NonPositiveB):
        QDilogParams(bad)


def test_rejects_bad_hbar():
    with pytest.raises(NonPositiveB):
        QDilogParams.from_hbar(0.3)


def test_functional_equation_at_zero():
    assert abs(phi(-0.5j, 1.0) / phi(0.5j, 1.0) - 2) < 1e-12


@pytest.mark.parametrize("b, z", [
    (1.0, 0.3 + 0.1j), (1.0, -1.2 - 0.2j), (1.3, 2.5 + 0.05j), (1.3, 0.0),
    (2.5, 4.0 - 0.3j), (5.6, -0.7 + 0.02j),
])
def test_strip_values_against_contour_integral(b, z):
    ref = phi_contour(z, b)
    assert abs(phi(z, b) - ref) <= 1e-11 * abs(ref)


@pytest.mark.parametrize("b, z", [
    (1.0, 1 + 3j), (1.3, -2 - 4.5 * 1.15j), (1.3, 9.9 - 1j), (2.5, 5 + 2j), (2.5, -3 + 4j),
])
def test_extended_values_against_reference(b, z):
    ref = phi_reference(z, b)
    assert abs(phi(z, b) - ref) <= 1e-11 * abs(ref)


def _grid(h):
    xs = np.linspace(-2, 2, 9)
    ys = np.linspace(-0.4 * h, 0.4 * h, 5)
    return (xs[:, None] + 1j * ys[None, :]).ravel()


@pytest.mark.parametrize("b", [1.0, 1.2])
def test_functional_equations_on_grid(b):
    p = QDilogParams(b)
    z = _grid(p.h)
    for s in (b, 1 / b):
        lo = phi(z - 0.5j * s, p)
        hi = phi(z + 0.5j * s, p)
        res = np.abs(lo - (1 + np.exp(2 * np.pi * s * z)) * hi) / np.abs(lo)
        assert res.max() <= 1e-10


@pytest.mark.parametrize("b", [1.0, 1.2])
def test_unitarity_on_real_line(b):
    x = np.linspace(-5, 5, 201)
    assert np.max(np.abs(np.abs(phi(x, b)) - 1)) <= 1e-10


@pytest.mark.parametrize("b", [1.2, 1.7, 2.5])
def test_b_inversion_symmetry(b):
    # second route runs at 1/b on the wide strip with steps of i b only
    z = _grid(1.0) * 1.1
    direct = phi(z, b)
    swapped = np.exp(log_phi_exchanged(z, b))
    assert np.max(np.abs(direct - swapped)) <= 1e-11


def test_parameter_normalised():
    assert QDilogParams(1 / 1.7).b == QDilogParams(1.7).b


def test_panel_doubling_self_consistency():
    z = np.array([0.3 + 0.1j, -1.5 - 0.4j, 3.0 + 0.2j])
    fine = QuadratureConfig(panel_scale=0.5, decay_lengths=45)
    for b in (1.0, 2.0):
        assert np.max(np.abs(phi(z, b) - phi(z, b, fine))) <= 1e-12


@given(st.floats(-8, 8), st.floats(-0.9, 0.9))
def test_phi_bar_is_reciprocal(x, y):
    z = complex(x, y)
    assert abs(phi(z, 1.3) * phi_bar(z, 1.3) - 1) < 1e-12


@given(st.floats(-6, 6), st.floats(-0.8, 0.8))
def test_inversion_relation(x, y):
    # Phi(z) Phi(-z) = Phi(0)^2 exp(i pi z^2)
    b = 1.3
    p = QDilogParams(b)
    z = complex(x, y)
    lhs = phi(z, p) * phi(-z, p)
    rhs = phi(0.0, p) ** 2 * cmath.exp(1j * math.pi * z * z)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_far_real_axis_matches_asymptotics():
    p = QDilogParams(1.0)
    assert abs(phi(-30.0, p) - 1) < 1e-14
    z = 30.0
    asym = cmath.exp(1j * math.pi * z * z + 1j * math.pi * 2 / 12)
    assert abs(phi(z, p) - asym) < 1e-12


def test_pole_proximity():
    # Phi_1 has a pole at c_b = i
    with pytest.raises(PoleProximity):
        phi(1j, 1.0)


def test_out_of_range():
    with pytest.raises(ArgumentOutOfCalibratedRange):
        log_phi(100.0, 1.0)
    with pytest.raises(ArgumentOutOfCalibratedRange):
        log_phi(20j, 1.0)


def test_array_shape_preserved():
    z = np.zeros((3, 4)) + 0.1j
    assert log_phi(z, 1.0).shape == (3, 4)
    assert log_phi(np.array([]), 1.0).shape == (0,)
