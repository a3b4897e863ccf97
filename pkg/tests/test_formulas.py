import dataclasses

import numpy as np
import pytest

from treebroadcast import (
    DynState,
    Spectrum,
    TreeShape,
    exact_moments,
    map_coefficients,
    params_from_eigenvalues,
    spectrum,
    step,
    y_moments,
    z_expansions,
)
from treebroadcast.exact import exact_z_moments
from treebroadcast.formulas import approx_xz_step
from conftest import assert_close, y_moment_oracle

POINTS = [
    (params_from_eigenvalues(2, 0.5, 0.3), d, n)
    for d in (1, 2) for n in (0, 1)
] + [
    (params_from_eigenvalues(3, 0.4, 0.2), d, n)
    for d in (1, 2) for n in (0, 1)
]


@pytest.mark.parametrize("params,d,n", POINTS)
def test_y_moment_closed_forms_match_enumeration(params, d, n):
    q = params.q
    stats = exact_moments(params, TreeShape(d, n))
    got = y_moments(stats, spectrum(params), q)
    want = y_moment_oracle(params, d, n)
    for name, target in want.items():
        value = getattr(got, name)
        if target is None:
            assert value is None
        else:
            assert_close(value, target, 1e-12, name)


@pytest.mark.parametrize("q,l1,l2", [(2, 0.5, 0.3), (3, 0.4, 0.2)])
@pytest.mark.parametrize("n", [0, 1])
def test_z_expansion_exact_single_child(q, l1, l2, n):
    """With one child every Z moment is linear/quadratic in that child,
    so the truncation drops nothing."""
    params = params_from_eigenvalues(q, l1, l2)
    stats = exact_moments(params, TreeShape(1, n))
    ex = z_expansions(stats, spectrum(params), q, 1)
    zm = exact_z_moments(params, d=1, n=n)
    assert_close(ex.ez_true, zm.ez[1], 1e-12, "ez_true")
    assert_close(ex.ez_same, zm.ez[2], 1e-12, "ez_same")
    assert_close(ex.ez_cross, zm.ez[q + 1], 1e-12, "ez_cross")
    assert_close(ex.ezz_true, zm.ezz[(1, 1)], 1e-12, "ezz_true")
    assert_close(ex.ezz_same, zm.ezz[(2, 2)], 1e-12, "ezz_same")
    assert_close(ex.ezz_cross, zm.ezz[(q + 1, q + 1)], 1e-12, "ezz_cross")
    assert_close(ex.ezz_mixed_pair, zm.ezz[(q + 1, 2 * q)], 1e-12, "mixed")
    if q > 2:
        assert_close(ex.ezz_same_pair, zm.ezz[(2, q)], 1e-12, "same_pair")


def test_z_expansion_error_scales_cubically():
    """At d = 3 the dropped remainder of (1 + A)^3 is exactly A^3: the
    error must equal the cube of the per-child amplitude, which the
    d = 1 mean recovers exactly."""
    params = params_from_eigenvalues(2, 0.5, 0.3)
    spec = spectrum(params)
    for n in (0, 1, 2):
        stats = exact_moments(params, TreeShape(3, n))
        ex = z_expansions(stats, spec, 2, 3)
        zm = exact_z_moments(params, d=3, n=n)
        err = abs(zm.ez[1] - ex.ez_true)
        amp = abs(z_expansions(stats, spec, 2, 1).ez_true - 1)
        assert err == pytest.approx(amp**3, rel=1e-9, abs=1e-14), n


def test_map_coefficient_structure():
    spec = Spectrum(0.7, 0.1)
    c = map_coefficients(4, 2, spec)
    assert c.linear_x == pytest.approx(2 * 0.7**2)
    assert c.linear_z == pytest.approx(2 * 0.1**2)
    assert c.quad_xx == pytest.approx(8 / 3 * 0.7**4)
    assert c.quad_zz_source == pytest.approx(4 / 3 * 0.7**4)
    # q = 3 kills the Xc^2 feedback: the below-threshold escape lever
    c3 = map_coefficients(3, 2, Spectrum(0.5, 0.1))
    assert c3.quad_xx == 0.0
    # q = 2 makes it negative
    c2 = map_coefficients(2, 2, Spectrum(0.5, 0.1))
    assert c2.quad_xx < 0.0


def test_step_hand_anchor():
    coeffs = map_coefficients(4, 2, Spectrum(0.7, 0.1))
    nxt = step(DynState(0.1, 0.0), coeffs)
    assert nxt.Xc == pytest.approx(0.1044027, abs=1e-7)
    assert nxt.Zc == pytest.approx(0.0032013, abs=1e-7)


def test_coordinate_forms_agree():
    """The (x, z) first-order recursion and the (Xc, Zc) = (x+z, -z)
    map are the same quadratic system in different coordinates."""
    rng = np.random.default_rng(99)
    for q, d, l1, l2 in ((2, 2, 0.5, 0.3), (4, 2, 0.7, 0.1), (5, 3, 0.4, 0.2)):
        spec = Spectrum(l1, l2)
        coeffs = map_coefficients(q, d, spec)
        for _ in range(200):
            x = rng.uniform(0, 1)
            z = rng.uniform(-0.5, 0)
            xn, zn = approx_xz_step(x, z, q, d, spec)
            s = step(DynState(x + z, -z), coeffs)
            assert abs(s.Xc - (xn + zn)) < 1e-12
            assert abs(s.Zc - (-zn)) < 1e-12


def test_dataclasses_frozen():
    coeffs = map_coefficients(4, 2, Spectrum(0.7, 0.1))
    with pytest.raises(dataclasses.FrozenInstanceError):
        coeffs.linear_x = 0.0
