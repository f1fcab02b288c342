"""Closed-form path vs direct integration, principal pieces, invariants."""

import math

import numpy as np
import pytest

from quadmode import ConstantFunction, preset_coefficients
from quadmode.coefficients import (
    CoefficientSet,
    MediumProfile,
    SinusoidFunction,
    medium_to_hamiltonian,
)
from quadmode.ermakov import (
    ErmakovInit,
    build_frame,
    closed_form_path,
    homogeneous_driven,
    homogeneous_driven_quadrature,
    homogeneous_state,
    solve_ermakov,
)
from quadmode.errors import BlowUpError, ConfigError, TurningPointError
from quadmode.verify import quasi_invariants, riccati_oracle, wronskian_drift

TIGHT = dict(method="DOP853", rtol=1e-12, atol=1e-14)

DISPLACED = ErmakovInit(alpha0=0.2, beta0=1.3, gamma0=0.1,
                        delta0=0.3, eps0=-0.7, kappa0=0.05)


def grid_to(t_end, n=201):
    return np.linspace(0.0, t_end, n)


def driven_constant_cs():
    return CoefficientSet(
        a=ConstantFunction(0.5),
        b=ConstantFunction(0.5),
        c=ConstantFunction(0.3),
        d=ConstantFunction(0.1),
        f=ConstantFunction(0.2),
        g=ConstantFunction(0.1),
    )


def assert_paths_close(got, want, tol):
    for name in ("alpha", "beta", "gamma", "delta", "eps", "kappa"):
        np.testing.assert_allclose(
            getattr(got, name), getattr(want, name), atol=tol, rtol=tol,
            err_msg=name,
        )


def test_static_ground_state_is_stationary():
    cs = preset_coefficients("static_oscillator")
    path = solve_ermakov(cs, grid_to(4 * math.pi), **TIGHT)
    np.testing.assert_allclose(path.alpha, 0.0, atol=1e-12)
    np.testing.assert_allclose(path.beta, 1.0, atol=1e-12)
    np.testing.assert_allclose(path.gamma, -path.grid / 2, atol=1e-11)
    np.testing.assert_allclose(path.delta, 0.0, atol=1e-13)
    np.testing.assert_allclose(path.eps, 0.0, atol=1e-13)
    np.testing.assert_allclose(path.kappa, 0.0, atol=1e-13)


def test_squeezed_vacuum_amplitude():
    # beta(0) = sqrt(2): |z|^2 = 1 + 3 sin^2 t, beta = sqrt(2)/|z|
    cs = preset_coefficients("static_oscillator")
    init = ErmakovInit(beta0=math.sqrt(2.0))
    path = solve_ermakov(cs, grid_to(math.pi, 129), init=init, **TIGHT)
    t = path.grid
    np.testing.assert_allclose(
        path.beta, math.sqrt(2.0) / np.sqrt(1 + 3 * np.sin(t) ** 2), atol=1e-12
    )
    i = np.searchsorted(t, math.pi / 4)
    assert t[i] == pytest.approx(math.pi / 4, abs=1e-12)
    assert path.beta[i] == pytest.approx(2.0 / math.sqrt(5.0), abs=1e-12)


def test_frame_constants_identities():
    cs = driven_constant_cs()
    frame = build_frame(cs, grid_to(3.0), init=DISPLACED, **TIGHT)
    assert frame.c1 + frame.c2 == pytest.approx(1.0)
    assert frame.c1 - frame.c2.conjugate() == pytest.approx(DISPLACED.beta0**2)
    assert frame.z[0] == pytest.approx(1.0)
    a0 = 0.5
    assert frame.zp[0] == pytest.approx(2j * a0 * (frame.c1 - frame.c2), abs=1e-13)
    assert frame.c3 == pytest.approx(DISPLACED.eps0 * DISPLACED.beta0 + 1j * DISPLACED.delta0)


@pytest.mark.parametrize(
    "cs,init,t_end,tol",
    [
        (preset_coefficients("driven", force=1.0), ErmakovInit(), 6.0, 1e-9),
        (preset_coefficients("caldirola_kanai", rate=0.25), ErmakovInit(), 10.0, 1e-8),
        (preset_coefficients("parametric", depth=0.1, frequency=2.0),
         ErmakovInit(beta0=math.sqrt(2.0)), 2 * math.pi, 1e-9),
        (driven_constant_cs(), DISPLACED, 5.0, 1e-8),
        (preset_coefficients("driven", force=1.0), DISPLACED, 6.0, 1e-8),
    ],
    ids=["driven-ground", "damped-kinetic", "parametric-squeezed",
         "full-coefficients", "driven-displaced"],
)
def test_closed_form_matches_direct_integration(cs, init, t_end, tol):
    grid = grid_to(t_end, 257)
    path = solve_ermakov(cs, grid, init=init, **TIGHT)
    oracle = riccati_oracle(cs, grid, init=init, **TIGHT)
    assert_paths_close(path, oracle, tol)


def test_closed_form_matches_direct_for_medium():
    prof = MediumProfile(
        xi=SinusoidFunction(1.0, 0.2, 1.0),
        eta=ConstantFunction(1.0),
        chi=ConstantFunction(0.1),
    )
    cs = medium_to_hamiltonian(prof, t_max=8.0)
    init = ErmakovInit(delta0=0.3, eps0=-0.7)
    grid = grid_to(8.0, 161)
    path = solve_ermakov(cs, grid, init=init, **TIGHT)
    oracle = riccati_oracle(cs, grid, init=init, **TIGHT)
    assert_paths_close(path, oracle, 1e-9)


def test_off_grid_evaluation_matches_direct():
    cs = preset_coefficients("driven", force=1.0)
    frame = build_frame(cs, grid_to(6.0, 241), init=DISPLACED, **TIGHT)
    probes = np.array([0.37, 1.91, 3.0, 4.44, 5.99])
    path = closed_form_path(frame, probes)
    oracle = riccati_oracle(cs, np.concatenate([[0.0], probes]), init=DISPLACED, **TIGHT)
    for name in ("alpha", "beta", "gamma", "delta", "eps", "kappa"):
        np.testing.assert_allclose(
            getattr(path, name), getattr(oracle, name)[1:], atol=1e-8, err_msg=name
        )


def test_gamma_branch_is_continuous_over_many_turns():
    cs = preset_coefficients("static_oscillator")
    path = solve_ermakov(cs, grid_to(8 * math.pi, 801), **TIGHT)
    np.testing.assert_allclose(path.gamma, -path.grid / 2, atol=1e-10)


def test_homogeneous_state_static():
    cs = preset_coefficients("static_oscillator")
    frame = build_frame(cs, grid_to(3.0, 301), **TIGHT)
    hs = homogeneous_state(frame.basis)
    t = hs.grid
    good = hs.mask & (t > 0.1)
    np.testing.assert_allclose(
        hs.alpha0[good], np.cos(t[good]) / (2 * np.sin(t[good])), atol=1e-10
    )
    np.testing.assert_allclose(hs.beta0[good], -1.0 / np.sin(t[good]), atol=1e-10)
    np.testing.assert_allclose(
        hs.gamma0[good], np.cos(t[good]) / (2 * np.sin(t[good])), atol=1e-10
    )
    assert not hs.mask[0]  # mu0(0) = 0 is inside the guard band


def test_homogeneous_driven_static():
    # constant unit force on the static oscillator:
    # delta0 = eps0 = tan(t/2), kappa0 = t/2 - tan(t/2)
    cs = preset_coefficients("driven", force=1.0)
    frame = build_frame(cs, grid_to(3.0, 301), **TIGHT)
    hd = homogeneous_driven(frame)
    t = hd.grid
    good = hd.mask & (t > 0.0)
    np.testing.assert_allclose(hd.delta0[good], np.tan(t[good] / 2), atol=1e-9)
    np.testing.assert_allclose(hd.eps0[good], np.tan(t[good] / 2), atol=1e-9)
    np.testing.assert_allclose(
        hd.kappa0[good], t[good] / 2 - np.tan(t[good] / 2), atol=1e-9
    )
    # finite limits at t = 0 (here the force has no momentum part)
    assert hd.delta0[0] == 0.0 and hd.eps0[0] == 0.0 and hd.kappa0[0] == 0.0


def test_homogeneous_driven_extraction_frame_independent():
    # the same principal triple must come out of a displaced frame
    cs = preset_coefficients("driven", force=1.0)
    f1 = build_frame(cs, grid_to(3.0, 301), **TIGHT)
    f2 = build_frame(cs, grid_to(3.0, 301), init=DISPLACED, **TIGHT)
    h1 = homogeneous_driven(f1)
    h2 = homogeneous_driven(f2)
    good = h1.mask & h2.mask
    for name in ("delta0", "eps0", "kappa0"):
        np.testing.assert_allclose(
            getattr(h1, name)[good], getattr(h2, name)[good], atol=1e-8, err_msg=name
        )


def test_quadrature_route_cross_checks():
    cs = preset_coefficients("driven", force=1.0)
    frame = build_frame(cs, grid_to(1.4, 141), **TIGHT)
    hd = homogeneous_driven(frame)
    hq = homogeneous_driven_quadrature(frame.basis, rtol=1e-12, atol=1e-14)
    good = hd.mask & hq.mask
    for name in ("delta0", "eps0", "kappa0"):
        np.testing.assert_allclose(
            getattr(hq, name)[good], getattr(hd, name)[good], atol=1e-8, err_msg=name
        )


def test_quadrature_route_stops_at_turning_point():
    # mu0' = cos t has a zero at pi/2 inside [0, 2]
    cs = preset_coefficients("driven", force=1.0)
    frame = build_frame(cs, grid_to(2.0, 101), **TIGHT)
    with pytest.raises(TurningPointError):
        homogeneous_driven_quadrature(frame.basis)


def test_quasi_invariants_near_zero_for_closed_form():
    cs = preset_coefficients("driven", force=1.0)
    frame = build_frame(cs, grid_to(6.0, 257), init=DISPLACED, **TIGHT)
    qi = quasi_invariants(frame)
    worst = qi.worst()
    # near the guard band the residuals are pole-amplified roundoff, so the
    # honest bound is a few orders above machine precision
    for name, val in worst.items():
        assert val < 1e-8, (name, val)


def test_quasi_invariants_bound_direct_path():
    cs = driven_constant_cs()
    grid = grid_to(5.0, 257)
    frame = build_frame(cs, grid, init=DISPLACED, **TIGHT)
    oracle = riccati_oracle(cs, grid, init=DISPLACED, **TIGHT)
    qi = quasi_invariants(frame, path=oracle)
    for name, val in qi.worst().items():
        assert val < 1e-7, (name, val)


def test_wronskian_drift_small():
    cs = preset_coefficients("caldirola_kanai", rate=0.25)
    frame = build_frame(cs, grid_to(20.0, 401), **TIGHT)
    assert wronskian_drift(frame.basis) < 1e-10


def test_direct_route_raises_on_blow_up():
    cs = preset_coefficients("constant", a=0.5, b=-50.0)
    with pytest.raises(BlowUpError):
        riccati_oracle(cs, grid_to(80.0), rtol=1e-8, atol=1e-8)


def test_init_validation():
    with pytest.raises(ConfigError):
        ErmakovInit(beta0=0.0)
    with pytest.raises(ConfigError):
        ErmakovInit(beta0=-1.0)
    with pytest.raises(ConfigError):
        ErmakovInit(alpha0=math.nan)
