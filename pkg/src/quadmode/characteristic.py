"""Characteristic second-order equation behind the quadratic-Hamiltonian mode.

Eliminating the nonlinear first-order system in favour of a linear one: the
auxiliary amplitude mu obeys

    mu'' - tau(t) mu' + 4 sigma(t) mu = 0

with

    tau   = a'/a - 2c + 4d
    4sigma = 4ab - 4cd + 4d^2 + 2d a'/a - 2d'

All later quantities are assembled from two standard solutions and the
damping factor lambda(t) = exp(-int_0^t (c - 2d)):

    mu0(0) = 0,  mu0'(0) = 2 a(0)
    mu1(0) = mu1_init,  mu1'(0) = 0

Their Wronskian W = mu0' mu1 - mu0 mu1' satisfies the first-order law
W' = tau W, which integrates exactly to W(t) = W(0) (a(t)/a(0)) lambda(t)^2.

For coefficients derived from a dielectric medium the combinations reduce
exactly (no accumulated integral needed):

    tau = -(chi + xi')/xi,    4 sigma = upsilon^2 / (xi eta).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import CoefficientSet, MediumProfile
from .errors import BlowUpError, ConfigError, SingularCoefficientError, StiffnessError

__all__ = [
    "CharacteristicBasis",
    "build_tau_sigma",
    "integrate_characteristic",
    "compute_lambda",
    "classical_mode_equivalence",
]

_STATE_BOUND = 1e150  # beyond this the path is treated as blown up


def build_tau_sigma(cs: CoefficientSet):
    """Return scalar callables (tau, four_sigma) for the characteristic
    equation.  Medium-derived sets use the exact closed combinations."""
    med = cs.medium
    if med is not None:
        xi, eta, chi = med.xi, med.eta, med.chi
        ups2 = med.upsilon**2

        def tau(t: float) -> float:
            x = xi(t)
            return -(chi(t) + xi.deriv(t)) / x

        def four_sigma(t: float) -> float:
            return ups2 / (xi(t) * eta(t))

        return tau, four_sigma

    a, b, c, d = cs.a, cs.b, cs.c, cs.d
    if a.is_zero:
        raise SingularCoefficientError("kinetic coefficient a is identically zero")
    d_zero = d.is_zero

    def tau(t: float) -> float:
        base = a.log_deriv(t) - 2.0 * c(t)
        return base if d_zero else base + 4.0 * d(t)

    def four_sigma(t: float) -> float:
        prod = 4.0 * a(t) * b(t)
        if d_zero:
            return prod
        dv = d(t)
        return prod - 4.0 * c(t) * dv + 4.0 * dv * dv + 2.0 * dv * a.log_deriv(t) - 2.0 * d.deriv(t)

    return tau, four_sigma


@dataclass(frozen=True)
class CharacteristicBasis:
    """Two standard solutions of the characteristic equation on a grid,
    together with the damping exponent ell = int (c - 2d) and convenience
    accessors.  `dense` interpolates the full 5-state between grid points."""

    grid: np.ndarray
    mu0: np.ndarray
    mu0p: np.ndarray
    mu1: np.ndarray
    mu1p: np.ndarray
    ell: np.ndarray
    mu1_init: float
    coefficients: CoefficientSet
    dense: object

    @property
    def lam(self) -> np.ndarray:
        """Damping factor lambda = exp(-ell) on the grid."""
        return np.exp(-self.ell)

    @property
    def wronskian(self) -> np.ndarray:
        """Direct Wronskian mu0' mu1 - mu0 mu1' on the grid."""
        return self.mu0p * self.mu1 - self.mu0 * self.mu1p

    def wronskian_predicted(self) -> np.ndarray:
        """Wronskian from the integrated first-order law:
        W(t) = W(0) (a(t)/a(0)) lambda(t)^2."""
        a = self.coefficients.a
        a_ratio = np.asarray(a(self.grid), dtype=float) / float(a(0.0))
        w0 = 2.0 * float(a(0.0)) * self.mu1_init
        return w0 * a_ratio * self.lam**2

    def eval(self, t):
        """Dense 5-state (mu0, mu0', mu1, mu1', ell) at scalar or array t."""
        return self.dense(t)


def integrate_characteristic(
    cs: CoefficientSet,
    grid,
    mu1_init: float = 1.0,
    method: str = "RK45",
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> CharacteristicBasis:
    """Integrate both standard solutions and the damping exponent jointly.

    The grid must start at 0 (where the standard initial data live).  The
    solver's dense output is retained so downstream stages can evaluate the
    basis off-grid without re-integration.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ConfigError("time grid must be a 1-d array with at least 2 points")
    if abs(grid[0]) > 1e-12:
        raise ConfigError("time grid must start at t = 0", field="grid.t0")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("time grid must be strictly increasing")
    if mu1_init == 0.0:
        raise ConfigError("mu1_init must be nonzero", field="solver.mu1_init")

    a0 = float(cs.a(0.0))
    if a0 == 0.0 or not np.isfinite(a0):
        raise SingularCoefficientError("a(0) must be finite and nonzero")

    tau, four_sigma = build_tau_sigma(cs)
    c_fn, d_fn = cs.c, cs.d

    def rhs(t, y):
        tv = tau(t)
        sv = four_sigma(t)
        return (
            y[1],
            tv * y[1] - sv * y[0],
            y[3],
            tv * y[3] - sv * y[2],
            c_fn(t) - 2.0 * d_fn(t),
        )

    def blow_up(t, y):
        return _STATE_BOUND - max(abs(y[0]), abs(y[1]), abs(y[2]), abs(y[3]))

    blow_up.terminal = True

    y0 = (0.0, 2.0 * a0, float(mu1_init), 0.0, 0.0)
    sol = solve_ivp(
        rhs,
        (grid[0], grid[-1]),
        y0,
        method=method,
        t_eval=grid,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=blow_up,
    )
    if sol.status == 1:
        t_stop = float(sol.t_events[0][0]) if sol.t_events[0].size else float(sol.t[-1])
        raise BlowUpError("characteristic solution exceeded the overflow guard", t=t_stop)
    if not sol.success:
        raise StiffnessError(
            f"characteristic integration failed: {sol.message}",
            t=float(sol.t[-1]) if sol.t.size else float(grid[0]),
        )
    if not np.all(np.isfinite(sol.y)):
        raise BlowUpError("characteristic solution became non-finite")

    return CharacteristicBasis(
        grid=grid,
        mu0=sol.y[0],
        mu0p=sol.y[1],
        mu1=sol.y[2],
        mu1p=sol.y[3],
        ell=sol.y[4],
        mu1_init=float(mu1_init),
        coefficients=cs,
        dense=sol.sol,
    )


def compute_lambda(basis: CharacteristicBasis, t):
    """Damping factor lambda(t) = exp(-int_0^t (c - 2d)) at arbitrary t."""
    state = basis.dense(t)
    return np.exp(-state[4])


def classical_mode_equivalence(profile: MediumProfile, grid, q0: float = 1.0, qdot0: float = 0.0,
                               rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Max deviation between the quantum normalized mean position and the
    classical mode amplitude for the same medium and initial data.

    Classical side: q'' + ((xi' + chi)/xi) q' + (upsilon^2/(xi eta)) q = 0,
    with xi' from an independent 4th-order difference so the comparison does
    not share the analytic derivative path.  Quantum side: the normalized
    first-moment system xbar' = 2 a pbar, pbar' = -2 b xbar with
    xbar(0) = q0, pbar(0) = qdot0 / (2 a(0)).
    """
    grid = np.asarray(grid, dtype=float)
    cs = medium_cs = None
    from .coefficients import medium_to_hamiltonian  # local to avoid cycle at import

    medium_cs = medium_to_hamiltonian(profile, t_max=float(grid[-1]))
    cs = medium_cs
    a_fn, b_fn = cs.a, cs.b
    xi, eta, chi = profile.xi, profile.eta, profile.chi
    ups2 = profile.upsilon**2
    h = 1e-4

    def xi_prime(t: float) -> float:
        # keep the 5-point stencil inside [0, t_max]
        t = min(max(t, 2 * h), float(grid[-1]) - 2 * h)
        return (xi(t - 2 * h) - 8 * xi(t - h) + 8 * xi(t + h) - xi(t + 2 * h)) / (12 * h)

    def rhs(t, y):
        xq, pq, q, qd = y
        x = xi(t)
        return (
            2.0 * a_fn(t) * pq,
            -2.0 * b_fn(t) * xq,
            qd,
            -((xi_prime(t) + chi(t)) / x) * qd - (ups2 / (x * eta(t))) * q,
        )

    y0 = (q0, qdot0 / (2.0 * float(a_fn(0.0))), q0, qdot0)
    sol = solve_ivp(rhs, (grid[0], grid[-1]), y0, t_eval=grid,
                    rtol=rtol, atol=atol, method="DOP853")
    if not sol.success:
        raise StiffnessError(f"equivalence check failed to integrate: {sol.message}")
    return float(np.max(np.abs(sol.y[0] - sol.y[2])))
