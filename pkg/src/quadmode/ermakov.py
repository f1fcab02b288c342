"""Ermakov-type auxiliary system solved in closed form.

The six real functions (alpha, beta, gamma, delta, eps, kappa) obey the
nonlinear first-order system

    alpha' = a beta^4 - b - 2 c alpha - 4 a alpha^2
    beta'  = -(c + 4 a alpha) beta
    gamma' = -a beta^2
    delta' = f + 2 g alpha - (c + 4 a alpha) delta + 2 a beta^3 eps
    eps'   = (g - 2 a delta) beta
    kappa' = g delta - a delta^2 + a beta^2 eps^2

Instead of integrating this directly (see verify.riccati_oracle for that
route), everything is assembled in closed form from the linear
characteristic basis through one complex combination

    z(t) = mu1/mu1(0) + i (c1 - c2) mu0,
    c1 - c2 = beta(0)^2 - i (2 alpha(0) + d(0)/a(0)),

which never vanishes (its real and imaginary parts are independent basis
solutions), so all assembled expressions below are pole-free:

    alpha = Re(conj(z) z') / (4 a |z|^2) - d / (2a)
    beta  = beta(0) lambda / |z|
    gamma = gamma(0) - arg(z) / 2           (continuous branch)

The linear (force-driven) part splits as the zero-initial-data particular
solution (delta*, eps*, kappa*), integrated jointly with the basis as a
regular 8-state system, plus a closed-form homogeneous transport of the
initial data through c3 = eps(0) beta(0) + i delta(0):

    delta = delta* + lambda Im(c3 z) / |z|^2
    eps   = eps*   + Re(c3 z) / (beta(0) |z|)
    kappa = kappa(0) + kappa* + eps* Im(c3 z) / (beta(0) |z|)
            + Re(c3^2 z) mu0 / (2 |z|^2)

The singular principal pieces built on mu0 alone (poles at its zeros) are
recovered algebraically rather than integrated through the poles:

    alpha0 = mu0'/(4 a mu0) - d/(2a),  beta0 = -lambda/mu0,
    gamma0 = mu1/(2 mu1(0) mu0) + d(0)/(2 a(0))
    eps0   = -eps* |z| / (beta(0) mu0)
    delta0 = delta* - lambda eps0 Re(z) / |z|^2
    kappa0 = kappa* - eps* eps0 Re(z) / (2 beta(0) |z|)

with the finite limits delta0(0) = -eps0(0) = g(0)/(2 a(0)), kappa0(0) = 0.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .characteristic import (
    CharacteristicBasis,
    build_tau_sigma,
    integrate_characteristic,
)
from .coefficients import CoefficientSet, eval_coeffs
from .errors import BlowUpError, ConfigError, StiffnessError, TurningPointError

__all__ = [
    "ErmakovInit",
    "ErmakovPath",
    "ComplexFrame",
    "HomogeneousState",
    "HomogeneousDriven",
    "build_frame",
    "closed_form_path",
    "solve_ermakov",
    "homogeneous_state",
    "homogeneous_driven",
    "homogeneous_driven_quadrature",
]

_STATE_BOUND = 1e150


@dataclass(frozen=True)
class ErmakovInit:
    """Initial data for the six auxiliary functions at t = 0.

    beta0 must be positive; the positive branch is preserved along the path
    because the closed form beta = beta(0) lambda / |z| never changes sign.
    """

    alpha0: float = 0.0
    beta0: float = 1.0
    gamma0: float = 0.0
    delta0: float = 0.0
    eps0: float = 0.0
    kappa0: float = 0.0

    def __post_init__(self):
        vals = (self.alpha0, self.beta0, self.gamma0, self.delta0, self.eps0, self.kappa0)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("initial state must be finite", field="initial_state")
        if not self.beta0 > 0.0:
            raise ConfigError("beta0 must be positive", field="initial_state.beta0")


@dataclass(frozen=True)
class ErmakovPath:
    """The six auxiliary functions sampled on a grid."""

    grid: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    kappa: np.ndarray
    init: ErmakovInit
    coefficients: CoefficientSet
    frame: object = field(default=None, compare=False)

    def columns(self):
        return (self.alpha, self.beta, self.gamma, self.delta, self.eps, self.kappa)


@dataclass(frozen=True)
class ComplexFrame:
    """Everything needed to evaluate the closed-form path: the linear basis,
    the frame constants, and the zero-initial-data driven triple."""

    basis: CharacteristicBasis
    init: ErmakovInit
    c1: complex
    c2: complex
    c3: complex
    z: np.ndarray
    zp: np.ndarray
    angle: np.ndarray  # continuous arg(z) on the grid, angle[0] = 0
    lam: np.ndarray
    delta_star: np.ndarray
    eps_star: np.ndarray
    kappa_star: np.ndarray
    star_dense: object = field(default=None, compare=False)

    @property
    def grid(self) -> np.ndarray:
        return self.basis.grid

    @property
    def coefficients(self) -> CoefficientSet:
        return self.basis.coefficients

    def _z_from_state(self, state):
        zc = self.c1 - self.c2
        z = state[2] / self.basis.mu1_init + 1j * zc * state[0]
        zp = state[3] / self.basis.mu1_init + 1j * zc * state[1]
        return z, zp

    def eval(self, t):
        """Dense (z, z', lambda, continuous angle, mu0, stars) at scalar or
        array t inside the frame window."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        state = self.basis.dense(t_arr)
        z, zp = self._z_from_state(state)
        lam = np.exp(-state[4])
        raw = np.angle(z)
        anchor = np.interp(t_arr, self.grid, self.angle)
        angle = raw + 2.0 * math.pi * np.round((anchor - raw) / (2.0 * math.pi))
        if self.star_dense is not None:
            stars = self.star_dense(t_arr)[5:8]
        else:
            stars = np.zeros((3, t_arr.size))
        return z, zp, lam, angle, state[0], stars


def _frame_constants(cs: CoefficientSet, init: ErmakovInit):
    a0 = float(cs.a(0.0))
    d0 = float(cs.d(0.0))
    b2 = init.beta0**2
    a_shift = 2.0 * init.alpha0 + d0 / a0
    c1 = 0.5 * (1.0 + b2) - 0.5j * a_shift
    c2 = 0.5 * (1.0 - b2) + 0.5j * a_shift
    c3 = init.eps0 * init.beta0 + 1j * init.delta0
    return a0, d0, c1, c2, c3


def build_frame(
    cs: CoefficientSet,
    grid,
    init: ErmakovInit | None = None,
    mu1_init: float = 1.0,
    method: str = "RK45",
    rtol: float = 1e-10,
    atol: float = 1e-12,
    basis: CharacteristicBasis | None = None,
) -> ComplexFrame:
    """Build the complex frame for the given coefficients and initial data.

    Undriven systems reuse a precomputed basis when supplied; driven systems
    integrate the basis and the zero-initial-data triple jointly (one
    regular 8-state pass, no poles anywhere on the path).
    """
    init = init or ErmakovInit()
    grid = np.asarray(grid, dtype=float)
    a0, d0, c1, c2, c3 = _frame_constants(cs, init)
    zc = c1 - c2  # beta0^2 - i (2 alpha0 + d0/a0)

    if not cs.driven:
        if basis is None:
            basis = integrate_characteristic(cs, grid, mu1_init=mu1_init,
                                             method=method, rtol=rtol, atol=atol)
        z = basis.mu1 / basis.mu1_init + 1j * zc * basis.mu0
        zp = basis.mu1p / basis.mu1_init + 1j * zc * basis.mu0p
        zeros = np.zeros_like(basis.grid)
        return ComplexFrame(
            basis=basis, init=init, c1=c1, c2=c2, c3=c3,
            z=z, zp=zp, angle=np.unwrap(np.angle(z)) - float(np.angle(z[0])),
            lam=basis.lam,
            delta_star=zeros, eps_star=zeros.copy(), kappa_star=zeros.copy(),
            star_dense=None,
        )

    # driven: joint 8-state integration; alpha and beta inside the star
    # equations come from the in-state basis values via the closed form
    tau, four_sigma = build_tau_sigma(cs)
    a_fn, b_fn, c_fn, d_fn, f_fn, g_fn = cs.functions()
    beta0 = init.beta0

    def rhs(t, y):
        mu0, mu0p, mu1, mu1p, ell, ds, es, ks = y
        tv = tau(t)
        sv = four_sigma(t)
        a_t = a_fn(t)
        c_t = c_fn(t)
        d_t = d_fn(t)
        f_t = f_fn(t)
        g_t = g_fn(t)
        # z = mu1/mu1(0) + i zc mu0, so Re z picks up -Im(zc) mu0
        zr = mu1 / mu1_init - zc.imag * mu0
        zi = zc.real * mu0
        zpr = mu1p / mu1_init - zc.imag * mu0p
        zpi = zc.real * mu0p
        abs2 = zr * zr + zi * zi
        lam = math.exp(-ell)
        alpha = (zr * zpr + zi * zpi) / (4.0 * a_t * abs2) - d_t / (2.0 * a_t)
        beta = beta0 * lam / math.sqrt(abs2)
        damp = c_t + 4.0 * a_t * alpha
        return (
            mu0p,
            tv * mu0p - sv * mu0,
            mu1p,
            tv * mu1p - sv * mu1,
            c_t - 2.0 * d_t,
            f_t + 2.0 * g_t * alpha - damp * ds + 2.0 * a_t * beta**3 * es,
            (g_t - 2.0 * a_t * ds) * beta,
            g_t * ds - a_t * ds * ds + a_t * beta * beta * es * es,
        )

    def blow_up(t, y):
        return _STATE_BOUND - max(abs(y[0]), abs(y[1]), abs(y[2]), abs(y[3]),
                                  abs(y[5]), abs(y[6]), abs(y[7]))

    blow_up.terminal = True

    y0 = (0.0, 2.0 * a0, float(mu1_init), 0.0, 0.0, 0.0, 0.0, 0.0)
    sol = solve_ivp(rhs, (grid[0], grid[-1]), y0, method=method, t_eval=grid,
                    rtol=rtol, atol=atol, dense_output=True, events=blow_up)
    if sol.status == 1:
        t_stop = float(sol.t_events[0][0]) if sol.t_events[0].size else float(sol.t[-1])
        raise BlowUpError("driven path exceeded the overflow guard", t=t_stop)
    if not sol.success:
        raise StiffnessError(f"frame integration failed: {sol.message}",
                             t=float(sol.t[-1]) if sol.t.size else float(grid[0]))

    basis = CharacteristicBasis(
        grid=grid, mu0=sol.y[0], mu0p=sol.y[1], mu1=sol.y[2], mu1p=sol.y[3],
        ell=sol.y[4], mu1_init=float(mu1_init), coefficients=cs,
        dense=sol.sol,
    )
    z = basis.mu1 / mu1_init + 1j * zc * basis.mu0
    zp = basis.mu1p / mu1_init + 1j * zc * basis.mu0p
    return ComplexFrame(
        basis=basis, init=init, c1=c1, c2=c2, c3=c3,
        z=z, zp=zp, angle=np.unwrap(np.angle(z)) - float(np.angle(z[0])),
        lam=basis.lam,
        delta_star=sol.y[5], eps_star=sol.y[6], kappa_star=sol.y[7],
        star_dense=sol.sol,
    )


def _assemble(frame: ComplexFrame, t, z, zp, lam, angle, mu0, stars):
    cs = frame.coefficients
    init = frame.init
    a_t, b_t, c_t, d_t, f_t, g_t = eval_coeffs(cs, t)
    a_t = np.asarray(a_t, dtype=float)
    d_t = np.asarray(d_t, dtype=float)
    abs2 = z.real**2 + z.imag**2
    absz = np.sqrt(abs2)
    c3 = frame.c3
    c3z = c3 * z
    ds, es, ks = stars

    alpha = (z.real * zp.real + z.imag * zp.imag) / (4.0 * a_t * abs2) - d_t / (2.0 * a_t)
    beta = init.beta0 * lam / absz
    gamma = init.gamma0 - 0.5 * angle
    delta = ds + lam * c3z.imag / abs2
    eps = es + c3z.real / (init.beta0 * absz)
    kappa = (
        init.kappa0
        + ks
        + es * c3z.imag / (init.beta0 * absz)
        + (c3 * c3 * z).real * mu0 / (2.0 * abs2)
    )
    return alpha, beta, gamma, delta, eps, kappa


def closed_form_path(frame: ComplexFrame, t=None) -> ErmakovPath:
    """Assemble the six auxiliary functions from the frame, on the frame's
    own grid (default) or at arbitrary times inside its window."""
    if t is None:
        t_arr = frame.grid
        stars = np.vstack([frame.delta_star, frame.eps_star, frame.kappa_star])
        parts = _assemble(frame, t_arr, frame.z, frame.zp, frame.lam,
                          frame.angle, frame.basis.mu0, stars)
    else:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        z, zp, lam, angle, mu0, stars = frame.eval(t_arr)
        parts = _assemble(frame, t_arr, z, zp, lam, angle, mu0, stars)
    return ErmakovPath(
        grid=t_arr, alpha=parts[0], beta=parts[1], gamma=parts[2],
        delta=parts[3], eps=parts[4], kappa=parts[5],
        init=frame.init, coefficients=frame.coefficients, frame=frame,
    )


def solve_ermakov(
    cs: CoefficientSet,
    grid,
    init: ErmakovInit | None = None,
    mu1_init: float = 1.0,
    method: str = "RK45",
    rtol: float = 1e-10,
    atol: float = 1e-12,
    basis: CharacteristicBasis | None = None,
) -> ErmakovPath:
    """One-call route: build the frame and assemble the closed-form path."""
    frame = build_frame(cs, grid, init=init, mu1_init=mu1_init, method=method,
                        rtol=rtol, atol=atol, basis=basis)
    return closed_form_path(frame)


# ---------------------------------------------------------------------------
# principal (singular) pieces built on mu0 alone

@dataclass(frozen=True)
class HomogeneousState:
    """Principal state triple with poles at zeros of mu0; masked there."""

    grid: np.ndarray
    alpha0: np.ndarray
    beta0: np.ndarray
    gamma0: np.ndarray
    mask: np.ndarray  # True where the values are meaningful


@dataclass(frozen=True)
class HomogeneousDriven:
    """Principal driven triple (poles at zeros of mu0, masked), with the
    finite limits at t = 0 filled in explicitly."""

    grid: np.ndarray
    delta0: np.ndarray
    eps0: np.ndarray
    kappa0: np.ndarray
    mask: np.ndarray


def _mu0_mask(mu0: np.ndarray, guard: float) -> np.ndarray:
    scale = float(np.max(np.abs(mu0))) or 1.0
    return np.abs(mu0) >= guard * scale


def homogeneous_state(basis: CharacteristicBasis, guard: float = 1e-8) -> HomogeneousState:
    """alpha0 = mu0'/(4 a mu0) - d/(2a), beta0 = -lambda/mu0,
    gamma0 = mu1/(2 mu1(0) mu0) + d(0)/(2 a(0)); NaN where |mu0| is below
    guard * max|mu0| (true poles, not numerical noise)."""
    cs = basis.coefficients
    t = basis.grid
    a_t, _, _, d_t, _, _ = eval_coeffs(cs, t)
    a_t = np.asarray(a_t, dtype=float)
    d_t = np.asarray(d_t, dtype=float)
    mask = _mu0_mask(basis.mu0, guard)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha0 = basis.mu0p / (4.0 * a_t * basis.mu0) - d_t / (2.0 * a_t)
        beta0 = -basis.lam / basis.mu0
        gamma0 = basis.mu1 / (2.0 * basis.mu1_init * basis.mu0) \
            + float(cs.d(0.0)) / (2.0 * float(cs.a(0.0)))
    for arr in (alpha0, beta0, gamma0):
        arr[~mask] = np.nan
    return HomogeneousState(grid=t, alpha0=alpha0, beta0=beta0, gamma0=gamma0, mask=mask)


def homogeneous_driven(frame: ComplexFrame, guard: float = 1e-8) -> HomogeneousDriven:
    """Recover the principal driven triple algebraically from the frame's
    zero-initial-data triple (exact in any frame):

        eps0   = -eps* |z| / (beta(0) mu0)
        delta0 = delta* - lambda eps0 Re(z) / |z|^2
        kappa0 = kappa* - eps* eps0 Re(z) / (2 beta(0) |z|)
    """
    basis = frame.basis
    cs = frame.coefficients
    mu0 = basis.mu0
    mask = _mu0_mask(mu0, guard)
    absz = np.abs(frame.z)
    b0 = frame.init.beta0
    with np.errstate(divide="ignore", invalid="ignore"):
        eps0 = -frame.eps_star * absz / (b0 * mu0)
        delta0 = frame.delta_star - frame.lam * eps0 * frame.z.real / absz**2
        kappa0 = frame.kappa_star - frame.eps_star * eps0 * frame.z.real / (2.0 * b0 * absz)
    limit = float(cs.g(0.0)) / (2.0 * float(cs.a(0.0)))
    if abs(basis.grid[0]) <= 1e-12:
        delta0[0], eps0[0], kappa0[0] = limit, -limit, 0.0
        mask = mask.copy()
        mask[0] = True
    for arr in (delta0, eps0, kappa0):
        arr[~mask] = np.nan
    return HomogeneousDriven(grid=basis.grid, delta0=delta0, eps0=eps0,
                             kappa0=kappa0, mask=mask)


def homogeneous_driven_quadrature(
    basis: CharacteristicBasis,
    grid=None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> HomogeneousDriven:
    """Literal quadrature route for the principal driven triple.

    Integrates, with y = mu0 delta0 / lambda and sigma the quarter of the
    characteristic 4*sigma combination,

        y'  = ((f - (d/a) g) mu0 + (g/2a) mu0') / lambda
        J1' = 8 a sigma lambda^2 y / mu0'^2
        J2' = 2 a lambda (f - (d/a) g) / mu0'
        K1' = 4 a sigma lambda^2 y^2 / mu0'^2
        K2' = 2 a lambda y (f - (d/a) g) / mu0'

    and assembles delta0 = lambda y / mu0, eps0 = -(2 a lambda/mu0') delta0
    + J1 + J2, kappa0 = (a mu0/mu0') delta0^2 - K1 - K2.  The integrands
    carry true poles at zeros of mu0' (turning points): integration stops
    there with TurningPointError.  Useful as an independent cross-check of
    homogeneous_driven away from turning points.
    """
    cs = basis.coefficients
    if grid is None:
        grid = basis.grid
    grid = np.asarray(grid, dtype=float)

    # the integrands carry 1/mu0'^2: refuse windows with a turning point
    # up front (the step size would collapse before any event could fire)
    scan = np.linspace(grid[0], grid[-1], max(4 * grid.size, 512))
    mu0p_scan = basis.dense(scan)[1]
    crossings = np.nonzero(np.diff(np.sign(mu0p_scan)) != 0)[0]
    if crossings.size:
        raise TurningPointError(
            f"quadrature route window contains a turning point (mu0' = 0) "
            f"near t={scan[crossings[0] + 1]:.6g}"
        )

    _, four_sigma = build_tau_sigma(cs)
    a_fn, _, _, d_fn, f_fn, g_fn = cs.functions()

    def force(t: float) -> float:
        return f_fn(t) - (d_fn(t) / a_fn(t)) * g_fn(t)

    def rhs(t, y):
        st = basis.dense(t)
        mu0, mu0p, lam = st[0], st[1], math.exp(-st[4])
        a_t = a_fn(t)
        g_t = g_fn(t)
        sig = 0.25 * four_sigma(t)
        fr = force(t)
        lam2 = lam * lam
        return (
            (fr * mu0 + (g_t / (2.0 * a_t)) * mu0p) / lam,
            8.0 * a_t * sig * lam2 * y[0] / mu0p**2,
            2.0 * a_t * lam * fr / mu0p,
            4.0 * a_t * sig * lam2 * y[0] ** 2 / mu0p**2,
            2.0 * a_t * lam * y[0] * fr / mu0p,
        )

    def turning(t, y):
        return basis.dense(t)[1]

    turning.terminal = True

    sol = solve_ivp(rhs, (grid[0], grid[-1]), (0.0, 0.0, 0.0, 0.0, 0.0),
                    method="RK45", t_eval=grid, rtol=rtol, atol=atol,
                    events=turning)
    if sol.status == 1:
        t_stop = float(sol.t_events[0][0]) if sol.t_events[0].size else float(sol.t[-1])
        raise TurningPointError(
            f"quadrature route hit a turning point (mu0' = 0) near t={t_stop:.6g}"
        )
    if not sol.success:
        raise StiffnessError(f"quadrature route failed: {sol.message}")

    st = basis.dense(grid)
    mu0, mu0p, lam = st[0], st[1], np.exp(-st[4])
    a_t = np.asarray(cs.a(grid), dtype=float)
    y, j1, j2, k1, k2 = sol.y
    mask = _mu0_mask(mu0, 1e-8)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta0 = lam * y / mu0
        eps0 = -(2.0 * a_t * lam / mu0p) * delta0 + j1 + j2
        kappa0 = (a_t * mu0 / mu0p) * delta0**2 - k1 - k2
    limit = float(cs.g(0.0)) / (2.0 * float(cs.a(0.0)))
    if abs(grid[0]) <= 1e-12:
        delta0[0], eps0[0], kappa0[0] = limit, -limit, 0.0
        mask = mask.copy()
        mask[0] = True
    for arr in (delta0, eps0, kappa0):
        arr[~mask] = np.nan
    return HomogeneousDriven(grid=grid, delta0=delta0, eps0=eps0, kappa0=kappa0, mask=mask)
