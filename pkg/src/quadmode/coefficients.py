"""Time-dependent Hamiltonian coefficients for a single field mode.

The model Hamiltonian is

    H(t) = a(t) p^2 + b(t) x^2 + c(t) xp - i d(t) - f(t) x - g(t) p

with hbar = 1 and the reference mode frequency scaled to 1.  This module
provides the six coefficient functions as evaluable objects (analytic
presets and sampled tables with cubic interpolation), plus the mapping
from a linear dielectric medium (permittivity xi, permeability eta,
conductivity chi) to an equivalent coefficient set

    a(t) = exp(-Ichi(t)) / (2 xi(t)),   b(t) = upsilon^2 exp(Ichi(t)) / (2 eta(t)),
    Ichi(t) = integral_0^t chi/xi,      c = d = f = g = 0.

Every coefficient object supports value, derivative and logarithmic
derivative evaluation at scalar or array times.  Derivatives are analytic
for presets and 4th-order centered finite differences (one-sided at the
window edges) for tables.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (
    CoefficientEvaluationError,
    ConfigError,
    InvalidMediumError,
    StiffnessError,
)

__all__ = [
    "ConstantFunction",
    "ExponentialFunction",
    "SinusoidFunction",
    "TableFunction",
    "CoefficientSet",
    "MediumProfile",
    "medium_to_hamiltonian",
    "preset_coefficients",
    "function_from_spec",
    "eval_coeffs",
    "COEFFICIENT_NAMES",
]

COEFFICIENT_NAMES = ("a", "b", "c", "d", "f", "g")

# Tolerances for the accumulated medium integral; matched to the defaults of
# the characteristic integrator so both stages live in the same error regime.
_INTEGRAL_RTOL = 1e-12
_INTEGRAL_ATOL = 1e-14


def _as_float_or_array(t):
    if np.isscalar(t):
        return float(t)
    return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class ConstantFunction:
    """Constant coefficient."""

    value: float

    def __call__(self, t):
        t = _as_float_or_array(t)
        if isinstance(t, float):
            return self.value
        return np.full_like(t, self.value)

    def deriv(self, t):
        t = _as_float_or_array(t)
        if isinstance(t, float):
            return 0.0
        return np.zeros_like(t)

    def log_deriv(self, t):
        return self.deriv(t)  # zero for nonzero constants; unused when value == 0

    @property
    def is_zero(self) -> bool:
        return self.value == 0.0


@dataclass(frozen=True)
class ExponentialFunction:
    """amplitude * exp(rate * t)."""

    amplitude: float
    rate: float

    def __call__(self, t):
        t = _as_float_or_array(t)
        return self.amplitude * np.exp(self.rate * t)

    def deriv(self, t):
        return self.rate * self(t)

    def log_deriv(self, t):
        t = _as_float_or_array(t)
        if isinstance(t, float):
            return self.rate
        return np.full_like(t, self.rate)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0


@dataclass(frozen=True)
class SinusoidFunction:
    """offset + amplitude * sin(frequency * t + phase)."""

    offset: float
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        t = _as_float_or_array(t)
        return self.offset + self.amplitude * np.sin(self.frequency * t + self.phase)

    def deriv(self, t):
        t = _as_float_or_array(t)
        return self.amplitude * self.frequency * np.cos(self.frequency * t + self.phase)

    def log_deriv(self, t):
        return self.deriv(t) / self(t)

    @property
    def is_zero(self) -> bool:
        return self.offset == 0.0 and self.amplitude == 0.0


class _UniformCubic:
    """Cubic piecewise polynomial on a uniform breakpoint grid.

    Thin wrapper around CubicSpline coefficients with a cheap scalar path;
    the solvers evaluate coefficients once per right-hand-side call, so the
    generic PPoly machinery would dominate the runtime.
    """

    __slots__ = ("x0", "dx", "n", "coef", "spline", "lo", "hi", "slack")

    def __init__(self, x: np.ndarray, y: np.ndarray):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size < 5:
            raise ConfigError("tables need at least 5 samples")
        dx = np.diff(x)
        if not np.allclose(dx, dx[0], rtol=1e-8, atol=1e-12):
            raise ConfigError("table samples must be uniformly spaced")
        self.spline = CubicSpline(x, y)
        self.x0 = float(x[0])
        self.dx = float(dx[0])
        self.n = x.size - 1
        self.coef = np.ascontiguousarray(self.spline.c.T)  # (n, 4)
        self.lo = float(x[0])
        self.hi = float(x[-1])
        self.slack = 1e-9 * max(1.0, abs(self.hi - self.lo))

    def _clamp(self, t: float) -> float:
        if t < self.lo:
            if t < self.lo - self.slack:
                raise CoefficientEvaluationError("table", t, "outside sampled window")
            return self.lo
        if t > self.hi:
            if t > self.hi + self.slack:
                raise CoefficientEvaluationError("table", t, "outside sampled window")
            return self.hi
        return t

    def scalar(self, t: float) -> float:
        t = self._clamp(t)
        i = int((t - self.x0) / self.dx)
        if i < 0:
            i = 0
        elif i >= self.n:
            i = self.n - 1
        s = t - (self.x0 + i * self.dx)
        c = self.coef[i]
        return ((c[0] * s + c[1]) * s + c[2]) * s + c[3]

    def __call__(self, t):
        if isinstance(t, float):
            return self.scalar(t)
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self.scalar(float(t))
        if t.size and (t.min() < self.lo - self.slack or t.max() > self.hi + self.slack):
            raise CoefficientEvaluationError("table", float(t.min()), "outside sampled window")
        return self.spline(np.clip(t, self.lo, self.hi))


def _fd4_derivative_samples(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """First derivative at uniformly spaced sample points.

    4th-order centered stencil in the interior, 4th-order one-sided stencils
    at the two points nearest each edge.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if not np.iscomplexobj(y):
        y = y.astype(float)
    h = x[1] - x[0]
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


class TableFunction:
    """Coefficient sampled on a uniform time grid, cubic interpolation in
    between.  Derivatives come from 4th-order finite differences at the
    sample points, themselves interpolated cubically."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ConfigError("table times and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise ConfigError("table samples must be finite")
        self.times = times
        self.values = values
        self._interp = _UniformCubic(times, values)
        self._deriv = _UniformCubic(times, _fd4_derivative_samples(times, values))
        self._zero = bool(np.all(values == 0.0))

    def __call__(self, t):
        return self._interp(_as_float_or_array(t))

    def deriv(self, t):
        return self._deriv(_as_float_or_array(t))

    def log_deriv(self, t):
        return self.deriv(t) / self(t)

    @property
    def is_zero(self) -> bool:
        return self._zero


class _LinearIntegral:
    """integral_0^t of a constant rate: exact."""

    __slots__ = ("rate",)

    def __init__(self, rate: float):
        self.rate = float(rate)

    def __call__(self, t):
        return self.rate * _as_float_or_array(t)


class _SplineAntiderivative:
    """Exact running integral of a uniform cubic table, anchored at t = 0.

    Piecewise quartic; evaluating it costs the same segment lookup plus
    Horner pass as the table itself, so the hot scalar path stays cheap.
    """

    __slots__ = ("pp", "coef", "x0", "dx", "n", "lo", "hi", "slack", "anchor")

    def __init__(self, cubic: _UniformCubic):
        self.pp = cubic.spline.antiderivative()
        self.coef = np.ascontiguousarray(self.pp.c.T)  # (n, 5)
        self.x0, self.dx, self.n = cubic.x0, cubic.dx, cubic.n
        self.lo, self.hi, self.slack = cubic.lo, cubic.hi, cubic.slack
        self.anchor = float(self.pp(min(max(0.0, self.lo), self.hi)))

    def _scalar(self, t: float) -> float:
        if t < self.lo:
            if t < self.lo - self.slack:
                raise CoefficientEvaluationError("table", t, "outside sampled window")
            t = self.lo
        elif t > self.hi:
            if t > self.hi + self.slack:
                raise CoefficientEvaluationError("table", t, "outside sampled window")
            t = self.hi
        i = min(max(int((t - self.x0) / self.dx), 0), self.n - 1)
        s = t - (self.x0 + i * self.dx)
        c = self.coef[i]
        return ((((c[0] * s + c[1]) * s + c[2]) * s + c[3]) * s + c[4]) - self.anchor

    def __call__(self, t):
        t = _as_float_or_array(t)
        if isinstance(t, float):
            return self._scalar(t)
        if t.size and (t.min() < self.lo - self.slack or t.max() > self.hi + self.slack):
            raise CoefficientEvaluationError("table", float(t.min()),
                                             "outside sampled window")
        return self.pp(np.clip(t, self.lo, self.hi)) - self.anchor


class _ScaledIntegral:
    """A running integral times a constant factor."""

    __slots__ = ("base", "factor")

    def __init__(self, base, factor: float):
        self.base = base
        self.factor = float(factor)

    def __call__(self, t):
        return self.factor * self.base(t)


class _CumulativeIntegral:
    """integral_0^t r(s) ds for a smooth integrand, via the adaptive solver
    at tight tolerance, re-sampled on a fine uniform grid for cheap reuse."""

    def __init__(self, ratio, t_max: float, nodes: int = 4001):
        grid = np.linspace(0.0, t_max, nodes)
        sol = solve_ivp(
            lambda t, y: (ratio(t),),
            (0.0, t_max),
            (0.0,),
            t_eval=grid,
            rtol=_INTEGRAL_RTOL,
            atol=_INTEGRAL_ATOL,
            method="RK45",
            dense_output=False,
        )
        if not sol.success:
            raise StiffnessError(
                f"cumulative medium integral failed: {sol.message}",
                t=float(sol.t[-1]) if sol.t.size else 0.0,
            )
        self.grid = grid
        self.samples = sol.y[0]
        self._interp = _UniformCubic(grid, sol.y[0])

    def __call__(self, t):
        return self._interp(_as_float_or_array(t))


class MediumExponential:
    """prefactor(t) * exp(sign * Ichi(t)) with an exact logarithmic
    derivative supplied by the medium mapping (the accumulated integral
    never needs to be differentiated numerically)."""

    def __init__(self, prefactor, sign: float, integral, log_deriv_fn):
        self._prefactor = prefactor
        self._sign = sign
        self._integral = integral
        self._log_deriv = log_deriv_fn

    def __call__(self, t):
        t = _as_float_or_array(t)
        return self._prefactor(t) * np.exp(self._sign * self._integral(t))

    def deriv(self, t):
        return self(t) * self.log_deriv(t)

    def log_deriv(self, t):
        return self._log_deriv(_as_float_or_array(t))

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class MediumProfile:
    """Linear dielectric medium: permittivity xi, permeability eta,
    conductivity chi, mode frequency parameter upsilon, and the two constant
    field amplitude scales (magnetic and displacement)."""

    xi: object
    eta: object
    chi: object
    upsilon: float = 1.0
    field_scale_omega: float = 1.0
    field_scale_varpi: float = 1.0

    def __post_init__(self):
        if not (self.upsilon > 0.0):
            raise ConfigError("upsilon must be positive", field="medium.upsilon")
        if not (self.field_scale_omega > 0.0 and self.field_scale_varpi > 0.0):
            raise ConfigError("field scales must be positive", field="medium.field_scale")


@dataclass(frozen=True)
class CoefficientSet:
    """The six coefficient functions of the quadratic Hamiltonian, with the
    time window they are valid on.  `medium` is set when the coefficients
    were derived from a MediumProfile (enables exact shortcuts downstream)."""

    a: object
    b: object
    c: object
    d: object
    f: object
    g: object
    window: tuple = (0.0, math.inf)
    medium: MediumProfile | None = field(default=None, compare=False)

    def functions(self):
        return (self.a, self.b, self.c, self.d, self.f, self.g)

    @property
    def driven(self) -> bool:
        """True when the linear (force) terms f, g are not identically zero."""
        return not (self.f.is_zero and self.g.is_zero)


def eval_coeffs(cs: CoefficientSet, t):
    """Evaluate all six coefficients at scalar or array time.

    Raises CoefficientEvaluationError when t leaves the configured window or
    any coefficient comes back non-finite.
    """
    lo, hi = cs.window
    tmin = t if np.isscalar(t) else (np.min(t) if np.size(t) else lo)
    tmax = t if np.isscalar(t) else (np.max(t) if np.size(t) else lo)
    slack = 1e-9 * max(1.0, abs(hi)) if math.isfinite(hi) else 0.0
    if tmin < lo - slack or (math.isfinite(hi) and tmax > hi + slack):
        raise CoefficientEvaluationError("window", float(tmin), "outside configured window")
    out = []
    for name, fn in zip(COEFFICIENT_NAMES, (cs.a, cs.b, cs.c, cs.d, cs.f, cs.g)):
        with np.errstate(over="ignore", invalid="ignore"):
            val = fn(t)
        if not np.all(np.isfinite(val)):
            bad = float(t) if np.isscalar(t) else float(np.asarray(t)[~np.isfinite(val)][0])
            raise CoefficientEvaluationError(name, bad)
        out.append(val)
    return tuple(out)


def medium_to_hamiltonian(profile: MediumProfile, t_max: float, nodes: int = 4001) -> CoefficientSet:
    """Map a medium profile to the equivalent Hamiltonian coefficients.

    The accumulated integral of chi/xi is computed once on [0, t_max] by the
    same adaptive integrator family used for the mode equations and cached
    on a fine uniform grid.  Positivity of xi and eta (and chi >= 0) is
    checked on that grid before any oscillator work starts.
    """
    if not (t_max > 0.0) or not math.isfinite(t_max):
        raise ConfigError("t_max must be positive and finite", field="grid.t_max")
    xi, eta, chi = profile.xi, profile.eta, profile.chi
    scan = np.linspace(0.0, t_max, nodes)
    xi_s, eta_s = xi(scan), eta(scan)
    # chi is free to dip negative (transient gain); only the structural
    # functions xi, eta are required to stay positive
    if np.any(xi_s <= 0.0) or np.any(eta_s <= 0.0):
        t_bad = float(scan[np.argmin(np.minimum(xi_s, eta_s))])
        raise InvalidMediumError(f"xi and eta must stay positive (violated near t={t_bad:g})")

    # exact running integral whenever the structure allows it; the adaptive
    # quadrature fallback only runs for genuinely general xi
    if isinstance(xi, ConstantFunction) and isinstance(chi, ConstantFunction):
        integral = _LinearIntegral(chi.value / xi.value)
    elif isinstance(xi, ConstantFunction) and isinstance(chi, TableFunction):
        integral = _ScaledIntegral(_SplineAntiderivative(chi._interp), 1.0 / xi.value)
    else:
        integral = _CumulativeIntegral(lambda t: chi(t) / xi(t), t_max, nodes)
    ups2 = profile.upsilon**2

    a_fn = MediumExponential(
        prefactor=lambda t: 0.5 / xi(t),
        sign=-1.0,
        integral=integral,
        log_deriv_fn=lambda t: -(chi(t) + xi.deriv(t)) / xi(t),
    )
    b_fn = MediumExponential(
        prefactor=lambda t: 0.5 * ups2 / eta(t),
        sign=+1.0,
        integral=integral,
        log_deriv_fn=lambda t: chi(t) / xi(t) - eta.deriv(t) / eta(t),
    )
    zero = ConstantFunction(0.0)
    return CoefficientSet(a_fn, b_fn, zero, zero, zero, zero,
                          window=(0.0, t_max), medium=profile)


# ---------------------------------------------------------------------------
# presets and config parsing

def preset_coefficients(name: str, **params) -> CoefficientSet:
    """Named analytic coefficient families.

    static_oscillator        a = b = 1/2
    free_particle            a = 1/2, rest 0
    caldirola_kanai          a = exp(-2kt)/2, b = exp(2kt)/2      (rate k)
    parametric               a = 1/2, b = (1 + m sin(w t))/2      (depth m, frequency w)
    driven                   static oscillator + constant force f
    constant                 all six given explicitly
    """
    half = ConstantFunction(0.5)
    zero = ConstantFunction(0.0)
    known = {"static_oscillator", "free_particle", "caldirola_kanai",
             "parametric", "driven", "constant"}
    if name not in known:
        raise ConfigError(f"unknown preset {name!r}", field="coefficients.preset")
    if name == "static_oscillator":
        return CoefficientSet(half, half, zero, zero, zero, zero)
    if name == "free_particle":
        return CoefficientSet(half, zero, zero, zero, zero, zero)
    if name == "caldirola_kanai":
        k = float(params.get("rate", 1.0))
        return CoefficientSet(
            ExponentialFunction(0.5, -2.0 * k),
            ExponentialFunction(0.5, +2.0 * k),
            zero, zero, zero, zero,
        )
    if name == "parametric":
        m = float(params.get("depth", 0.1))
        w = float(params.get("frequency", 2.0))
        return CoefficientSet(half, SinusoidFunction(0.5, 0.5 * m, w), zero, zero, zero, zero)
    if name == "driven":
        f0 = float(params.get("force", 1.0))
        return CoefficientSet(half, half, zero, zero, ConstantFunction(f0), zero)
    # constant
    vals = [float(params.get(k, 0.0)) for k in COEFFICIENT_NAMES]
    if vals[0] == 0.0:
        raise ConfigError("preset 'constant' needs a != 0", field="coefficients.params.a")
    return CoefficientSet(*[ConstantFunction(v) for v in vals])


def function_from_spec(spec: dict, where: str = "coefficients") -> object:
    """Build a coefficient function from its JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("function spec must be an object with a 'kind'", field=where)
    kind = spec["kind"]
    try:
        if kind == "constant":
            return ConstantFunction(float(spec["value"]))
        if kind == "exponential":
            return ExponentialFunction(float(spec["amplitude"]), float(spec["rate"]))
        if kind == "sinusoid":
            return SinusoidFunction(
                float(spec.get("offset", 0.0)),
                float(spec["amplitude"]),
                float(spec["frequency"]),
                float(spec.get("phase", 0.0)),
            )
        if kind == "table":
            return TableFunction(spec["times"], spec["values"])
    except KeyError as exc:
        raise ConfigError(f"missing entry {exc.args[0]!r}", field=f"{where}.{kind}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=f"{where}.{kind}") from exc
    raise ConfigError(f"unknown function kind {kind!r}", field=where)
