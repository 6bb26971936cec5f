"""Candidate solutions of the Monge equation lam*lam_x = s*lam_t and the
machinery to check them: parametric initial profiles, implicit solvers for
the characteristic forms, a residual operator with analytic and
finite-difference modes, and gradient-catastrophe (breaking-time)
detection.

Two implicit solution families are covered.  The classical one,

    lam(x, t) = G(x + lam*t),

propagates an initial profile ``G`` along characteristics and satisfies
``lam*lam_x = lam_t`` (sign ``s = +1``) wherever it is single-valued.  The
gauge form

    x - lam*t = f(lam)

is also solved here; fields produced from it satisfy the opposite sign
``lam*lam_x = -lam_t`` (``s = -1``), which the residual operator lets the
caller demonstrate directly.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "SolutionField",
    "InitialProfile",
    "GaugeFunction",
    "ResidualScheme",
    "ResidualResult",
    "residual",
    "builtin_solution",
    "solve_whitham",
    "solve_leznov",
    "breaking_time",
    "BUILTIN_NAMES",
]

#: Default clearance kept between evaluation points and singular loci.
DEFAULT_MARGIN = 1e-3

_POLISH_ITERATIONS = 100


def _finite(name: str, v: float) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# Field and parameter types.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionField:
    """A candidate solution lam(x, t).

    ``evaluate`` must be finite wherever ``valid_at`` is true and must not
    mutate internal state (re-entrancy is relied on by the finite-difference
    stencils).  Closed-form partial derivatives may be advertised through
    ``d_x``/``d_t``; when absent, the residual operator falls back to finite
    differences and says so in its result.
    """

    label: str
    evaluate: Callable[[float, float], complex]
    valid_at: Callable[[float, float], bool]
    d_x: Optional[Callable[[float, float], complex]] = None
    d_t: Optional[Callable[[float, float], complex]] = None


@dataclass(frozen=True)
class InitialProfile:
    """Initial data G for the characteristic solution lam = G(x + lam*t).

    Families:

    ``affine``      G(xi) = a + b*xi                    coeffs = (a, b)
    ``polynomial``  G(xi) = sum c_k xi**k               coeffs = (c_0, ..., c_n)
    ``exp_series``  G(xi) = sum c_k exp(k*rate*xi)      coeffs = (c_0, ..., c_n)
    ``tanh``        G(xi) = amplitude*tanh(xi/scale)    coeffs = (amplitude, scale)
    """

    family: str
    coeffs: tuple[float, ...]
    rate: float = 0.0

    def __post_init__(self):
        if self.family not in ("affine", "polynomial", "exp_series", "tanh"):
            raise DomainError(f"unknown profile family {self.family!r}")
        if not self.coeffs:
            raise DomainError("profile needs at least one coefficient")
        for c in self.coeffs:
            _finite("profile coefficient", c)
        _finite("rate", self.rate)
        if self.family == "affine" and len(self.coeffs) != 2:
            raise DomainError("affine profile takes exactly (a, b)")
        if self.family == "tanh":
            if len(self.coeffs) != 2:
                raise DomainError("tanh profile takes exactly (amplitude, scale)")
            if self.coeffs[1] == 0.0:
                raise DomainError("tanh profile scale must be nonzero")

    # -- constructors -------------------------------------------------------

    @classmethod
    def affine(cls, a: float, b: float) -> "InitialProfile":
        return cls("affine", (float(a), float(b)))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "InitialProfile":
        return cls("polynomial", tuple(float(c) for c in coeffs))

    @classmethod
    def exp_series(cls, coeffs: Sequence[float], rate: float) -> "InitialProfile":
        return cls("exp_series", tuple(float(c) for c in coeffs), rate=float(rate))

    @classmethod
    def tanh_profile(cls, amplitude: float, scale: float = 1.0) -> "InitialProfile":
        return cls("tanh", (float(amplitude), float(scale)))

    # -- evaluation ---------------------------------------------------------

    def value(self, xi: float) -> float:
        if self.family == "affine":
            a, b = self.coeffs
            return a + b * xi
        if self.family == "polynomial":
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * xi + c
            return acc
        if self.family == "exp_series":
            return sum(c * math.exp(k * self.rate * xi) for k, c in enumerate(self.coeffs))
        amplitude, scale = self.coeffs
        return amplitude * math.tanh(xi / scale)

    def deriv(self, xi: float) -> float:
        if self.family == "affine":
            return self.coeffs[1]
        if self.family == "polynomial":
            acc = 0.0
            for k in range(len(self.coeffs) - 1, 0, -1):
                acc = acc * xi + k * self.coeffs[k]
            return acc
        if self.family == "exp_series":
            return sum(
                k * self.rate * c * math.exp(k * self.rate * xi)
                for k, c in enumerate(self.coeffs)
            )
        amplitude, scale = self.coeffs
        return (amplitude / scale) / math.cosh(xi / scale) ** 2


@dataclass(frozen=True)
class GaugeFunction:
    """Polynomial gauge f(lam) of degree <= 8 with complex coefficients.

    Coefficients are ascending; evaluation is Horner's scheme, exact over
    the real-pair representation of each coefficient.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise DomainError("gauge needs at least one coefficient")
        if len(self.coeffs) > 9:
            raise DomainError("gauge degree is capped at 8")
        coerced = []
        for c in self.coeffs:
            if not isinstance(c, numbers.Complex):
                raise DomainError(f"gauge coefficient {c!r} is not a number")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise DomainError("gauge coefficients must be finite")
            coerced.append(c)
        object.__setattr__(self, "coeffs", tuple(coerced))

    def __call__(self, u: float) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def derivative(self) -> "GaugeFunction":
        if len(self.coeffs) == 1:
            return GaugeFunction((0j,))
        return GaugeFunction(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0.0 for c in self.coeffs)


@dataclass(frozen=True)
class ResidualScheme:
    """How to measure the residual lam*lam_x - s*lam_t.

    ``h = None`` selects the default step 1e-4 * max(1, |x|, |t|) at each
    evaluation point.
    """

    mode: str = "analytic"
    order: int = 4
    h: Optional[float] = None
    sign: int = 1

    def __post_init__(self):
        if self.mode not in ("analytic", "finite_difference"):
            raise DomainError(f"unknown residual mode {self.mode!r}")
        if self.order not in (2, 4):
            raise DomainError("finite-difference order must be 2 or 4")
        if self.h is not None:
            h = _finite("h", self.h)
            if h <= 0.0:
                raise DomainError("finite-difference step h must be positive")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")

    def step(self, x: float, t: float) -> float:
        if self.h is not None:
            return self.h
        return 1e-4 * max(1.0, abs(x), abs(t))


@dataclass(frozen=True)
class ResidualResult:
    """Residual value; ``mode_used`` records an analytic->FD fallback."""

    value: complex
    mode_used: str


# ---------------------------------------------------------------------------
# Built-in fields.
# ---------------------------------------------------------------------------

def zero_field() -> SolutionField:
    return SolutionField(
        label="zero",
        evaluate=lambda x, t: 0.0,
        valid_at=lambda x, t: math.isfinite(x) and math.isfinite(t),
        d_x=lambda x, t: 0.0,
        d_t=lambda x, t: 0.0,
    )


def constant_field(value: float) -> SolutionField:
    value = _finite("value", value)
    return SolutionField(
        label=f"constant({value!r})",
        evaluate=lambda x, t: value,
        valid_at=lambda x, t: math.isfinite(x) and math.isfinite(t),
        d_x=lambda x, t: 0.0,
        d_t=lambda x, t: 0.0,
    )


def linear_x_field() -> SolutionField:
    # lam = x is *not* a solution (residual x*1 - 0 = x); exposed for
    # exercising the residual plumbing.
    return SolutionField(
        label="linear-x",
        evaluate=lambda x, t: x,
        valid_at=lambda x, t: math.isfinite(x) and math.isfinite(t),
        d_x=lambda x, t: 1.0,
        d_t=lambda x, t: 0.0,
    )


def hyperbola_field(delta: float = DEFAULT_MARGIN) -> SolutionField:
    """The branch x + t*lam = 0, i.e. lam = -x/t, valid for |t| >= delta."""
    delta = _finite("delta", delta)
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    return SolutionField(
        label="hyperbola",
        evaluate=lambda x, t: -x / t,
        valid_at=lambda x, t: math.isfinite(x) and math.isfinite(t) and abs(t) >= delta,
        d_x=lambda x, t: -1.0 / t,
        d_t=lambda x, t: x / (t * t),
    )


def fairlie_field(a: complex, delta: float = DEFAULT_MARGIN) -> SolutionField:
    """The rational solution lam = (a + x)/(1 - t), valid for |1 - t| >= delta.

    ``a`` may be complex; the field (and its residual) are then complex
    valued.
    """
    delta = _finite("delta", delta)
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    a = complex(a)
    if not (math.isfinite(a.real) and math.isfinite(a.imag)):
        raise DomainError("parameter a must be finite")
    a_out: complex = a if a.imag != 0.0 else a.real
    return SolutionField(
        label=f"fairlie(a={a_out!r})",
        evaluate=lambda x, t: (a_out + x) / (1.0 - t),
        valid_at=lambda x, t: math.isfinite(x) and math.isfinite(t) and abs(1.0 - t) >= delta,
        d_x=lambda x, t: 1.0 / (1.0 - t),
        d_t=lambda x, t: (a_out + x) / ((1.0 - t) * (1.0 - t)),
    )


def whitham_field(
    profile: InitialProfile,
    bracket: tuple[float, float] = (-10.0, 10.0),
    tol: float = 1e-12,
    n_scan: int = 256,
) -> SolutionField:
    """Field defined implicitly by lam = G(x + lam*t).

    Valid where exactly one root lies in ``bracket``; derivatives are not
    advertised, so residuals fall back to finite differences.
    """

    def roots_at(x: float, t: float):
        return solve_whitham(profile, x, t, bracket=bracket, tol=tol, n_scan=n_scan)

    def evaluate(x: float, t: float) -> float:
        roots = roots_at(x, t)
        if len(roots) != 1:
            raise DomainError(
                f"implicit profile field is not single-valued at {(x, t)}: "
                f"{len(roots)} roots in {bracket}"
            )
        return roots[0]

    def valid_at(x: float, t: float) -> bool:
        if not (math.isfinite(x) and math.isfinite(t)):
            return False
        try:
            return len(roots_at(x, t)) == 1
        except (DomainError, ConvergenceError):
            return False

    return SolutionField(
        label=f"whitham({profile.family})", evaluate=evaluate, valid_at=valid_at
    )


BUILTIN_NAMES = ("zero", "constant", "linear-x", "hyperbola", "fairlie", "whitham")


def builtin_solution(name: str, **params) -> SolutionField:
    """Construct a named built-in field.

    Accepted names and parameters:

    ``zero``                 -
    ``constant``             value
    ``linear-x``             -
    ``hyperbola``            [delta]
    ``fairlie``              a, [delta]
    ``whitham``              profile, [bracket], [tol], [n_scan]
    """
    if name == "zero":
        _reject_params(name, params)
        return zero_field()
    if name == "constant":
        if "value" not in params:
            raise DomainError("constant field needs 'value'")
        value = params.pop("value")
        _reject_params(name, params)
        return constant_field(value)
    if name == "linear-x":
        _reject_params(name, params)
        return linear_x_field()
    if name == "hyperbola":
        delta = params.pop("delta", DEFAULT_MARGIN)
        _reject_params(name, params)
        return hyperbola_field(delta)
    if name == "fairlie":
        if "a" not in params:
            raise DomainError("fairlie field needs 'a'")
        a = params.pop("a")
        delta = params.pop("delta", DEFAULT_MARGIN)
        _reject_params(name, params)
        return fairlie_field(a, delta)
    if name == "whitham":
        if "profile" not in params:
            raise DomainError("whitham field needs 'profile'")
        profile = params.pop("profile")
        bracket = params.pop("bracket", (-10.0, 10.0))
        tol = params.pop("tol", 1e-12)
        n_scan = params.pop("n_scan", 256)
        _reject_params(name, params)
        return whitham_field(profile, bracket=bracket, tol=tol, n_scan=n_scan)
    raise DomainError(f"unknown builtin solution {name!r}; known: {BUILTIN_NAMES}")


def _reject_params(name: str, params: dict) -> None:
    if params:
        raise DomainError(f"unexpected parameters for {name!r}: {sorted(params)}")


# ---------------------------------------------------------------------------
# Residual operator.
# ---------------------------------------------------------------------------

def _stencil_offsets(order: int) -> tuple[float, ...]:
    return (-1.0, 1.0) if order == 2 else (-2.0, -1.0, 1.0, 2.0)


def _fd(f: Callable[[float], complex], u: float, h: float, order: int) -> complex:
    if order == 2:
        return (f(u + h) - f(u - h)) / (2.0 * h)
    # difference the symmetric pairs first: cheaper cancellation, and an
    # exact zero for constant f
    return (8.0 * (f(u + h) - f(u - h)) - (f(u + 2 * h) - f(u - 2 * h))) / (12.0 * h)


def residual(field: SolutionField, x: float, t: float, scheme: ResidualScheme = ResidualScheme()) -> ResidualResult:
    """Evaluate lam*lam_x - s*lam_t at (x, t).

    Analytic mode uses the field's advertised derivatives when present and
    otherwise falls back to finite differences, recording the fallback in
    ``mode_used``.  Finite differences use central stencils of the scheme's
    order; every stencil point must be valid for the field.
    """
    x = _finite("x", x)
    t = _finite("t", t)
    if not field.valid_at(x, t):
        raise DomainError(f"field {field.label!r} is not valid at {(x, t)}")

    analytic = scheme.mode == "analytic" and field.d_x is not None and field.d_t is not None
    if analytic:
        lam = field.evaluate(x, t)
        lam_x = field.d_x(x, t)
        lam_t = field.d_t(x, t)
        mode_used = "analytic"
    else:
        h = scheme.step(x, t)
        for du in _stencil_offsets(scheme.order):
            if not field.valid_at(x + du * h, t):
                raise DomainError(
                    f"stencil point (x{du:+g}h, t) leaves the validity region of "
                    f"{field.label!r} at {(x, t)}"
                )
            if not field.valid_at(x, t + du * h):
                raise DomainError(
                    f"stencil point (x, t{du:+g}h) leaves the validity region of "
                    f"{field.label!r} at {(x, t)}"
                )
        lam = field.evaluate(x, t)
        lam_x = _fd(lambda u: field.evaluate(u, t), x, h, scheme.order)
        lam_t = _fd(lambda v: field.evaluate(x, v), t, h, scheme.order)
        mode_used = "finite_difference"

    value = lam * lam_x - scheme.sign * lam_t
    if isinstance(value, complex):
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise DomainError(f"residual is not finite at {(x, t)}")
    elif not math.isfinite(value):
        raise DomainError(f"residual is not finite at {(x, t)}")
    return ResidualResult(value, mode_used)


# ---------------------------------------------------------------------------
# Implicit solvers.
# ---------------------------------------------------------------------------

def _polish_root(
    r: Callable[[float], float],
    dr: Optional[Callable[[float], float]],
    lo: float,
    hi: float,
    f_lo: float,
    f_hi: float,
    tol: float,
) -> float:
    """Safeguarded Newton: bisection fallback keeps the iterate bracketed.

    Iterates to (near) machine precision, then checks the |r| <= tol
    contract.
    """
    u = 0.5 * (lo + hi)
    for _ in range(_POLISH_ITERATIONS):
        fu = r(u)
        if fu == 0.0:
            return u
        if (fu < 0.0) == (f_lo < 0.0):
            lo, f_lo = u, fu
        else:
            hi, f_hi = u, fu
        step = None
        if dr is not None:
            d = dr(u)
            if d != 0.0 and math.isfinite(d):
                candidate = u - fu / d
                if lo < candidate < hi:
                    step = candidate
        if step is None:
            step = 0.5 * (lo + hi)
        if abs(step - u) <= 4.0 * np.finfo(float).eps * (1.0 + abs(u)):
            u = step
            break
        u = step
    if abs(r(u)) > tol:
        raise ConvergenceError(
            f"root polish stalled at |r({u!r})| = {abs(r(u)):.3e} > tol {tol:.3e}"
        )
    return u


def _bracketed_roots(
    r: Callable[[float], float],
    dr: Optional[Callable[[float], float]],
    bracket: tuple[float, float],
    tol: float,
    n_scan: int,
) -> list[float]:
    lo, hi = (_finite("bracket low", bracket[0]), _finite("bracket high", bracket[1]))
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket!r}")
    tol = _finite("tol", tol)
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    n_scan = int(n_scan)
    if n_scan < 1:
        raise DomainError("n_scan must be at least 1")

    nodes = np.linspace(lo, hi, n_scan + 1)
    values = []
    for u in nodes:
        fu = r(float(u))
        if not math.isfinite(fu):
            raise DomainError(f"implicit equation is not finite at lam={u!r}")
        values.append(fu)

    roots: list[float] = []
    for i, u in enumerate(nodes):
        if values[i] == 0.0:
            roots.append(float(u))
    for i in range(n_scan):
        f_a, f_b = values[i], values[i + 1]
        if f_a == 0.0 or f_b == 0.0:
            continue
        if (f_a < 0.0) != (f_b < 0.0):
            roots.append(
                _polish_root(r, dr, float(nodes[i]), float(nodes[i + 1]), f_a, f_b, tol)
            )
    roots.sort()
    deduped: list[float] = []
    for root in roots:
        if not deduped or abs(root - deduped[-1]) > 1e-9 * (1.0 + abs(root)):
            deduped.append(root)
    return deduped


def solve_whitham(
    profile: InitialProfile,
    x: float,
    t: float,
    bracket: tuple[float, float] = (-10.0, 10.0),
    tol: float = 1e-12,
    n_scan: int = 256,
) -> list[float]:
    """All roots of lam = G(x + lam*t) inside ``bracket``, ascending.

    Every returned root satisfies |lam - G(x + lam*t)| <= tol.  An empty
    list records that no sign change was found; it is not an error.
    """
    x = _finite("x", x)
    t = _finite("t", t)

    def r(lam: float) -> float:
        return lam - profile.value(x + lam * t)

    def dr(lam: float) -> float:
        return 1.0 - t * profile.deriv(x + lam * t)

    return _bracketed_roots(r, dr, bracket, tol, n_scan)


def solve_leznov(
    gauge: GaugeFunction,
    x: float,
    t: float,
    bracket: tuple[float, float] = (-10.0, 10.0),
    tol: float = 1e-12,
    n_scan: int = 256,
) -> list[float]:
    """All roots of x - lam*t = f(lam) inside ``bracket``, ascending.

    The gauge must have real coefficients.  Fields assembled from these
    roots satisfy lam*lam_x = -lam_t (sign s = -1).
    """
    if not gauge.is_real:
        raise DomainError("solve_leznov requires a real-coefficient gauge")
    x = _finite("x", x)
    t = _finite("t", t)
    dgauge = gauge.derivative()

    def r(lam: float) -> float:
        return x - lam * t - gauge(lam).real

    def dr(lam: float) -> float:
        return -t - dgauge(lam).real

    return _bracketed_roots(r, dr, bracket, tol, n_scan)


def leznov_field(
    gauge: GaugeFunction,
    bracket: tuple[float, float] = (-10.0, 10.0),
    tol: float = 1e-12,
    n_scan: int = 256,
) -> SolutionField:
    """Single-valued field carved out of the gauge-form roots."""

    def evaluate(x: float, t: float) -> float:
        roots = solve_leznov(gauge, x, t, bracket=bracket, tol=tol, n_scan=n_scan)
        if len(roots) != 1:
            raise DomainError(
                f"gauge-form field is not single-valued at {(x, t)}: "
                f"{len(roots)} roots in {bracket}"
            )
        return roots[0]

    def valid_at(x: float, t: float) -> bool:
        if not (math.isfinite(x) and math.isfinite(t)):
            return False
        try:
            return len(solve_leznov(gauge, x, t, bracket=bracket, tol=tol, n_scan=n_scan)) == 1
        except (DomainError, ConvergenceError):
            return False

    return SolutionField(label="leznov", evaluate=evaluate, valid_at=valid_at)


# ---------------------------------------------------------------------------
# Breaking time.
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Golden-section maximization; deterministic, ~1e-13 width."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a <= 1e-13 * (1.0 + abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    u = 0.5 * (a + b)
    return u, f(u)


def breaking_time(
    profile: InitialProfile,
    xi_interval: tuple[float, float] = (-5.0, 5.0),
    n_samples: int = 201,
) -> Optional[float]:
    """First gradient catastrophe t* = 1 / max G' over ``xi_interval``.

    Returns None when max G' <= 0 (no characteristic crossing at positive
    time).  The maximizing xi from the sample sweep is refined by a local
    golden-section search between its neighbours.
    """
    lo = _finite("xi low", xi_interval[0])
    hi = _finite("xi high", xi_interval[1])
    if not lo < hi:
        raise DomainError(f"xi interval must satisfy lo < hi, got {xi_interval!r}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")

    xs = np.linspace(lo, hi, n_samples)
    slopes = []
    for xi in xs:
        g = profile.deriv(float(xi))
        if not math.isfinite(g):
            raise DomainError(f"profile slope is not finite at xi={xi!r}")
        slopes.append(g)
    best = int(np.argmax(slopes))
    g_max = slopes[best]

    ref_lo = float(xs[max(best - 1, 0)])
    ref_hi = float(xs[min(best + 1, n_samples - 1)])
    if ref_hi > ref_lo:
        _, g_ref = _golden_max(profile.deriv, ref_lo, ref_hi)
        g_max = max(g_max, g_ref)

    if g_max <= 0.0:
        return None
    return 1.0 / g_max
