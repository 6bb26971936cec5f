"""Incomplete Legendre elliptic integrals via Carlson symmetric forms,
cross-checked by a deterministic adaptive-quadrature oracle.

Conventions
-----------
The Legendre *modulus* convention is used throughout (modulus ``k``, not
the parameter ``m = k**2``):

    F(beta, k) = int_0^beta dtheta / sqrt(1 - k^2 sin^2 theta)
    E(beta, k) = int_0^beta sqrt(1 - k^2 sin^2 theta) dtheta

with amplitude ``beta in [0, pi/2]`` and modulus ``k in [0, 1)``.  The
Carlson symmetric forms are

    R_F(x, y, z) = (1/2) int_0^inf dt / sqrt((t+x)(t+y)(t+z))
    R_D(x, y, z) = (3/2) int_0^inf dt / ((t+z) sqrt((t+x)(t+y)(t+z)))

and the reductions are the standard ones,

    F(beta, k) = sin(beta) R_F(cos^2 beta, 1 - k^2 sin^2 beta, 1)
    E(beta, k) = F-term - (k^2/3) sin^3(beta) R_D(cos^2 beta, 1 - k^2 sin^2 beta, 1).

The quadrature oracle shares no code with the Carlson path: it is a
globally adaptive bisection scheme over fixed-order Gauss-Legendre panels,
with open nodes, so integrable endpoint singularities of the
``theta**(-1/2)`` type are admissible.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "EllipticValue",
    "carlson_rf",
    "carlson_rd",
    "ellip_f",
    "ellip_e",
    "quad_adaptive",
]

# Duplication stops once the relative spread of the arguments drops below
# this; the fifth-order Taylor tail then contributes O(spread^6), i.e.
# nothing at double precision.
_CARLSON_SPREAD = 1e-13
_MAX_DUPLICATIONS = 120

# Fixed-order open panel for the oracle.  25 points keeps the error of the
# panel adjacent to a theta**(-1/2) endpoint singularity small enough that
# the 60-level bisection budget reaches ~1e-11 absolute.
_PANEL_ORDER = 25
_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(_PANEL_ORDER)
_DEFAULT_MAX_LEVELS = 60
_MAX_CELLS = 100_000


@dataclass(frozen=True)
class EllipticValue:
    """A computed integral value with a conservative absolute error bound."""

    value: float
    abs_error_estimate: float


def _check_finite(name: str, v: float) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# Carlson duplication cores.  Array-aware: scalars in, scalar out; ndarrays
# in, ndarray out.  Arguments are sorted first, which makes the symmetric
# functions exactly permutation-invariant in floating point.
# ---------------------------------------------------------------------------

def _rf_core(x, y, z):
    args = np.sort(np.stack(np.broadcast_arrays(
        np.asarray(x, dtype=float),
        np.asarray(y, dtype=float),
        np.asarray(z, dtype=float))), axis=0)
    xm, ym, zm = args[0].copy(), args[1].copy(), args[2].copy()
    mu = (xm + ym + zm) / 3.0
    for _ in range(_MAX_DUPLICATIONS):
        spread = np.max(
            np.maximum(np.abs(xm - mu), np.maximum(np.abs(ym - mu), np.abs(zm - mu))) / mu
        )
        if spread < _CARLSON_SPREAD:
            break
        sx, sy, sz = np.sqrt(xm), np.sqrt(ym), np.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        xm = 0.25 * (xm + lam)
        ym = 0.25 * (ym + lam)
        zm = 0.25 * (zm + lam)
        mu = (xm + ym + zm) / 3.0
    else:  # pragma: no cover - quartic convergence makes this unreachable
        raise ConvergenceError("carlson_rf duplication failed to converge")
    dx = (mu - xm) / mu
    dy = (mu - ym) / mu
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / np.sqrt(mu)


def _rd_core(x, y, z):
    xy = np.sort(np.stack(np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float))), axis=0)
    xm, ym = xy[0].copy(), xy[1].copy()
    zm = np.broadcast_to(np.asarray(z, dtype=float), xm.shape).copy()
    acc = np.zeros_like(xm)
    fac = 1.0
    mu = (xm + ym + 3.0 * zm) / 5.0
    for _ in range(_MAX_DUPLICATIONS):
        sx, sy, sz = np.sqrt(xm), np.sqrt(ym), np.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        acc = acc + fac / (sz * (zm + lam))
        fac *= 0.25
        xm = 0.25 * (xm + lam)
        ym = 0.25 * (ym + lam)
        zm = 0.25 * (zm + lam)
        mu = (xm + ym + 3.0 * zm) / 5.0
        spread = np.max(
            np.maximum(np.abs(xm - mu), np.maximum(np.abs(ym - mu), np.abs(zm - mu))) / mu
        )
        if spread < _CARLSON_SPREAD:
            break
    else:  # pragma: no cover
        raise ConvergenceError("carlson_rd duplication failed to converge")
    dx = (mu - xm) / mu
    dy = (mu - ym) / mu
    dz = (mu - zm) / mu
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + ec + ec
    tail = 1.0 + ed * (-3.0 / 14.0 + (9.0 / 88.0) * ed - (9.0 / 52.0) * dz * ee) \
        + dz * (ee / 6.0 + dz * (-(9.0 / 22.0) * ec + (3.0 / 26.0) * dz * ea))
    return 3.0 * acc + fac * tail / (mu * np.sqrt(mu))


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_F(x, y, z).

    Nonnegative arguments, at most one of them zero.  Relative accuracy is
    at the 1e-13 duplication threshold, i.e. effectively machine-limited.
    """
    vals = [_check_finite(n, v) for n, v in (("x", x), ("y", y), ("z", z))]
    if any(v < 0.0 for v in vals):
        raise DomainError(f"carlson_rf requires nonnegative arguments, got {vals}")
    if sum(1 for v in vals if v == 0.0) > 1:
        raise DomainError("carlson_rf: at most one argument may be zero")
    return float(_rf_core(*vals))


def carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_D(x, y, z) = R_J(x, y, z, z).

    Symmetric in (x, y); at most one of x, y may be zero and z must be
    strictly positive.
    """
    vals = [_check_finite(n, v) for n, v in (("x", x), ("y", y), ("z", z))]
    if any(v < 0.0 for v in vals):
        raise DomainError(f"carlson_rd requires nonnegative arguments, got {vals}")
    if vals[2] == 0.0:
        raise DomainError("carlson_rd requires z > 0")
    if vals[0] == 0.0 and vals[1] == 0.0:
        raise DomainError("carlson_rd: at most one of x, y may be zero")
    return float(_rd_core(*vals))


# ---------------------------------------------------------------------------
# Legendre reductions.
# ---------------------------------------------------------------------------

def _check_amplitude(beta: float) -> float:
    beta = _check_finite("beta", beta)
    if not 0.0 <= beta <= math.pi / 2.0:
        raise DomainError(f"amplitude beta must lie in [0, pi/2], got {beta!r}")
    return beta


def _check_modulus(k: float) -> float:
    k = _check_finite("k", k)
    if not 0.0 <= k < 1.0:
        raise DomainError(f"modulus k must lie in [0, 1), got {k!r}")
    return k


def _error_bound(value: float) -> float:
    # Duplication is numerically benign; budget a few ulps of headroom.
    return 1e-12 * abs(value) + 1e-15


def ellip_f(beta: float, k: float) -> EllipticValue:
    """Incomplete elliptic integral of the first kind, F(beta, k)."""
    beta = _check_amplitude(beta)
    k = _check_modulus(k)
    s = math.sin(beta)
    if s == 0.0:
        return EllipticValue(0.0, 0.0)
    c = math.cos(beta)
    value = s * float(_rf_core(c * c, 1.0 - (k * s) ** 2, 1.0))
    return EllipticValue(value, _error_bound(value))


def ellip_e(beta: float, k: float) -> EllipticValue:
    """Incomplete elliptic integral of the second kind, E(beta, k)."""
    beta = _check_amplitude(beta)
    k = _check_modulus(k)
    s = math.sin(beta)
    if s == 0.0:
        return EllipticValue(0.0, 0.0)
    c = math.cos(beta)
    x, y = c * c, 1.0 - (k * s) ** 2
    value = s * float(_rf_core(x, y, 1.0)) - (k * k / 3.0) * s ** 3 * float(_rd_core(x, y, 1.0))
    return EllipticValue(value, _error_bound(value))


def ellip_f_values(betas: np.ndarray, k: float) -> np.ndarray:
    """Vectorized F(beta, k) over an array of amplitudes (shared modulus)."""
    k = _check_modulus(k)
    betas = np.asarray(betas, dtype=float)
    if betas.size == 0:
        return np.zeros_like(betas)
    if np.any(betas < 0.0) or np.any(betas > math.pi / 2.0):
        raise DomainError("amplitudes must lie in [0, pi/2]")
    s = np.sin(betas)
    c = np.cos(betas)
    safe = np.where(s == 0.0, 1.0, s)
    out = safe * _rf_core(c * c, 1.0 - (k * safe) ** 2, 1.0)
    return np.where(s == 0.0, 0.0, out)


def ellip_e_values(betas: np.ndarray, k: float) -> np.ndarray:
    """Vectorized E(beta, k) over an array of amplitudes (shared modulus)."""
    k = _check_modulus(k)
    betas = np.asarray(betas, dtype=float)
    if betas.size == 0:
        return np.zeros_like(betas)
    if np.any(betas < 0.0) or np.any(betas > math.pi / 2.0):
        raise DomainError("amplitudes must lie in [0, pi/2]")
    s = np.sin(betas)
    c = np.cos(betas)
    safe = np.where(s == 0.0, 1.0, s)
    x, y = c * c, 1.0 - (k * safe) ** 2
    out = safe * _rf_core(x, y, 1.0) - (k * k / 3.0) * safe ** 3 * _rd_core(x, y, 1.0)
    return np.where(s == 0.0, 0.0, out)


# ---------------------------------------------------------------------------
# Adaptive-quadrature oracle.
# ---------------------------------------------------------------------------

def _panel(f: Callable[[float], float], lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    total = 0.0
    for node, weight in zip(_PANEL_NODES, _PANEL_WEIGHTS):
        fx = f(mid + half * node)
        if not math.isfinite(fx):
            raise DomainError(
                f"integrand returned a non-finite value at {mid + half * node!r}"
            )
        total += weight * fx
    return half * total


def quad_adaptive(
    integrand: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_levels: int = _DEFAULT_MAX_LEVELS,
) -> EllipticValue:
    """Deterministically integrate ``integrand`` over [a, b] to tolerance ``tol``.

    Globally adaptive: the interval with the worst error estimate is
    bisected until the summed estimate drops below ``tol``.  Panel nodes are
    open, so integrable endpoint singularities (``theta**(-1/2)`` type) are
    handled by subdividing toward the endpoint, subject to a hard per-
    interval budget of ``max_levels`` bisections.  Identical inputs produce
    bit-identical output.

    Raises :class:`ConvergenceError` if the budget is exhausted first, and
    :class:`DomainError` for non-finite integrand values or bad limits.
    """
    a = _check_finite("a", a)
    b = _check_finite("b", b)
    tol = _check_finite("tol", tol)
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if b < a:
        raise DomainError(f"integration limits must satisfy a <= b, got {(a, b)}")
    if a == b:
        return EllipticValue(0.0, 0.0)

    def make_cell(lo: float, hi: float, whole: float, depth: int):
        mid = 0.5 * (lo + hi)
        left = _panel(integrand, lo, mid)
        right = _panel(integrand, mid, hi)
        err = abs(left + right - whole)
        # Heap key: worst error first; ties broken by position for
        # determinism (cells are disjoint, so lo is unique).
        return (-err, lo, hi, left, right, depth)

    heap = [make_cell(a, b, _panel(integrand, a, b), 0)]
    frozen = []  # cells that hit the bisection budget
    total_err = -heap[0][0]

    while total_err > tol:
        if not heap:
            raise ConvergenceError(
                f"quadrature stalled at error estimate {total_err:.3e} > tol {tol:.3e} "
                f"after exhausting the {max_levels}-level budget"
            )
        neg_err, lo, hi, left, right, depth = heapq.heappop(heap)
        if depth >= max_levels:
            frozen.append((neg_err, lo, hi, left, right, depth))
            continue
        if len(heap) + len(frozen) > _MAX_CELLS:
            raise ConvergenceError("quadrature exceeded the interval budget")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # Interval is at floating-point resolution; treat as frozen.
            frozen.append((neg_err, lo, hi, left, right, depth))
            continue
        c1 = make_cell(lo, mid, left, depth + 1)
        c2 = make_cell(mid, hi, right, depth + 1)
        heapq.heappush(heap, c1)
        heapq.heappush(heap, c2)
        total_err += neg_err - c1[0] - c2[0]

    # Accumulate in positional order so the result does not depend on heap
    # history.
    cells = sorted(heap + frozen, key=lambda cell: cell[1])
    value = math.fsum(cell[3] + cell[4] for cell in cells)
    estimate = math.fsum(-cell[0] for cell in cells)
    return EllipticValue(value, estimate)
