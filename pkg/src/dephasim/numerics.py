"""Shared numerical kernels: adaptive quadrature, erf, log-log tail slope.

Quadrature is a globally adaptive 7/15-point Gauss-Kronrod scheme. The
interval with the largest error estimate is bisected until the summed
estimate meets ``max(abs_tol, rel_tol * |I|)``. The per-interval error
estimate is the raw ``|K15 - G7|`` difference, which is pessimistic for
smooth integrands and therefore a usable bound.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "quad_adaptive",
    "quad2d_adaptive",
    "erf",
    "erfc",
    "tail_slope",
]

# Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss points.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node layout on [-1, 1].
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    n_intervals: int

    def __iter__(self):
        # allows ``value, err = quad_adaptive(...)``
        yield self.value
        yield self.error


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    if fx.shape != _NODES.shape:
        fx = np.broadcast_to(fx, _NODES.shape)
    if not np.all(np.isfinite(fx)):
        bad = mid + half * _NODES[~np.isfinite(fx)]
        raise NumericalError(
            "integrand is not finite on the integration range",
            diagnostics={"interval": (a, b), "first_bad_node": float(bad[0])},
        )
    k = half * float(fx @ _KW)
    g = half * float(fx @ _GW)
    return k, abs(k - g)


def _find_cutoff(f, a, tail_rel=1e-17, max_length=1e8):
    """Grow ``L`` until |f(a + L)| is negligible against the largest sample."""
    length = 1.0
    peak = abs(float(f(np.array([a + 1e-300]))[0]))
    while length < max_length:
        probe = a + length * np.linspace(0.0, 1.0, 33)[1:]
        vals = np.abs(np.asarray(f(probe), dtype=float))
        peak = max(peak, float(vals.max()))
        if vals[-1] <= tail_rel * peak and vals[-4:].max() <= tail_rel * peak * 10:
            return a + length
        length *= 2.0
    raise NumericalError(
        "integrand does not decay on the semi-infinite range",
        diagnostics={"a": a, "max_length": max_length},
    )


def quad_adaptive(f, a, b, spec=None, cutoff=None, points=()):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    ``b`` may be ``math.inf``; the range is then truncated at ``cutoff`` or,
    if not given, where the integrand has decayed below 1e-17 of its peak.
    ``points`` are interior breakpoints (peaks, kinks) that seed the initial
    partition so narrow features cannot slip between nodes.
    Returns a :class:`QuadResult` that also unpacks as ``(value, error)``.
    """
    spec = spec or QuadratureSpec()
    if math.isinf(b):
        if b < 0:
            raise DomainError("only [a, +inf) semi-infinite ranges are supported")
        b = float(cutoff) if cutoff is not None else _find_cutoff(f, a)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite or b=+inf")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    edges = [a] + sorted(x for x in points if a < x < b) + [b]
    heap = []  # max-heap on error
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            v, e = _gk15(f, lo, hi)
            heap.append((-e, lo, hi, v))
    heapq.heapify(heap)
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    n = len(heap)
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n >= spec.max_subdivisions:
            raise NumericalError(
                "adaptive quadrature exhausted its subdivision budget",
                best_estimate=sign * total,
                diagnostics={"error_estimate": total_err, "intervals": n, "a": a, "b": b},
            )
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval collapsed to floating-point resolution
            raise NumericalError(
                "adaptive quadrature hit floating-point resolution",
                best_estimate=sign * total,
                diagnostics={"error_estimate": total_err, "interval": (lo, hi)},
            )
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        n += 1
        # re-sum rather than update incrementally to avoid drift
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return QuadResult(sign * total, total_err, n)


def quad2d_adaptive(f, x_range, y_range, spec=None, inner_points=None):
    """Iterated adaptive quadrature of ``f(x, y)`` over a rectangle.

    ``f`` must accept a scalar ``x`` and an array ``y``. ``inner_points(x)``
    may return breakpoints for the inner integral at that x. The inner integral
    runs at a tolerance ten times tighter than the outer one; the returned
    error is the outer estimate plus the largest inner estimate times the
    outer width.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-6)
    inner_spec = QuadratureSpec(
        rel_tol=spec.rel_tol / 10, abs_tol=spec.abs_tol / 10,
        max_subdivisions=spec.max_subdivisions,
    )
    y0, y1 = y_range
    worst_inner = [0.0]

    def outer(xs):
        out = np.empty(len(xs))
        for i, x in enumerate(xs):
            pts = inner_points(x) if inner_points is not None else ()
            res = quad_adaptive(lambda y: f(x, y), y0, y1, inner_spec, points=pts)
            out[i] = res.value
            worst_inner[0] = max(worst_inner[0], res.error)
        return out

    res = quad_adaptive(outer, x_range[0], x_range[1], spec)
    err = res.error + worst_inner[0] * abs(x_range[1] - x_range[0])
    return QuadResult(res.value, err, res.n_intervals)


# --- error function -------------------------------------------------------

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SERIES_TERMS = 100
_CF_DEPTH = 120
_SERIES_LIMIT = 3.0


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!  (all terms > 0)
    x2 = 2.0 * x * x
    term = x.copy()
    acc = x.copy()
    for n in range(_SERIES_TERMS):
        term = term * x2 / (2 * n + 3)
        acc = acc + term
    return _TWO_OVER_SQRT_PI * np.exp(-x * x) * acc


def _erfc_cf(x):
    # erfc(x) = e^{-x^2}/sqrt(pi) / (x + 1/2/(x + 1/(x + 3/2/(x + ...)))), x > 0
    tail = x.copy()
    for k in range(_CF_DEPTH, 0, -1):
        tail = x + (0.5 * k) / tail
    with np.errstate(over="ignore"):
        return np.exp(-x * x) / (math.sqrt(math.pi) * tail)


def erfc(x):
    """Complementary error function for real scalars or arrays."""
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)
    small = np.abs(xa) < _SERIES_LIMIT
    out[small] = 1.0 - _erf_series(xa[small])
    pos = (~small) & (xa > 0)
    neg = (~small) & (xa < 0)
    out[pos] = _erfc_cf(xa[pos])
    out[neg] = 2.0 - _erfc_cf(-xa[neg])
    out[np.isnan(xa)] = np.nan
    return float(out[0]) if scalar else out


def erf(x):
    """Error function for real scalars or arrays, double precision.

    Positive-term series below |x| = 3, Laplace continued fraction for
    erfc above. Odd by construction.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    ax = np.abs(np.atleast_1d(xa))
    out = np.empty_like(ax)
    small = ax < _SERIES_LIMIT
    out[small] = _erf_series(ax[small])
    big = ~small
    out[big] = 1.0 - _erfc_cf(np.where(np.isinf(ax[big]), 1e300, ax[big]))
    out = np.copysign(out, np.atleast_1d(xa))
    out[np.isnan(np.atleast_1d(xa))] = np.nan
    return float(out[0]) if scalar else out


def tail_slope(points):
    """Least-squares slope of log(lambda) against log(t).

    ``points`` is a sequence of ``(t, lam)`` pairs with t strictly
    increasing and both coordinates positive.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DomainError("tail_slope needs at least 3 (t, lambda) points")
    t, lam = arr[:, 0], arr[:, 1]
    if np.any(t <= 0):
        raise DomainError("tail_slope needs t > 0")
    if np.any(np.diff(t) <= 0):
        raise DomainError("tail_slope needs strictly increasing t")
    if np.any(lam <= 0):
        raise DomainError("tail_slope needs lambda > 0 at every point")
    lx, ly = np.log(t), np.log(lam)
    lx = lx - lx.mean()
    return float(lx @ (ly - ly.mean()) / (lx @ lx))
