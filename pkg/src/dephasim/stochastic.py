"""Brownian paths, Ito integrals and the random phase time X_t.

X_t = t + int_0^t sigma(s) dB_s is the time argument that turns a unitary
solution into a sample of the dephased one. Two samplers are provided:

* ``pathwise``: build a Brownian path on a uniform grid and take the
  left-point (Ito) sum of sigma(t_k) * dB_k.
* ``direct``: the Ito integral of a deterministic integrand is exactly
  N(0, lambda(t)), so X_t = t + sqrt(lambda(t)) * Z.

Moments below are central moments, i.e. moments of X_t - t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError
from .montecarlo import SeedSpec, mc_mean, map_chunks
from .profiles import DecoherenceProfile, lambda_of_t

STEPS_PER_UNIT_TIME = 1000


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (isinstance(self.n_steps, (int, np.integer)) and self.n_steps >= 1):
            raise ConfigurationError(f"TimeGrid needs n_steps >= 1, got {self.n_steps!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigurationError(f"TimeGrid needs t_end > 0, got {self.t_end!r}")

    @property
    def t_start(self):
        return 0.0

    @property
    def h(self):
        return self.t_end / self.n_steps

    @property
    def points(self):
        return np.arange(self.n_steps + 1) * self.h


@dataclass(frozen=True)
class BrownianPath:
    grid: TimeGrid
    increments: np.ndarray

    def __post_init__(self):
        if len(self.increments) != self.grid.n_steps:
            raise ConfigurationError("BrownianPath needs one increment per grid step")

    @property
    def values(self):
        """B at every grid point, starting from B(0) = 0."""
        return np.concatenate([[0.0], np.cumsum(self.increments)])


@dataclass(frozen=True)
class PhaseTimeSample:
    t: float
    x: float


def default_steps(t):
    return max(1, math.ceil(STEPS_PER_UNIT_TIME * t))


def sample_brownian_path(grid, seed):
    if not isinstance(grid, TimeGrid):
        raise ConfigurationError("sample_brownian_path needs a TimeGrid")
    rng = seed.generator()
    return BrownianPath(grid, rng.standard_normal(grid.n_steps) * math.sqrt(grid.h))


def ito_integral(sigma, path):
    """Left-point sum sum_k sigma(t_k) dB_k over the path's grid."""
    left = path.grid.points[:-1]
    vals = np.broadcast_to(np.asarray(sigma(left), dtype=float), left.shape)
    return float(np.sum(vals * path.increments))


def _as_sigma(sigma):
    return sigma.sigma if isinstance(sigma, DecoherenceProfile) else sigma


def sample_phase_time(t, profile, seed, n_steps=None):
    """One pathwise realization of X_t on a freshly sampled Brownian path."""
    t = float(t)
    if t < 0:
        raise DomainError(f"phase time needs t >= 0, got {t}")
    if t == 0:
        return PhaseTimeSample(0.0, 0.0)
    if not profile.pathwise_ok:
        raise DomainError(f"profile {profile.label!r} has sigma(0) infinite; use the direct sampler")
    grid = TimeGrid(t, n_steps or default_steps(t))
    path = sample_brownian_path(grid, seed)
    return PhaseTimeSample(t, t + ito_integral(profile.sigma, path))


def phase_time_sampler(t, profile, sampler="direct", n_steps=None):
    """Return ``draw(rng, n) -> array of n samples of X_t``.

    The returned callable is what every Monte Carlo routine feeds through
    the chunked runner.
    """
    t = float(t)
    if t < 0:
        raise DomainError(f"phase time needs t >= 0, got {t}")
    if sampler == "direct":
        scale = math.sqrt(lambda_of_t(profile, t))

        def draw(rng, n):
            z = rng.standard_normal(n)
            return t + scale * z

        return draw
    if sampler == "pathwise":
        if t == 0:
            return lambda rng, n: np.zeros(n)
        if not profile.pathwise_ok:
            raise DomainError(f"profile {profile.label!r} has sigma(0) infinite; use the direct sampler")
        grid = TimeGrid(t, n_steps or default_steps(t))
        weights = np.broadcast_to(np.asarray(profile.sigma(grid.points[:-1]), dtype=float), (grid.n_steps,))
        sqrt_h = math.sqrt(grid.h)
        # bound memory: 2**21 normals per block
        rows = max(1, (1 << 21) // grid.n_steps)

        def draw(rng, n):
            out = np.empty(n)
            for start in range(0, n, rows):
                m = min(rows, n - start)
                dB = rng.standard_normal((m, grid.n_steps)) * sqrt_h
                out[start:start + m] = t + (dB * weights).sum(axis=1)
            return out

        return draw
    raise ConfigurationError(f"unknown sampler {sampler!r}; expected 'direct' or 'pathwise'")


def phase_time_samples(t, profile, n_paths, seed, sampler="direct", n_steps=None, workers=None):
    """Ensemble of ``n_paths`` phase-time draws, in reproducible order."""
    draw = phase_time_sampler(t, profile, sampler, n_steps)
    return np.concatenate(map_chunks(lambda rng, n, j: draw(rng, n), n_paths, seed, workers))


# --- moments ----------------------------------------------------------------

def moment_closed_form(n, lambda_t):
    """E[(X_t - t)^n] = (n-1)!! lambda^(n/2) for even n, 0 for odd n."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"moment order must be a nonnegative integer, got {n!r}")
    if lambda_t < 0:
        raise DomainError("lambda must be nonnegative")
    if n % 2:
        return 0.0
    k = n // 2
    return math.factorial(n) / (2 ** k * math.factorial(k)) * lambda_t ** k


@dataclass(frozen=True)
class MomentTable:
    times: np.ndarray
    beta: np.ndarray  # shape (n_max + 1, len(times))
    central: bool

    def at(self, n, index=-1):
        return float(self.beta[n, index])


def _moment_rhs(beta, s2, central):
    d = np.zeros_like(beta)
    n = np.arange(len(beta))
    d[2:] = n[2:] * (n[2:] - 1) / 2 * s2 * beta[:-2]
    if not central:
        d[1:] += n[1:] * beta[:-1]
    return d


def moment_recursion(n_max, sigma, grid, central=True):
    """Integrate the Ito moment hierarchy with classical RK4 on ``grid``.

    Central (default): d beta_n/dt = n(n-1)/2 sigma^2 beta_{n-2}, the moments
    of X_t - t. With ``central=False`` the drift term n beta_{n-1} is added,
    giving raw moments E[X_t^n] with beta_1(t) = t.
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 2:
        raise DomainError("moment_recursion needs n_max >= 2")
    sig = _as_sigma(sigma)

    def s2(t):
        with np.errstate(all="ignore"):
            v = float(np.asarray(sig(np.array([t])), dtype=float)[0]) ** 2
        if not math.isfinite(v):
            # RK4 samples sigma at the grid points, t = 0 included
            raise NumericalError(f"sigma^2 is not finite at t={t!r}; the moment ODE needs a bounded rate",
                                 diagnostics={"t": t})
        return v

    ts = grid.points
    h = grid.h
    beta = np.zeros((n_max + 1, len(ts)))
    b = np.zeros(n_max + 1)
    b[0] = 1.0
    beta[:, 0] = b
    for k in range(grid.n_steps):
        t = ts[k]
        sa, sm, sb = s2(t), s2(t + h / 2), s2(t + h)
        k1 = _moment_rhs(b, sa, central)
        k2 = _moment_rhs(b + h / 2 * k1, sm, central)
        k3 = _moment_rhs(b + h / 2 * k2, sm, central)
        k4 = _moment_rhs(b + h * k3, sb, central)
        b = b + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        beta[:, k + 1] = b
    return MomentTable(ts, beta, central)


def mc_central_moments(t, profile, orders, n_paths, seed, sampler="direct", n_steps=None, workers=None):
    """Monte Carlo E[(X_t - t)^n] for each n in ``orders``, with standard errors."""
    draw = phase_time_sampler(t, profile, sampler, n_steps)
    orders = np.asarray(orders)

    def sample(rng, n, j):
        y = draw(rng, n) - t
        return y[:, None] ** orders[None, :]

    return mc_mean(sample, n_paths, seed, workers)


# --- trigonometric expectations ---------------------------------------------

def expect_trig(a, t, profile):
    """(E[cos(a X_t)], E[sin(a X_t)]) = exp(-a^2 lambda/2) (cos at, sin at)."""
    t = float(t)
    if t < 0:
        raise DomainError("expect_trig needs t >= 0")
    damp = math.exp(-0.5 * a * a * lambda_of_t(profile, t))
    return damp * math.cos(a * t), damp * math.sin(a * t)


def mc_expect_trig(a, t, profile, n_paths, seed, sampler="direct", n_steps=None, workers=None):
    """Monte Carlo estimate of ``expect_trig``; mean is ``[cos, sin]``."""
    draw = phase_time_sampler(t, profile, sampler, n_steps)

    def sample(rng, n, j):
        x = a * draw(rng, n)
        return np.column_stack([np.cos(x), np.sin(x)])

    return mc_mean(sample, n_paths, seed, workers)


__all__ = [
    "TimeGrid", "BrownianPath", "PhaseTimeSample", "SeedSpec", "STEPS_PER_UNIT_TIME",
    "sample_brownian_path", "ito_integral", "sample_phase_time", "phase_time_sampler",
    "phase_time_samples", "moment_closed_form", "moment_recursion", "MomentTable",
    "mc_central_moments", "expect_trig", "mc_expect_trig",
]
