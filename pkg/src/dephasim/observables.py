"""Two worked scenarios: damped two-plane-wave fringes and Gaussian-packet
linear entropy.

Plane waves
    I(x, t) = 1 + cos(dk x - w t),  dk = k1 - k2,  w = (k1^2 - k2^2) / 2m.
    Replacing t by X_t and averaging multiplies the cosine by
    exp(-w^2 lambda(t) / 2).

Gaussian packet
    In momentum space the free Hamiltonian is diagonal, E_p = p^2 / 2m, so
    rho(p, p') picks up exp(-lambda (E_p - E_p')^2 / 2) in modulus and

        P(t) = Tr rho^2 = int int |phi(p)|^2 |phi(p')|^2
                          exp(-lambda (p^2 - p'^2)^2 / 4m^2) dp dp',
        |phi(p)|^2 = sqrt(2 s0^2 / pi) exp(-2 s0^2 p^2).

    Rotating to p +/- p' and doing the angular integral reduces this to

        P = c int_0^inf exp(-c y) exp(-y^2/2) I0(y^2/2) dy,  c = 4 m s0^2 / sqrt(lambda),

    which also equals (c / 2 sqrt(pi)) exp(c^2/8) K0(c^2/8). See
    docs/linear_entropy.md for the derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError, NumericalError
from .montecarlo import SeedSpec, EstimateWithError, chunk_sizes, map_chunks, mc_mean
from .numerics import QuadratureSpec, erf, quad2d_adaptive, quad_adaptive
from .profiles import lambda_of_t
from .stochastic import phase_time_sampler

ORACLE_QUAD = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-12)
CLOSED_FORM_QUAD = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)
# exp(-u) < 1e-16 beyond this point, and the kernel never exceeds 1
_LAPLACE_CUTOFF = 16 * math.log(10)


@dataclass(frozen=True)
class PlaneWavePair:
    k1: float
    k2: float
    m: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("PlaneWavePair needs m > 0")
        if not math.isfinite(self.gap):
            raise DomainError("PlaneWavePair energy gap is not finite")

    @property
    def gap(self):
        return (self.k1 ** 2 - self.k2 ** 2) / (2 * self.m)

    @property
    def dk(self):
        return self.k1 - self.k2


@dataclass(frozen=True)
class GaussianPacket:
    sigma0: float
    m: float = 1.0

    def __post_init__(self):
        if not (self.sigma0 > 0 and self.m > 0):
            raise DomainError("GaussianPacket needs sigma0 > 0 and m > 0")

    @property
    def momentum_std(self):
        return 1.0 / (2.0 * self.sigma0)

    def momentum_density(self, p):
        a = 2.0 * self.sigma0 ** 2
        return math.sqrt(a / math.pi) * np.exp(-a * np.asarray(p, dtype=float) ** 2)

    def laplace_rate(self, lam):
        """c = 4 m s0^2 / sqrt(lambda)."""
        return 4.0 * self.m * self.sigma0 ** 2 / math.sqrt(lam)


@dataclass(frozen=True)
class PatternSample:
    x: float
    t: float
    intensity: float


# --- interference ------------------------------------------------------------

def unitary_pattern(x, t, pair):
    return 1.0 + np.cos(pair.dk * np.asarray(x, dtype=float) - pair.gap * np.asarray(t, dtype=float))


def damping_envelope(t, pair, profile):
    return math.exp(-0.5 * pair.gap ** 2 * lambda_of_t(profile, t))


def damped_pattern(x, t, pair, profile):
    if t < 0:
        raise DomainError("damped_pattern needs t >= 0")
    env = damping_envelope(t, pair, profile)
    return 1.0 + env * np.cos(pair.dk * np.asarray(x, dtype=float) - pair.gap * t)


def mc_pattern(x, t, pair, profile, n_paths, seed=SeedSpec(), sampler="direct", n_steps=None, workers=None):
    """Average of the unitary pattern at the random time X_t."""
    if n_paths < 2:
        raise DomainError("mc_pattern needs n_paths >= 2")
    draw = phase_time_sampler(t, profile, sampler, n_steps)
    phase0 = pair.dk * float(x)
    gap = pair.gap

    def sample(rng, n, j):
        return 1.0 + np.cos(phase0 - gap * draw(rng, n))

    return mc_mean(sample, n_paths, seed, workers)


# --- Gaussian packet purity ----------------------------------------------------

def purity_gaussian_oracle(t, packet, profile, spec=ORACLE_QUAD):
    """Purity from the momentum-space double integral (2-D adaptive quadrature).

    Symmetric in p -> -p and p' -> -p', so only the first quadrant is
    integrated; the box edge is where |phi|^2 has fallen by e^-40. The inner
    integral is split around the dephasing ridge p' = p.
    """
    if t < 0:
        raise DomainError("purity needs t >= 0")
    lam = lambda_of_t(profile, t)
    if lam == 0.0:
        return 1.0
    a = 2.0 * packet.sigma0 ** 2
    kappa = lam / (4.0 * packet.m ** 2)
    edge = math.sqrt(40.0 / a)
    norm = a / math.pi

    def f(p, q):
        return norm * np.exp(-a * (p * p + q * q) - kappa * (p * p - q * q) ** 2)

    def ridge(p):
        # exp(-kappa (p - q)^2 (p + q)^2) is a ridge of width ~ 1/(2 p sqrt(kappa)) at q = p
        width = 1.0 / (2.0 * max(p, 1e-300) * math.sqrt(kappa))
        return [p + k * width for k in (-16, -4, -1, 0, 1, 4, 16)]

    try:
        res = quad2d_adaptive(f, (0.0, edge), (0.0, edge), spec, inner_points=ridge)
    except NumericalError as exc:
        raise NumericalError(
            "purity oracle quadrature failed",
            best_estimate=None if exc.best_estimate is None else 4 * exc.best_estimate,
            diagnostics={**exc.diagnostics, "lambda": lam, "box": edge},
        ) from None
    return 4.0 * res.value


def linear_entropy_oracle(t, packet, profile, spec=ORACLE_QUAD):
    return 1.0 - purity_gaussian_oracle(t, packet, profile, spec)


def _laplace_kernel(y):
    # exp(-y^2/2) I0(y^2/2) = (1/pi) int_0^pi exp(-y^2 cos^2 th) dth; equals 1 at y = 0
    return special.i0e(0.5 * np.asarray(y, dtype=float) ** 2)


def linear_entropy_closed_form(t, packet, profile, spec=CLOSED_FORM_QUAD):
    """S_lin = 1 - c int_0^inf exp(-c y) exp(-y^2/2) I0(y^2/2) dy.

    Evaluated after substituting u = c y, i.e. 1 - int_0^U exp(-u) k(u/c) du
    with U where exp(-u) drops below 1e-16. The kernel is bounded by 1 with
    k(0) = 1, so there is no endpoint singularity.
    """
    if t < 0:
        raise DomainError("linear entropy needs t >= 0")
    lam = lambda_of_t(profile, t)
    if lam < 0:
        raise DomainError("lambda(t) must be nonnegative")
    if lam == 0.0:
        return 0.0
    c = packet.laplace_rate(lam)
    res = quad_adaptive(lambda u: np.exp(-u) * _laplace_kernel(u / c), 0.0, _LAPLACE_CUTOFF, spec)
    return min(1.0, max(0.0, 1.0 - res.value))


def purity_gaussian_bessel(lam, packet):
    """Purity in terms of the scaled modified Bessel function K0."""
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    if lam == 0:
        return 1.0
    c = packet.laplace_rate(lam)
    return c / (2.0 * math.sqrt(math.pi)) * float(special.k0e(c * c / 8.0))


def linear_entropy_erf_form(t, packet, profile, prefactor=1.0 / math.sqrt(16 * math.pi), spec=CLOSED_FORM_QUAD):
    """1 - prefactor * c int_0^inf exp(-c y) erf(y) / y dy.

    An erf-kernel variant of the closed form, kept for comparison only. It is
    what the angular integral would give if int_0^pi exp(-z cos^2) were
    sqrt(pi/z) erf(sqrt z); it is not. With the natural prefactor 1/sqrt(pi)
    the small-lambda limit is 1 - 2/pi instead of 0, and no constant prefactor
    matches the true purity at both ends (see tests/test_observables.py).
    Below y = 1e-6 the integrand uses its limit 2/sqrt(pi).
    """
    lam = lambda_of_t(profile, t)
    if lam < 0:
        raise DomainError("lambda(t) must be nonnegative")
    if lam == 0.0:
        return 1.0 - prefactor * 2.0 / math.sqrt(math.pi)
    c = packet.laplace_rate(lam)
    two_over_sqrt_pi = 2.0 / math.sqrt(math.pi)

    def g(u):
        y = u / c
        safe = np.where(y < 1e-6, 1.0, y)
        return np.exp(-u) * np.where(y < 1e-6, two_over_sqrt_pi, erf(safe) / safe)

    res = quad_adaptive(g, 0.0, _LAPLACE_CUTOFF, spec)
    # substitution u = c y turned c dy / y into du / y
    return 1.0 - prefactor * res.value


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform momentum grid ``[-half_width, half_width]``.

    ``half_width=None`` means 8 momentum standard deviations of the packet.
    """

    n_points: int = 256
    half_width: float = None

    def points(self, packet):
        if self.n_points < 3:
            raise ConfigurationError("momentum grid needs at least 3 points")
        width = self.half_width if self.half_width is not None else 8.0 * packet.momentum_std
        if width < 6.0 * packet.momentum_std:
            raise ConfigurationError(
                f"momentum grid half-width {width:.4g} covers less than 6 standard deviations "
                f"({6.0 * packet.momentum_std:.4g})"
            )
        return np.linspace(-width, width, self.n_points)


def _grid_setup(packet, p_grid):
    p = p_grid.points(packet)
    w = np.full(p.size, p[1] - p[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    dens = packet.momentum_density(p)
    dens = dens / np.sum(w * dens)
    return p, w, dens


def grid_purity_exact(t, packet, profile, p_grid=MomentumGrid()):
    """Trapezoid purity of the exactly dephased state on the momentum grid.

    The difference from :func:`purity_gaussian_oracle` is the discretization
    error of the grid alone.
    """
    p, w, dens = _grid_setup(packet, p_grid)
    e = p * p / (2.0 * packet.m)
    lam = lambda_of_t(profile, t)
    wd = w * dens
    gap = e[:, None] - e[None, :]
    return float(wd @ np.exp(-lam * gap * gap) @ wd)


def mc_gaussian_entropy(t, packet, profile, p_grid=MomentumGrid(), n_paths=10_000, seed=SeedSpec(),
                        sampler="direct", n_steps=None, workers=None, chunk=512):
    """Linear entropy from Monte Carlo evolution of the packet on a momentum grid.

    Each path applies phases exp(-i E_p X_t) to the discretized state; the
    path-averaged rho(p, p') is squared and summed with trapezoid weights.
    |mean|^2 is biased by the sampling variance, so the unbiased pair estimate
    (|sum z|^2 - sum |z|^2) / (n (n - 1)) is used instead; the standard error
    is a delete-one-chunk jackknife.
    """
    if n_paths < 2:
        raise DomainError("mc_gaussian_entropy needs n_paths >= 2")
    if t < 0:
        raise DomainError("mc_gaussian_entropy needs t >= 0")
    p, w, dens = _grid_setup(packet, p_grid)
    e = p * p / (2.0 * packet.m)
    draw = phase_time_sampler(t, profile, sampler, n_steps)
    wd = w * dens

    def chunk_sum(rng, n, j):
        v = np.exp(-1j * np.outer(draw(rng, n), e))
        return v.T @ v.conj()

    sums = map_chunks(chunk_sum, n_paths, seed, workers, chunk)
    sizes = chunk_sizes(n_paths, chunk)

    def purity_from(s, n):
        pair = (np.abs(s) ** 2 - n) / (n * (n - 1.0))
        return float(wd @ pair @ wd)

    total = sums[0].copy()
    for s in sums[1:]:
        total += s
    p_hat = purity_from(total, n_paths)
    g = len(sums)
    if g >= 2:
        loo = np.array([purity_from(total - s, n_paths - k) for s, k in zip(sums, sizes)])
        se = math.sqrt((g - 1) / g * float(np.sum((loo - loo.mean()) ** 2)))
    else:
        se = 0.0
    return EstimateWithError(mean=1.0 - p_hat, std_err=se, n_paths=n_paths)


# --- integral identity used to validate erf ----------------------------------

def erf_integral_identity(z, spec=QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)):
    """Both sides of int_0^pi exp(-z cos^2 th) sin th dth = sqrt(pi/z) erf(sqrt z).

    Returns ``(quadrature, closed_form)``. The identity follows from
    u = cos th; it checks :func:`dephasim.numerics.erf` against quadrature.
    """
    if not z > 0:
        raise DomainError("erf_integral_identity needs z > 0")
    lhs = quad_adaptive(lambda th: np.exp(-z * np.cos(th) ** 2) * np.sin(th), 0.0, math.pi, spec).value
    rhs = math.sqrt(math.pi / z) * erf(math.sqrt(z))
    return lhs, rhs
