"""Decoherence profiles: noise amplitude sigma(t) and lambda(t) = int_0^t sigma^2.

Four built-in archetypes cover the asymptotic classes of lambda(t):

=================  ==========================  =============================
name               sigma(t)                    lambda(t)
=================  ==========================  =============================
markovian          s0                          s0^2 t
submarkovian       s0 exp(-g t)                s0^2 (1 - exp(-2 g t)) / 2g
super_i            s0 (1 + t)^(-1/4)           2 s0^2 (sqrt(1 + t) - 1)
super_ii           s0 sqrt(t)                  s0^2 t^2 / 2
=================  ==========================  =============================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import expression
from .errors import ClassificationError, DomainError, NumericalError
from .numerics import QuadratureSpec, quad_adaptive, tail_slope

LAMBDA_QUAD = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-14, max_subdivisions=10_000)


@dataclass(frozen=True)
class DecoherenceProfile:
    """Environment description.

    ``sigma`` must accept numpy arrays. ``lambda_closed``, when given, is the
    exact antiderivative of sigma^2 vanishing at 0; otherwise lambda is
    computed by adaptive quadrature.
    """

    sigma: Callable
    label: str = "custom"
    lambda_closed: Optional[Callable] = None
    params: dict = field(default_factory=dict, compare=False)

    def lam(self, t):
        if np.ndim(t):
            return lambda_on_grid(self, t)
        return lambda_of_t(self, t)

    def sigma2(self, t):
        s = np.asarray(self.sigma(t), dtype=float)
        return s * s

    @property
    def pathwise_ok(self):
        """Whether sigma is finite at t = 0, as the Ito sum needs."""
        with np.errstate(all="ignore"):
            s0 = np.asarray(self.sigma(np.array([0.0])), dtype=float)
        return bool(np.all(np.isfinite(s0)))


def lambda_of_t(profile, t, spec=LAMBDA_QUAD):
    """Accumulated noise variance lambda(t) for a scalar t >= 0."""
    t = float(t)
    if t < 0 or math.isnan(t):
        raise DomainError(f"lambda_of_t needs t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if profile.lambda_closed is not None:
        return float(profile.lambda_closed(t))
    try:
        res = quad_adaptive(profile.sigma2, 0.0, t, spec)
    except NumericalError as exc:
        raise NumericalError(
            f"lambda quadrature for profile {profile.label!r} did not converge",
            best_estimate=exc.best_estimate,
            diagnostics={**exc.diagnostics, "t": t},
        ) from None
    return res.value


def lambda_on_grid(profile, ts, spec=LAMBDA_QUAD):
    """lambda at each point of a nondecreasing array of times."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise DomainError("lambda needs t >= 0")
    if profile.lambda_closed is not None:
        out = np.asarray(profile.lambda_closed(ts), dtype=float).copy()
        out[ts == 0] = 0.0
        return out
    if np.any(np.diff(ts) < 0):
        raise DomainError("lambda_on_grid needs nondecreasing times")
    out = np.empty_like(ts)
    acc, prev = 0.0, 0.0
    for i, t in enumerate(ts):
        if t > prev:
            acc += quad_adaptive(profile.sigma2, prev, t, spec).value
            prev = t
        out[i] = acc
    return out


# --- built-ins ------------------------------------------------------------

def markovian(sigma0=1.0):
    s0 = float(sigma0)
    return DecoherenceProfile(
        sigma=lambda t: np.full_like(np.asarray(t, dtype=float), s0),
        lambda_closed=lambda t: s0 * s0 * np.asarray(t, dtype=float),
        label="markovian",
        params={"sigma0": s0},
    )


def submarkovian(sigma0=1.0, gamma=1.0):
    s0, g = float(sigma0), float(gamma)
    if g <= 0:
        raise DomainError("submarkovian profile needs gamma > 0")
    return DecoherenceProfile(
        sigma=lambda t: s0 * np.exp(-g * np.asarray(t, dtype=float)),
        lambda_closed=lambda t: s0 * s0 * -np.expm1(-2 * g * np.asarray(t, dtype=float)) / (2 * g),
        label="submarkovian",
        params={"sigma0": s0, "gamma": g},
    )


def super_markovian_i(sigma0=1.0):
    s0 = float(sigma0)

    def lam(t):
        t = np.asarray(t, dtype=float)
        # 2(sqrt(1+t) - 1) written without cancellation
        return s0 * s0 * 2 * t / (np.sqrt(1 + t) + 1)

    return DecoherenceProfile(
        sigma=lambda t: s0 * (1 + np.asarray(t, dtype=float)) ** -0.25,
        lambda_closed=lam,
        label="super_i",
        params={"sigma0": s0},
    )


def super_markovian_ii(sigma0=1.0):
    s0 = float(sigma0)
    return DecoherenceProfile(
        sigma=lambda t: s0 * np.sqrt(np.asarray(t, dtype=float)),
        lambda_closed=lambda t: 0.5 * s0 * s0 * np.asarray(t, dtype=float) ** 2,
        label="super_ii",
        params={"sigma0": s0},
    )


BUILTINS = {
    "markovian": markovian,
    "submarkovian": submarkovian,
    "super_i": super_markovian_i,
    "super_ii": super_markovian_ii,
}


def builtin_profiles(sigma0=1.0, gamma=1.0, calibrate_at=None):
    """The four archetypes, in the order markovian, sub, super-I, super-II.

    With ``calibrate_at=t_c`` each profile's amplitude is rescaled so that
    lambda(t_c) = 1, which puts all four on a common footing for comparing
    their long-time behaviour.
    """
    profs = [
        markovian(sigma0),
        submarkovian(sigma0, gamma),
        super_markovian_i(sigma0),
        super_markovian_ii(sigma0),
    ]
    if calibrate_at is None:
        return profs
    out = []
    for p in profs:
        scale = 1.0 / math.sqrt(lambda_of_t(p, calibrate_at))
        kwargs = dict(p.params)
        kwargs["sigma0"] = kwargs["sigma0"] * scale
        out.append(BUILTINS[p.label](**kwargs))
    return out


def from_expression(sigma, lambda_=None, label=None):
    """Profile from expression strings in ``t`` (see :mod:`dephasim.expression`)."""
    sig = expression.parse(sigma)
    lam = expression.parse(lambda_) if lambda_ else None
    return DecoherenceProfile(
        sigma=sig,
        lambda_closed=lam,
        label=label or f"sigma={sigma}",
        params={"sigma": sigma, "lambda": lambda_},
    )


def make_profile(name, **params):
    """Look up a built-in by name, or build one from ``sigma=`` expression."""
    if name in BUILTINS:
        return BUILTINS[name](**params)
    if name == "expression":
        return from_expression(params["sigma"], params.get("lambda_"), params.get("label"))
    raise DomainError(f"unknown profile {name!r}; expected one of {sorted(BUILTINS)} or 'expression'")


# --- regime classification ------------------------------------------------

class Regime(enum.Enum):
    MARKOVIAN = "Markovian"
    SUBMARKOVIAN = "SubMarkovian"
    SUPERMARKOVIAN_I = "SuperMarkovianI"
    SUPERMARKOVIAN_II = "SuperMarkovianII"


@dataclass(frozen=True)
class RegimeThresholds:
    sub_below: float = 0.1
    markov_low: float = 0.9
    markov_high: float = 1.1


@dataclass(frozen=True)
class RegimeClass:
    regime: Regime
    fitted_exponent: float
    confidence_note: str


def classify_regime(profile, horizon=1e3, window=0.5, thresholds=RegimeThresholds(), n_points=64):
    """Classify by the log-log slope of lambda over ``[horizon*(1-window), horizon]``.

    slope < sub_below -> SubMarkovian; < markov_low -> SuperMarkovianI;
    <= markov_high -> Markovian; otherwise SuperMarkovianII. Only a finite
    horizon is inspected, so the answer describes the tail of the sampled
    range, not a true limit.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if not 0 < window < 1:
        raise DomainError("window must be a fraction in (0, 1)")
    ts = np.geomspace(horizon * (1 - window), horizon, n_points)
    lam = lambda_on_grid(profile, ts)
    if np.all(lam <= 0):
        raise ClassificationError(f"no decoherence: lambda vanishes on the window for {profile.label!r}")
    if np.any(lam <= 0):
        raise ClassificationError(f"lambda is not strictly positive on the window for {profile.label!r}")
    p = tail_slope(np.column_stack([ts, lam]))
    th = thresholds
    if p < th.sub_below:
        regime = Regime.SUBMARKOVIAN
    elif p < th.markov_low:
        regime = Regime.SUPERMARKOVIAN_I
    elif p <= th.markov_high:
        regime = Regime.MARKOVIAN
    else:
        regime = Regime.SUPERMARKOVIAN_II
    margin = min(abs(p - c) for c in (th.sub_below, th.markov_low, th.markov_high))
    note = f"tail slope {p:.4f} over [{ts[0]:.6g}, {ts[-1]:.6g}], {margin:.4f} from nearest threshold"
    return RegimeClass(regime, p, note)
