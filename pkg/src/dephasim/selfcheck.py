"""Built-in self-check suite run by ``dephasim selfcheck``.

Every check is deterministic for a given master seed; the report contains
no timings so it can be compared byte for byte between runs and worker
counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine, observables, profiles, stochastic
from .montecarlo import SeedSpec


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _moments(seed, workers, moment_fn):
    prof = profiles.markovian(1.0)
    t = 1.0
    lam = profiles.lambda_of_t(prof, t)
    orders = [1, 2, 3, 4, 5, 6]
    est = stochastic.mc_central_moments(t, prof, orders, 100_000, seed.child(0), workers=workers)
    worst = 0.0
    for i, n in enumerate(orders):
        worst = max(worst, abs(est.mean[i] - moment_fn(n, lam)) / est.std_err[i])
    table = stochastic.moment_recursion(6, prof, stochastic.TimeGrid(t, 1000))
    ode_err = max(abs(table.at(n) - moment_fn(n, lam)) for n in range(7))
    ok = worst <= 3.0 and ode_err <= 1e-5
    return CheckResult("moment identities", ok, f"max |mc-closed|/se={worst:.3f}, max |ode-closed|={ode_err:.3e}")


def _erf_identity():
    worst = 0.0
    for z in (0.1, 1.0, 4.0, 25.0):
        lhs, rhs = observables.erf_integral_identity(z)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("erf integral identity", worst <= 1e-8, f"max |quad-closed|={worst:.3e}")


def _engine(seed, workers):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed.master_seed, spawn_key=(999,))))
    hits = total = 0
    case = 0
    for _ in range(3):
        d = int(rng.integers(2, 6))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = a @ a.conj().T
        rho = engine.DensityMatrix(rho / np.trace(rho).real)
        ham = engine.Hamiltonian(rng.uniform(-2, 2, d))
        for prof in profiles.builtin_profiles():
            est = engine.evolve_mc(rho, ham, 1.0, prof, 20_000, seed.child(100 + case), workers=workers)
            exact = engine.evolve_exact(rho, ham, 1.0, prof).entries
            inside = est.within(exact)
            hits += int(inside.sum())
            total += inside.size
            case += 1
    frac = hits / total
    return CheckResult("mc vs exact evolution", frac >= 0.95, f"{hits}/{total} entries within 3 se ({frac:.4f})")


def _pattern(seed, workers):
    pair = observables.PlaneWavePair(1.0, 0.0, 0.5)
    prof = profiles.markovian(1.0)
    worst = 0.0
    for i, (x, t) in enumerate([(0.0, 1.0), (0.7, 0.5), (-1.3, 2.0)]):
        est = observables.mc_pattern(x, t, pair, prof, 50_000, seed.child(200 + i), workers=workers)
        worst = max(worst, abs(est.mean - observables.damped_pattern(x, t, pair, prof)) / est.std_err)
    flat = observables.mc_pattern(0.3, 1.0, observables.PlaneWavePair(1.0, -1.0), prof, 1000,
                                  seed.child(300), workers=workers)
    ok = worst <= 3.0 and flat.std_err == 0.0
    return CheckResult("damped interference", ok, f"max |mc-exact|/se={worst:.3f}, zero-gap se={flat.std_err!r}")


def _entropy():
    packet = observables.GaussianPacket(1.0, 1.0)
    ts = np.linspace(0.0, 20.0, 11)
    ok = True
    worst_gap = 0.0
    for prof in profiles.builtin_profiles():
        vals = [observables.linear_entropy_closed_form(t, packet, prof) for t in ts]
        ok &= vals[0] == 0.0
        ok &= all(0.0 <= v <= 1.0 for v in vals)
        ok &= all(b >= a for a, b in zip(vals, vals[1:]))
        for t in (0.5, 2.0):
            worst_gap = max(worst_gap, abs(observables.linear_entropy_oracle(t, packet, prof)
                                           - observables.linear_entropy_closed_form(t, packet, prof)))
    ok &= worst_gap <= 1e-5
    return CheckResult("linear entropy bounds", bool(ok), f"bounds/monotone ok={bool(ok)}, max |oracle-closed|={worst_gap:.3e}")


def _regimes():
    expected = [profiles.Regime.MARKOVIAN, profiles.Regime.SUBMARKOVIAN,
                profiles.Regime.SUPERMARKOVIAN_I, profiles.Regime.SUPERMARKOVIAN_II]
    got = [profiles.classify_regime(p, horizon=1e3).regime for p in profiles.builtin_profiles()]
    packet = observables.GaussianPacket(1.0, 1.0)
    mk, sub, s1, s2 = (observables.linear_entropy_closed_form(10.0, packet, p)
                       for p in profiles.builtin_profiles(calibrate_at=1.0))
    ordered = s2 >= mk >= s1 >= sub
    ok = got == expected and ordered
    names = ",".join(r.value for r in got)
    return CheckResult("regime taxonomy", ok, f"classes={names}; S(10): II={s2:.6f} M={mk:.6f} I={s1:.6f} Sub={sub:.6f}")


def run_checks(master_seed=0, workers=None, moment_fn=None):
    """Run every check; ``moment_fn`` replaces the closed-form moments (mutation hook)."""
    seed = SeedSpec(master_seed, 0)
    moment_fn = moment_fn or stochastic.moment_closed_form
    return [
        _moments(seed, workers, moment_fn),
        _erf_identity(),
        _engine(seed, workers),
        _pattern(seed, workers),
        _entropy(),
        _regimes(),
    ]


def format_report(results, master_seed):
    width = max(len(r.name) for r in results)
    lines = [f"dephasim selfcheck (master_seed={master_seed})"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


def selfcheck(master_seed=0, workers=None, moment_fn=None):
    """Return ``(exit_code, report)``: 0 if every check passes, else 3."""
    results = run_checks(master_seed, workers, moment_fn)
    report = format_report(results, master_seed)
    return (0 if all(r.passed for r in results) else 3), report
