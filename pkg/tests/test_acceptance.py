"""Acceptance criteria, one test per criterion (sub-items of 5 separately).

Each test carries ``@pytest.mark.acceptance(label)``; conftest prints a
PASS/FAIL line per label at the end of the run. Tolerances, sample sizes and
seeds are fixed here and are not tuned to outcomes.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from dephasim import engine, numerics, observables as ob, profiles, stochastic
from dephasim.montecarlo import SeedSpec
from dephasim.selfcheck import format_report, run_checks

MASTER = 20261019
UNIT = ob.GaussianPacket(1.0, 1.0)
ROOT = Path(__file__).resolve().parent.parent


def _random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return engine.DensityMatrix(rho / np.trace(rho).real).check()


@pytest.mark.acceptance("1")
def test_stochastic_representation():
    rng = np.random.default_rng(MASTER)
    hits = total = 0
    case = 0
    for _ in range(20):
        d = int(rng.integers(1, 9))
        rho0 = _random_state(rng, d)
        ham = engine.Hamiltonian(rng.uniform(-3, 3, d))
        for prof in profiles.builtin_profiles():
            est = engine.evolve_mc(rho0, ham, 1.0, prof, 100_000, SeedSpec(MASTER, case))
            inside = est.within(engine.evolve_exact(rho0, ham, 1.0, prof).entries)
            hits += int(inside.sum())
            total += inside.size
            case += 1
    assert hits / total >= 0.95, f"{hits}/{total}"


@pytest.mark.acceptance("2")
def test_moment_identities():
    t = 1.0
    orders = [1, 2, 3, 4, 5, 6]
    for k, prof in enumerate(profiles.builtin_profiles()):
        lam = prof.lam(t)
        est = stochastic.mc_central_moments(t, prof, orders, 100_000, SeedSpec(MASTER, 100 + k))
        for i, n in enumerate(orders):
            exact = stochastic.moment_closed_form(n, lam)
            assert abs(est.mean[i] - exact) <= 3 * est.std_err[i], (prof.label, n)
        table = stochastic.moment_recursion(6, prof, stochastic.TimeGrid(t, 1000))
        for n in range(7):
            assert abs(table.at(n) - stochastic.moment_closed_form(n, lam)) <= 1e-5, (prof.label, n)


@pytest.mark.acceptance("3")
def test_damped_interference():
    pair = ob.PlaneWavePair(1.0, 0.0, 0.5)
    xs = np.linspace(-3.0, 3.0, 10)
    ts = np.linspace(0.2, 2.0, 10)
    misses = []
    k = 0
    for prof in (profiles.markovian(), profiles.super_markovian_ii()):
        for x in xs:
            for t in ts:
                est = ob.mc_pattern(x, t, pair, prof, 100_000, SeedSpec(MASTER, 200 + k))
                k += 1
                exact = float(ob.damped_pattern(x, t, pair, prof))
                if abs(est.mean - exact) > 3 * est.std_err:
                    misses.append((prof.label, float(x), float(t), (est.mean - exact) / est.std_err))
    flat = ob.mc_pattern(0.5, 1.0, ob.PlaneWavePair(1.0, -1.0), profiles.super_markovian_ii(), 100_000,
                         SeedSpec(MASTER, 199))
    assert flat.std_err == 0.0
    assert not misses, f"{len(misses)}/{k} points outside 3 SE: {misses}"


@pytest.mark.acceptance("4")
def test_trig_expectations():
    prof = profiles.markovian()
    points = [(0.5, 0.5), (1.0, 1.0), (1.0, math.pi), (2.0, 0.3), (0.3, 5.0),
              (1.5, 2.0), (3.0, 0.1), (0.8, 4.0), (2.5, 0.7), (0.1, 10.0)]
    for k, (a, t) in enumerate(points):
        c, s = stochastic.expect_trig(a, t, prof)
        est = stochastic.mc_expect_trig(a, t, prof, 100_000, SeedSpec(MASTER, 300 + k))
        assert abs(est.mean[0] - c) <= 3 * est.std_err[0], (a, t, "cos")
        assert abs(est.mean[1] - s) <= 3 * est.std_err[1], (a, t, "sin")


@pytest.mark.acceptance("5(i)")
def test_entropy_oracle_vs_mc():
    prof = profiles.markovian()
    for k, t in enumerate([0.25, 0.5, 1.0, 2.0, 4.0]):
        oracle = ob.linear_entropy_oracle(t, UNIT, prof)
        est = ob.mc_gaussian_entropy(t, UNIT, prof, ob.MomentumGrid(256), 10_000, SeedSpec(MASTER, 400 + k))
        assert abs(est.mean - oracle) <= 3 * est.std_err + 1e-4, (t, est.mean, oracle, est.std_err)


@pytest.mark.acceptance("5(ii)")
def test_entropy_bounds_and_monotonicity():
    ts = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
    for prof in profiles.builtin_profiles():
        vals = [ob.linear_entropy_oracle(t, UNIT, prof) for t in ts]
        assert vals[0] == 0.0
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(b >= a for a, b in zip(vals, vals[1:])), (prof.label, vals)


@pytest.mark.acceptance("5(iii)")
def test_markovian_entropy_near_one_beyond_scale():
    # read literally: lambda >= 10^3 (4 m s0^2)^-2 with s0 = m = 1
    s0 = m = 1.0
    threshold = 1e3 * (4 * m * s0 ** 2) ** -2
    prof = profiles.markovian()
    pk = ob.GaussianPacket(s0, m)
    for factor in (1.0, 10.0, 100.0):
        t = factor * threshold          # lambda(t) = t
        s = ob.linear_entropy_oracle(t, pk, prof)
        assert s > 0.99, f"S_lin={s:.6f} at lambda={t:g}"


@pytest.mark.acceptance("5(iv)")
def test_submarkovian_saturation():
    prof = profiles.submarkovian()
    s20 = ob.linear_entropy_oracle(20.0, UNIT, prof)
    s40 = ob.linear_entropy_oracle(40.0, UNIT, prof)
    assert abs(s20 - s40) < 1e-4
    assert s40 < 1.0


@pytest.mark.acceptance("6")
def test_regime_taxonomy():
    expected = ["Markovian", "SubMarkovian", "SuperMarkovianI", "SuperMarkovianII"]
    got = [profiles.classify_regime(p, horizon=1e3).regime.value for p in profiles.builtin_profiles()]
    assert got == expected
    mk, sub, s1, s2 = (ob.linear_entropy_oracle(10.0, UNIT, p) for p in profiles.builtin_profiles(calibrate_at=1.0))
    assert s2 >= mk >= s1 >= sub


@pytest.mark.acceptance("7")
def test_unweighted_erf_identity_as_stated():
    # the identity as stated: int_0^pi exp(-z cos^2 th) dth = sqrt(pi/z) erf(sqrt z)
    spec = numerics.QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)
    for z in (0.1, 1.0, 4.0, 25.0):
        lhs = numerics.quad_adaptive(lambda th: np.exp(-z * np.cos(th) ** 2), 0.0, math.pi, spec).value
        rhs = math.sqrt(math.pi / z) * numerics.erf(math.sqrt(z))
        assert abs(lhs - rhs) <= 1e-8, f"z={z}: quadrature {lhs:.12f}, closed form {rhs:.12f}"


@pytest.mark.acceptance("8")
def test_closed_form_reconciled_with_oracle():
    rng = np.random.default_rng(MASTER + 8)
    for _ in range(20):
        s0 = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        m = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
        lam = float(10 ** rng.uniform(-3, 4))
        pk = ob.GaussianPacket(s0, m)
        prof = profiles.markovian(math.sqrt(lam))
        closed = ob.linear_entropy_closed_form(1.0, pk, prof)
        oracle = ob.linear_entropy_oracle(1.0, pk, prof)
        assert abs(closed - oracle) <= 1e-5, (s0, m, lam, closed, oracle)
    assert (ROOT / "docs" / "linear_entropy.md").is_file()


@pytest.mark.acceptance("9")
def test_selfcheck_reproducible():
    reports = []
    for workers in (1, 2, 8):
        for _ in range(2):
            reports.append(format_report(run_checks(MASTER, workers=workers), MASTER))
    assert all(r == reports[0] for r in reports)
