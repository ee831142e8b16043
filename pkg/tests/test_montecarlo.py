import numpy as np
import pytest

from dephasim import montecarlo
from dephasim.errors import ConfigurationError, DomainError
from dephasim.montecarlo import SeedSpec, chunk_sizes, mc_mean, merge, resolve_workers, summarize


def test_seed_validation():
    with pytest.raises(ConfigurationError):
        SeedSpec(-1)
    with pytest.raises(ConfigurationError):
        SeedSpec(1 << 64)
    with pytest.raises(ConfigurationError):
        SeedSpec(0, -2)
    SeedSpec((1 << 64) - 1, 3)


def test_streams_reproducible_and_distinct():
    a = SeedSpec(7, 0).generator(2).standard_normal(8)
    b = SeedSpec(7, 0).generator(2).standard_normal(8)
    c = SeedSpec(7, 1).generator(2).standard_normal(8)
    d = SeedSpec(8, 0).generator(2).standard_normal(8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_streams_uncorrelated():
    xs = np.array([SeedSpec(1, i).generator().standard_normal(20_000) for i in range(6)])
    corr = np.corrcoef(xs)
    off = corr[~np.eye(6, dtype=bool)]
    assert np.max(np.abs(off)) < 3 / np.sqrt(20_000) * 1.5


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]


def test_merge_equals_direct_statistics():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(1000, 3)) + 1j * rng.normal(size=(1000, 3))
    parts = [summarize(x[:300]), summarize(x[300:750]), summarize(x[750:])]
    acc = parts[0]
    for p in parts[1:]:
        acc = merge(acc, p)
    n, mean, m2 = acc
    np.testing.assert_allclose(mean, x.mean(axis=0), rtol=1e-13)
    direct = (np.abs(x - x.mean(axis=0)) ** 2).sum(axis=0)
    np.testing.assert_allclose(m2, direct, rtol=1e-12)


def test_constant_samples_have_exactly_zero_error():
    est = mc_mean(lambda rng, n, j: np.full(n, 0.1), 10_000, SeedSpec(), chunk=333)
    assert est.mean == 0.1
    assert est.std_err == 0.0


def test_std_err_definition():
    est = mc_mean(lambda rng, n, j: rng.standard_normal(n), 5000, SeedSpec(2), chunk=1000)
    x = np.concatenate([SeedSpec(2).generator(j).standard_normal(1000) for j in range(5)])
    assert est.mean == pytest.approx(x.mean(), rel=1e-12)
    assert est.std_err == pytest.approx(x.std(ddof=1) / np.sqrt(x.size), rel=1e-12)


def test_needs_two_paths():
    with pytest.raises(DomainError):
        mc_mean(lambda rng, n, j: rng.standard_normal(n), 1, SeedSpec())


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_bit_identical_across_workers(workers):
    f = lambda rng, n, j: np.column_stack([rng.standard_normal(n), rng.random(n)])
    ref = mc_mean(f, 50_000, SeedSpec(42), workers=1, chunk=1000)
    got = mc_mean(f, 50_000, SeedSpec(42), workers=workers, chunk=1000)
    assert np.array_equal(ref.mean, got.mean)
    assert np.array_equal(ref.std_err, got.std_err)


def test_worker_env(monkeypatch):
    monkeypatch.setenv("DEPHASIM_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(5) == 5
    monkeypatch.setenv("DEPHASIM_THREADS", "zero")
    with pytest.raises(ConfigurationError):
        resolve_workers()
    monkeypatch.setenv("DEPHASIM_THREADS", "0")
    with pytest.raises(ConfigurationError):
        resolve_workers()


def test_child_streams_distinct():
    s = SeedSpec(3, 2)
    kids = {s.child(i).stream_index for i in range(100)}
    assert len(kids) == 100 and s.stream_index not in kids


def test_estimate_within():
    est = montecarlo.EstimateWithError(np.array([1.0, 2.0]), np.array([0.1, 0.1]), 10)
    assert est.within(np.array([1.25, 2.4])).tolist() == [True, False]
