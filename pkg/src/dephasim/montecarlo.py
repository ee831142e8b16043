"""Reproducible parallel Monte Carlo plumbing.

Random streams
--------------
A :class:`SeedSpec` ``(master_seed, stream_index)`` is turned into a numpy
``SeedSequence(master_seed, spawn_key=(stream_index, *sub))`` which keys a
Philox-4x64 counter-based bit generator. Normal variates come from
``Generator.standard_normal`` (numpy's 256-layer ziggurat on 64-bit
draws). Both algorithms are platform independent, so a fixed seed gives the
same numbers on every machine running the same numpy stream version.

Chunking
--------
An ensemble of ``n`` paths is cut into fixed chunks of :data:`CHUNK_SIZE`
paths; chunk ``j`` draws from sub-stream ``j``. Chunks may run on any
number of threads. Their (count, mean, M2) summaries are merged strictly in
chunk order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

CHUNK_SIZE = 4096
_U64 = 1 << 64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        if not (isinstance(self.master_seed, (int, np.integer)) and 0 <= self.master_seed < _U64):
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        if not (isinstance(self.stream_index, (int, np.integer)) and self.stream_index >= 0):
            raise ConfigurationError("stream_index must be a nonnegative integer")

    def generator(self, *sub):
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_index), *map(int, sub)))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index):
        """A distinct stream for an independent sub-task (e.g. a grid point)."""
        ss_index = (int(self.stream_index) << 20) + int(index) + 1
        return SeedSpec(self.master_seed, ss_index)


@dataclass
class EstimateWithError:
    """Monte Carlo mean with entrywise standard error sd / sqrt(n)."""

    mean: object
    std_err: object
    n_paths: int

    def within(self, exact, n_se=3.0):
        """Boolean (array) of |mean - exact| <= n_se * std_err."""
        return np.abs(np.asarray(self.mean) - np.asarray(exact)) <= n_se * np.asarray(self.std_err)


def resolve_workers(workers=None):
    if workers is None:
        env = os.environ.get("DEPHASIM_THREADS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigurationError(f"DEPHASIM_THREADS must be an integer, got {env!r}") from None
        else:
            workers = min(8, os.cpu_count() or 1)
    if workers < 1:
        raise ConfigurationError("worker count must be >= 1")
    return workers


def chunk_sizes(n_paths, chunk=CHUNK_SIZE):
    full, rem = divmod(n_paths, chunk)
    return [chunk] * full + ([rem] if rem else [])


def map_chunks(fn, n_paths, seed, workers=None, chunk=CHUNK_SIZE):
    """Run ``fn(rng, n, j)`` for every chunk ``j``; results in chunk order."""
    sizes = chunk_sizes(n_paths, chunk)
    jobs = [(seed.generator(j), n, j) for j, n in enumerate(sizes)]
    workers = resolve_workers(workers)
    if workers == 1 or len(jobs) == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# --- streaming moments ------------------------------------------------------

def _summary_real(x):
    n = x.shape[0]
    mean = x.mean(axis=0)
    m2 = ((x - mean) ** 2).sum(axis=0)
    const = np.ptp(x, axis=0) == 0
    if np.any(const):
        # keep constant columns exact: their mean is the value, M2 is zero
        mean = np.where(const, x[0], mean)
        m2 = np.where(const, 0.0, m2)
    return n, mean, m2


def summarize(samples):
    """(n, mean, M2) of samples along axis 0; complex parts handled separately."""
    x = np.asarray(samples)
    if np.iscomplexobj(x):
        n, mr, m2r = _summary_real(x.real)
        _, mi, m2i = _summary_real(x.imag)
        return n, mr + 1j * mi, m2r + m2i
    return _summary_real(x.astype(float, copy=False))


def merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    m2 = m2a + m2b + np.abs(delta) ** 2 * (na * nb / n)
    return n, mean, m2


def finalize(summary):
    n, mean, m2 = summary
    if n < 2:
        raise DomainError("need at least 2 samples for a standard error")
    var = m2 / (n - 1)
    return EstimateWithError(mean=mean, std_err=np.sqrt(var / n), n_paths=n)


def mc_mean(sample_fn, n_paths, seed, workers=None, chunk=CHUNK_SIZE):
    """Mean and standard error of ``sample_fn(rng, n, j)`` over ``n_paths`` draws.

    ``sample_fn`` returns an array whose leading axis has length ``n``.
    """
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2 to estimate a standard error")
    parts = map_chunks(lambda rng, n, j: summarize(sample_fn(rng, n, j)), n_paths, seed, workers, chunk)
    acc = parts[0]
    for part in parts[1:]:
        acc = merge(acc, part)
    est = finalize(acc)
    if np.ndim(est.mean) == 0:
        mean = est.mean
        est.mean = complex(mean) if np.iscomplexobj(mean) else float(mean)
        est.std_err = float(est.std_err)
    return est
