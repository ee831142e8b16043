"""Density-matrix evolution under the phase-damping master equation

    d rho/dt = -i [H, rho] - (lambda'(t) / 2) [H, [H, rho]],

worked entirely in the eigenbasis of H. There the equation decouples
entrywise into

    d rho_mn/dt = (-i w_mn - lambda'(t) w_mn^2 / 2) rho_mn,   w_mn = E_m - E_n,

so rho_mn(t) = rho_mn(0) exp(-i w_mn t) exp(-lambda(t) w_mn^2 / 2). The
Monte Carlo route replaces t by the random phase time X_t in the unitary
solution and averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .montecarlo import SeedSpec, mc_mean
from .profiles import lambda_of_t
from .stochastic import phase_time_sampler

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10


@dataclass(frozen=True)
class Hamiltonian:
    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).reshape(-1)
        if e.size < 1:
            raise DomainError("Hamiltonian needs at least one energy")
        if not np.all(np.isfinite(e)):
            raise DomainError("Hamiltonian energies must be finite")
        object.__setattr__(self, "energies", e)

    @property
    def dim(self):
        return self.energies.size

    def gaps(self):
        e = self.energies
        return e[:, None] - e[None, :]

    def matrix(self):
        return np.diag(self.energies).astype(complex)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DomainError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    def check(self, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, positivity_tol=POSITIVITY_TOL):
        """Raise DomainError unless Hermitian, unit trace and positive semidefinite."""
        m = self.entries
        herm = np.max(np.abs(m - m.conj().T))
        if herm > hermitian_tol:
            raise DomainError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1) > trace_tol:
            raise DomainError(f"density matrix trace is {tr:.15g}, expected 1")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
        if lo < positivity_tol:
            raise DomainError(f"density matrix has negative eigenvalue {lo:.3g}")
        return self

    @classmethod
    def pure(cls, psi):
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d):
        return cls(np.eye(d) / d)


def _check_dims(rho, H):
    if rho.dim != H.dim:
        raise DomainError(f"dimension mismatch: state is {rho.dim}, Hamiltonian is {H.dim}")


def evolve_exact(rho0, H, t, profile):
    """Closed-form solution at time t (eigenbasis of H)."""
    _check_dims(rho0, H)
    if t < 0:
        raise DomainError("evolve_exact needs t >= 0")
    w = H.gaps()
    lam = lambda_of_t(profile, t)
    factor = np.exp(-1j * w * t) * np.exp(-0.5 * lam * w * w)
    return DensityMatrix(rho0.entries * factor)


def evolve_mc(rho0, H, t, profile, n_paths, seed=SeedSpec(), sampler="direct", n_steps=None, workers=None):
    """Average of exp(-iH X_t) rho0 exp(iH X_t) over phase-time samples.

    The random unitary is diagonal here, so each sample costs O(d^2).
    """
    _check_dims(rho0, H)
    if n_paths < 2:
        raise DomainError("evolve_mc needs n_paths >= 2 for a standard error")
    if t < 0:
        raise DomainError("evolve_mc needs t >= 0")
    draw = phase_time_sampler(t, profile, sampler, n_steps)
    w = H.gaps().reshape(-1)
    r0 = rho0.entries.reshape(-1)
    d = rho0.dim

    def sample(rng, n, j):
        x = draw(rng, n)
        return r0[None, :] * np.exp(-1j * np.outer(x, w))

    est = mc_mean(sample, n_paths, seed, workers)
    est.mean = est.mean.reshape(d, d)
    est.std_err = est.std_err.reshape(d, d)
    return est


def unitary_evolve(rho0, H, t):
    """exp(-iHt) rho0 exp(iHt) as diagonal phases."""
    _check_dims(rho0, H)
    return DensityMatrix(rho0.entries * np.exp(-1j * H.gaps() * t))


def master_equation_rhs(rho, H, lambda_dot):
    """Right-hand side -i[H, rho] - (lambda_dot/2)[H, [H, rho]] with dense H."""
    h = H.matrix()
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    comm = h @ m - m @ h
    double = h @ comm - comm @ h
    return -1j * comm - 0.5 * lambda_dot * double


def purity(rho):
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.sum(np.abs(m) ** 2))


def linear_entropy(rho):
    return 1.0 - purity(rho)


# --- plain-text matrix files --------------------------------------------------
# First line: d. Then d rows of d comma-separated complex entries "a+bi".

def format_complex(z):
    z = complex(z)
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


def parse_complex(text):
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigurationError("empty matrix entry")
    if s.endswith("i"):
        s = s[:-1] + "j"
        if s in ("j", "+j", "-j"):
            s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        raise ConfigurationError(f"cannot parse complex entry {text!r}") from None


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ConfigurationError(f"{path}: empty matrix file")
    try:
        d = int(lines[0])
    except ValueError:
        raise ConfigurationError(f"{path}: first line must be the dimension") from None
    rows = lines[1:]
    if d < 1 or len(rows) != d:
        raise ConfigurationError(f"{path}: expected {d} rows, found {len(rows)}")
    out = np.empty((d, d), dtype=complex)
    for i, row in enumerate(rows):
        cells = row.split(",")
        if len(cells) != d:
            raise ConfigurationError(f"{path}: row {i + 1} has {len(cells)} entries, expected {d}")
        out[i] = [parse_complex(c) for c in cells]
    return out


def write_matrix(path, matrix):
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{m.shape[0]}\n")
        for row in m:
            fh.write(",".join(format_complex(z) for z in row) + "\n")


def read_density_matrix(path):
    try:
        return DensityMatrix(read_matrix(path)).check()
    except DomainError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def read_hamiltonian(path):
    """Hamiltonian file in the matrix format; must be diagonal (eigenbasis)."""
    m = read_matrix(path)
    off = m - np.diag(np.diag(m))
    if np.any(off != 0):
        raise ConfigurationError(f"{path}: Hamiltonian must be diagonal in the working basis")
    if np.any(np.diag(m).imag != 0):
        raise ConfigurationError(f"{path}: Hamiltonian energies must be real")
    return Hamiltonian(np.diag(m).real)
