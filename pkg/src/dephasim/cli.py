"""Command-line scenario runner.

    dephasim <pattern|entropy|evolve|classify|moments|selfcheck> [--config FILE]
             [--set section.key=value ...] [--seed N] [--paths N]
             [--out CSV] [--plot SVG] [--quiet]

Exit codes: 0 success, 1 configuration error, 2 numerical error,
3 self-check failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import sys

import numpy as np

from . import engine, observables, profiles, stochastic, svg
from .errors import ClassificationError, ConfigurationError, DomainError, NumericalError
from .montecarlo import SeedSpec
from .selfcheck import selfcheck

SCENARIOS = ("pattern", "entropy", "evolve", "classify", "moments", "selfcheck")
REQUIRED = {
    "pattern": ("profile", "grid", "mc", "physics", "output"),
    "entropy": ("profile", "grid", "mc", "physics", "output"),
    "evolve": ("profile", "grid", "mc", "physics", "output"),
    "classify": ("profile", "grid", "output"),
    "moments": ("profile", "grid", "mc", "physics", "output"),
    "selfcheck": (),
}
CSV_COLUMNS = {
    "pattern": ["x", "t", "intensity_exact", "intensity_mc", "std_err"],
    "entropy": ["t", "lambda", "s_lin_oracle", "s_lin_eq7", "s_lin_mc", "std_err"],
    "evolve": ["t", "row", "col", "re_exact", "im_exact", "re_mc", "im_mc", "std_err"],
    "classify": ["profile", "fitted_exponent", "regime"],
    "moments": ["n", "t", "beta_closed", "beta_ode", "beta_mc", "std_err"],
}


class Config:
    """Typed accessors over a ConfigParser with section-qualified errors."""

    def __init__(self, parser, base_dir="."):
        self.parser = parser
        self.base_dir = base_dir

    def has(self, section):
        return self.parser.has_section(section)

    def _raw(self, section, key, default):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        if default is _MISSING:
            raise ConfigurationError(f"missing required key [{section}] {key}")
        return default

    def str(self, section, key, default=None):
        v = self._raw(section, key, default if default is not None else _MISSING)
        return v.strip() if isinstance(v, str) else v

    def float(self, section, key, default=None, positive=False, nonneg=False):
        v = self._raw(section, key, _MISSING if default is None else default)
        try:
            out = float(v)
        except (TypeError, ValueError):
            raise ConfigurationError(f"[{section}] {key} must be a number, got {v!r}") from None
        if not math.isfinite(out):
            raise ConfigurationError(f"[{section}] {key} must be finite")
        if positive and out <= 0:
            raise ConfigurationError(f"[{section}] {key} must be positive")
        if nonneg and out < 0:
            raise ConfigurationError(f"[{section}] {key} must be nonnegative")
        return out

    def int(self, section, key, default=None, minimum=None):
        v = self._raw(section, key, _MISSING if default is None else default)
        try:
            out = int(str(v).strip())
        except ValueError:
            raise ConfigurationError(f"[{section}] {key} must be an integer, got {v!r}") from None
        if minimum is not None and out < minimum:
            raise ConfigurationError(f"[{section}] {key} must be >= {minimum}")
        return out

    def floats(self, section, key, count=None):
        text = self.str(section, key)
        try:
            vals = [float(p) for p in text.split(",")]
        except ValueError:
            raise ConfigurationError(f"[{section}] {key} must be comma-separated numbers") from None
        if count is not None and len(vals) != count:
            raise ConfigurationError(f"[{section}] {key} needs {count} values")
        return vals

    def path(self, section, key):
        """Input file path; relative paths are taken from the config file's directory."""
        return os.path.join(self.base_dir, os.path.expanduser(self.str(section, key)))


_MISSING = object()


def load_config(path, overrides=()):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse config {path}: {exc}") from None
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigurationError(f"override {item!r} must look like section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.strip(), value.strip())
    return Config(parser, os.path.dirname(os.path.abspath(path)) if path is not None else os.getcwd())


# --- config -> domain objects -------------------------------------------------

def build_profile(cfg):
    name = cfg.str("profile", "name")
    if name == "expression":
        return profiles.from_expression(cfg.str("profile", "sigma"), cfg.str("profile", "lambda", "") or None,
                                        cfg.str("profile", "label", "") or None)
    if name not in profiles.BUILTINS:
        raise ConfigurationError(f"[profile] name {name!r} is not one of {sorted(profiles.BUILTINS)} or 'expression'")
    params = {"sigma0": cfg.float("profile", "sigma0", 1.0, nonneg=True)}
    if name == "submarkovian":
        params["gamma"] = cfg.float("profile", "gamma", 1.0, positive=True)
    return profiles.BUILTINS[name](**params)


def _times(cfg):
    t_max = cfg.float("grid", "t_max", positive=True)
    n = cfg.int("grid", "n_time_samples", minimum=1)
    return np.linspace(0.0, t_max, n) if n > 1 else np.array([t_max])


def _mc(cfg):
    n_paths = cfg.int("mc", "n_paths", minimum=2)
    seed = cfg.int("mc", "master_seed", 0, minimum=0)
    if seed >= 1 << 64:
        raise ConfigurationError("[mc] master_seed must fit in 64 bits")
    steps = cfg.int("mc", "n_steps_per_unit_time", stochastic.STEPS_PER_UNIT_TIME, minimum=1)
    sampler = cfg.str("mc", "sampler", "direct")
    if sampler not in ("direct", "pathwise"):
        raise ConfigurationError("[mc] sampler must be 'direct' or 'pathwise'")
    return n_paths, SeedSpec(seed, 0), steps, sampler


def _steps(t, per_unit):
    return max(1, math.ceil(per_unit * t))


def _num(v):
    return repr(float(v))


# --- scenarios ------------------------------------------------------------------

def run_pattern(cfg, workers):
    prof = build_profile(cfg)
    pair = observables.PlaneWavePair(cfg.float("physics", "k1"), cfg.float("physics", "k2"),
                                     cfg.float("physics", "m", positive=True))
    x_lo, x_hi = cfg.floats("grid", "x_range", 2)
    nx = cfg.int("grid", "n_x_samples", minimum=1)
    xs = np.linspace(x_lo, x_hi, nx) if nx > 1 else np.array([x_lo])
    ts = _times(cfg)
    n_paths, seed, per_unit, sampler = _mc(cfg)
    rows = []
    idx = 0
    for t in ts:
        for x in xs:
            exact = float(observables.damped_pattern(x, t, pair, prof))
            est = observables.mc_pattern(x, t, pair, prof, n_paths, seed.child(idx), sampler,
                                         _steps(t, per_unit), workers)
            rows.append([_num(x), _num(t), _num(exact), _num(est.mean), _num(est.std_err)])
            idx += 1
    series = []
    for t in ts[-min(len(ts), 5):]:
        series.append((f"t={t:.3g}", xs, observables.damped_pattern(xs, t, pair, prof)))
    plot = dict(series=series, title="Damped interference pattern", xlabel="x", ylabel="intensity")
    return rows, plot, f"pattern: {len(rows)} points, gap={pair.gap:.6g}"


def run_entropy(cfg, workers):
    prof = build_profile(cfg)
    packet = observables.GaussianPacket(cfg.float("physics", "sigma0", positive=True),
                                        cfg.float("physics", "m", positive=True))
    half_width = cfg.float("physics", "grid_half_width", 0.0, nonneg=True) or None
    grid = observables.MomentumGrid(cfg.int("physics", "n_momentum", 256, minimum=3), half_width)
    grid.points(packet)  # coverage check before any work
    ts = _times(cfg)
    n_paths, seed, per_unit, sampler = _mc(cfg)
    rows, s_or, s_cf, s_mc = [], [], [], []
    for i, t in enumerate(ts):
        lam = profiles.lambda_of_t(prof, t)
        oracle = observables.linear_entropy_oracle(t, packet, prof)
        closed = observables.linear_entropy_closed_form(t, packet, prof)
        est = observables.mc_gaussian_entropy(t, packet, prof, grid, n_paths, seed.child(i), sampler,
                                              _steps(t, per_unit), workers)
        rows.append([_num(t), _num(lam), _num(oracle), _num(closed), _num(est.mean), _num(est.std_err)])
        s_or.append(oracle)
        s_cf.append(closed)
        s_mc.append(est.mean)
    plot = dict(series=[("oracle", ts, s_or), ("closed form", ts, s_cf), ("monte carlo", ts, s_mc)],
                title=f"Linear entropy ({prof.label})", xlabel="t", ylabel="S_lin")
    return rows, plot, f"entropy: {len(rows)} times, final S_lin={s_or[-1]:.6g}"


def run_evolve(cfg, workers):
    prof = build_profile(cfg)
    if cfg.parser.has_option("physics", "hamiltonian"):
        ham = engine.read_hamiltonian(cfg.path("physics", "hamiltonian"))
    else:
        ham = engine.Hamiltonian(cfg.floats("physics", "energies"))
    rho0 = engine.read_density_matrix(cfg.path("physics", "rho0"))
    if rho0.dim != ham.dim:
        raise ConfigurationError(f"rho0 has dimension {rho0.dim} but the Hamiltonian has {ham.dim}")
    ts = _times(cfg)
    n_paths, seed, per_unit, sampler = _mc(cfg)
    rows = []
    purities = []
    for i, t in enumerate(ts):
        exact = engine.evolve_exact(rho0, ham, t, prof).entries
        est = engine.evolve_mc(rho0, ham, t, prof, n_paths, seed.child(i), sampler, _steps(t, per_unit), workers)
        purities.append(engine.purity(exact))
        for r in range(ham.dim):
            for c in range(ham.dim):
                rows.append([_num(t), str(r), str(c), _num(exact[r, c].real), _num(exact[r, c].imag),
                             _num(est.mean[r, c].real), _num(est.mean[r, c].imag), _num(est.std_err[r, c])])
    rho_out = cfg.str("output", "rho_path", "")
    if rho_out:
        engine.write_matrix(rho_out, engine.evolve_exact(rho0, ham, ts[-1], prof).entries)
    plot = dict(series=[("purity", ts, purities)], title="Purity under dephasing", xlabel="t", ylabel="Tr rho^2")
    return rows, plot, f"evolve: d={ham.dim}, {len(ts)} times, final purity={purities[-1]:.6g}"


def run_classify(cfg, workers):
    name = cfg.str("profile", "name")
    if name == "all":
        profs = profiles.builtin_profiles(cfg.float("profile", "sigma0", 1.0, positive=True),
                                          cfg.float("profile", "gamma", 1.0, positive=True))
    else:
        profs = [build_profile(cfg)]
    horizon = cfg.float("grid", "t_max", positive=True)
    window = cfg.float("grid", "window", 0.5, positive=True)
    thresholds = profiles.RegimeThresholds(
        cfg.float("grid", "sub_below", 0.1), cfg.float("grid", "markov_low", 0.9),
        cfg.float("grid", "markov_high", 1.1))
    rows, series = [], []
    ts = np.geomspace(horizon * 1e-3, horizon, 200)
    for p in profs:
        cls = profiles.classify_regime(p, horizon, window, thresholds)
        rows.append([p.label, _num(cls.fitted_exponent), cls.regime.value])
        series.append((p.label, np.log10(ts), np.log10(np.maximum(profiles.lambda_on_grid(p, ts), 1e-300))))
    plot = dict(series=series, title="Decoherence functions", xlabel="log10 t", ylabel="log10 lambda")
    return rows, plot, "classify: " + ", ".join(f"{r[0]}={r[2]}" for r in rows)


def run_moments(cfg, workers):
    prof = build_profile(cfg)
    n_max = cfg.int("physics", "n_max", 6, minimum=2)
    t_max = cfg.float("grid", "t_max", positive=True)
    n_t = cfg.int("grid", "n_time_samples", minimum=2)
    n_paths, seed, per_unit, sampler = _mc(cfg)
    per_sample = max(1, math.ceil(per_unit * t_max / (n_t - 1)))
    grid = stochastic.TimeGrid(t_max, per_sample * (n_t - 1))
    table = stochastic.moment_recursion(n_max, prof, grid)
    orders = list(range(n_max + 1))
    rows, series = [], {n: [] for n in orders}
    for i in range(n_t):
        k = i * per_sample
        t = float(grid.points[k])
        lam = profiles.lambda_of_t(prof, t)
        est = stochastic.mc_central_moments(t, prof, orders, n_paths, seed.child(i), sampler,
                                            _steps(t, per_unit), workers)
        for j, n in enumerate(orders):
            closed = stochastic.moment_closed_form(n, lam)
            series[n].append(closed)
            rows.append([str(n), _num(t), _num(closed), _num(table.beta[n, k]), _num(est.mean[j]),
                         _num(est.std_err[j])])
    ts = grid.points[::per_sample]
    plot = dict(series=[(f"n={n}", ts, series[n]) for n in orders if n % 2 == 0 and n > 0],
                title="Central moments of the phase time", xlabel="t", ylabel="beta_n")
    return rows, plot, f"moments: n<= {n_max}, {n_t} times"


RUNNERS = {
    "pattern": run_pattern,
    "entropy": run_entropy,
    "evolve": run_evolve,
    "classify": run_classify,
    "moments": run_moments,
}


def render_csv(scenario, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS[scenario])
    writer.writerows(rows)
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors (exit 1); 2 is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="dephasim", description="Phase-damping simulations and self-checks.")
    ap.add_argument("scenario", choices=SCENARIOS)
    ap.add_argument("--config", help="INI-style scenario config")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")
    ap.add_argument("--seed", type=int, help="master seed (mc.master_seed)")
    ap.add_argument("--paths", type=int, help="Monte Carlo paths (mc.n_paths)")
    ap.add_argument("--out", help="CSV output path (output.csv_path); report path for selfcheck")
    ap.add_argument("--plot", help="SVG plot path (output.plot_path)")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return ap


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run(argv=None):
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"mc.master_seed={args.seed}")
    if args.paths is not None:
        overrides.append(f"mc.n_paths={args.paths}")
    if args.out is not None:
        overrides.append(f"output.csv_path={args.out}")
    if args.plot is not None:
        overrides.append(f"output.plot_path={args.plot}")
    try:
        cfg = load_config(args.config, overrides)
        declared = cfg.str("run", "scenario", "") if cfg.has("run") else ""
        if declared and declared != args.scenario:
            raise ConfigurationError(f"config declares scenario {declared!r} but {args.scenario!r} was requested")
        missing = [s for s in REQUIRED[args.scenario] if not cfg.has(s)]
        if missing:
            raise ConfigurationError(f"missing required config section(s): {', '.join('[' + s + ']' for s in missing)}")

        if args.scenario == "selfcheck":
            seed = cfg.int("mc", "master_seed", 0, minimum=0) if cfg.has("mc") else 0
            code, report = selfcheck(seed)
            out = cfg.str("output", "csv_path", "") if cfg.has("output") else ""
            if out:
                _write(out, report)
            sys.stdout.write(report)
            return code

        csv_path = cfg.str("output", "csv_path")
        plot_path = cfg.str("output", "plot_path", "")
        rows, plot, summary = RUNNERS[args.scenario](cfg, None)
        text = render_csv(args.scenario, rows)
        # write only after the scenario completed
        _write(csv_path, text)
        if plot_path:
            svg.write_chart(plot_path, **plot)
        if not args.quiet:
            print(f"{summary}; wrote {csv_path}" + (f" and {plot_path}" if plot_path else ""))
        return 0
    except (ConfigurationError, DomainError, ClassificationError) as exc:
        print(f"dephasim: configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"dephasim: numerical error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
