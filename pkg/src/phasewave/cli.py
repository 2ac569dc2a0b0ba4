"""Scenario front end: TOML config in, CSV (and optional SVG) artifacts out.

One config file names one scenario and pins every physical and numerical
parameter.  Runs are deterministic: identical config and seed give
byte-identical CSVs and SVGs regardless of worker-thread count, so
artifacts can be diffed across machines.  Exit codes: 0 success, 1 a
check failed under --check (or an acceptance row failed), 2 bad config,
3 a runtime guard tripped mid-scenario.
"""
from __future__ import annotations

import argparse
import os
import re
import sys
import warnings
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import _fft, io
from .errors import ConfigurationError, PhasewaveError, ResolutionWarning
from .fokkerplanck import (
    GaussianCloud,
    ThermalParams,
    damped_action_step,
    fp_step,
    langevin_ensemble,
    measure_wave_speed,
    smoluchowski_step,
    thermal_sound_evolve,
)
from .grid import Grid1D, ParticleParams, PhaseSpaceField, moments
from .liouville import (
    ActionState,
    Potential,
    coherence_defect,
    evolve_action_wave,
    liouville_step,
)
from .variational import hamiltonian_functional, ramp_split
from .wigner import WaveFunction, glauber_state, quartic_residual, tdse_step, wigner_transform

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SCENARIOS = (
    "action_wave",
    "glauber_liouville",
    "tdse_vs_liouville",
    "quartic_correction",
    "fokker_planck_vs_langevin",
    "thermal_sound",
    "smoluchowski",
    "modified_hj",
    "variational_checks",
)

_POTENTIAL_COEFFS = {
    "free": (),
    "uniform": ("g",),
    "harmonic": ("omega",),
    "quartic": ("c2", "c3", "c4"),
    "box": ("L",),
}

_GRID_KEYS = {"x_min": float, "x_max": float, "n_x": int, "p_max": float, "n_p": int}
_PHYSICS_KEYS = {
    "m": float,
    "sigma": float,
    "potential": str,
    "g": float,
    "omega": float,
    "c2": float,
    "c3": float,
    "c4": float,
    "L": float,
    "gamma": float,
    "kT": float,
}
_RUN_KEYS = {"dt": float, "t_end": float, "output_every": int, "seed": int, "n_traj": int}
_OUTPUT_KEYS = {"dir": str, "plot": bool}

# scenarios that touch the bath and therefore need these switched on
_NEEDS_KT = {"thermal_sound", "fokker_planck_vs_langevin", "smoluchowski"}
_NEEDS_GAMMA = {"fokker_planck_vs_langevin", "smoluchowski", "modified_hj"}
_NEEDS_HARMONIC = {"glauber_liouville"}
_NEEDS_QUARTIC = {"quartic_correction"}
# single-valued action evolution and the closed-form sound solver have no
# wall handling; hard walls are a transport/kinetics feature
_NO_BOX = {"action_wave", "modified_hj", "thermal_sound"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved run request: lattice, physics, stepping, outputs."""

    scenario: str
    grid: Grid1D
    params: ParticleParams
    potential: Potential
    thermal: ThermalParams
    dt: float
    t_end: float
    output_every: int
    seed: int
    n_traj: int
    out_dir: str
    plot: bool


# ------------------------------------------------------------- parsing


def _section_line(raw: str, section: str) -> int:
    """1-based line of the [section] header, 1 if it is absent."""
    pat = re.compile(r"^\s*\[" + re.escape(section) + r"\]\s*(#.*)?$")
    for i, line in enumerate(raw.splitlines(), start=1):
        if pat.match(line):
            return i
    return 1


def _key_line(raw: str, section: str, key: str) -> int:
    """1-based line of `key = ...` inside [section], header line if not found.

    An empty section name means the top-level block before any header.
    """
    start = _section_line(raw, section) if section else 0
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    lines = raw.splitlines()
    for i in range(start, len(lines)):
        if re.match(r"^\s*\[", lines[i]):
            break
        if pat.match(lines[i]):
            return i + 1
    return max(start, 1)


def _coerce(path: str, raw: str, section: str, key: str, want, value):
    line = _key_line(raw, section, key)
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(
                f"{path}:{line}: [{section}] key '{key}' must be a number, got {value!r}"
            )
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(
                f"{path}:{line}: [{section}] key '{key}' must be an integer, got {value!r}"
            )
        return value
    if want is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(
                f"{path}:{line}: [{section}] key '{key}' must be true or false, got {value!r}"
            )
        return value
    if not isinstance(value, str):
        raise ConfigurationError(
            f"{path}:{line}: [{section}] key '{key}' must be a string, got {value!r}"
        )
    return value


def _read_section(path, raw, doc, section, schema, required):
    if section not in doc:
        raise ConfigurationError(f"{path}:1: missing required section [{section}]")
    block = doc[section]
    if not isinstance(block, dict):
        line = _key_line(raw, "", section)
        raise ConfigurationError(f"{path}:{line}: '{section}' must be a [section]")
    out = {}
    for key, value in block.items():
        if key not in schema:
            line = _key_line(raw, section, key)
            raise ConfigurationError(f"{path}:{line}: unknown key '{key}' in [{section}]")
        out[key] = _coerce(path, raw, section, key, schema[key], value)
    for key in required:
        if key not in out:
            line = _section_line(raw, section)
            raise ConfigurationError(
                f"{path}:{line}: [{section}] is missing required key '{key}'"
            )
    return out


def _build_potential(path: str, raw: str, physics: dict) -> Potential:
    kind = physics["potential"]
    if kind not in _POTENTIAL_COEFFS:
        line = _key_line(raw, "physics", "potential")
        raise ConfigurationError(
            f"{path}:{line}: unknown potential {kind!r}; "
            f"choose one of {', '.join(sorted(_POTENTIAL_COEFFS))}"
        )
    wanted = _POTENTIAL_COEFFS[kind]
    coeff_keys = {k for keys in _POTENTIAL_COEFFS.values() for k in keys}
    for key in sorted(coeff_keys & set(physics)):
        if key not in wanted:
            line = _key_line(raw, "physics", key)
            raise ConfigurationError(
                f"{path}:{line}: key '{key}' does not apply to potential {kind!r}"
            )
    for key in wanted:
        if key not in physics:
            line = _section_line(raw, "physics")
            raise ConfigurationError(
                f"{path}:{line}: potential {kind!r} needs key '{key}' in [physics]"
            )
    kwargs = {key: physics[key] for key in wanted}
    return getattr(Potential, kind)(**kwargs)


def parse_config(
    path: str,
    out_override: str | None = None,
    seed_override: int | None = None,
    plot_override: bool = False,
) -> ScenarioConfig:
    """Read and fully validate a scenario config; raises ConfigurationError."""
    try:
        with open(path, "r") as fh:
            raw = fh.read()
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot read config: {e}") from e
    try:
        doc = tomllib.loads(raw)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: not valid config syntax: {e}") from e

    known_top = {"scenario", "grid", "physics", "run", "output"}
    for key in doc:
        if key not in known_top:
            line = _key_line(raw, "", key) if not isinstance(doc[key], dict) else _section_line(raw, key)
            raise ConfigurationError(f"{path}:{line}: unknown top-level entry '{key}'")
    if "scenario" not in doc:
        raise ConfigurationError(f"{path}:1: missing top-level key 'scenario'")
    scenario = doc["scenario"]
    if not isinstance(scenario, str) or scenario not in SCENARIOS:
        line = _key_line(raw, "", "scenario")
        raise ConfigurationError(
            f"{path}:{line}: scenario must be one of {', '.join(SCENARIOS)}; got {scenario!r}"
        )

    grid_kv = _read_section(path, raw, doc, "grid", _GRID_KEYS, tuple(_GRID_KEYS))
    physics = _read_section(path, raw, doc, "physics", _PHYSICS_KEYS, ("m", "sigma", "potential"))
    run = _read_section(path, raw, doc, "run", _RUN_KEYS, ("dt", "t_end"))
    output = _read_section(path, raw, doc, "output", _OUTPUT_KEYS, ()) if "output" in doc else {}

    try:
        grid = Grid1D(**grid_kv)
        params = ParticleParams(m=physics["m"], sigma=physics["sigma"])
        thermal = ThermalParams(gamma=physics.get("gamma", 0.0), kT=physics.get("kT", 0.0))
    except PhasewaveError as e:
        raise ConfigurationError(f"{path}:1: {e}") from e
    potential = _build_potential(path, raw, physics)

    dt = run["dt"]
    t_end = run["t_end"]
    if not dt > 0:
        raise ConfigurationError(f"{path}:{_key_line(raw, 'run', 'dt')}: dt must be > 0")
    if not t_end > 0:
        raise ConfigurationError(f"{path}:{_key_line(raw, 'run', 't_end')}: t_end must be > 0")
    output_every = run.get("output_every", 10)
    if output_every < 1:
        raise ConfigurationError(
            f"{path}:{_key_line(raw, 'run', 'output_every')}: output_every must be >= 1"
        )
    n_traj = run.get("n_traj", 10_000)
    if n_traj < 1:
        raise ConfigurationError(f"{path}:{_key_line(raw, 'run', 'n_traj')}: n_traj must be >= 1")

    pline = _section_line(raw, "physics")
    if scenario in _NEEDS_GAMMA and not thermal.gamma > 0:
        raise ConfigurationError(f"{path}:{pline}: scenario '{scenario}' needs gamma > 0")
    if scenario in _NEEDS_KT and not thermal.kT > 0:
        raise ConfigurationError(f"{path}:{pline}: scenario '{scenario}' needs kT > 0")
    if scenario in _NEEDS_HARMONIC and potential.kind != "harmonic":
        raise ConfigurationError(
            f"{path}:{pline}: scenario '{scenario}' needs the harmonic potential"
        )
    if scenario in _NEEDS_QUARTIC and potential.kind != "quartic":
        raise ConfigurationError(
            f"{path}:{pline}: scenario '{scenario}' needs the quartic potential"
        )
    if scenario in _NO_BOX and potential.kind == "box":
        raise ConfigurationError(
            f"{path}:{pline}: scenario '{scenario}' does not support the box potential"
        )

    return ScenarioConfig(
        scenario=scenario,
        grid=grid,
        params=params,
        potential=potential,
        thermal=thermal,
        dt=dt,
        t_end=t_end,
        output_every=output_every,
        seed=seed_override if seed_override is not None else run.get("seed", 0),
        n_traj=n_traj,
        out_dir=out_override if out_override is not None else output.get("dir", "out"),
        plot=bool(output.get("plot", False)) or plot_override,
    )


# ------------------------------------------------------------ recording


def _fmt(v) -> str:
    return format(float(v), ".17g")


class _Recorder:
    """Collects emitted files, summary lines, and pass/fail checks."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        self.lines: list[str] = []
        self.checks: list[tuple[str, float, float, bool]] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add_files(self, *names: str) -> None:
        self.files.extend(names)

    def put(self, key: str, value) -> None:
        text = value if isinstance(value, str) else _fmt(value)
        self.lines.append(f"{key}={text}")

    def check(self, name: str, value: float, tolerance: float) -> None:
        ok = abs(value) <= tolerance
        self.checks.append((name, float(value), float(tolerance), ok))
        self.lines.append(f"check_{name}={'pass' if ok else 'fail'}")

    def finish(self, scenario: str) -> None:
        summary = ["scenario=" + scenario] + self.lines
        with open(self.path("summary.txt"), "w") as fh:
            fh.write("\n".join(summary) + "\n")
        self.files.append("summary.txt")
        with open(self.path("index.csv"), "w") as fh:
            fh.write("\n".join(["filename"] + self.files) + "\n")


def _plot_lines(path, xs, ys, labels, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "phasewave"
    matplotlib.rcParams["svg.fonttype"] = "path"
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for y, label in zip(ys, labels):
        ax.plot(xs, y, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if labels and any(labels) and len(labels) <= 12:
        ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _gaussian_density(grid: Grid1D, x0: float, var: float) -> np.ndarray:
    n = np.exp(-((grid.x - x0) ** 2) / (2.0 * var))
    return n / (n.sum() * grid.dx)


def _gaussian_packet(grid: Grid1D, x0: float, var: float) -> WaveFunction:
    vals = (2.0 * np.pi * var) ** -0.25 * np.exp(-((grid.x - x0) ** 2) / (4.0 * var))
    vals = vals / np.sqrt((np.abs(vals) ** 2).sum() * grid.dx)
    return WaveFunction(grid, vals.astype(complex))


def _snapshot_steps(n_steps: int, every: int) -> list[int]:
    marks = list(range(0, n_steps + 1, every))
    if marks[-1] != n_steps:
        marks.append(n_steps)
    return marks


# ------------------------------------------------------------ scenarios


def _run_thermal_sound(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    prof = 1.0 + 0.05 * np.exp(-g.x**2 / 2.0)
    n0 = prof / (prof.sum() * g.dx)
    times = np.linspace(cfg.t_end / 3.0, cfg.t_end, 9)
    snaps = thermal_sound_evolve(g, n0, np.zeros(g.n_x), cfg.params, cfg.thermal, times)
    for i, row in enumerate(snaps):
        name = f"density_{i:04d}.csv"
        io.write_columns_csv(rec.path(name), ["x", "n"], [g.x, row])
        rec.add_files(name)
    io.write_columns_csv(rec.path("times.csv"), ["t"], [times])
    rec.add_files("times.csv")
    fit = measure_wave_speed(g, times, snaps)
    expected = float(np.sqrt(cfg.thermal.kT / cfg.params.m))
    rec.put("expected_speed", expected)
    rec.put("measured_speed", fit.speed)
    rec.put("fit_residual", fit.residual)
    rec.check("sound_speed", fit.speed - expected, 0.02 * expected)
    if cfg.plot:
        _plot_lines(
            rec.path("density.svg"), g.x, list(snaps),
            [f"t={t:.3g}" for t in times], "x", "n",
        )
        rec.add_files("density.svg")


def _run_action_wave(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    s = ActionState(g, _gaussian_density(g, 0.0, 1.0), np.zeros(g.n_x))
    n_steps = int(round(cfg.t_end / cfg.dt))
    marks = _snapshot_steps(n_steps, cfg.output_every)
    energy0 = hamiltonian_functional(s, cfg.potential, cfg.params)
    times, profiles = [], []
    k_mark = 0
    for k in range(n_steps + 1):
        if k_mark < len(marks) and k == marks[k_mark]:
            name = f"action_{k_mark:04d}.csv"
            io.write_action_csv(g, s.n, s.S, rec.path(name))
            rec.add_files(name)
            times.append(k * cfg.dt)
            profiles.append(s.n.copy())
            k_mark += 1
        if k < n_steps:
            s = evolve_action_wave(s, cfg.potential, cfg.params, cfg.dt)
    io.write_columns_csv(rec.path("times.csv"), ["t"], [np.asarray(times)])
    rec.add_files("times.csv")
    energy1 = hamiltonian_functional(s, cfg.potential, cfg.params)
    drift = abs(energy1 - energy0) / max(abs(energy0), 1e-300)
    mass_drift = abs(float(s.n.sum() * g.dx) - 1.0)
    rec.put("energy_initial", energy0)
    rec.put("energy_final", energy1)
    rec.put("energy_drift", drift)
    rec.put("mass_drift", mass_drift)
    rec.check("energy_conservation", drift, 1e-6)
    rec.check("mass_conservation", mass_drift, 1e-10)
    if cfg.plot:
        _plot_lines(rec.path("density.svg"), g.x, profiles,
                    [f"t={t:.3g}" for t in times], "x", "n")
        rec.add_files("density.svg")


def _run_glauber_liouville(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    psi = glauber_state(g, cfg.potential, cfg.params, 2.0, 0.0, 0.0)
    f = wigner_transform(psi, cfg.params)
    n_steps = int(round(cfg.t_end / cfg.dt))
    marks = _snapshot_steps(n_steps, cfg.output_every)
    history, times = [], []
    k_mark = 0
    for k in range(n_steps + 1):
        if k_mark < len(marks) and k == marks[k_mark]:
            history.append(f)
            times.append(k * cfg.dt)
            k_mark += 1
        if k < n_steps:
            f = liouville_step(f, cfg.potential, cfg.params, cfg.dt)
    mom_history = [moments(snap, cfg.params) for snap in history]
    rec.add_files(*io.write_history(mom_history, times, rec.out_dir, "moments"))
    defect = coherence_defect(history, "gaussian")
    rec.put("coherence_defect", defect)
    rec.check("coherence_defect", defect, 1e-2)
    if cfg.plot:
        _plot_lines(rec.path("density.svg"), g.x, [m.n for m in mom_history],
                    [f"t={t:.3g}" for t in times], "x", "n")
        rec.add_files("density.svg")


def _run_tdse_vs_liouville(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    psi = _gaussian_packet(g, 1.0, 0.5)
    f = wigner_transform(psi, cfg.params)
    n_steps = int(round(cfg.t_end / cfg.dt))
    for _ in range(n_steps):
        psi = tdse_step(psi, cfg.potential, cfg.params, cfg.dt)
        f = liouville_step(f, cfg.potential, cfg.params, cfg.dt)
    f_wave = wigner_transform(psi, cfg.params)
    rel = float(
        np.sqrt(((f_wave.values - f.values) ** 2).sum() / (f.values**2).sum())
    )
    n_wave = moments(f_wave, cfg.params).n
    n_transport = moments(f, cfg.params).n
    io.write_columns_csv(
        rec.path("marginals_x.csv"), ["x", "n_wave", "n_transport"],
        [g.x, n_wave, n_transport],
    )
    rec.add_files("marginals_x.csv")
    rec.put("routes_l2", rel)
    rec.check("route_agreement", rel, 1e-3)
    if cfg.plot:
        _plot_lines(rec.path("marginals.svg"), g.x, [n_wave, n_transport],
                    ["wave route", "transport route"], "x", "n")
        rec.add_files("marginals.svg")


def _run_quartic_correction(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    psi = _gaussian_packet(g, 1.2, 0.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        rep = quartic_residual(psi, cfg.potential, cfg.params, cfg.dt)
    ratio = rep.corrected / rep.plain
    rec.put("residual_plain", rep.plain)
    rec.put("residual_corrected", rep.corrected)
    rec.put("residual_ratio", ratio)
    rec.put("probe_ratio", rep.probe_ratio)
    rec.put("resolution_warning", "true" if caught else "false")
    rec.check("correction_gain", ratio, 0.1)
    io.write_checks_csv(
        rec.path("residuals.csv"),
        [("correction_gain", ratio, 0.1, ratio <= 0.1)],
    )
    rec.add_files("residuals.csv")
    if cfg.plot:
        _plot_lines(rec.path("density.svg"), g.x, [psi.density()], ["|psi|^2"], "x", "n")
        rec.add_files("density.svg")


def _run_fokker_planck_vs_langevin(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    x0, p0, vx, vp = 1.5, 0.0, 0.25, 0.25
    w = np.exp(
        -((g.x[:, None] - x0) ** 2) / (2 * vx) - ((g.p[None, :] - p0) ** 2) / (2 * vp)
    )
    f = PhaseSpaceField(g, w / (w.sum() * g.dx * g.dp))
    n_steps = int(round(cfg.t_end / cfg.dt))
    for _ in range(n_steps):
        f = fp_step(f, cfg.potential, cfg.params, cfg.thermal, cfg.dt)
    res = langevin_ensemble(
        g, cfg.potential, cfg.params, cfg.thermal,
        GaussianCloud(x0, p0, vx, vp), cfg.n_traj, n_steps * cfg.dt, cfg.dt,
        seed=cfg.seed,
    )
    nx_k = f.values.sum(axis=1) * g.dp
    np_k = f.values.sum(axis=0) * g.dx
    nx_l = res.field.values.sum(axis=1) * g.dp
    np_l = res.field.values.sum(axis=0) * g.dx
    io.write_columns_csv(rec.path("marginals_x.csv"), ["x", "n_kinetic", "n_ensemble"],
                         [g.x, nx_k, nx_l])
    io.write_columns_csv(rec.path("marginals_p.csv"), ["p", "n_kinetic", "n_ensemble"],
                         [g.p, np_k, np_l])
    st = res.stats
    io.write_columns_csv(rec.path("ensemble_stats.csv"),
                         ["t", "mean_x", "mean_p", "var_x", "var_p"],
                         [st.t, st.mean_x, st.mean_p, st.var_x, st.var_p])
    rec.add_files("marginals_x.csv", "marginals_p.csv", "ensemble_stats.csv")
    l1_x = float(np.abs(nx_l - nx_k).sum() * g.dx)
    l1_p = float(np.abs(np_l - np_k).sum() * g.dp)
    rec.put("l1_x", l1_x)
    rec.put("l1_p", l1_p)
    rec.put("escaped", float(res.escaped))
    rec.check("marginal_x_agreement", l1_x, 0.05)
    rec.check("marginal_p_agreement", l1_p, 0.05)
    if cfg.plot:
        _plot_lines(rec.path("marginals.svg"), g.x, [nx_k, nx_l],
                    ["kinetic", "ensemble"], "x", "n")
        rec.add_files("marginals.svg")


def _run_smoluchowski(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    var0 = 0.25
    n = _gaussian_density(g, 0.0, var0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    marks = _snapshot_steps(n_steps, cfg.output_every)
    times, variances, profiles = [], [], []
    k_mark = 0
    for k in range(n_steps + 1):
        if k_mark < len(marks) and k == marks[k_mark]:
            mass = n.sum() * g.dx
            mu = (n * g.x).sum() * g.dx / mass
            times.append(k * cfg.dt)
            variances.append(((n * (g.x - mu) ** 2).sum() * g.dx) / mass)
            profiles.append(n.copy())
            name = f"density_{k_mark:04d}.csv"
            io.write_columns_csv(rec.path(name), ["x", "n"], [g.x, n])
            rec.add_files(name)
            k_mark += 1
        if k < n_steps:
            n = smoluchowski_step(n, g, cfg.potential, cfg.params, cfg.thermal, cfg.dt)
    io.write_columns_csv(rec.path("variance.csv"), ["t", "var_x"],
                         [np.asarray(times), np.asarray(variances)])
    rec.add_files("variance.csv")
    mass_drift = abs(float(n.sum() * g.dx) - 1.0)
    rec.put("final_variance", variances[-1])
    rec.put("mass_drift", mass_drift)
    rec.check("mass_conservation", mass_drift, 1e-10)
    if cfg.potential.kind == "harmonic":
        k_hooke = cfg.params.m * cfg.potential.omega**2
        var_inf = cfg.thermal.kT / k_hooke
        rate = 2.0 * k_hooke / cfg.thermal.gamma
        expected = var_inf + (var0 - var_inf) * np.exp(-rate * times[-1])
        rec.put("expected_variance", float(expected))
        rec.check("variance_relaxation", variances[-1] - expected, 0.01 * expected)
    if cfg.plot:
        _plot_lines(rec.path("density.svg"), g.x, profiles,
                    [f"t={t:.3g}" for t in times], "x", "n")
        _plot_lines(rec.path("variance.svg"), np.asarray(times),
                    [np.asarray(variances)], ["var_x"], "t", "var_x")
        rec.add_files("density.svg", "variance.svg")


def _run_modified_hj(cfg: ScenarioConfig, rec: _Recorder) -> None:
    g = cfg.grid
    p0 = 0.8
    s = ActionState(g, _gaussian_density(g, 0.0, 1.0), p0 * g.x)
    n_steps = int(round(cfg.t_end / cfg.dt))
    marks = _snapshot_steps(n_steps, cfg.output_every)
    times, slopes = [], []
    k_mark = 0
    for k in range(n_steps + 1):
        if k_mark < len(marks) and k == marks[k_mark]:
            times.append(k * cfg.dt)
            slopes.append(ramp_split(s.S, g)[0])
            k_mark += 1
        if k < n_steps:
            s = damped_action_step(s, cfg.potential, cfg.params, cfg.thermal, cfg.dt)
    io.write_columns_csv(rec.path("slope.csv"), ["t", "slope"],
                         [np.asarray(times), np.asarray(slopes)])
    rec.add_files("slope.csv")
    rate = -float(np.polyfit(times, np.log(np.abs(slopes)), 1)[0])
    expected = cfg.thermal.gamma / cfg.params.m
    rec.put("expected_rate", expected)
    rec.put("fitted_rate", rate)
    rec.check("slope_decay_rate", rate - expected, 0.005 * expected)
    if cfg.plot:
        _plot_lines(rec.path("slope.svg"), np.asarray(times),
                    [np.asarray(slopes)], ["d_x S"], "t", "slope")
        rec.add_files("slope.svg")


def _run_variational_checks(cfg: ScenarioConfig, rec: _Recorder) -> None:
    # pinned diagnostic states; the config supplies threading/output only
    from .acceptance import check_variational

    results = check_variational()
    # rows store deviation from target so |value| <= tolerance reads uniformly
    rows = [(r.name, r.measured - r.target, r.tolerance, r.passed) for r in results]
    io.write_checks_csv(rec.path("checks.csv"), rows)
    rec.add_files("checks.csv")
    for r, row in zip(results, rows):
        rec.put(r.name, r.measured)
        rec.checks.append(row)
        rec.lines.append(f"check_{r.name}={'pass' if r.passed else 'fail'}")


_RUNNERS = {
    "thermal_sound": _run_thermal_sound,
    "action_wave": _run_action_wave,
    "glauber_liouville": _run_glauber_liouville,
    "tdse_vs_liouville": _run_tdse_vs_liouville,
    "quartic_correction": _run_quartic_correction,
    "fokker_planck_vs_langevin": _run_fokker_planck_vs_langevin,
    "smoluchowski": _run_smoluchowski,
    "modified_hj": _run_modified_hj,
    "variational_checks": _run_variational_checks,
}


def run_scenario(cfg: ScenarioConfig) -> list[tuple[str, float, float, bool]]:
    """Execute one scenario, write its artifacts, return the check rows."""
    rec = _Recorder(cfg.out_dir)
    _RUNNERS[cfg.scenario](cfg, rec)
    rec.finish(cfg.scenario)
    return rec.checks


# ----------------------------------------------------------------- main


def _resolve_threads(arg_value: int | None) -> int | None:
    if arg_value is not None:
        return arg_value
    env = os.environ.get("PHASEWAVE_THREADS")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigurationError(
            f"PHASEWAVE_THREADS must be an integer, got {env!r}"
        ) from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasewave",
        description="Deterministic scenario runner for classical probability waves.",
    )
    parser.add_argument("--config", help="scenario config file (TOML)")
    parser.add_argument("--out", help="output directory (overrides [output] dir)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides [run] seed)")
    parser.add_argument("--threads", type=int, help="worker threads (or PHASEWAVE_THREADS)")
    parser.add_argument("--check", action="store_true",
                        help="exit 1 if any scenario check fails")
    parser.add_argument("--plot", action="store_true", help="also write SVG plots")
    parser.add_argument("--acceptance", action="store_true",
                        help="run the acceptance suite instead of a scenario")
    parser.add_argument("--filter", help="with --acceptance: run matching groups only")
    args = parser.parse_args(argv)

    try:
        threads = _resolve_threads(args.threads)
        if threads is not None:
            _fft.set_workers(threads)
    except PhasewaveError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if args.acceptance:
        from .acceptance import run_acceptance

        try:
            return run_acceptance(args.filter)
        except PhasewaveError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_RUNTIME

    if args.filter:
        print("error: --filter only applies with --acceptance", file=sys.stderr)
        return EXIT_CONFIG
    if not args.config:
        print("error: --config is required (or use --acceptance)", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = parse_config(args.config, args.out, args.seed, args.plot)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        checks = run_scenario(cfg)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PhasewaveError as e:
        print(f"error: {cfg.scenario}: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    failed = [name for name, _v, _t, ok in checks if not ok]
    for name, value, tol, ok in checks:
        print(f"{name}: {'pass' if ok else 'FAIL'} (|{value:.6g}| vs {tol:.6g})")
    print(f"artifacts in {cfg.out_dir}")
    if failed and args.check:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
