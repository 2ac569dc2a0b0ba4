"""Thermal bath coupling: friction, diffusion, and their reduced limits.

The full kinetic step couples the conservative transport of `liouville`
to an Ornstein-Uhlenbeck momentum channel with friction gamma and bath
temperature kT.  The same bath shows up at four coarser levels, each with
its own entry point here: a stochastic trajectory ensemble that should
histogram back onto the kinetic solution, a velocity-moment hierarchy
with two closure choices, an overdamped density equation on x alone, and
a damped action-wave system.  A linearized closed form for thermal sound
plus a peak-tracking speed fit round out the module.

The trajectory ensemble is deterministic by construction: every random
number is addressed by (seed, stream, position) in a counter-based
generator, so results are bitwise independent of how the ensemble is
chunked across memory.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import _fft
from .errors import (
    ConfigurationError,
    EscapeError,
    MeasurementError,
    ParameterError,
    StructuralError,
)
from .grid import (
    Grid1D,
    KSpaceField,
    MomentFields,
    ParticleParams,
    PhaseSpaceField,
    fourier_k_to_p,
    fourier_p_to_k,
)
from .liouville import (
    ActionState,
    Potential,
    _action_step,
    _require_box_grid,
    liouville_step,
    max_force,
)

OU_SERIES_ORDER = 10    # momentum-contraction Taylor order in the kinetic substep
OU_SHIFT_MAX = 0.5      # largest admissible contraction argument for that series
DIFFUSION_FRACTION = 0.25   # per-step thermal variance allowed, in p-cells squared

_INIT_STREAM = 0        # draw positions for initial trajectory clouds
_KICK_STREAM = 1        # draw per-step thermal kicks


@dataclass(frozen=True)
class ThermalParams:
    """Bath coupling: friction coefficient gamma and temperature kT.

    gamma = 0 decouples the bath entirely (kT then has no effect, since
    the fluctuation strength is gamma kT).
    """

    gamma: float = 0.0
    kT: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ParameterError(f"friction gamma must be finite and >= 0, got {self.gamma!r}")
        if not (np.isfinite(self.kT) and self.kT >= 0):
            raise ParameterError(f"temperature kT must be finite and >= 0, got {self.kT!r}")


# ------------------------------------------------------------ kinetic step


def gibbs_state(grid: Grid1D, V: Potential, params: ParticleParams, thermal: ThermalParams) -> PhaseSpaceField:
    """Lattice Gibbs density exp(-(p^2/2m + V)/kT), normalized to unit mass."""
    if not thermal.kT > 0:
        raise ParameterError("gibbs_state needs kT > 0")
    if V.kind == "box":
        _require_box_grid(grid, V)
    energy = (grid.p**2 / (2.0 * params.m))[None, :] + V.value(grid.x, params)[:, None]
    w = np.exp(-energy / thermal.kT)
    return PhaseSpaceField(grid, w / (w.sum() * grid.dx * grid.dp))


def _ou_substep(f: PhaseSpaceField, delta: float, b: float) -> PhaseSpaceField:
    """Exact OU momentum map in the frequency domain.

    Friction contracts the momentum profile, which in k is a dilation
    ft(k) -> ft((1-delta) k); that is evaluated as a Taylor series in the
    shift -delta*k, whose m-th term is (-i delta k)^m/m! times the
    transform of p^m f.  Diffusion is the exact factor exp(-b k^2).
    """
    g = f.grid
    acc = np.zeros((g.n_x, g.n_p), dtype=complex)
    pw = f.values
    coef = 1.0 + 0.0j
    kpow = np.ones(g.n_p)
    for order in range(OU_SERIES_ORDER + 1):
        if order > 0:
            pw = pw * g.p[None, :]
            kpow = kpow * g.k
            coef *= -1j * delta / order
        acc += (coef * kpow) * fourier_p_to_k(PhaseSpaceField(g, pw)).values
    acc *= np.exp(-b * g.k**2)[None, :]
    # the unpaired Nyquist line carries only series-truncation skew; project
    # it back onto the Hermitian subspace so the inverse transform is clean
    acc[:, g.n_p // 2] = acc[:, g.n_p // 2].real
    return fourier_k_to_p(KSpaceField(g, acc))


def fp_step(
    f: PhaseSpaceField,
    V: Potential,
    params: ParticleParams,
    thermal: ThermalParams,
    dt: float,
) -> PhaseSpaceField:
    """One kinetic step with transport, friction, and thermal diffusion.

    Strang split: half a transport step, the exact Ornstein-Uhlenbeck
    momentum map over the full dt, half a transport step.  The OU map is
    evaluated in the momentum-frequency domain where both the friction
    contraction and the diffusion kernel are closed-form, so the k = 0
    row (the mass) passes through bitwise untouched.

    gamma = 0 delegates to the conservative step unchanged, bit for bit.
    With friction on, dt must be positive: the dissipative flow has no
    reverse step.
    """
    if thermal.gamma == 0.0:
        return liouville_step(f, V, params, dt)
    if not dt > 0:
        raise ParameterError("dt must be positive when friction is on")
    g = f.grid
    m = params.m
    c_arg = -thermal.gamma * dt / m
    delta = -np.expm1(c_arg)                      # 1 - e^{-gamma dt/m}, no cancellation
    b = 0.5 * m * thermal.kT * -np.expm1(2 * c_arg)
    # series argument: contraction shift times the largest |k p| on the lattice
    shift = delta * np.pi * g.n_p / 2.0
    if shift > OU_SHIFT_MAX:
        raise ParameterError(
            f"momentum contraction per step {shift:.3e} exceeds {OU_SHIFT_MAX}; "
            f"reduce dt below {OU_SHIFT_MAX * m / (thermal.gamma * np.pi * g.n_p / 2.0):.3e}"
        )
    if b > DIFFUSION_FRACTION * g.dp**2:
        raise ParameterError(
            f"thermal spreading per step {b:.3e} exceeds "
            f"{DIFFUSION_FRACTION} dp^2 = {DIFFUSION_FRACTION * g.dp**2:.3e}; reduce dt"
        )
    half = liouville_step(f, V, params, 0.5 * dt)
    mixed = _ou_substep(half, float(delta), float(b))
    return liouville_step(mixed, V, params, 0.5 * dt)


# ------------------------------------------------- stochastic trajectories


@dataclass(frozen=True)
class GaussianCloud:
    """Initial trajectory distribution: independent normals in x and p."""

    x0: float
    p0: float
    var_x: float
    var_p: float

    def __post_init__(self):
        for name in ("x0", "p0", "var_x", "var_p"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"GaussianCloud.{name} must be finite")
        if self.var_x < 0 or self.var_p < 0:
            raise ParameterError("cloud variances must be >= 0")


@dataclass(frozen=True)
class EnsembleStats:
    """Per-step ensemble moments, one row per recorded time."""

    t: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray


@dataclass(frozen=True)
class EnsembleResult:
    """Histogrammed trajectory ensemble with its escape count."""

    field: PhaseSpaceField
    escaped: int
    stats: EnsembleStats


def _stream_words(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """uint64 words [start, start+count) of a keyed counter-based stream.

    The generator is positioned by its 4-word block counter and the lead
    words of the first block are sliced off, so any contiguous span of the
    stream can be reproduced without generating what precedes it.
    """
    block = start // 4
    bg = np.random.Philox(
        key=np.array([seed, stream], dtype=np.uint64),
        counter=np.array([block, 0, 0, 0], dtype=np.uint64),
    )
    lead = start - 4 * block
    n_gen = -(-(lead + count) // 4) * 4
    words = np.random.Generator(bg).integers(0, 2**64, size=n_gen, dtype=np.uint64)
    return words[lead : lead + count]


def _stream_normals(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    w = _stream_words(seed, stream, start, count)
    u = ((w >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _fold_positions(x, p, grid: Grid1D, boxed: bool):
    """Map positions into the histogram window, reflecting p at box walls.

    The window is the cell-face cover of the lattice, [x_min - dx/2,
    x_max - dx/2); for a box those faces are exactly the walls, so one
    window serves both topologies.
    """
    left = grid.x_min - 0.5 * grid.dx
    if not boxed:
        return left + np.mod(x - left, grid.length), p
    y = np.mod(x - left, 2.0 * grid.length)
    refl = y > grid.length
    x_new = left + np.where(refl, 2.0 * grid.length - y, y)
    return x_new, np.where(refl, -p, p)


def langevin_ensemble(
    grid: Grid1D,
    V: Potential,
    params: ParticleParams,
    thermal: ThermalParams,
    cloud: GaussianCloud,
    n_traj: int,
    t_end: float,
    dt: float,
    seed: int,
    chunk_size: int | None = None,
) -> EnsembleResult:
    """Integrate an ensemble of damped, thermally kicked trajectories.

    Euler-Maruyama on dx = (p/m) dt, dp = (F - gamma p/m) dt + sqrt(2
    gamma kT dt) xi, with xi drawn one word per (step, trajectory) from a
    counter-based stream.  The final positions are histogrammed onto the
    lattice cells, normalized as a density, so the field is directly
    comparable with the kinetic solver's output.

    Trajectories whose momentum leaves the lattice cover are frozen where
    they last stood and counted; if more than 1% escape the run raises
    EscapeError, since the histogram would no longer represent the flow.

    chunk_size only bounds how many trajectories are resident at once.
    The histogram is bitwise invariant under chunking (integer counts);
    the ensemble moment series is invariant to rounding in the summation
    order, about 1e-15 relative.
    """
    if not (isinstance(n_traj, (int, np.integer)) and n_traj >= 1):
        raise ParameterError(f"n_traj must be a positive integer, got {n_traj!r}")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed < 2**64):
        raise ParameterError("seed must be an integer in [0, 2^64)")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(t_end - n_steps * dt) > 1e-9 * max(1.0, abs(t_end)):
        raise ParameterError(f"t_end={t_end!r} is not a whole number of steps of dt={dt!r}")
    if chunk_size is None:
        chunk_size = int(n_traj)
    if not chunk_size >= 1:
        raise ParameterError("chunk_size must be >= 1")
    boxed = V.kind == "box"
    if boxed:
        _require_box_grid(grid, V)

    m = params.m
    gamma, kT = thermal.gamma, thermal.kT
    kick_scale = np.sqrt(2.0 * gamma * kT * dt)
    p_lo = -grid.p_max - 0.5 * grid.dp
    p_hi = grid.p_max - 0.5 * grid.dp
    x_edges = grid.x_min - 0.5 * grid.dx + grid.dx * np.arange(grid.n_x + 1)
    p_edges = p_lo + grid.dp * np.arange(grid.n_p + 1)

    counts = np.zeros((grid.n_x, grid.n_p))
    sums = np.zeros((4, n_steps + 1))
    escaped = 0

    for lo in range(0, int(n_traj), chunk_size):
        hi = min(lo + chunk_size, int(n_traj))
        size = hi - lo
        x = cloud.x0 + np.sqrt(cloud.var_x) * _stream_normals(seed, _INIT_STREAM, lo, size)
        p = cloud.p0 + np.sqrt(cloud.var_p) * _stream_normals(seed, _INIT_STREAM, int(n_traj) + lo, size)
        x, p = _fold_positions(x, p, grid, boxed)
        # a draw landing outside the momentum cover escaped before the run
        # started; clamp it onto the cover edge so the bookkeeping stays exact
        frozen = (p < p_lo) | (p >= p_hi)
        p = np.clip(p, p_lo, np.nextafter(p_hi, p_lo))

        for step in range(n_steps + 1):
            sums[0, step] += x.sum()
            sums[1, step] += p.sum()
            sums[2, step] += (x * x).sum()
            sums[3, step] += (p * p).sum()
            if step == n_steps:
                break
            xi = _stream_normals(seed, _KICK_STREAM, step * int(n_traj) + lo, size)
            force = -V.grad(x, params)
            x_new = x + (p / m) * dt
            p_new = p + (force - (gamma / m) * p) * dt + kick_scale * xi
            x_new, p_new = _fold_positions(x_new, p_new, grid, boxed)
            ok = ~frozen & (p_new >= p_lo) & (p_new < p_hi)
            frozen |= ~frozen & ~ok
            x = np.where(ok, x_new, x)
            p = np.where(ok, p_new, p)

        counts += np.histogram2d(x, p, bins=(x_edges, p_edges))[0]
        escaped += int(frozen.sum())

    if escaped > 0.01 * n_traj:
        raise EscapeError(
            f"{escaped} of {n_traj} trajectories left the momentum window; "
            "the histogram no longer represents the flow"
        )
    mean_x = sums[0] / n_traj
    mean_p = sums[1] / n_traj
    stats = EnsembleStats(
        t=dt * np.arange(n_steps + 1),
        mean_x=mean_x,
        mean_p=mean_p,
        var_x=np.maximum(sums[2] / n_traj - mean_x**2, 0.0),
        var_p=np.maximum(sums[3] / n_traj - mean_p**2, 0.0),
    )
    for a in (stats.t, stats.mean_x, stats.mean_p, stats.var_x, stats.var_p):
        a.flags.writeable = False
    field = PhaseSpaceField(grid, counts / (n_traj * grid.dx * grid.dp))
    return EnsembleResult(field=field, escaped=escaped, stats=stats)


# ------------------------------------------------------- moment hierarchy

_CLOSURES = ("truncate_chi", "equilibrium_eps")


def _ddx(a: np.ndarray, grid: Grid1D) -> np.ndarray:
    return _fft.ifft(1j * grid.kx * _fft.fft(a)).real


def moment_step(
    fields: MomentFields,
    V: Potential,
    params: ParticleParams,
    thermal: ThermalParams,
    dt: float,
    closure: str,
) -> MomentFields:
    """One RK4 step of the velocity-moment hierarchy under a closure.

    "truncate_chi" evolves (n, j, eps) with the third moment set to zero:
    cheap, but the cut tail distorts free wave propagation.  The bath
    still drives eps toward its share kT n / 2 at rate 2 gamma / m.

    "equilibrium_eps" pins eps = kT n / 2 instantaneously and evolves
    (n, j) alone, which closes onto the damped isothermal wave equation;
    it needs gamma > 0, since only contact with the bath justifies the
    pinning.  Either closure overwrites the closed moments it returns.

    x-derivatives are spectral, so the lattice must be periodic.
    """
    if closure not in _CLOSURES:
        raise ParameterError(f"unknown closure {closure!r}, expected one of {_CLOSURES}")
    if V.kind == "box":
        raise ConfigurationError("moment hierarchy needs the periodic topology, not box walls")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if closure == "equilibrium_eps" and not thermal.gamma > 0:
        raise ParameterError("equilibrium_eps closure needs gamma > 0 to hold eps pinned")
    g = fields.grid
    m = params.m
    gamma, kT = thermal.gamma, thermal.kT
    # explicit RK4: bound the stiffest rates (sound crossing, force
    # coupling, bath relaxation) well inside the stability region
    kap = np.pi / g.dx
    fmax = max_force(V, g, params)
    rate = np.sqrt(kT / m) * kap + np.sqrt(kap * fmax / m) + 2.0 * gamma / m
    if closure == "equilibrium_eps" and gamma > 0:
        rate += kap * fmax / gamma  # force-current coupling advects j at V'/gamma
    if dt * rate > 2.5:
        raise ParameterError(
            f"dt={dt:.3e} exceeds the moment-step stability bound {2.5 / rate:.3e}"
        )
    Vp = V.grad(g.x, params)

    if closure == "truncate_chi":
        def rhs(n, j, e):
            dn = -_ddx(j, g)
            dj = -(2.0 / m) * _ddx(e, g) - (Vp / m) * n - (gamma / m) * j
            de = -Vp * j - (2.0 * gamma / m) * (e - 0.5 * kT * n)
            return dn, dj, de

        y = (fields.n, fields.j, fields.eps)
        k1 = rhs(*y)
        k2 = rhs(*(a + 0.5 * dt * b for a, b in zip(y, k1)))
        k3 = rhs(*(a + 0.5 * dt * b for a, b in zip(y, k2)))
        k4 = rhs(*(a + dt * b for a, b in zip(y, k3)))
        n, j, e = (
            a + (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
        return MomentFields(g, n, j, e, np.zeros(g.n_x))

    def rhs2(n, j):
        # eps pinned at kT n/2 - m V' j / 2 gamma, so -2 d_x eps feeds the
        # pressure gradient plus a force-current coupling back into j
        dn = -_ddx(j, g)
        dj = (
            -(kT / m) * _ddx(n, g)
            - (Vp / m) * n
            - (gamma / m) * j
            + _ddx(Vp * j, g) / gamma
        )
        return dn, dj

    y = (fields.n, fields.j)
    k1 = rhs2(*y)
    k2 = rhs2(*(a + 0.5 * dt * b for a, b in zip(y, k1)))
    k3 = rhs2(*(a + 0.5 * dt * b for a, b in zip(y, k2)))
    k4 = rhs2(*(a + dt * b for a, b in zip(y, k3)))
    n, j = (
        a + (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )
    eps = 0.5 * kT * n - (0.5 * m / gamma) * Vp * j
    return MomentFields(g, n, j, eps, np.zeros(g.n_x))


# ------------------------------------------------------- overdamped limit


def _bernoulli_weight(w: np.ndarray) -> np.ndarray:
    # w / (e^w - 1), with the removable singularity at w = 0 filled in
    wd = np.where(w == 0.0, 1.0, w)
    return np.where(w == 0.0, 1.0, wd / np.expm1(wd))


def smoluchowski_step(
    n: np.ndarray,
    grid: Grid1D,
    V: Potential,
    params: ParticleParams,
    thermal: ThermalParams,
    dt: float,
) -> np.ndarray:
    """One RK4 step of the overdamped density equation on x alone.

    Face fluxes use exponentially weighted differences, F = (D/dx) (B(w)
    n_i - B(-w) n_{i+1}) with w the potential drop across the face in kT
    and B(w) = w/(e^w - 1).  B(w)/B(-w) = e^{-w} holds identically, so
    the lattice Gibbs profile exp(-V/kT) is stationary to rounding, the
    seam face included; w = 0 reduces to centered diffusion.

    Box walls become zero-flux faces.  Needs gamma > 0 and kT > 0, which
    set the diffusion constant D = kT/gamma and the mobility 1/gamma.
    """
    if not (thermal.gamma > 0 and thermal.kT > 0):
        raise ParameterError("overdamped flow needs gamma > 0 and kT > 0")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    n = np.asarray(n, dtype=float)
    if n.shape != (grid.n_x,):
        raise StructuralError(f"density must have shape ({grid.n_x},), got {n.shape}")
    D = thermal.kT / thermal.gamma
    if dt > DIFFUSION_FRACTION * grid.dx**2 / D:
        raise ParameterError(
            f"dt={dt:.3e} exceeds the diffusion bound {DIFFUSION_FRACTION * grid.dx**2 / D:.3e}"
        )
    drift_max = D * max_force(V, grid, params) / thermal.kT
    if drift_max > 0 and dt > 0.5 * grid.dx / drift_max:
        raise ParameterError(
            f"dt={dt:.3e} exceeds the drift bound {0.5 * grid.dx / drift_max:.3e}"
        )
    boxed = V.kind == "box"
    if boxed:
        _require_box_grid(grid, V)
    Vv = V.value(grid.x, params)

    def rhs(nv):
        if boxed:
            flux = np.zeros(grid.n_x + 1)
            w = (Vv[1:] - Vv[:-1]) / thermal.kT
            flux[1:-1] = (D / grid.dx) * (
                _bernoulli_weight(w) * nv[:-1] - _bernoulli_weight(-w) * nv[1:]
            )
            return -np.diff(flux) / grid.dx
        w = (np.roll(Vv, -1) - Vv) / thermal.kT
        flux = (D / grid.dx) * (
            _bernoulli_weight(w) * nv - _bernoulli_weight(-w) * np.roll(nv, -1)
        )
        return -(flux - np.roll(flux, 1)) / grid.dx

    k1 = rhs(n)
    k2 = rhs(n + 0.5 * dt * k1)
    k3 = rhs(n + 0.5 * dt * k2)
    k4 = rhs(n + dt * k3)
    return n + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# ----------------------------------------------------- damped action wave


def damped_action_step(
    s: ActionState,
    V: Potential,
    params: ParticleParams,
    thermal: ThermalParams,
    dt: float,
) -> ActionState:
    """Action-wave step with velocity damping from the bath.

    Friction adds (gamma/m) S to the energy balance, which damps the
    velocity field at rate gamma/m; temperature does not enter at this
    level, there being no momentum spread left to heat.  gamma = 0
    reproduces the conservative action step bit for bit.
    """
    return _action_step(s, V, params, dt, thermal.gamma)


# --------------------------------------------------------- thermal sound


def thermal_sound_evolve(
    grid: Grid1D,
    n0: np.ndarray,
    j0: np.ndarray,
    params: ParticleParams,
    thermal: ThermalParams,
    times: np.ndarray,
) -> np.ndarray:
    """Closed-form evolution of linear density waves under the bath.

    Solves d_tt n + (gamma/m) d_t n = (kT/m) d_xx n mode by mode: each
    spatial frequency is an exactly integrated damped oscillator, so
    there is no step-size error and snapshots may be requested at any
    set of times.  Returns an array of shape (len(times), n_x).

    The zero-frequency mode is the total mass and is held constant
    explicitly; its source d_t n(0) vanishes algebraically.
    """
    n0 = np.asarray(n0, dtype=float)
    j0 = np.asarray(j0, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    for name, a in (("n0", n0), ("j0", j0)):
        if a.shape != (grid.n_x,):
            raise StructuralError(f"{name} must have shape ({grid.n_x},), got {a.shape}")
    if times.ndim != 1 or times.size == 0 or not np.all(np.isfinite(times)):
        raise ParameterError("times must be a nonempty 1-D array of finite values")
    if times.min() < 0:
        raise ParameterError("the dissipative closed form runs forward from t = 0 only")

    kap = grid.kx
    n_hat = _fft.fft(n0)
    v_hat = -1j * kap * _fft.fft(j0)          # d_t n = -d_x j at t = 0
    mu = thermal.gamma / (2.0 * params.m)
    om2 = (thermal.kT / params.m) * kap**2
    disc = om2 - mu**2
    thr = 1e-12 * (om2 + mu**2)
    T = times[:, None]
    out = np.empty((times.size, grid.n_x), dtype=complex)

    under = disc > thr
    if under.any():
        Om = np.sqrt(disc[under])
        A = (v_hat[under] + mu * n_hat[under]) / Om
        out[:, under] = np.exp(-mu * T) * (
            np.cos(Om * T) * n_hat[under] + np.sin(Om * T) * A
        )
    over = disc < -thr
    if over.any():
        # decaying exponentials only; cosh/sinh would overflow at large mu t
        La = np.sqrt(-disc[over])
        A = (v_hat[over] + mu * n_hat[over]) / La
        out[:, over] = 0.5 * (
            (n_hat[over] + A) * np.exp((La - mu) * T)
            + (n_hat[over] - A) * np.exp(-(La + mu) * T)
        )
    crit = ~under & ~over
    if crit.any():
        out[:, crit] = np.exp(-mu * T) * (
            n_hat[crit] + T * (v_hat[crit] + mu * n_hat[crit])
        )
    out[:, 0] = n_hat[0]                      # mass mode, exactly constant
    return _fft.ifft(out, axis=1).real


@dataclass(frozen=True)
class SpeedFit:
    """Least-squares propagation speed of a tracked pulse peak."""

    speed: float
    residual: float


def measure_wave_speed(grid: Grid1D, times: np.ndarray, snapshots: np.ndarray) -> SpeedFit:
    """Fit a speed to the rightward-moving peak across density snapshots.

    Each snapshot's peak is located in the right half of the domain and
    refined to sub-cell accuracy with a parabola through its neighbors;
    a line through (time, position) gives the speed, and the RMS of the
    fit residuals comes back as a quality figure.  Raises
    MeasurementError when fewer than 3 snapshots are given, when a peak
    sits against the edge of the search window, or when the peak fails
    to advance monotonically.
    """
    times = np.asarray(times, dtype=float)
    snapshots = np.asarray(snapshots, dtype=float)
    if times.ndim != 1 or snapshots.shape != (times.size, grid.n_x):
        raise StructuralError(
            f"snapshots must have shape (len(times), {grid.n_x}), got {snapshots.shape}"
        )
    if times.size < 3:
        raise MeasurementError("need at least 3 snapshots to fit a speed")
    if not np.all(np.diff(times) > 0):
        raise ParameterError("times must be strictly increasing")
    start = grid.n_x // 2 + 1
    window = snapshots[:, start:]
    x_window = grid.x[start:]
    positions = np.empty(times.size)
    for i, row in enumerate(window):
        j = int(np.argmax(row))
        if j == 0 or j == row.size - 1:
            raise MeasurementError("pulse peak sits at the edge of the measurement window")
        y_m, y_0, y_p = row[j - 1], row[j], row[j + 1]
        curv = y_m - 2.0 * y_0 + y_p
        offset = 0.0 if curv == 0.0 else 0.5 * (y_m - y_p) / curv
        positions[i] = x_window[j] + offset * grid.dx
    if not np.all(np.diff(positions) > 0):
        raise MeasurementError("peak positions do not advance monotonically")
    slope, intercept = np.polyfit(times, positions, 1)
    resid = positions - (slope * times + intercept)
    return SpeedFit(speed=float(slope), residual=float(np.sqrt(np.mean(resid**2))))
