"""Conservative phase-space advection and the reduced action-wave system.

The full transport step is a Strang split: half a step of exact spectral
x-shear, a full momentum kick by the local force, then the second half
shear.  Each factor is a pure phase multiplication in the matching Fourier
basis, so mass is conserved to rounding and the step is exactly reversible
(stepping -dt undoes +dt).

The action-wave system evolves a density n(x) and a generating function
S(x) under continuity plus the local energy balance for S.  Where n falls
below the density floor there is no transported matter to define S, so S
is continued linearly off the support edges; that keeps potential-driven
structure from growing in vacuum regions and then drifting into the bulk.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _fft
from .errors import (
    AliasingError,
    CausticError,
    ConfigurationError,
    CutoffError,
    DataError,
    NumericalError,
    ParameterError,
    StructuralError,
)
from .grid import (
    EPS_NEG,
    HARD_NEG,
    MASS_TOL,
    N_FLOOR,
    Grid1D,
    ParticleParams,
    PhaseSpaceField,
)

ALIAS_BUDGET = 1e-6     # mass fraction tolerated in the outer p-bins
ALIAS_EDGE = 0.05       # per-side fraction of p-bins counted as "outer"

_POTENTIAL_KINDS = ("free", "uniform", "harmonic", "quartic", "box")


@dataclass(frozen=True)
class Potential:
    """External potential, one of a small polynomial/wall menu.

    kinds: free; uniform(g) a constant force g, V = -g x; harmonic(omega)
    with V = m omega^2 x^2 / 2; quartic(c2, c3, c4); box(L) with hard
    reflecting walls a box length L apart and V = 0 inside.
    """

    kind: str
    g: float = 0.0
    omega: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    L: float = 0.0

    def __post_init__(self):
        if self.kind not in _POTENTIAL_KINDS:
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic" and not self.omega > 0:
            raise ParameterError("harmonic potential needs omega > 0")
        if self.kind == "box" and not self.L > 0:
            raise ParameterError("box potential needs L > 0")

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def uniform(cls, g: float):
        return cls("uniform", g=g)

    @classmethod
    def harmonic(cls, omega: float):
        return cls("harmonic", omega=omega)

    @classmethod
    def quartic(cls, c2: float, c3: float, c4: float):
        return cls("quartic", c2=c2, c3=c3, c4=c4)

    @classmethod
    def box(cls, L: float):
        return cls("box", L=L)

    def value(self, x, params: ParticleParams):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return -self.g * x
        if self.kind == "harmonic":
            return 0.5 * params.m * self.omega**2 * x**2
        if self.kind == "quartic":
            return self.c2 * x**2 + self.c3 * x**3 + self.c4 * x**4
        return np.zeros_like(x)

    def grad(self, x, params: ParticleParams):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.full_like(x, -self.g)
        if self.kind == "harmonic":
            return params.m * self.omega**2 * x
        if self.kind == "quartic":
            return 2 * self.c2 * x + 3 * self.c3 * x**2 + 4 * self.c4 * x**3
        return np.zeros_like(x)

    def third(self, x, params: ParticleParams):
        x = np.asarray(x, dtype=float)
        if self.kind == "quartic":
            return 6 * self.c3 + 24 * self.c4 * x
        return np.zeros_like(x)


@dataclass(frozen=True)
class ActionState:
    """Density n(x) and generating function S(x) on the x-lattice."""

    grid: Grid1D
    n: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        for name in ("n", "S"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (self.grid.n_x,):
                raise StructuralError(
                    f"ActionState.{name} must have shape ({self.grid.n_x},), got {a.shape}"
                )
            object.__setattr__(self, name, a)

    def mass(self) -> float:
        return float(self.n.sum() * self.grid.dx)

    def validate(self) -> None:
        floor = HARD_NEG * max(1.0, float(np.abs(self.n).max()))
        if float(self.n.min()) < -floor:
            raise DataError("action density has solver-scale negative values")
        if abs(self.mass() - 1.0) > MASS_TOL:
            raise DataError(f"action density mass {self.mass()!r} deviates from 1")


# ----------------------------------------------------------- transport step


def max_force(V: Potential, grid: Grid1D, params: ParticleParams) -> float:
    return float(np.abs(V.grad(grid.x, params)).max())


def cfl_limit(grid: Grid1D, V: Potential, params: ParticleParams) -> float:
    """Largest admissible |dt| for the split transport step."""
    shear = params.m * grid.dx / grid.p_max
    fmax = max_force(V, grid, params)
    kick = grid.dp / fmax if fmax > 0 else np.inf
    return 0.5 * min(shear, kick)


def aliasing_fraction(values: np.ndarray, grid: Grid1D) -> float:
    """Mass fraction sitting in the outermost p-bins (both ends).

    Each edge band is summed with sign before taking magnitudes, so
    bin-scale interpolation ripple (alternating sign, e.g. under spectral
    transport of a near-delta ridge) cancels, while genuine wraparound
    pressure arrives sign-coherent and is caught at full weight.
    """
    ne = max(1, int(ALIAS_EDGE * grid.n_p))
    total = abs(float(values.sum()))
    if total == 0:
        return 0.0
    edge = abs(float(values[:, :ne].sum())) + abs(float(values[:, -ne:].sum()))
    return edge / total


def _check_aliasing(values: np.ndarray, grid: Grid1D) -> None:
    frac = aliasing_fraction(values, grid)
    if frac > ALIAS_BUDGET:
        raise AliasingError(
            f"{frac:.3e} of the mass in the outer p-bins (budget {ALIAS_BUDGET}); "
            "raise p_max or stop the run"
        )


def _require_box_grid(grid: Grid1D, V: Potential) -> None:
    half = 0.5 * V.L
    tol = 1e-12 * max(1.0, half)
    if abs(grid.x_min + half) > tol or abs(grid.x_max - half) > tol:
        raise ConfigurationError(
            f"box of length {V.L} needs the grid to span [-L/2, L/2), "
            f"got [{grid.x_min}, {grid.x_max})"
        )


def _pflip_index(n_p: int) -> np.ndarray:
    return (n_p - np.arange(n_p)) % n_p


@lru_cache(maxsize=8)
def _box_phase(grid: Grid1D, m: float, dt: float) -> np.ndarray:
    kx2 = 2.0 * np.pi * np.fft.fftfreq(2 * grid.n_x, d=grid.dx)
    ph = np.exp(-1j * np.outer(kx2, grid.p) * (dt / m))
    ph.flags.writeable = False
    return ph


@lru_cache(maxsize=8)
def _strang_phases(grid: Grid1D, V: Potential, m: float, dt: float):
    shear = np.exp(-1j * np.outer(grid.kx, grid.p) * (0.5 * dt / m))
    params = ParticleParams(m=m)
    kick = np.exp(1j * (V.grad(grid.x, params) * dt)[:, None] * grid.k[None, :])
    shear.flags.writeable = False
    kick.flags.writeable = False
    return shear, kick


def _box_stream(values: np.ndarray, grid: Grid1D, m: float, dt: float) -> np.ndarray:
    """Exact free streaming between reflecting walls via mirror doubling.

    The sample lattice is read as cell centers, with the walls on the cell
    faces flanking the domain; the mirror image then lands exactly on the
    ghost lattice (x-index J pairs with 2 n_x - 1 - J, momentum negated),
    free streaming on the doubled ring preserves that symmetry, and the
    restriction back to the physical half is the reflected solution.
    """
    n = grid.n_x
    ext = np.empty((2 * n, grid.n_p))
    ext[:n] = values
    ext[n:] = values[::-1, :][:, _pflip_index(grid.n_p)]
    ext = _fft.ifft(_fft.fft(ext, axis=0) * _box_phase(grid, m, dt), axis=0).real
    return ext[:n]


def liouville_step(
    f: PhaseSpaceField, V: Potential, params: ParticleParams, dt: float
) -> PhaseSpaceField:
    """One split transport step under the Hamiltonian flow of V.

    dt may be negative (that is how reversibility is exercised); the
    stability bound applies to |dt|.  Raises AliasingError if the result
    has pushed too much mass against the momentum cutoff.
    """
    g = f.grid
    if dt == 0:
        raise ParameterError("dt must be nonzero")
    limit = cfl_limit(g, V, params)
    if abs(dt) > limit:
        raise ParameterError(f"|dt|={abs(dt):.3e} exceeds the stability bound {limit:.3e}")
    if V.kind == "box":
        _require_box_grid(g, V)
        out = _box_stream(f.values, g, params.m, dt)
    else:
        shear, kick = _strang_phases(g, V, params.m, dt)
        v = _fft.ifft(_fft.fft(f.values, axis=0) * shear, axis=0)
        v = _fft.ifft(_fft.fft(v, axis=1) * kick, axis=1)
        out = _fft.ifft(_fft.fft(v, axis=0) * shear, axis=0).real
    _check_aliasing(out, g)
    return f.with_values(out)


def field_energy(f: PhaseSpaceField, V: Potential, params: ParticleParams) -> float:
    """Total energy sum of (p^2/2m + V) f dx dp."""
    g = f.grid
    kin = (f.values * (g.p**2)[None, :]).sum() / (2.0 * params.m)
    pot = (f.values.sum(axis=1) * V.value(g.x, params)).sum()
    return float((kin + pot) * g.dx * g.dp)


# ------------------------------------------------------------- action waves


def _deriv4(a: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order periodic central difference."""
    return (
        -np.roll(a, -2) + 8.0 * np.roll(a, -1) - 8.0 * np.roll(a, 1) + np.roll(a, 2)
    ) / (12.0 * dx)


def _support_span(n: np.ndarray) -> tuple[int, int]:
    idx = np.nonzero(n > N_FLOOR)[0]
    if idx.size == 0:
        raise DataError("density support is empty (everything below the floor)")
    return int(idx[0]), int(idx[-1])


def _extend_linear(a: np.ndarray, lo: int, hi: int, dx: float) -> np.ndarray:
    """Continue a linearly off the support edges, replacing vacuum values."""
    if lo == 0 and hi == len(a) - 1:
        return a
    out = a.copy()
    if lo > 0:
        slope = (a[lo + 1] - a[lo]) / dx if hi > lo else 0.0
        out[:lo] = a[lo] - slope * dx * np.arange(lo, 0, -1)
    if hi < len(a) - 1:
        slope = (a[hi] - a[hi - 1]) / dx if hi > lo else 0.0
        out[hi + 1 :] = a[hi] + slope * dx * np.arange(1, len(a) - hi)
    return out


def _action_rhs(nv, S, grid, V, params, gamma):
    lo, hi = _support_span(nv)
    Se = _extend_linear(S, lo, hi, grid.dx)
    slope = _deriv4(Se, grid.dx)
    u = slope / params.m
    dn = -_deriv4(nv * u, grid.dx)
    dS = -(slope**2 / (2.0 * params.m) + V.value(grid.x, params) + (gamma / params.m) * Se)
    dS = _extend_linear(dS, lo, hi, grid.dx)
    return dn, dS


def _action_step(s: ActionState, V: Potential, params: ParticleParams, dt: float, gamma: float) -> ActionState:
    if not dt > 0:
        raise ParameterError("dt must be positive")
    g = s.grid
    lo, hi = _support_span(s.n)
    Se = _extend_linear(s.S, lo, hi, g.dx)
    u = _deriv4(Se, g.dx) / params.m
    # caustic first: when both guards trip the physical singularity is the news
    conv = _deriv4(u, g.dx)
    if float(conv[lo : hi + 1].min()) <= -1.0 / dt:
        raise CausticError("characteristics about to cross (converging velocity field)")
    umax = float(np.abs(u[lo : hi + 1]).max())
    if dt * umax > g.dx:
        raise ParameterError(
            f"dt={dt:.3e} breaks the advective bound dx/max|u| = {g.dx / max(umax, 1e-300):.3e}"
        )

    def rhs(nv, S):
        return _action_rhs(nv, S, g, V, params, gamma)

    k1n, k1s = rhs(s.n, s.S)
    k2n, k2s = rhs(s.n + 0.5 * dt * k1n, s.S + 0.5 * dt * k1s)
    k3n, k3s = rhs(s.n + 0.5 * dt * k2n, s.S + 0.5 * dt * k2s)
    k4n, k4s = rhs(s.n + dt * k3n, s.S + dt * k3s)
    n_new = s.n + (dt / 6.0) * (k1n + 2 * k2n + 2 * k3n + k4n)
    S_new = s.S + (dt / 6.0) * (k1s + 2 * k2s + 2 * k3s + k4s)
    return ActionState(g, n_new, S_new)


def evolve_action_wave(
    s: ActionState, V: Potential, params: ParticleParams, dt: float
) -> ActionState:
    """Advance (n, S) one step: continuity plus the energy balance for S.

    Raises CausticError the moment the velocity field converges steeply
    enough (rate <= -1/dt) that characteristics would cross within the
    step; the state is then unusable for further single-valued evolution.
    """
    return _action_step(s, V, params, dt, gamma=0.0)


def action_to_phase_space(s: ActionState, grid: Grid1D) -> PhaseSpaceField:
    """Embed (n, S) as a narrow momentum ridge at the local slope of S.

    Each column carries a Gaussian of width 1.5 dp centered on the
    central-difference slope, normalized so the column mass is n(x) dx.
    """
    if grid is not s.grid and grid != s.grid:
        raise StructuralError("grid mismatch between ActionState and target grid")
    lo, hi = _support_span(s.n)
    Se = _extend_linear(s.S, lo, hi, grid.dx)
    ridge = _deriv4(Se, grid.dx)
    # off the support the slope is frozen at its edge value; the periodic
    # stencil would otherwise see the wrap jump of the extended ramp
    ridge[:lo] = ridge[lo]
    ridge[hi + 1 :] = ridge[hi]
    if float(np.abs(ridge[lo : hi + 1]).max()) > 0.9 * grid.p_max:
        raise CutoffError("slope of S exceeds 90% of the momentum cutoff")
    w = 1.5 * grid.dp
    prof = np.exp(-0.5 * ((grid.p[None, :] - ridge[:, None]) / w) ** 2)
    colmass = prof.sum(axis=1) * grid.dp
    vals = s.n[:, None] * prof / colmass[:, None]
    return PhaseSpaceField(grid, vals)


# ------------------------------------------------------- family coherence


def _gaussian_family_distance(f: PhaseSpaceField) -> float:
    g = f.grid
    w = f.values
    dxdp = g.dx * g.dp
    total = w.sum() * dxdp
    if not total > 0:
        raise NumericalError("cannot fit a Gaussian family to nonpositive mass")
    x = g.x[:, None]
    p = g.p[None, :]
    mx = (w * x).sum() * dxdp / total
    mp = (w * p).sum() * dxdp / total
    cxx = (w * (x - mx) ** 2).sum() * dxdp / total
    cpp = (w * (p - mp) ** 2).sum() * dxdp / total
    cxp = (w * (x - mx) * (p - mp)).sum() * dxdp / total
    det = cxx * cpp - cxp**2
    if not (cxx > 0 and cpp > 0 and det > 0):
        raise NumericalError("second moments do not define a Gaussian (fit failed)")
    quad = (cpp * (x - mx) ** 2 - 2 * cxp * (x - mx) * (p - mp) + cxx * (p - mp) ** 2) / det
    model = total / (2 * np.pi * np.sqrt(det)) * np.exp(-0.5 * quad)
    return float(np.sqrt(((w - model) ** 2).sum() / (w**2).sum()))


def _action_family_distance(f: PhaseSpaceField) -> float:
    g = f.grid
    w = f.values
    colmass = w.sum(axis=1) * g.dp
    model = np.zeros_like(w)
    live = colmass > N_FLOOR
    if not live.any():
        raise NumericalError("no live columns to fit an action ridge")
    wl = w[live]
    ml = colmass[live]
    pbar = (wl * g.p[None, :]).sum(axis=1) * g.dp / ml
    var = (wl * (g.p[None, :] - pbar[:, None]) ** 2).sum(axis=1) * g.dp / ml
    if np.any(var <= 0):
        raise NumericalError("nonpositive ridge width (fit failed)")
    var = np.maximum(var, (0.5 * g.dp) ** 2)
    prof = np.exp(-0.5 * (g.p[None, :] - pbar[:, None]) ** 2 / var[:, None])
    prof *= (ml / (prof.sum(axis=1) * g.dp))[:, None]
    model[live] = prof
    return float(np.sqrt(((w - model) ** 2).sum() / (w**2).sum()))


def coherence_defect(history, template: str) -> float:
    """Worst normalized L2 distance from the declared shape family.

    template "gaussian" fits a full-covariance Gaussian through the field
    moments of each snapshot; template "action" fits an independent
    Gaussian ridge (mass, center, width) to every x-column.  A history
    that keeps its functional form scores near zero; shape loss shows up
    as growth of the defect.
    """
    if len(history) < 2:
        raise StructuralError("need at least two snapshots to track coherence")
    if template == "gaussian":
        dist = _gaussian_family_distance
    elif template == "action":
        dist = _action_family_distance
    else:
        raise ParameterError(f"unknown template {template!r}")
    return max(dist(f) for f in history)
