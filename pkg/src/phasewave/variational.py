"""Conjugate-pair machinery: functionals, gradients, gauge, symplectic form.

The density n and generating function S form a canonical pair: the energy
functional H[n, S] generates continuity and the energy-balance law as its
Hamilton equations.  This module evaluates the functionals, checks the
functional derivatives against finite differences of the discrete H,
verifies that shifting S by a constant leaves the density evolution
untouched, and confirms that the canonical two-form agrees with its
wave-function pullback.

S generically carries a linear ramp (a momentum boost), which a plain
spectral derivative would shred at the seam; derivatives of S therefore
split off the lattice-chord slope first and differentiate the periodic
remainder spectrally.  The chord slope is linear in S, so the discrete
functional calculus stays exact.
"""
from __future__ import annotations

import numpy as np

from . import _fft
from .errors import NodeError, NumericalError, ParameterError, StructuralError
from .grid import Grid1D, N_FLOOR, ParticleParams
from .liouville import ActionState, Potential, evolve_action_wave

GAUGE_GRAIN = 2.0**-33   # shared representation grain for exact constant shifts


def _spectral_dx(v: np.ndarray, grid: Grid1D) -> np.ndarray:
    return _fft.ifft(1j * grid.kx * _fft.fft(v)).real


def ramp_split(S: np.ndarray, grid: Grid1D) -> tuple[float, np.ndarray]:
    """Split S into chord slope a and remainder r with matched endpoints.

    a is the end-to-end slope, exact for pure ramps and linear in S; the
    remainder r = S - a x has equal first and last samples, so its
    spectral derivative is free of the seam sawtooth.
    """
    a = float((S[-1] - S[0]) / ((grid.n_x - 1) * grid.dx))
    return a, S - a * grid.x


def slope_of(S: np.ndarray, grid: Grid1D) -> np.ndarray:
    """d_x S with the ramp handled exactly and the remainder spectral."""
    a, r = ramp_split(S, grid)
    return a + _spectral_dx(r, grid)


def hamiltonian_functional(s: ActionState, V: Potential, params: ParticleParams) -> float:
    """Energy of the pair: integral of n [(d_x S)^2/2m + V] dx."""
    g = s.grid
    u2 = slope_of(s.S, g) ** 2
    return float((s.n * (u2 / (2.0 * params.m) + V.value(g.x, params))).sum() * g.dx)


def action_functional(traj, V: Potential, params: ParticleParams, dt: float) -> float:
    """Discrete action of a snapshot trajectory at uniform spacing dt.

    Sums -n [d_t S + (d_x S)^2/2m + V] dx dt over the interior snapshots,
    with d_t S evaluated by centered differences; the two endpoint
    snapshots only serve as difference stencil arms.  Vanishes to O(dt^2)
    on trajectories that solve the pair equations.
    """
    traj = list(traj)
    if len(traj) < 3:
        raise StructuralError("action_functional needs at least 3 snapshots")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    g = traj[0].grid
    for s in traj:
        if s.grid != g:
            raise StructuralError("trajectory snapshots must share one grid")
    Vx = V.value(g.x, params)
    total = 0.0
    for k in range(1, len(traj) - 1):
        dS_dt = (traj[k + 1].S - traj[k - 1].S) / (2.0 * dt)
        u2 = slope_of(traj[k].S, g) ** 2
        bracket = dS_dt + u2 / (2.0 * params.m) + Vx
        total -= float((traj[k].n * bracket).sum() * g.dx) * dt
    return total


def _fd_gradient(values_h, base: np.ndarray, eps: float, dx: float) -> np.ndarray:
    """Central finite-difference d H / d(value dx), one bump per lattice point."""
    out = np.empty(base.size)
    bump = eps / dx
    for j in range(base.size):
        plus = base.copy()
        minus = base.copy()
        plus[j] += bump
        minus[j] -= bump
        out[j] = (values_h(plus) - values_h(minus)) / (2.0 * eps)
    return out


def functional_gradient_check(
    s: ActionState, V: Potential, params: ParticleParams, eps: float = 1e-5
) -> tuple[float, float]:
    """Compare the pair equations with finite differences of the energy.

    The continuity rate is the S-derivative of H and the energy-balance
    rate its n-derivative:

        d_t n =  dH/dS = -d_x(n d_x S / m)
        d_t S = -dH/dn = -[(d_x S)^2/2m + V]

    Both sides are evaluated on the lattice (derivative d/d(value dx), so
    the bounds are grid-independent) and the maximum relative mismatches
    come back as (err_n, err_S).  H is linear in n and quadratic in S, so
    central differences carry no truncation term; if the mismatch still
    fails to shrink under eps-halving something is genuinely broken and
    NumericalError is raised.
    """
    g = s.grid
    if not eps > 0:
        raise ParameterError("eps must be positive")

    def h_of_S(S):
        return hamiltonian_functional(ActionState(g, s.n, S), V, params)

    def h_of_n(n):
        return hamiltonian_functional(ActionState(g, n, s.S), V, params)

    u = slope_of(s.S, g)
    nu = s.n * u
    # Exact gradient of the discrete H.  The chord slope reads S at the two
    # lattice ends, so the adjoint carries a two-point seam response on top
    # of the continuum term -d_x(n u / m); for localized states it sits in
    # vacuum and is invisible to the physics.
    seam = float((nu * (1.0 - _spectral_dx(g.x, g))).sum())
    chord_response = np.zeros(g.n_x)
    chord_response[0] = -seam / ((g.n_x - 1) * g.dx)
    chord_response[-1] = seam / ((g.n_x - 1) * g.dx)
    analytic_n = (-_spectral_dx(nu, g) + chord_response) / params.m  # = dH/dS
    analytic_S = u**2 / (2.0 * params.m) + V.value(g.x, params)      # = dH/dn

    def evaluate(e):
        with np.errstate(over="ignore", invalid="ignore"):
            fd_n = _fd_gradient(h_of_S, s.S, e, g.dx)
            fd_S = _fd_gradient(h_of_n, s.n, e, g.dx)
        scale_n = max(float(np.abs(analytic_n).max()), float(np.abs(fd_n).max()), 1e-300)
        scale_S = max(float(np.abs(analytic_S).max()), float(np.abs(fd_S).max()), 1e-300)
        return (
            float(np.abs(fd_n - analytic_n).max()) / scale_n,
            float(np.abs(fd_S - analytic_S).max()) / scale_S,
        )

    err_n, err_S = evaluate(eps)
    if not (max(err_n, err_S) <= 1e-6):   # NaN-safe: overflow lands here too
        half_n, half_S = evaluate(0.5 * eps)
        if not (max(half_n, half_S) <= 0.5 * max(err_n, err_S)):
            raise NumericalError(
                f"functional gradients do not converge: eps={eps:g} gives "
                f"({err_n:.3e}, {err_S:.3e}), eps/2 gives ({half_n:.3e}, {half_S:.3e})"
            )
        err_n, err_S = half_n, half_S
    return err_n, err_S


def gauge_invariance_check(
    s: ActionState,
    V: Potential,
    params: ParticleParams,
    c_of_t,
    dt: float,
) -> float:
    """Largest density change from shifting S by the constant c(0).

    Only d_x S enters the density equation, so adding a constant to S
    must leave the evolved n untouched.  Both S and the shift are
    aligned on a shared representation grain first, so the shifted input
    is exact and the comparison measures the evolution operator alone,
    not the rounding of S + c.
    """
    g = s.grid
    c0 = float(c_of_t(0.0))
    Sq = np.round(s.S / GAUGE_GRAIN) * GAUGE_GRAIN
    cq = round(c0 / GAUGE_GRAIN) * GAUGE_GRAIN
    base = evolve_action_wave(ActionState(g, s.n, Sq), V, params, dt)
    shifted = evolve_action_wave(ActionState(g, s.n, Sq + cq), V, params, dt)
    return float(np.abs(base.n - shifted.n).max())


def symplectic_forms(
    s: ActionState,
    params: ParticleParams,
    tangent_a,
    tangent_b,
) -> tuple[float, float]:
    """Evaluate the canonical two-form and its wave pullback on a tangent pair.

    The first value is integral (dn_a dS_b - dn_b dS_a) dx on the pair;
    the second is the same form evaluated through psi = sqrt(n) e^{iS/sigma}
    with the pushed-forward tangents.  Tangent densities are projected onto
    zero total mass first (normalization is a constraint surface).
    Raises NodeError where n touches the density floor, since the
    pushforward divides by sqrt(n).
    """
    g = s.grid
    if float(s.n.min()) <= N_FLOOR:
        raise NodeError("density touches the floor; the wave pullback is singular")
    sigma = params.sigma

    def unpack(tan):
        dn = np.asarray(tan[0], dtype=float)
        dS = np.asarray(tan[1], dtype=float)
        if dn.shape != (g.n_x,) or dS.shape != (g.n_x,):
            raise StructuralError(f"tangent arrays must have shape ({g.n_x},)")
        return dn - dn.sum() / g.n_x, dS

    dn_a, dS_a = unpack(tangent_a)
    dn_b, dS_b = unpack(tangent_b)
    omega_1 = float(((dn_a * dS_b - dn_b * dS_a)).sum() * g.dx)

    root = np.sqrt(s.n)
    phase = np.exp(1j * s.S / sigma)
    dpsi_a = phase * (dn_a / (2.0 * root) + 1j * root * dS_a / sigma)
    dpsi_b = phase * (dn_b / (2.0 * root) + 1j * root * dS_b / sigma)
    omega_2 = float(
        (-1j * sigma * (np.conj(dpsi_a) * dpsi_b - np.conj(dpsi_b) * dpsi_a).sum() * g.dx).real
    )
    return omega_1, omega_2


def symplectic_identity_check(
    s: ActionState,
    params: ParticleParams,
    tangent_a,
    tangent_b,
) -> float:
    """Relative gap between the two evaluations of symplectic_forms."""
    omega_1, omega_2 = symplectic_forms(s, params, tangent_a, tangent_b)
    scale = max(abs(omega_1), abs(omega_2), 1e-300)
    return abs(omega_1 - omega_2) / scale
