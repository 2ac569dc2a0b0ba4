"""Transport-step and action-wave tests against closed-form characteristics.

Oracles used here, all independent of the implementation:
  free flow        f(x, p, t) = f0(x - p t / m, p)
  uniform force g  f(x, p, t) = f0(x - p t/m + g t^2 / 2m, p - g t)
  harmonic         the blob orbits and returns exactly after one period
  box              method of images about the wall plane
  action ramp      n translates rigidly, S(x, t) = p0 x - p0^2 t / 2m
  action focusing  x(t) = x0 cos(wt):  n = n0(x / cos) / cos,
                   S = -(m w x^2 / 2) tan(wt)
"""
from __future__ import annotations

import numpy as np
import pytest

from phasewave import (
    ActionState,
    AliasingError,
    CausticError,
    ConfigurationError,
    CutoffError,
    Grid1D,
    ParameterError,
    ParticleParams,
    PhaseSpaceField,
    Potential,
    StructuralError,
    action_to_phase_space,
    cfl_limit,
    coherence_defect,
    evolve_action_wave,
    field_energy,
    liouville_step,
    moments,
)


def make_grid(x_span=8.0, p_max=4.0, n_x=64, n_p=64):
    return Grid1D(-x_span, x_span, n_x, p_max, n_p)


def blob(grid, x0, p0, vx, vp):
    """Unnormalized-tail Gaussian blob; amplitude set for unit nominal mass."""
    amp = 1.0 / (2.0 * np.pi * np.sqrt(vx * vp))
    vals = amp * np.exp(
        -((grid.x[:, None] - x0) ** 2) / (2 * vx) - ((grid.p[None, :] - p0) ** 2) / (2 * vp)
    )
    return PhaseSpaceField(grid, vals)


def blob_at_time(grid, x0, p0, vx, vp, m, g, t):
    """Closed-form free/uniform-force evolution of the blob initial data."""
    amp = 1.0 / (2.0 * np.pi * np.sqrt(vx * vp))
    x = grid.x[:, None]
    p = grid.p[None, :]
    x_back = x - p * t / m + 0.5 * g * t**2 / m
    p_back = p - g * t
    return amp * np.exp(-((x_back - x0) ** 2) / (2 * vx) - ((p_back - p0) ** 2) / (2 * vp))


def test_free_streaming_matches_characteristics():
    g = make_grid()
    params = ParticleParams(m=1.0)
    f = blob(g, -1.0, 0.5, 0.64, 0.16)
    V = Potential.free()
    dt, n_steps = 0.03, 50
    for _ in range(n_steps):
        f = liouville_step(f, V, params, dt)
    expected = blob_at_time(g, -1.0, 0.5, 0.64, 0.16, 1.0, 0.0, dt * n_steps)
    assert np.abs(f.values - expected).max() < 1e-9 * expected.max()


def test_uniform_force_matches_characteristics():
    g = Grid1D(-8.0, 8.0, 64, 6.0, 128)
    params = ParticleParams(m=1.0)
    f = blob(g, -1.0, 0.5, 0.64, 0.16)
    V = Potential.uniform(0.8)
    dt, n_steps = 0.015, 100
    for _ in range(n_steps):
        f = liouville_step(f, V, params, dt)
    expected = blob_at_time(g, -1.0, 0.5, 0.64, 0.16, 1.0, 0.8, dt * n_steps)
    assert np.abs(f.values - expected).max() < 1e-9 * expected.max()


def test_harmonic_period_return_peak_and_energy():
    # one full period at 256^2: the blob must come back to itself
    g = Grid1D(-6.0, 6.0, 256, 6.0, 256)
    params = ParticleParams(m=1.0)
    V = Potential.harmonic(1.0)
    f0 = blob(g, 2.0, 0.0, 0.25, 0.25)
    f = f0
    n_steps = 2048
    dt = 2.0 * np.pi / n_steps
    assert dt < cfl_limit(g, V, params)
    e0 = field_energy(f0, V, params)
    m_prev = f0.mass()
    peak0 = f0.values.max()
    for _ in range(n_steps):
        f = liouville_step(f, V, params, dt)
        m_now = f.mass()
        assert abs(m_now - m_prev) < 1e-12
        m_prev = m_now
    l2 = np.sqrt(((f.values - f0.values) ** 2).sum() / (f0.values**2).sum())
    assert l2 < 1e-3
    assert abs(f.values.max() - peak0) < 1e-4 * peak0
    assert abs(field_energy(f, V, params) - e0) < 1e-5 * abs(e0)


def test_harmonic_energy_drift_small_at_fine_dt():
    g = Grid1D(-6.0, 6.0, 128, 6.0, 128)
    params = ParticleParams(m=1.0)
    V = Potential.harmonic(1.0)
    f = blob(g, 1.5, 0.0, 0.25, 0.25)
    e0 = field_energy(f, V, params)
    for _ in range(1000):
        f = liouville_step(f, V, params, 1e-3)
    assert abs(field_energy(f, V, params) - e0) < 1e-6 * abs(e0)


def test_reversibility():
    g = Grid1D(-6.0, 6.0, 128, 6.0, 128)
    params = ParticleParams(m=1.0)
    V = Potential.harmonic(1.0)
    f0 = blob(g, 1.5, 0.5, 0.25, 0.25)
    f = f0
    dt = 2e-3
    for _ in range(50):
        f = liouville_step(f, V, params, dt)
    for _ in range(50):
        f = liouville_step(f, V, params, -dt)
    assert np.abs(f.values - f0.values).max() < 1e-10 * f0.values.max()


def test_box_bounce_matches_mirror_images():
    g = Grid1D(-8.0, 8.0, 256, 4.5, 128)
    params = ParticleParams(m=1.0)
    V = Potential.box(16.0)
    x0, p0, vx, vp = -2.0, 2.0, 0.5, 0.1
    f = blob(g, x0, p0, vx, vp)
    mass0 = f.mass()
    t_end, n_steps = 5.0, 1024
    dt = t_end / n_steps
    for _ in range(n_steps):
        f = liouville_step(f, V, params, dt)
    # image oracle: wall plane sits half a cell inside the nominal edge
    wall = g.x_max - 0.5 * g.dx
    amp = 1.0 / (2.0 * np.pi * np.sqrt(vx * vp))
    x = g.x[:, None]
    p = g.p[None, :]

    def free(xx, pp):
        return amp * np.exp(
            -((xx - pp * t_end - x0) ** 2) / (2 * vx) - ((pp - p0) ** 2) / (2 * vp)
        )

    expected = free(x, p) + free(2 * wall - x, -p)
    assert np.abs(f.values - expected).max() < 1e-8 * expected.max()
    assert abs(f.mass() - mass0) < 1e-12


def test_box_needs_matching_grid():
    g = Grid1D(-8.0, 8.0, 64, 4.0, 64)
    f = blob(g, 0.0, 0.0, 0.5, 0.5)
    with pytest.raises(ConfigurationError):
        liouville_step(f, Potential.box(10.0), ParticleParams(), 1e-3)


def test_step_size_guard():
    g = make_grid()
    f = blob(g, 0.0, 0.0, 0.5, 0.5)
    params = ParticleParams(m=1.0)
    V = Potential.harmonic(1.0)
    with pytest.raises(ParameterError):
        liouville_step(f, V, params, 10.0 * cfl_limit(g, V, params))
    with pytest.raises(ParameterError):
        liouville_step(f, V, params, 0.0)


def test_momentum_cutoff_pressure_detected():
    g = make_grid(p_max=4.0)
    f = blob(g, 0.0, 3.7, 0.5, 0.05)
    with pytest.raises(AliasingError):
        liouville_step(f, Potential.free(), ParticleParams(), 1e-3)


def test_quartic_step_self_convergence():
    # no closed form; the split is second order so halving dt against a
    # common fine reference gives error ratio (15/16)/(3/16) = 5
    g = Grid1D(-6.0, 6.0, 128, 6.0, 128)
    params = ParticleParams(m=1.0)
    V = Potential.quartic(0.5, 0.0, 0.02)
    f0 = blob(g, 1.5, 0.0, 0.25, 0.25)
    t_end = 0.24

    def run(n_steps):
        f = f0
        dt = t_end / n_steps
        for _ in range(n_steps):
            f = liouville_step(f, V, params, dt)
        return f.values

    ref = run(640)
    e1 = np.sqrt(((run(160) - ref) ** 2).sum())
    e2 = np.sqrt(((run(320) - ref) ** 2).sum())
    assert 3.8 < e1 / e2 < 6.5


# ---------------------------------------------------------- action waves


def normalized_density(grid, x0, sigma):
    n = np.exp(-((grid.x - x0) ** 2) / (2 * sigma**2))
    return n / (n.sum() * grid.dx)


def test_action_uniform_state_is_a_fixed_point():
    g = Grid1D(-8.0, 8.0, 64, 4.0, 64)
    n = np.full(g.n_x, 1.0 / g.length)
    s = ActionState(g, n, np.zeros(g.n_x))
    out = evolve_action_wave(s, Potential.free(), ParticleParams(), 1e-2)
    assert np.array_equal(out.n, s.n)
    assert np.array_equal(out.S, s.S)


def test_action_plane_ramp_translates_rigidly():
    g = Grid1D(-20.0, 20.0, 512, 4.0, 64)
    params = ParticleParams(m=1.0)
    p0 = 0.7
    s = ActionState(g, normalized_density(g, 0.0, 1.0), p0 * g.x)
    dt, n_steps = 2e-3, 250
    for _ in range(n_steps):
        s = evolve_action_wave(s, Potential.free(), params, dt)
    t = dt * n_steps
    expected_n = normalized_density(g, p0 * t, 1.0)
    expected_S = p0 * g.x - 0.5 * p0**2 * t
    assert np.abs(s.S - expected_S).max() < 1e-9
    assert np.abs(s.n - expected_n).max() < 1e-5
    assert abs(s.mass() - 1.0) < 1e-12


def test_action_harmonic_focusing_matches_closed_form():
    g = Grid1D(-20.0, 20.0, 512, 4.0, 64)
    params = ParticleParams(m=1.0)
    omega, sigma = 1.0, 1.5
    V = Potential.harmonic(omega)
    s = ActionState(g, normalized_density(g, 0.0, sigma), np.zeros(g.n_x))
    dt, n_steps = 2e-3, 500
    for _ in range(n_steps):
        s = evolve_action_wave(s, V, params, dt)
    t = dt * n_steps
    c = np.cos(omega * t)
    raw = np.exp(-(g.x**2) / (2 * sigma**2))
    norm = raw.sum() * g.dx
    expected_n = np.exp(-((g.x / c) ** 2) / (2 * sigma**2)) / (norm * c)
    expected_S = -0.5 * params.m * omega * np.tan(omega * t) * g.x**2
    core = s.n > 1e-6
    rel_l2 = np.sqrt(((s.n - expected_n) ** 2).sum() / (expected_n**2).sum())
    assert rel_l2 < 1e-3
    assert np.abs((s.S - expected_S)[core]).max() < 1e-6 * (1 + np.abs(expected_S).max())
    assert abs(s.mass() - 1.0) < 1e-10


def test_action_caustic_detected():
    g = Grid1D(-20.0, 20.0, 512, 4.0, 64)
    s = ActionState(g, normalized_density(g, 0.0, 2.0), -15.0 * g.x**2)
    with pytest.raises(CausticError):
        evolve_action_wave(s, Potential.free(), ParticleParams(), 0.05)


def test_action_advective_guard():
    g = Grid1D(-20.0, 20.0, 512, 4.0, 64)
    s = ActionState(g, normalized_density(g, 0.0, 2.0), -1.0 * g.x**2)
    with pytest.raises(ParameterError):
        evolve_action_wave(s, Potential.free(), ParticleParams(), 0.05)


def test_action_to_phase_space_ridge_moments():
    g = Grid1D(-20.0, 20.0, 256, 4.0, 128)
    params = ParticleParams(m=1.0)
    p0 = 1.3
    s = ActionState(g, normalized_density(g, 0.0, 1.5), p0 * g.x)
    f = action_to_phase_space(s, g)
    mom = moments(f, params)
    assert abs(f.mass() - 1.0) < 1e-12
    assert np.abs(mom.n - s.n).max() < 1e-12
    assert np.abs(mom.j - s.n * p0 / params.m).max() < 1e-10
    w = 1.5 * g.dp
    expected_eps = s.n * (p0**2 + w**2) / (2 * params.m)
    assert np.abs(mom.eps - expected_eps).max() < 1e-6 * expected_eps.max()


def test_action_to_phase_space_cutoff_guard():
    g = Grid1D(-20.0, 20.0, 256, 4.0, 128)
    s = ActionState(g, normalized_density(g, 0.0, 1.5), 0.95 * g.p_max * g.x)
    with pytest.raises(CutoffError):
        action_to_phase_space(s, g)


# ------------------------------------------------------- family coherence


def test_gaussian_template_scores_gaussians_and_flags_doubles():
    g = Grid1D(-8.0, 8.0, 128, 4.0, 128)
    f = blob(g, 0.5, 0.3, 0.4, 0.3)
    assert coherence_defect([f, f], "gaussian") < 1e-8
    two = PhaseSpaceField(g, 0.5 * (blob(g, -2.0, 0.0, 0.2, 0.2).values + blob(g, 2.0, 0.0, 0.2, 0.2).values))
    assert coherence_defect([f, two], "gaussian") > 0.05


def test_sheared_gaussian_still_in_family():
    # linear flow preserves Gaussians: free streaming must not raise the defect
    g = Grid1D(-8.0, 8.0, 128, 4.0, 128)
    params = ParticleParams(m=1.0)
    f = blob(g, -0.5, 0.0, 0.3, 0.3)
    history = [f]
    for _ in range(80):
        f = liouville_step(f, Potential.free(), params, 0.01)
        history.append(f)
    assert coherence_defect(history, "gaussian") < 1e-6


def test_quartic_flow_leaves_gaussian_family():
    g = Grid1D(-6.0, 6.0, 128, 6.0, 128)
    params = ParticleParams(m=1.0)
    V = Potential.quartic(0.5, 0.0, 0.1)
    f = blob(g, 1.2, 0.0, 0.09, 0.09)
    history = [f]
    for _ in range(1200):
        f = liouville_step(f, V, params, 5e-4)
    history.append(f)
    assert coherence_defect(history[:1] * 2, "gaussian") < 1e-6
    assert coherence_defect(history, "gaussian") > 0.02


def test_action_template_scores_ridge_fields():
    g = Grid1D(-20.0, 20.0, 256, 4.0, 128)
    s = ActionState(g, normalized_density(g, 0.0, 1.5), 0.9 * g.x)
    f = action_to_phase_space(s, g)
    assert coherence_defect([f, f], "action") < 1e-6


def test_coherence_defect_input_guards():
    g = Grid1D(-8.0, 8.0, 64, 4.0, 64)
    f = blob(g, 0.0, 0.0, 0.4, 0.4)
    with pytest.raises(StructuralError):
        coherence_defect([f], "gaussian")
    with pytest.raises(ParameterError):
        coherence_defect([f, f], "banana")
