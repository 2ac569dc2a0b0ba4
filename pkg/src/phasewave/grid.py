"""Uniform periodic phase-space lattice and the momentum<->frequency pairing.

The momentum axis carries a hard cutoff: p runs over [-p_max, p_max) in n_p
uniform bins, and the conjugate frequency lattice is fixed by the cutoff
alone, dk = pi/p_max.  On that lattice the transform pair

    ft(x, k) = sum_p e^{+ikp} f(x, p) dp
    f(x, p)  = sum_k e^{-ikp} ft(x, k) dk / (2 pi)

is exact (round trips reproduce the input to rounding), because
dk * dp * n_p = 2 pi.  Both directions reduce to a single FFT along the
momentum axis plus an alternating-sign twist that accounts for the lattice
starting at -p_max instead of 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _fft
from .errors import DataError, ParameterError, StructuralError

# Field-content policy knobs (see the type invariants):
EPS_NEG = 1e-12     # tolerated spectral undershoot on pristine data
HARD_NEG = 1e-6     # relative undershoot that counts as solver failure
N_FLOOR = 1e-10     # density floor for ratios like j/n
MASS_TOL = 1e-9


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid1D:
    """Periodic x-lattice times cutoff p-lattice.

    Parameters
    ----------
    x_min, x_max : float
        Coordinate bounds; the lattice is periodic on [x_min, x_max).
    n_x : int
        Coordinate points, a power of two >= 8.
    p_max : float
        Momentum cutoff; the p-lattice spans [-p_max, p_max).
    n_p : int
        Momentum points, a power of two >= 8.
    """

    x_min: float
    x_max: float
    n_x: int
    p_max: float
    n_p: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ParameterError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if not self.p_max > 0:
            raise ParameterError(f"need p_max > 0, got {self.p_max}")
        for name, n in (("n_x", self.n_x), ("n_p", self.n_p)):
            if not (_is_pow2(n) and n >= 8):
                raise ParameterError(f"{name} must be a power of two >= 8, got {n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / self.n_p

    @property
    def dk(self) -> float:
        return np.pi / self.p_max

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(self.x_min + self.dx * np.arange(self.n_x))

    @cached_property
    def p(self) -> np.ndarray:
        return _readonly(-self.p_max + self.dp * np.arange(self.n_p))

    @cached_property
    def k(self) -> np.ndarray:
        """Frequency lattice conjugate to p (fftfreq order, spacing dk)."""
        return _readonly(2.0 * np.pi * np.fft.fftfreq(self.n_p, d=self.dp))

    @cached_property
    def kx(self) -> np.ndarray:
        """Frequency lattice conjugate to x (fftfreq order)."""
        return _readonly(2.0 * np.pi * np.fft.fftfreq(self.n_x, d=self.dx))

    @cached_property
    def _phase_p(self) -> np.ndarray:
        # (-1)^l for integer frequency index l: the twist that moves the
        # transform origin to the lattice start at -p_max.  Exact by
        # construction, no trig roundoff.
        idx = np.rint(np.fft.fftfreq(self.n_p) * self.n_p).astype(int)
        return _readonly(np.where(idx % 2 == 0, 1.0, -1.0))


@dataclass(frozen=True)
class ParticleParams:
    """Particle mass and the action scale of the wave-mechanical limit."""

    m: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"mass must be positive, got {self.m}")
        if not self.sigma > 0:
            raise ParameterError(f"action scale must be positive, got {self.sigma}")


def _as_2d(grid: Grid1D, values, what: str) -> np.ndarray:
    v = np.asarray(values)
    if v.shape != (grid.n_x, grid.n_p):
        raise StructuralError(
            f"{what} must have shape ({grid.n_x}, {grid.n_p}), got {v.shape}"
        )
    return v


@dataclass(frozen=True)
class PhaseSpaceField:
    """Real density f(x, p) sampled on a Grid1D.

    Step functions treat instances as immutable snapshots and return new
    ones; nothing in the package mutates `values` in place.
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _as_2d(self.grid, self.values, "PhaseSpaceField.values")
        if np.iscomplexobj(v):
            raise StructuralError("PhaseSpaceField.values must be real")
        object.__setattr__(self, "values", v.astype(float, copy=False))

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.dx * self.grid.dp)

    def validate(self, strict: bool = False) -> None:
        """Enforce sign and normalization invariants.

        strict=True applies the pristine-data undershoot bound; the default
        allows relative spectral ringing but still rejects solver-failure
        scale negativity.  Wigner quasi-densities are genuinely negative in
        interference regions and are not run through this check.
        """
        lo = float(self.values.min())
        if strict:
            floor = EPS_NEG
        else:
            floor = HARD_NEG * max(1.0, float(np.abs(self.values).max()))
        if lo < -floor:
            raise DataError(f"negative density {lo:.3e} below -{floor:.3e}")
        m = self.mass()
        if abs(m - 1.0) > MASS_TOL:
            raise DataError(f"field mass {m!r} deviates from 1 beyond {MASS_TOL}")

    def with_values(self, values) -> "PhaseSpaceField":
        return PhaseSpaceField(self.grid, values)


@dataclass(frozen=True)
class KSpaceField:
    """Complex transform ft(x, k) of a phase-space field."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _as_2d(self.grid, self.values, "KSpaceField.values")
        object.__setattr__(self, "values", v.astype(complex, copy=False))

    def hermitian_defect(self) -> float:
        """Max |ft(x,-k) - conj(ft(x,k))| relative to the field scale."""
        v = self.values
        n = self.grid.n_p
        mirror = v[:, (-np.arange(n)) % n]
        scale = max(float(np.abs(v).max()), 1e-300)
        return float(np.abs(mirror - v.conj()).max() / scale)

    def validate(self, tol: float = 1e-8) -> None:
        d = self.hermitian_defect()
        if d > tol:
            raise DataError(f"Hermitian symmetry violated: defect {d:.3e} > {tol}")
        row0 = self.values[:, 0]
        scale = max(float(np.abs(self.values).max()), 1e-300)
        if np.abs(row0.imag).max() > tol * scale:
            raise DataError("k=0 row of a KSpaceField must be real")
        if float(row0.real.min()) < -HARD_NEG * max(1.0, scale):
            raise DataError("k=0 row of a KSpaceField must be a density")


@dataclass(frozen=True)
class MomentFields:
    """Local densities: mass n, current j, kinetic energy eps, cubic chi."""

    grid: Grid1D
    n: np.ndarray
    j: np.ndarray
    eps: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        for name in ("n", "j", "eps", "chi"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (self.grid.n_x,):
                raise StructuralError(
                    f"MomentFields.{name} must have shape ({self.grid.n_x},), got {a.shape}"
                )
            object.__setattr__(self, name, a)

    def mass(self) -> float:
        return float(self.n.sum() * self.grid.dx)

    def validate(self, params: ParticleParams | None = None) -> None:
        if float(self.n.min()) < -EPS_NEG:
            raise DataError("moment density n has negative entries")
        if abs(self.mass() - 1.0) > MASS_TOL:
            raise DataError("moment density mass deviates from 1")
        if params is not None:
            # Kinetic energy can't undercut the bulk-flow energy (Cauchy-Schwarz).
            sup = self.n > N_FLOOR
            bound = params.m * self.j[sup] ** 2 / (2.0 * self.n[sup])
            if np.any(self.eps[sup] < bound - EPS_NEG):
                raise DataError("eps < m j^2 / 2n somewhere on the support")


def fourier_p_to_k(f: PhaseSpaceField) -> KSpaceField:
    """Transform momentum to frequency: ft(x,k) = sum_p e^{ikp} f(x,p) dp."""
    g = f.grid
    ft = (g.dp * g.n_p) * (g._phase_p * _fft.ifft(f.values, axis=1))
    return KSpaceField(g, ft)


def fourier_k_to_p(ft: KSpaceField, hermitian_tol: float = 1e-8) -> PhaseSpaceField:
    """Invert fourier_p_to_k.

    The input must be Hermitian in k to `hermitian_tol` (relative); the
    field is symmetrized onto the exactly-Hermitian subspace before the
    transform so the output is real by construction, and the residual
    imaginary part (pure roundoff) is discarded.
    """
    g = ft.grid
    d = ft.hermitian_defect()
    if d > hermitian_tol:
        raise DataError(f"Hermitian symmetry violated: defect {d:.3e} > {hermitian_tol}")
    v = ft.values
    mirror = v[:, (-np.arange(g.n_p)) % g.n_p]
    vh = 0.5 * (v + mirror.conj())
    out = (g.dk / (2.0 * np.pi)) * _fft.fft(g._phase_p * vh, axis=1)
    return PhaseSpaceField(g, out.real)


def moments(f: PhaseSpaceField, params: ParticleParams) -> MomentFields:
    """Riemann-sum momentum moments of f: n, j, eps, chi.

    Uses the same quadrature as mass so that the k=0 transform row and the
    n moment agree to rounding.  Reductions are plain numpy sums, never
    BLAS, to keep results independent of library threading.
    """
    g = f.grid
    w = f.values
    p = g.p
    m = params.m
    n = w.sum(axis=1) * g.dp
    j = (w * p).sum(axis=1) * (g.dp / m)
    eps = (w * p**2).sum(axis=1) * (g.dp / (2.0 * m))
    chi = (w * p**3).sum(axis=1) * (g.dp / (4.0 * m * m))
    return MomentFields(g, n, j, eps, chi)
