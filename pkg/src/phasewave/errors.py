"""Exception types shared across the package."""
from __future__ import annotations


class PhasewaveError(Exception):
    """Base class for everything raised deliberately by this package."""


class StructuralError(PhasewaveError):
    """Shapes, dtypes, or required companion objects do not line up."""


class DataError(PhasewaveError):
    """Array content violates an invariant (symmetry, normalization, sign)."""


class ParameterError(PhasewaveError, ValueError):
    """A scalar argument is outside its admissible range."""


class ConfigurationError(PhasewaveError):
    """Mutually incompatible settings (grid, scale constants, config files)."""


class CausticError(PhasewaveError):
    """Characteristics of an action field are about to cross."""


class CutoffError(PhasewaveError):
    """Requested momentum content does not fit under the grid cutoff."""


class AliasingError(PhasewaveError, RuntimeError):
    """Too much mass has drifted into the outermost momentum bins."""


class EscapeError(PhasewaveError, RuntimeError):
    """Too many stochastic trajectories left the resolved window."""


class NodeError(PhasewaveError):
    """A density vanishes where a phase or a ratio has to be extracted."""


class UnwrapError(PhasewaveError):
    """Phase differences too steep to unwrap unambiguously."""


class NumericalError(PhasewaveError):
    """An iterative procedure or difference check failed to converge."""


class MeasurementError(PhasewaveError):
    """A fitted diagnostic could not be extracted from the data."""


class ResolutionWarning(UserWarning):
    """A reported residual is dominated by discretization, not physics."""
