"""Exception and warning types shared across modules."""


class ValidationError(ValueError):
    """Invalid parameters or preconditions."""


class FrequencyRangeError(ValidationError):
    """Frequency outside the range covered by a tabulated model."""


class AbsorptionError(ValidationError):
    """A non-absorbing formula was asked to evaluate where absorption matters."""


class AnomalousDispersionError(ArithmeticError):
    """d(omega n_R)/d omega vanishes, so the group velocity is singular."""


class QuadratureError(ArithmeticError):
    """An adaptive quadrature failed to reach the requested tolerance."""


class EvanescentWarning(UserWarning):
    """Permittivity on the negative real axis: purely imaginary index."""


class ConvergenceWarning(UserWarning):
    """Grid refinement disagrees; the result is discretization dominated."""


class ResolutionWarning(UserWarning):
    """A sampling grid is too coarse for the feature it must resolve."""


class AnomalousDispersionWarning(UserWarning):
    """Group velocity is non-positive or singular; the mode-density formula does not apply."""


class DivergenceError(ValidationError):
    """An integral that is finite only for absorbing media was asked for eps_I = 0."""
