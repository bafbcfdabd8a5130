"""Exception hierarchy."""


class ModelChoiceError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ModelChoiceError, ValueError):
    """A parameter value lies outside the family's parameter space."""


class ImproperPrior(ModelChoiceError):
    """An operation needs a normalizable prior (marginal likelihood, Bayes factor)."""


class ImproperPosterior(ModelChoiceError):
    """A formal posterior does not integrate to a finite value."""


class ImproperDistribution(ModelChoiceError):
    """Sampling was requested from a non-normalizable density."""


class ImproperIntermediate(ImproperPosterior):
    """A training sample failed to turn an improper prior into a proper one."""


class EmptyDraws(ModelChoiceError):
    """A Monte Carlo summary was requested over zero draws."""


class AllInfinite(ModelChoiceError):
    """No point of a search bracket has a finite divergence."""


class DegenerateData(ModelChoiceError):
    """The maximum likelihood estimate sits on the boundary of the parameter space."""


class QuadratureCoverageWarning(UserWarning):
    """The quadrature range leaves non-negligible integrand mass at its edges."""
