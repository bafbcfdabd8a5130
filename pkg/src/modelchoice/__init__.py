"""Bayesian model-comparison laboratory.

Posterior distributions of likelihoods and likelihood ratios, DIC, Bayes
factors, pseudo-prior joint posteriors and their asymptotics, for
one-parameter conjugate families.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AllInfinite,
    DegenerateData,
    DomainError,
    EmptyDraws,
    ImproperDistribution,
    ImproperIntermediate,
    ImproperPosterior,
    ImproperPrior,
    ModelChoiceError,
)
from .kernels import BACKEND  # noqa: F401
from .models import (  # noqa: F401
    DataSet,
    Distribution,
    Family,
    ModelSpec,
    ParamDraws,
    PriorSpec,
    log_likelihood,
    marginal_likelihood,
    marginal_likelihood_quadrature,
    posterior_update,
    sample,
    sample_posterior,
)
