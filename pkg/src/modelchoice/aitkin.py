"""Posterior distribution of the likelihood and the quantities built on it.

Everything here treats the likelihood ``L(theta, x)`` as a random variable
under the posterior: its survival function, its posterior mean, the DIC
deviance summaries, likelihood ratios formed from separately simulated
posteriors, Scott/Congdon-style normalized weights, and the harmonic-mean
estimator of the marginal likelihood.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import EmptyDraws, ImproperPosterior
from .models import (
    ModelSpec,
    ParamDraws,
    PriorSpec,
    as_dataset,
    derive_seed,
    log_likelihood,
    posterior_update,
    sample,
)

CONSTRUCTIONS = ("product", "joint")
ESTIMATORS = ("posterior_mean", "posterior_mode")


@dataclass(frozen=True, eq=False)
class LrSample:
    """Draws of log L1(theta1, x) - log L2(theta2, x)."""

    log_ratios: np.ndarray
    construction: str
    model_pair: tuple
    seed: int

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}")
        if not np.all(np.isfinite(self.log_ratios)):
            raise ValueError("log ratios must be finite")

    def __len__(self):
        return self.log_ratios.shape[0]

    def prob_gt1(self) -> float:
        """Pr(LR > 1); exact ties (log ratio 0) do not count."""
        _require_draws(self.log_ratios)
        return float(np.mean(self.log_ratios > 0))

    def prob_gt1_se(self) -> float:
        p = self.prob_gt1()
        return math.sqrt(p * (1 - p) / len(self))


@dataclass(frozen=True)
class DicReport:
    d_bar: float
    d_hat: float
    p_d: float
    dic: float
    estimator_used: str

    @classmethod
    def build(cls, d_bar: float, d_hat: float, estimator: str) -> "DicReport":
        p_d = d_bar - d_hat
        return cls(d_bar, d_hat, p_d, p_d + d_bar, estimator)


def _require_draws(values):
    if len(values) == 0:
        raise EmptyDraws("no draws to summarize")


def log_likelihood_values(model: ModelSpec, data, draws: ParamDraws) -> np.ndarray:
    """log L(theta_i, x) for every draw."""
    _require_draws(draws.values)
    values = log_likelihood(model, draws.values, data)
    return np.asarray(values, dtype=float)


def likelihood_cdf_complement(model: ModelSpec, data, draws: ParamDraws, z: float) -> float:
    """Monte Carlo F(z) = Pr(L(theta, x) > z | x), compared in log scale."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    ll = log_likelihood_values(model, data, draws)
    log_z = -math.inf if z == 0 else math.log(z)
    return float(np.mean(ll > log_z))


def posterior_expected_likelihood(model: ModelSpec, data, draws: ParamDraws) -> float:
    """Monte Carlo E[L(theta, x) | x]; converges to m(x, x) / m(x)."""
    ll = log_likelihood_values(model, data, draws)
    return float(np.exp(special.logsumexp(ll) - math.log(ll.size)))


def deviance(model: ModelSpec, param, data):
    return -2.0 * log_likelihood(model, param, data)


def dic(model: ModelSpec, data, draws: ParamDraws, estimator: str = "posterior_mean") -> DicReport:
    """DIC summaries from posterior draws.

    ``posterior_mean`` plugs in the average of the draws; ``posterior_mode``
    uses the analytic conjugate mode.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    ll = log_likelihood_values(model, data, draws)
    d_bar = float(np.mean(-2.0 * ll))
    if estimator == "posterior_mean":
        theta_hat = float(np.mean(draws.values))
    else:
        theta_hat = posterior_update(model, data).mode()
    d_hat = float(deviance(model, theta_hat, data))
    return DicReport.build(d_bar, d_hat, estimator)


def _pair_seeds(model1: ModelSpec, model2: ModelSpec, seed: int, tag: str):
    """Per-model stream seeds that follow the model, not its position.

    Distinct models get streams keyed by a canonical ordering so that swapping
    the pair swaps the draws too; identical models fall back to position.
    """
    k1, k2 = repr(model1), repr(model2)
    if k1 <= k2:
        return derive_seed(seed, tag, 0), derive_seed(seed, tag, 1)
    return derive_seed(seed, tag, 1), derive_seed(seed, tag, 0)


def lr_product_draws(model1: ModelSpec, model2: ModelSpec, data, count: int, seed: int) -> LrSample:
    """Likelihood ratios from independent draws of the two separate posteriors."""
    data = as_dataset(data)
    post1 = posterior_update(model1, data)
    post2 = posterior_update(model2, data)
    s1, s2 = _pair_seeds(model1, model2, seed, "product")
    d1 = sample(model1, post1, count, s1)
    d2 = sample(model2, post2, count, s2)
    if count == 0:
        return LrSample(np.empty(0), "product", (model1, model2), seed)
    lr = log_likelihood_values(model1, data, d1) - log_likelihood_values(model2, data, d2)
    return LrSample(lr, "product", (model1, model2), seed)


def scott_congdon_weights(models, rho, data, count: int, seed: int) -> np.ndarray:
    """Per-draw weights rho_i L(theta_i) / sum_k rho_k L(theta_k), separate posteriors.

    Returns an array of shape ``(count, len(models))`` whose rows sum to one.
    """
    models = list(models)
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (len(models),) or np.any(rho < 0) or abs(rho.sum() - 1.0) > 1e-12:
        raise ValueError("rho must be a probability vector, one entry per model")
    data = as_dataset(data)
    posts = [posterior_update(model, data) for model in models]
    if count == 0:
        return np.empty((0, len(models)))
    cols = []
    for k, (model, post) in enumerate(zip(models, posts)):
        draws = sample(model, post, count, derive_seed(seed, "scott-congdon", k))
        cols.append(log_likelihood_values(model, data, draws))
    with np.errstate(divide="ignore"):
        logw = np.column_stack(cols) + np.log(rho)[None, :]
    logw -= special.logsumexp(logw, axis=1, keepdims=True)
    return np.exp(logw)


def harmonic_mean_marginal(model: ModelSpec, data, draws: ParamDraws) -> float:
    """[mean of 1/L(theta_i, x)]^-1 over posterior draws, in log scale."""
    ll = log_likelihood_values(model, data, draws)
    return float(np.exp(-(special.logsumexp(-ll) - math.log(ll.size))))


def prior_sampling_marginal(model: ModelSpec, data, count: int, seed: int) -> float:
    """Plain Monte Carlo m(x) = E_prior[L(theta, x)]; the stable comparison estimator."""
    draws = sample(model, model.prior, count, seed, source="prior")
    ll = log_likelihood_values(model, data, draws)
    return float(np.exp(special.logsumexp(ll) - math.log(ll.size)))


def beta_binomial_predictive(successes: int, trials: int, future_trials: int, threshold: int,
                             prior: PriorSpec) -> float:
    """Exact Pr(Y <= threshold) for Y the number of successes in ``future_trials`` new trials.

    After ``successes`` out of ``trials`` the success probability is
    beta(a + s, b + t - s), and Y is beta-binomial:
    Pr(Y = y) = C(N, y) B(alpha + y, beta + N - y) / B(alpha, beta).

    >>> round(beta_binomial_predictive(1, 10, 20, 2, PriorSpec.beta(1, 1)), 3)
    0.447
    """
    if prior.kind != "beta":
        raise ValueError("the predictive check needs a beta prior")
    if not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials")
    if not 0 <= threshold <= future_trials:
        raise ValueError("need 0 <= threshold <= future_trials")
    a, b = prior.params
    alpha, beta_ = a + successes, b + trials - successes
    post = PriorSpec.beta(alpha, beta_)
    if not post.proper:
        raise ImproperPosterior(f"posterior {post} is not integrable")
    y = np.arange(threshold + 1)
    n = future_trials
    logp = (
        special.gammaln(n + 1) - special.gammaln(y + 1) - special.gammaln(n - y + 1)
        + special.betaln(alpha + y, beta_ + n - y) - special.betaln(alpha, beta_)
    )
    if threshold == future_trials:
        return 1.0
    return float(min(1.0, np.exp(special.logsumexp(logp))))


__all__ = [
    "DicReport",
    "LrSample",
    "beta_binomial_predictive",
    "deviance",
    "dic",
    "harmonic_mean_marginal",
    "likelihood_cdf_complement",
    "log_likelihood_values",
    "lr_product_draws",
    "posterior_expected_likelihood",
    "prior_sampling_marginal",
    "scott_congdon_weights",
]
