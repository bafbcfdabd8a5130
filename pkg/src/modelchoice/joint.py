"""Joint posterior over both models' parameters, with pseudo-priors.

Two models are compared through the mixture

    p1 m1(x) pi1(theta1 | x) pseudo2(theta2) + p2 m2(x) pi2(theta2 | x) pseudo1(theta1),

normalized. A model indicator is drawn with the posterior model
probabilities; the indicated model's parameter comes from its posterior and
the other parameter from its pseudo-prior (by default the model's own prior).
Likelihood ratios evaluated at these joint draws give the coherent
counterpart of the product-of-posteriors construction in ``aitkin``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels
from .aitkin import LrSample, log_likelihood_values
from .errors import EmptyDraws
from .models import (
    ModelSpec,
    ParamDraws,
    PriorSpec,
    as_dataset,
    derive_seed,
    log_likelihood,
    log_marginal_likelihood,
    posterior_update,
    sample,
)

DEFAULT_INNER = 1000
DEFAULT_OUTER = 2000
_CHUNK_ROWS = 256


@dataclass(frozen=True)
class ModelPairConfig:
    model1: ModelSpec
    model2: ModelSpec
    prior_prob1: float = 0.5
    pseudo_prior1: PriorSpec | None = None
    pseudo_prior2: PriorSpec | None = None

    def __post_init__(self):
        if not 0.0 < self.prior_prob1 < 1.0:
            raise ValueError("prior model probabilities must both be > 0")
        for j, model in ((1, self.model1), (2, self.model2)):
            attr = f"pseudo_prior{j}"
            pseudo = getattr(self, attr)
            if pseudo is None:
                if not model.prior.proper:
                    raise ValueError(f"model {j} has an improper prior; supply a proper pseudo-prior")
                object.__setattr__(self, attr, model.prior)
            elif not pseudo.proper:
                raise ValueError(f"pseudo-prior {j} must be proper")

    @property
    def prior_prob2(self) -> float:
        return 1.0 - self.prior_prob1

    def model(self, j: int) -> ModelSpec:
        return self.model1 if j == 1 else self.model2

    def pseudo(self, j: int) -> PriorSpec:
        return self.pseudo_prior1 if j == 1 else self.pseudo_prior2


@dataclass(frozen=True, eq=False)
class JointDraws:
    indicators: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    seed: int

    def __post_init__(self):
        if not (len(self.indicators) == len(self.theta1) == len(self.theta2)):
            raise ValueError("joint draw sequences must have equal length")

    def __len__(self):
        return len(self.indicators)


@dataclass(frozen=True)
class DecisionOutcome:
    chosen_model: int
    prob_f1_beats_f2: float
    threshold: float = 0.5


@dataclass(frozen=True)
class BeatsProbability:
    """Pr[f2(x|theta2) < f1(x|theta1) | x] estimated directly and through its mixture form."""

    direct: float
    direct_se: float
    decomposed: float | None = None
    decomposed_se: float | None = None

    @property
    def value(self) -> float:
        return self.direct

    @property
    def combined_se(self) -> float:
        return math.hypot(self.direct_se, self.decomposed_se or 0.0)

    def agree(self, k: float = 3.0) -> bool:
        if self.decomposed is None:
            raise ValueError("no decomposed estimate was computed")
        return abs(self.direct - self.decomposed) <= k * self.combined_se


def data_centered_pseudo_prior(model: ModelSpec, data, inflate: float = 1.0) -> PriorSpec:
    """Proper pseudo-prior matching the posterior's mean, with variance times ``inflate``.

    Useful when the model's own prior is improper and so cannot serve.
    """
    post = posterior_update(model, data)
    if post.kind == "point_mass":
        return post
    mean, var = post.mean(), post.variance() * inflate
    if post.kind == "gamma":
        return PriorSpec.gamma(mean**2 / var, mean / var)
    if post.kind == "beta":
        k = mean * (1 - mean) / var - 1.0
        if k <= 0:
            raise ValueError("inflated variance too large for a beta pseudo-prior")
        return PriorSpec.beta(mean * k, (1 - mean) * k)
    return PriorSpec.gaussian(mean, var)


def posterior_model_probs(config: ModelPairConfig, data) -> tuple[float, float]:
    """(pi(M1|x), pi(M2|x)) from prior probabilities and closed-form marginals."""
    data = as_dataset(data)
    lw1 = math.log(config.prior_prob1) + log_marginal_likelihood(config.model1, data)
    lw2 = math.log(config.prior_prob2) + log_marginal_likelihood(config.model2, data)
    norm = special.logsumexp([lw1, lw2])
    return math.exp(lw1 - norm), math.exp(lw2 - norm)


def bayes_factor(model1: ModelSpec, model2: ModelSpec, data) -> float:
    """m1(x) / m2(x); raises ``ImproperPrior`` if either prior is improper."""
    return math.exp(log_bayes_factor(model1, model2, data))


def log_bayes_factor(model1: ModelSpec, model2: ModelSpec, data) -> float:
    data = as_dataset(data)
    return log_marginal_likelihood(model1, data) - log_marginal_likelihood(model2, data)


def joint_posterior_draws(config: ModelPairConfig, data, count: int, seed: int) -> JointDraws:
    data = as_dataset(data)
    w1, _ = posterior_model_probs(config, data)
    post1 = posterior_update(config.model1, data)
    post2 = posterior_update(config.model2, data)
    rng = np.random.default_rng(derive_seed(seed, "joint", "indicator"))
    ind = np.where(rng.random(count) < w1, 1, 2).astype(np.int8)
    on1 = ind == 1

    def fill(model, post, pseudo, tag, on):
        out = np.empty(count)
        k = int(on.sum())
        out[on] = sample(model, post, k, derive_seed(seed, "joint", tag, 0)).values
        out[~on] = sample(model, pseudo, count - k, derive_seed(seed, "joint", tag, 1), "pseudo_prior").values
        return out

    theta1 = fill(config.model1, post1, config.pseudo_prior1, "theta1", on1)
    theta2 = fill(config.model2, post2, config.pseudo_prior2, "theta2", ~on1)
    return JointDraws(ind, theta1, theta2, seed)


def lr_joint_draws(config: ModelPairConfig, data, count: int, seed: int) -> LrSample:
    """log L1 - log L2 evaluated at draws from the joint posterior."""
    data = as_dataset(data)
    jd = joint_posterior_draws(config, data, count, seed)
    pair = (config.model1, config.model2)
    if count == 0:
        return LrSample(np.empty(0), "joint", pair, seed)
    lr = (np.asarray(log_likelihood(config.model1, jd.theta1, data), dtype=float)
          - np.asarray(log_likelihood(config.model2, jd.theta2, data), dtype=float))
    return LrSample(lr, "joint", pair, seed)


def _component(model_in, post_in, model_out, pseudo_out, data, outer, inner, seed, tag, greater):
    """Per outer pseudo-prior draw, the inner posterior fraction of wins for model 1.

    ``model_in`` is integrated by nested Monte Carlo under its posterior;
    ``model_out`` is held at each pseudo-prior draw.
    """
    outer_draws = sample(model_out, pseudo_out, outer, derive_seed(seed, tag, "outer"), "pseudo_prior")
    thresholds = log_likelihood_values(model_out, data, outer_draws)
    code, coef = model_in.family.kernel(data)
    counts = np.empty(outer, dtype=np.int64)
    for c, start in enumerate(range(0, outer, _CHUNK_ROWS)):
        rows = min(_CHUNK_ROWS, outer - start)
        inner_draws = sample(model_in, post_in, rows * inner, derive_seed(seed, tag, "inner", c))
        theta = inner_draws.values.reshape(rows, inner)
        counts[start:start + rows] = kernels.count_exceed(
            code, coef, theta, thresholds[start:start + rows], greater=greater
        )
    return counts / inner


def decomposed_prob_f1_beats_f2(config: ModelPairConfig, data, outer: int, inner: int, seed: int):
    """Mixture form of Pr[f2 < f1 | x]; returns (estimate, standard error).

    pi(M1|x) * E_{theta2 ~ pseudo2} Pr_{theta1 ~ pi1(.|x)}[l1 > l2]
      + pi(M2|x) * E_{theta1 ~ pseudo1} Pr_{theta2 ~ pi2(.|x)}[l1 > l2]
    """
    if outer < 2 or inner < 1:
        raise ValueError("need outer >= 2 and inner >= 1")
    data = as_dataset(data)
    w1, w2 = posterior_model_probs(config, data)
    post1 = posterior_update(config.model1, data)
    post2 = posterior_update(config.model2, data)
    est, var = 0.0, 0.0
    if w1 > 0:
        f1 = _component(config.model1, post1, config.model2, config.pseudo_prior2, data,
                        outer, inner, seed, "decomp1", greater=True)
        est += w1 * f1.mean()
        var += w1**2 * f1.var(ddof=1) / outer
    if w2 > 0:
        f2 = _component(config.model2, post2, config.model1, config.pseudo_prior1, data,
                        outer, inner, seed, "decomp2", greater=False)
        est += w2 * f2.mean()
        var += w2**2 * f2.var(ddof=1) / outer
    return float(est), math.sqrt(var)


def prob_f1_beats_f2(config: ModelPairConfig, data, count: int, seed: int, *,
                     decompose: bool = True, inner: int = DEFAULT_INNER,
                     outer: int = DEFAULT_OUTER) -> BeatsProbability:
    """Pr[f2(x|theta2) < f1(x|theta1) | x] under the joint posterior.

    The direct estimate is the fraction of joint draws where model 1's
    likelihood is strictly larger. With ``decompose`` the mixture form is
    estimated too (nested Monte Carlo, ``outer`` x ``inner`` draws per
    component) so the two can be cross-checked with ``agree``.
    """
    if count < 1:
        raise EmptyDraws("need at least one joint draw")
    lr = lr_joint_draws(config, data, count, seed)
    p = lr.prob_gt1()
    se = math.sqrt(p * (1 - p) / count)
    if not decompose:
        return BeatsProbability(p, se)
    dec, dec_se = decomposed_prob_f1_beats_f2(config, data, outer, inner, derive_seed(seed, "decomposition"))
    return BeatsProbability(p, se, dec, dec_se)


def bayes_decision(config: ModelPairConfig, data, count: int, seed: int) -> DecisionOutcome:
    """Bayes rule under the 0-1 likelihood-comparison loss.

    Chooses model 1 only when Pr[f2 < f1 | x] is strictly above 1/2;
    a probability of exactly 1/2 selects model 2.
    """
    prob = prob_f1_beats_f2(config, data, count, seed, decompose=False).direct
    return DecisionOutcome(1 if prob > 0.5 else 2, prob)


def posterior_mean_lr_point_null(null_value: float, full_model: ModelSpec, data, draws: ParamDraws) -> float:
    """Monte Carlo mean of f(x|theta0) / f(x|theta) over the full model's posterior.

    Its limit is the Bayes factor of the point null against the full model,
    f(x|theta0) / m(x).
    """
    data = as_dataset(data)
    ll = log_likelihood_values(full_model, data, draws)
    l0 = log_likelihood(full_model, null_value, data)
    return float(np.exp(l0 + special.logsumexp(-ll) - math.log(ll.size)))


def point_null_bayes_factor(null_value: float, full_model: ModelSpec, data) -> float:
    data = as_dataset(data)
    return math.exp(log_likelihood(full_model, null_value, data) - log_marginal_likelihood(full_model, data))


def lindley_sweep(null_value: float, data, tau_grid, variance: float = 1.0) -> list[tuple[float, float]]:
    """Closed-form BF(null / full) for a gaussian mean with prior N(null_value, tau^2).

    BF(tau) = sqrt(1 + n tau^2 / s2) * exp(-(n d)^2 tau^2 / (2 s2 (s2 + n tau^2))),
    d = xbar - null_value, s2 the known variance.
    """
    data = as_dataset(data)
    taus = [float(t) for t in tau_grid]
    if not taus:
        raise ValueError("tau grid is empty")
    if any(not t > 0 or not math.isfinite(t) for t in taus):
        raise ValueError("tau values must be positive and finite")
    if data.n == 0:
        raise ValueError("need at least one observation")
    n = data.n
    d = float(data.array().mean()) - null_value
    out = []
    for tau in taus:
        t2 = tau * tau
        log_bf = 0.5 * math.log1p(n * t2 / variance) - (n * d) ** 2 * t2 / (2 * variance * (variance + n * t2))
        out.append((tau, math.exp(log_bf)))
    return out
