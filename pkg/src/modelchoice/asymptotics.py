"""Large-sample behaviour of the likelihood-comparison probabilities.

Statistics follow the usual deviance convention: the Wilks statistic is
twice the log-likelihood gap, referred to a chi-square with ``p2 - p1``
degrees of freedom.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special, stats

from .aitkin import log_likelihood_values
from .errors import AllInfinite, DegenerateData
from .joint import ModelPairConfig, prob_f1_beats_f2
from .models import (
    Distribution,
    Family,
    ModelSpec,
    ParamDraws,
    PriorSpec,
    as_dataset,
    derive_seed,
    log_likelihood,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def chi2_cdf(df: int, x: float) -> float:
    """Chi-square cdf as the regularized lower incomplete gamma P(df/2, x/2)."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi2_sf(df: int, x: float) -> float:
    if df < 1:
        raise ValueError("df must be >= 1")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class EmbeddedPair:
    """A full model and the null obtained by fixing its parameter at ``null_value``.

    With one-parameter families the null has dimension 0 and the full model 1.
    """

    full_model: ModelSpec
    null_value: float
    dims: tuple[int, int] = (0, 1)

    def __post_init__(self):
        p1, p2 = self.dims
        if not 0 <= p1 < p2:
            raise ValueError("need 0 <= p1 < p2")
        self.full_model.family.check_param(self.null_value)

    @property
    def df(self) -> int:
        return self.dims[1] - self.dims[0]

    @property
    def null_model(self) -> ModelSpec:
        return self.full_model.with_prior(PriorSpec.point_mass(self.null_value))


def _check_interior_mle(family: Family, data) -> float:
    theta_hat = family.mle(data)
    if family.name == "poisson" and theta_hat <= 0:
        raise DegenerateData("poisson MLE is 0 (all counts zero)")
    if family.name == "binomial" and theta_hat in (0.0, 1.0):
        raise DegenerateData(f"binomial MLE is {theta_hat:g} (no successes or no failures)")
    return theta_hat


def lrt_statistic(pair: EmbeddedPair, data) -> float:
    data = as_dataset(data)
    model = pair.full_model
    theta_hat = _check_interior_mle(model.family, data)
    gap = log_likelihood(model, theta_hat, data) - log_likelihood(model, pair.null_value, data)
    return max(0.0, 2.0 * gap)


def lrt_pvalue(pair: EmbeddedPair, data) -> float:
    """Wilks p-value 1 - F_{p2-p1}(2 [l(full MLE) - l(null)])."""
    return chi2_sf(pair.df, lrt_statistic(pair, data))


def embedded_posterior_lr_prob(pair: EmbeddedPair, data, draws: ParamDraws) -> float:
    """Fraction of full-model posterior draws whose likelihood is below the null's.

    Estimates Pr[l(psi0) > l(psi) | x], which for regular embedded models
    approximates the likelihood-ratio-test p-value.
    """
    data = as_dataset(data)
    ll = log_likelihood_values(pair.full_model, data, draws)
    l0 = log_likelihood(pair.full_model, pair.null_value, data)
    return float(np.mean(l0 > ll))


def aitkin_asymptotic_prob(p1: int, p2: int, deviance_gap: float, count: int, seed: int) -> float:
    """Monte Carlo Pr[X2_{p2} - X2_{p1} > gap] for independent chi-squares.

    ``deviance_gap`` is on the chi-square (deviance) scale, i.e. twice the
    log-likelihood difference l2(theta2_hat) - l1(theta1_hat). Zero degrees
    of freedom stand for the constant 0.
    """
    if p1 < 0 or p2 < 0:
        raise ValueError("degrees of freedom must be >= 0")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.chisquare(p2, count) if p2 > 0 else np.zeros(count)
    b = rng.chisquare(p1, count) if p1 > 0 else np.zeros(count)
    return float(np.mean(a - b > deviance_gap))


# --------------------------------------------------------------------------
# Kullback-Leibler divergence and projection
# --------------------------------------------------------------------------

def _logpmf(dist: Distribution, k: np.ndarray) -> np.ndarray:
    if dist.family == "poisson":
        return stats.poisson.logpmf(k, dist.param)
    return stats.binom.logpmf(k, dist.trials, dist.param)


def _discrete_support(dist: Distribution) -> np.ndarray:
    if dist.family == "binomial":
        return np.arange(dist.trials + 1)
    # mass beyond mean + 40 sd (+ 50) is far below double precision
    upper = int(math.ceil(dist.param + 40.0 * math.sqrt(dist.param) + 50.0))
    return np.arange(upper + 1)


def kl_divergence(truth: Distribution, candidate: Distribution) -> float:
    """KL(truth || candidate); ``inf`` when truth puts mass outside the candidate's support."""
    if (truth.family == "gaussian") != (candidate.family == "gaussian"):
        return math.inf
    if truth.family == "gaussian":
        v0, v1 = truth.variance, candidate.variance
        return 0.5 * math.log(v1 / v0) + (v0 + (truth.param - candidate.param) ** 2) / (2 * v1) - 0.5
    k = _discrete_support(truth)
    lp = _logpmf(truth, k)
    keep = np.isfinite(lp)
    k, lp = k[keep], lp[keep]
    lq = _logpmf(candidate, k)
    if not np.all(np.isfinite(lq)):
        return math.inf
    return max(0.0, float(np.sum(np.exp(lp) * (lp - lq))))


def golden_section(f, lo: float, hi: float, tol: float = 1e-8, max_iter: int = 500):
    """Minimize a unimodal ``f`` on [lo, hi]; returns (argmin, minimum)."""
    a, b = float(lo), float(hi)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


_DEFAULT_BRACKETS = {
    "poisson": (1e-8, 1e3),
    "binomial": (1e-12, 1.0 - 1e-12),
    "gaussian": (-1e3, 1e3),
}


def kl_projection(truth: Distribution, family: Family, bracket=None, tol: float = 1e-8, scan: int = 257):
    """Member of ``family`` closest to ``truth`` in KL divergence.

    A grid scan over the bracket locates the basin, then golden-section search
    refines it to ``tol``. Returns ``(parameter, divergence)``.
    """
    lo, hi = bracket if bracket is not None else _DEFAULT_BRACKETS[family.name]
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    def f(theta):
        return kl_divergence(truth, family.member(theta))

    grid = np.linspace(lo, hi, scan)
    if family.name == "poisson" and lo > 0:
        grid = np.geomspace(lo, hi, scan)
    values = np.array([f(t) for t in grid])
    finite = np.isfinite(values)
    if not finite.any():
        raise AllInfinite("divergence is infinite over the whole bracket")
    i = int(np.argmin(np.where(finite, values, np.inf)))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, scan - 1)]
    return golden_section(f, a, b, tol=tol)


# --------------------------------------------------------------------------
# consistency experiments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticScenario:
    truth: Distribution
    pair: ModelPairConfig
    n_grid: tuple[int, ...]
    replications: int
    seed: int
    draws: int = 4000
    true_model: int | None = None

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if not grid:
            raise ValueError("n_grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ValueError("n_grid must be strictly increasing positive sizes")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        object.__setattr__(self, "n_grid", grid)
        if self.true_model is None:
            object.__setattr__(self, "true_model", _locate_truth(self.truth, self.pair))
        elif self.true_model not in (1, 2):
            raise ValueError("true_model must be 1 or 2")


def _contains(model: ModelSpec, truth: Distribution) -> bool:
    fam = model.family
    if (fam.name, fam.trials, fam.variance) != (truth.family, truth.trials, truth.variance):
        return False
    if model.prior.kind == "point_mass":
        return model.prior.params[0] == truth.param
    return True


def _locate_truth(truth: Distribution, pair: ModelPairConfig) -> int:
    inside = [j for j in (1, 2) if _contains(pair.model(j), truth)]
    if not inside:
        raise ValueError("the truth is not contained in either model")
    # nested case: the point-mass model is the parsimonious true model
    for j in inside:
        if pair.model(j).prior.kind == "point_mass":
            return j
    return inside[0]


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    mean_prob_true: float
    std_prob_true: float
    mean_prob_model1: float


def _cell(args):
    scenario, i, n, rep = args
    cell_seed = derive_seed(scenario.seed, "consistency", i, rep)
    rng = np.random.default_rng(derive_seed(cell_seed, "data"))
    data = scenario.truth.sample(n, rng)
    return prob_f1_beats_f2(scenario.pair, data, scenario.draws, derive_seed(cell_seed, "joint"),
                            decompose=False).direct


def consistency_experiment(scenario: AsymptoticScenario, workers: int = 1) -> list[ConsistencyRow]:
    """Average Pr[true model's likelihood beats the other's | x^n] over replicated datasets.

    Each (n, replication) cell has its own seed, so ``workers > 1`` gives the
    same table as a serial run.
    """
    cells = [(scenario, i, n, r) for i, n in enumerate(scenario.n_grid) for r in range(scenario.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            probs = list(ex.map(_cell, cells, chunksize=max(1, len(cells) // (4 * workers))))
    else:
        probs = [_cell(c) for c in cells]
    probs = np.asarray(probs).reshape(len(scenario.n_grid), scenario.replications)
    rows = []
    for n, p1 in zip(scenario.n_grid, probs):
        p_true = p1 if scenario.true_model == 1 else 1.0 - p1
        std = float(np.std(p_true, ddof=1)) if p_true.size > 1 else 0.0
        rows.append(ConsistencyRow(n, float(p_true.mean()), std, float(p1.mean())))
    return rows


__all__: Sequence[str] = [
    "AsymptoticScenario",
    "ConsistencyRow",
    "EmbeddedPair",
    "aitkin_asymptotic_prob",
    "chi2_cdf",
    "chi2_sf",
    "consistency_experiment",
    "embedded_posterior_lr_prob",
    "golden_section",
    "kl_divergence",
    "kl_projection",
    "lrt_pvalue",
    "lrt_statistic",
]
