"""Improper priors given meaning through training samples.

A training sample ``x_(l)`` turns an improper prior into the proper
distribution ``pi(theta) f(x_(l) | theta)``; updating that with the rest of
the data gives a posterior proportional to ``pi(theta) f(x^n | theta)``,
whatever the split. The minimal training sample, per family:

* poisson with ``lambda**e``: the training counts must sum to more than ``-(e + 1)``
  (one positive count suffices for 1/lambda);
* binomial with beta(a, b): ``a + successes > 0`` and ``b + failures > 0``
  (Haldane needs at least one success and one failure);
* gaussian with the flat prior: a single observation.

What the construction does not provide is a joint distribution of data and
parameter; ``no_joint_distribution_demo`` shows the prior predictive mass
diverging.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special, stats

from .errors import ImproperIntermediate
from .models import Family, PriorSpec, _conjugate_form, as_dataset, formal_update


@dataclass(frozen=True)
class TrainingSplit:
    """Training indices and their complement; indices are 0-based."""

    training_indices: tuple[int, ...]
    remainder_indices: tuple[int, ...]

    def __post_init__(self):
        tr = tuple(sorted(int(i) for i in self.training_indices))
        rem = tuple(sorted(int(i) for i in self.remainder_indices))
        if not tr:
            raise ValueError("training sample must be nonempty")
        if set(tr) & set(rem):
            raise ValueError("training and remainder indices overlap")
        object.__setattr__(self, "training_indices", tr)
        object.__setattr__(self, "remainder_indices", rem)

    @classmethod
    def of(cls, training, n: int) -> "TrainingSplit":
        training = sorted(set(int(i) for i in training))
        if any(i < 0 or i >= n for i in training):
            raise ValueError("training index out of range")
        if len(training) >= n:
            raise ValueError("training sample must be a proper subset")
        return cls(tuple(training), tuple(i for i in range(n) if i not in training))

    @classmethod
    def singletons(cls, n: int) -> list["TrainingSplit"]:
        """Every one-observation training sample, scanned left to right."""
        return [cls.of([i], n) for i in range(n)]

    def check_covers(self, n: int):
        if sorted(self.training_indices + self.remainder_indices) != list(range(n)):
            raise ValueError("split does not partition the data indices")


def training_posterior(prior: PriorSpec, family: Family, data, split: TrainingSplit) -> PriorSpec:
    """Two-stage posterior: regularize with the training sample, then update with the rest."""
    data = as_dataset(data)
    split.check_covers(data.n)
    intermediate = formal_update(prior, family, data.subset(split.training_indices))
    if not intermediate.proper:
        raise ImproperIntermediate(
            f"training sample {list(split.training_indices)} leaves {intermediate} improper"
        )
    return formal_update(intermediate, family, data.subset(split.remainder_indices))


def training_invariance_check(prior: PriorSpec, family: Family, data,
                              splits: Sequence[TrainingSplit] | None = None) -> float:
    """Largest hyperparameter difference between the posteriors of different splits.

    Defaults to all singleton splits. With a single split there is nothing to
    compare and the result is 0.
    """
    data = as_dataset(data)
    if splits is None:
        splits = TrainingSplit.singletons(data.n)
    posts = [training_posterior(prior, family, data, s) for s in splits]
    if len(posts) < 2:
        return 0.0
    params = np.array([p.params for p in posts])
    return float(np.max(params.max(axis=0) - params.min(axis=0)))


def propriety_check(prior: PriorSpec, family: Family, data) -> tuple[bool, str]:
    """Whether the formal posterior pi(theta) f(x | theta) is integrable, and why (not)."""
    if prior.proper:
        return True, f"prior {prior} is proper"
    post = formal_update(prior, family, as_dataset(data))
    if post.proper:
        return True, f"posterior {post} is integrable"
    return False, f"posterior {post} not integrable"


@dataclass(frozen=True)
class DivergenceReport:
    prior: PriorSpec
    family: Family
    truncations: tuple[float, ...]
    partial_sums: tuple[float, ...]


def _log_predictive_terms(prior: PriorSpec, family: Family, x: np.ndarray) -> np.ndarray:
    """log of the integral of f(x | theta) times the (unnormalized) prior kernel, n = 1."""
    kern = _conjugate_form(prior, family)
    if family.name == "poisson" and kern.kind == "gamma":
        a, b = kern.params
        out = special.gammaln(x + a) - special.gammaln(x + 1) - (x + a) * np.log(b + 1)
        if prior.proper:
            out += a * np.log(b) - special.gammaln(a)
        return out
    raise ValueError(f"unsupported prior {prior} for the {family} predictive sum")


def no_joint_distribution_demo(prior: PriorSpec, family: Family, truncations: Sequence[float]) -> DivergenceReport:
    """Partial prior-predictive masses over growing truncations of the data space, n = 1.

    For poisson the sum runs over counts 1..K (the zero count is excluded as
    its term is infinite under 1/lambda). For the gaussian flat prior each
    observation has unit mass, so the integral over [-K, K] is 2K. A proper
    prior's sums converge; an improper prior's grow without bound.
    """
    ks = [float(k) for k in truncations]
    if not ks or any(k < 1 for k in ks):
        raise ValueError("truncations must be >= 1")
    if family.name == "gaussian":
        if prior.proper:
            mean, var = prior.params
            scale = np.sqrt(var + family.variance)
            sums = [float(stats.norm.cdf(k, mean, scale) - stats.norm.cdf(-k, mean, scale)) for k in ks]
        else:
            sums = [2.0 * k for k in ks]
        return DivergenceReport(prior, family, tuple(ks), tuple(sums))
    kmax = int(max(ks))
    x = np.arange(1, kmax + 1, dtype=float)
    terms = np.exp(_log_predictive_terms(prior, family, x))
    cums = np.cumsum(terms)
    sums = [float(cums[int(k) - 1]) for k in ks]
    return DivergenceReport(prior, family, tuple(ks), tuple(sums))


__all__ = [
    "DivergenceReport",
    "TrainingSplit",
    "no_joint_distribution_demo",
    "propriety_check",
    "training_invariance_check",
    "training_posterior",
]
