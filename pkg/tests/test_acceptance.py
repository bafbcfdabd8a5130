"""Acceptance suite: one test per numbered criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria". Reference values come from closed
forms or from tests/oracle_runs.py, which does not import the package.
"""
import math
import time

import numpy as np
import pytest
from scipy import special

from modelchoice import cli
from modelchoice.aitkin import (
    beta_binomial_predictive,
    dic,
    harmonic_mean_marginal,
    log_likelihood_values,
    lr_product_draws,
    posterior_expected_likelihood,
    prior_sampling_marginal,
)
from modelchoice.asymptotics import EmbeddedPair, consistency_experiment, embedded_posterior_lr_prob, lrt_pvalue
from modelchoice.config import Config, shipped_config
from modelchoice.improper import training_invariance_check
from modelchoice.joint import (
    ModelPairConfig,
    bayes_factor,
    lindley_sweep,
    lr_joint_draws,
    posterior_mean_lr_point_null,
    prob_f1_beats_f2,
)
from modelchoice.models import (
    Family,
    ModelSpec,
    PriorSpec,
    derive_seed,
    log_likelihood,
    marginal_likelihood_quadrature,
    sample_posterior,
)

pytestmark = pytest.mark.acceptance

BINOM = ModelSpec.binomial(5, PriorSpec.beta(1, 1))
POIS = ModelSpec.poisson(PriorSpec.gamma(1, 1))
DATA = [3]
FIG2 = ModelPairConfig(BINOM, POIS)


def test_c01_predictive(record):
    t = time.perf_counter()
    value = beta_binomial_predictive(1, 10, 20, 2, PriorSpec.beta(1, 1))
    dt = time.perf_counter() - t
    ok = abs(value - 0.447) <= 0.001 and dt < 1
    record(1, ok, f"predictive {value:.6f} vs 0.447 +- 0.001", dt)
    assert ok


def test_c02_posterior_expected_likelihood(record):
    t = time.perf_counter()
    details, ok = [], True
    for model, exact, key in ((POIS, 0.146319158665, "poisson"), (BINOM, 0.259740259740, "binomial")):
        draws = sample_posterior(model, DATA, 10**6, derive_seed(42, "c02", key))
        lik = np.exp(log_likelihood_values(model, DATA, draws))
        est = posterior_expected_likelihood(model, DATA, draws)
        se = lik.std(ddof=1) / math.sqrt(lik.size)
        ok &= abs(est - exact) < 3 * se
        details.append(f"{key} {est:.6f} vs {exact:.6f} (se {se:.1e})")
    dt = time.perf_counter() - t
    ok &= dt < 10
    record(2, ok, "; ".join(details), dt)
    assert ok


def _direction(seed, draws=10**5):
    s = derive_seed(seed, "fig2")
    prod = lr_product_draws(BINOM, POIS, DATA, draws, derive_seed(s, "product")).prob_gt1()
    joint = lr_joint_draws(FIG2, DATA, draws, derive_seed(s, "joint")).prob_gt1()
    se = math.sqrt((prod * (1 - prod) + joint * (1 - joint)) / draws)
    return prod, joint, se


@pytest.mark.xfail(strict=True, reason="under the pinned uniform/gamma(1,1) priors the joint value is "
                                       "below the product value (exact: 0.8316 vs 0.8450)")
def test_c03_fig2_direction(record):
    t = time.perf_counter()
    rows = [_direction(seed) for seed in range(10)]
    dt = time.perf_counter() - t
    wins = sum((j - p) - cli.Z99 * se > 0 for p, j, se in rows)
    mean_diff = float(np.mean([j - p for p, j, _ in rows]))
    ok = wins == 10 and dt < 30
    record(3, ok, f"joint > product at 99% in {wins}/10 seeds (mean joint - product {mean_diff:+.5f})", dt)
    assert ok


def test_c04_bayes_factor(record):
    t = time.perf_counter()
    bf = bayes_factor(BINOM, POIS, DATA)
    quad = marginal_likelihood_quadrature(BINOM, DATA) / marginal_likelihood_quadrature(POIS, DATA)
    dt = time.perf_counter() - t
    ok = abs(bf - 8 / 3) < 1e-12 and abs(quad - bf) / bf < 1e-6 and dt < 1
    record(4, ok, f"BF {bf:.10f}, quadrature {quad:.10f}, target 8/3", dt)
    assert ok


def test_c05_point_null(record):
    t = time.perf_counter()
    model = ModelSpec.gaussian(1.0, PriorSpec.gaussian(0, 1))
    draws = sample_posterior(model, [1.0], 10**6, derive_seed(42, "c05"))
    est = posterior_mean_lr_point_null(0.0, model, [1.0], draws)
    ratios = np.exp(log_likelihood(model, 0.0, [1.0]) - log_likelihood_values(model, [1.0], draws))
    se = ratios.std(ddof=1) / math.sqrt(ratios.size)
    target = math.sqrt(2) * math.exp(-0.25)
    dt = time.perf_counter() - t
    ok = abs(est - target) < 3 * se and dt < 5
    record(5, ok, f"posterior mean LR {est:.5f} vs {target:.5f} (se {se:.1e})", dt)
    assert ok


def test_c06_lindley(record):
    t = time.perf_counter()
    taus = [1, 10, 100, 1000]
    rows = lindley_sweep(0.0, [1.0], taus)
    bfs = [bf for _, bf in rows]
    exact = [math.sqrt(1 + s * s) * math.exp(-s * s / (2 * (1 + s * s))) for s in taus]
    dt = time.perf_counter() - t
    ok = (all(b > a for a, b in zip(bfs, bfs[1:]))
          and max(abs(a - b) for a, b in zip(bfs, exact)) < 1e-9
          and bfs[-1] > 100 and dt < 1)
    record(6, ok, "BF01 " + ", ".join(f"{b:.4f}" for b in bfs), dt)
    assert ok


def test_c07_embedded(record):
    t = time.perf_counter()
    pair = EmbeddedPair(ModelSpec.gaussian(1.0, PriorSpec.gaussian(0, 1e6)), 0.0)
    details, ok = [], True
    for k, xbar in enumerate((0.2, 0.5, 1.0)):
        data = [xbar] * 10
        draws = sample_posterior(pair.full_model, data, 10**5, derive_seed(42, "c07", k))
        prob = embedded_posterior_lr_prob(pair, data, draws)
        pval = lrt_pvalue(pair, data)
        se = math.sqrt(max(prob * (1 - prob), 1e-5) / 10**5)
        ok &= abs(prob - pval) < 3 * se
        details.append(f"xbar {xbar}: {prob:.4f} vs p {pval:.4f}")
    dt = time.perf_counter() - t
    ok &= dt < 10
    record(7, ok, "; ".join(details), dt)
    assert ok


def test_c08_consistency(record):
    t = time.perf_counter()
    cfg = Config.load(shipped_config("consistency"))
    rows = consistency_experiment(cfg.scenario(seed=derive_seed(42, "consistency")))
    dt = time.perf_counter() - t
    final = rows[-1]
    ok = final.n == 500 and final.mean_prob_true > 0.95 and dt < 120
    record(8, ok, f"mean Pr[true beats false] at n={final.n}: {final.mean_prob_true:.4f}", dt)
    assert ok


def test_c09_training_invariance(record):
    t = time.perf_counter()
    pois = training_invariance_check(PriorSpec.improper_power(-1), Family.poisson(), [2, 4, 5, 1, 3])
    haldane = training_invariance_check(PriorSpec.beta(0, 0), Family.binomial(4), [1, 3, 2, 2])
    dt = time.perf_counter() - t
    ok = pois == 0.0 and haldane == 0.0 and dt < 1
    record(9, ok, f"max hyperparameter spread: poisson 1/lambda {pois}, haldane {haldane}", dt)
    assert ok


def test_c10_dic(record):
    t = time.perf_counter()
    draws = sample_posterior(POIS, DATA, 10**6, derive_seed(42, "c10"))
    rep = dic(POIS, DATA, draws)
    a, b, x = 4.0, 2.0, 3.0  # gamma(4, 2) posterior
    const = math.lgamma(x + 1)
    d_bar = -2 * (x * (special.digamma(a) - math.log(b)) - a / b - const)
    d_hat = -2 * (x * math.log(a / b) - a / b - const)
    lam = draws.values
    dev = -2 * (x * np.log(lam) - lam - const)
    se_bar = dev.std(ddof=1) / math.sqrt(lam.size)
    se_hat = abs(2 * (1 - x * b / a)) * lam.std(ddof=1) / math.sqrt(lam.size)
    se_pd = math.hypot(se_bar, se_hat)
    se_dic = math.hypot(2 * se_bar, se_hat)
    dt = time.perf_counter() - t
    ok = (abs(rep.d_bar - d_bar) < 3 * se_bar
          and abs(rep.p_d - (d_bar - d_hat)) < 3 * se_pd
          and abs(rep.dic - (2 * d_bar - d_hat)) < 3 * se_dic
          and rep.dic == rep.p_d + rep.d_bar
          and rep.p_d == rep.d_bar - rep.d_hat
          and dt < 5)
    record(10, ok, f"d_bar {rep.d_bar:.5f} vs {d_bar:.5f}, p_d {rep.p_d:.5f} vs {d_bar - d_hat:.5f}, "
                   f"DIC {rep.dic:.5f}", dt)
    assert ok


def test_c11_harmonic_mean(record):
    t = time.perf_counter()
    hm = [harmonic_mean_marginal(POIS, DATA, sample_posterior(POIS, DATA, 10**4, derive_seed(s, "c11", "hm")))
          for s in range(100)]
    ps = [prior_sampling_marginal(POIS, DATA, 10**4, derive_seed(s, "c11", "prior")) for s in range(100)]
    iqr_hm = float(np.subtract(*np.percentile(hm, [75, 25])))
    iqr_ps = float(np.subtract(*np.percentile(ps, [75, 25])))
    dt = time.perf_counter() - t
    ok = iqr_hm > 5 * iqr_ps and dt < 60
    record(11, ok, f"IQR harmonic mean {iqr_hm:.2e} vs prior sampling {iqr_ps:.2e} "
                   f"(ratio {iqr_hm / iqr_ps:.1f})", dt)
    assert ok


def _pair_data(name):
    cfg = Config.load(shipped_config(name))
    if "data" in cfg.raw:
        return cfg.pair(), cfg.dataset()
    sc = cfg.scenario()
    rng = np.random.default_rng(derive_seed(sc.seed, "c12", "data"))
    return cfg.pair(), sc.truth.sample(sc.n_grid[0], rng)


def test_c12_decomposition(record):
    t = time.perf_counter()
    details, ok = [], True
    for name in ("fig2", "fig2_datacentered", "consistency", "consistency_null"):
        pair, data = _pair_data(name)
        est = prob_f1_beats_f2(pair, data, 10**5, derive_seed(42, "c12", name))
        ok &= est.agree(3)
        details.append(f"{name} {est.direct:.4f}/{est.decomposed:.4f}")
    dt = time.perf_counter() - t
    ok &= dt < 60
    record(12, ok, "direct/decomposed " + ", ".join(details), dt)
    assert ok


CLI_RUNS = [
    ["fig2"],
    ["predcheck"],
    ["lindley"],
    ["embedded"],
    ["consistency"],
    ["report"],
]


def _snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_c13_determinism(record, tmp_path):
    t = time.perf_counter()
    same, codes = True, {}
    for argv in CLI_RUNS:
        outs = []
        for run in range(2):
            out = tmp_path / f"{argv[0]}-{run}"
            codes[argv[0]] = cli.main(argv + ["--out", str(out), "--seed", "42"])
            outs.append(_snapshot(out))
        same &= outs[0] == outs[1] and bool(outs[0])
    parallel = tmp_path / "consistency-parallel"
    cli.main(["consistency", "--workers", "2", "--out", str(parallel)])
    same &= _snapshot(parallel) == _snapshot(tmp_path / "consistency-0")
    dt = time.perf_counter() - t
    ok = same and dt < 300
    record(13, ok, f"byte-identical reruns for {len(CLI_RUNS)} subcommands and serial/parallel; "
                   f"exit codes {codes}", dt)
    assert ok
