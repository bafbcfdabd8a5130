import os
import subprocess
import sys

import numpy as np
import pytest

from modelchoice import kernels
from modelchoice.models import Family, DataSet

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")

CASES = [
    (Family.poisson(), DataSet((3, 0, 5)), lambda r, n: r.gamma(2, 1, n)),
    (Family.binomial(5), DataSet((3, 1)), lambda r, n: r.random(n)),
    (Family.binomial(5), DataSet((0, 0)), lambda r, n: r.random(n)),
    (Family.gaussian(2.0), DataSet((0.4, -1.2, 2.2)), lambda r, n: r.normal(0, 2, n)),
]


@compiled
@pytest.mark.parametrize("family, data, draw", CASES)
def test_loglik_parity(family, data, draw):
    code, coef = family.kernel(data)
    theta = draw(np.random.default_rng(0), 5000)
    a = kernels.loglik(code, coef, theta, backend="cython")
    b = kernels.loglik(code, coef, theta, backend="python")
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-12)


@compiled
@pytest.mark.parametrize("family, data, draw", CASES)
@pytest.mark.parametrize("greater", [True, False])
def test_count_exceed_parity(family, data, draw, greater):
    rng = np.random.default_rng(1)
    code, coef = family.kernel(data)
    theta = draw(rng, 40 * 300).reshape(40, 300)
    thr = np.quantile(kernels.loglik(code, coef, theta.ravel()), rng.random(40))
    a = kernels.count_exceed(code, coef, theta, thr, greater, backend="cython")
    b = kernels.count_exceed(code, coef, theta, thr, greater, backend="python")
    assert np.array_equal(a, b)


def test_loglik_boundaries():
    code, coef = Family.binomial(5).kernel(DataSet((0,)))
    out = kernels.loglik(code, coef, np.array([0.0, 1.0]), backend="python")
    assert out[0] == 0.0 and out[1] == -np.inf


def test_loglik_preserves_shape():
    code, coef = Family.poisson().kernel(DataSet((2,)))
    assert kernels.loglik(code, coef, np.ones((3, 4))).shape == (3, 4)


def test_count_exceed_shape_check():
    code, coef = Family.poisson().kernel(DataSet((2,)))
    with pytest.raises(ValueError):
        kernels.count_exceed(code, coef, np.ones(5), np.zeros(5))
    with pytest.raises(ValueError):
        kernels.count_exceed(code, coef, np.ones((2, 5)), np.zeros(3))


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.loglik(0, (0.0, 1.0, 1.0), np.ones(2), backend="fortran")


def test_pure_python_switch():
    env = dict(os.environ, MODELCHOICE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import modelchoice; print(modelchoice.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
