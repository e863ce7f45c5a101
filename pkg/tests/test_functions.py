import math

import numpy as np
import pytest

from haarclt.errors import DomainError
from haarclt.functions import eval_code, get_function, names


def test_registry_names_and_norms():
    assert names() == sorted(["one", "cos", "sin", "tanh", "indicator_smooth", "xsq"])
    assert get_function("cos").sup_norm == 1.0
    assert get_function("sin").odd and not get_function("cos").odd
    assert get_function("xsq", allow_unbounded=True).sup_norm == math.inf
    with pytest.raises(DomainError):
        get_function("xsq")
    with pytest.raises(DomainError):
        get_function("exp")
    with pytest.raises(DomainError):
        get_function("cos(1)")
    with pytest.raises(DomainError):
        get_function("indicator_smooth(1,0,0.1)")
    with pytest.raises(DomainError):
        get_function("indicator_smooth(0,1)")


def test_indicator_smooth_shape():
    f = get_function("indicator_smooth(-1, 1, 0.5)")
    x = np.array([-2.0, -1.5, -1.25, -1.0, 0.0, 1.0, 1.25, 1.5, 2.0])
    assert list(f(x)) == [0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.0, 0.0]
    assert get_function(f.spec()) == f


@pytest.mark.parametrize("spec", ["one", "cos", "sin", "tanh", "indicator_smooth(-0.5,2,0.25)", "xsq"])
def test_scalar_and_vector_evaluation_agree(spec):
    f = get_function(spec, allow_unbounded=True)
    x = np.linspace(-3, 3, 61)
    scalar = np.array([eval_code(f.code, *f.params, float(v)) for v in x])
    assert np.allclose(scalar, f(x), rtol=0, atol=1e-15)
