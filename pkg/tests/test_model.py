import math

import pytest

from qsd_mminf import ModelParams, ParameterError, generator_entry, normalize, rate_out_of, validate


def test_params_coerced_to_float():
    p = ModelParams(2, 4)
    assert p.a == 2.0 and isinstance(p.a, float)
    assert p.ratio == 0.5


@pytest.mark.parametrize(
    "a, q, field",
    [(0.0, 1.0, "a"), (-1.0, 1.0, "a"), (1.0, 0.0, "q"), (math.inf, 1.0, "a"), (1.0, math.nan, "q"), ("x", 1.0, "a")],
)
def test_invalid_params_name_the_field(a, q, field):
    with pytest.raises(ParameterError) as info:
        ModelParams(a, q)
    assert info.value.field == field
    assert info.value.exit_code == 2


def test_params_frozen():
    p = validate(1.0, 1.0)
    with pytest.raises(AttributeError):
        p.a = 2.0


def test_rates():
    p = ModelParams(1.5, 0.5)
    assert rate_out_of(p, 0) == 0.0
    assert rate_out_of(p, 3) == 1.5 + 3 * 0.5
    assert generator_entry(p, 3, 4).rate == 1.5
    assert generator_entry(p, 3, 2).rate == 1.5
    assert generator_entry(p, 3, 3).rate == -3.0
    assert generator_entry(p, 3, 7).rate == 0.0
    # absorbing state has an all-zero row
    assert all(generator_entry(p, 0, j).rate == 0.0 for j in range(3))


def test_rows_sum_to_zero():
    p = ModelParams(0.7, 1.3)
    for i in range(1, 20):
        assert math.isclose(sum(generator_entry(p, i, j).rate for j in range(i + 3)), 0.0, abs_tol=1e-12)


def test_normalize():
    unit, scale = normalize(ModelParams(3.0, 2.0))
    assert unit == ModelParams(1.5, 1.0)
    assert scale == 2.0


def test_negative_state_rejected():
    with pytest.raises(ValueError):
        rate_out_of(ModelParams(1, 1), -1)
