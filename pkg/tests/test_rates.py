import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_ergodicity import RateFunction, RatePlan, big_F, inverse_F, psi
from levy_ergodicity.errors import InvalidRateFunctionError, PreconditionError, RateRangeError
from levy_ergodicity.rates import F_table, write_psi_csv

EXP = RateFunction(C=1.0, pathway="exp")
POLY = RateFunction(C=1.0, power=1.0 / 6.0, pathway="poly", kappa=0.0, p=1.2)
SUBEXP = RateFunction(C=1.0, power=1.0, log_power=-2.0, beta=1.0, pathway="subexp", kappa=-0.5, zeta=-0.5)


def test_big_F_examples():
    assert big_F(EXP, math.e) == pytest.approx(1.0)
    assert big_F(POLY, 1.0) == 0.0
    assert big_F(POLY, 64.0) == pytest.approx(37.2, rel=1e-13)
    assert big_F(POLY, 64.0, method="numeric") == pytest.approx(37.2, rel=1e-11)


def test_inverse_F_examples():
    assert inverse_F(EXP, 1.0) == pytest.approx(math.e)
    assert inverse_F(POLY, 37.2, method="numeric") == pytest.approx(64.0, rel=1e-9)
    assert inverse_F(SUBEXP, 0.0) == 1.0


@pytest.mark.parametrize("f", [EXP, POLY, SUBEXP], ids=["exp", "poly", "subexp"])
@given(y=st.floats(0.0, 200.0))
@settings(max_examples=15, deadline=None)
def test_inverse_round_trip(f, y):
    t = inverse_F(f, y, method="numeric")
    assert abs(big_F(f, t, method="numeric") - y) <= 1e-9 * (1 + y)


def test_psi_examples():
    assert psi(RatePlan(EXP), 2.0) == pytest.approx(math.exp(-2.0))
    assert psi(RatePlan(POLY), 0.0) == pytest.approx(1.0)
    assert psi(RatePlan(POLY), 1.2) == pytest.approx(2.0**-0.2, rel=1e-12)
    assert psi(RatePlan(POLY), 1.2, method="numeric") == pytest.approx(2.0**-0.2, rel=1e-9)


def test_psi_is_nonincreasing_for_exp_and_poly():
    ts = np.linspace(0, 50, 101)
    for f in (EXP, POLY):
        vals = [psi(RatePlan(f, gamma=0.7), t) for t in ts]
        assert np.all(np.diff(vals) <= 0)
        assert vals[0] == pytest.approx(1.0 / f(1.0))


def test_subexp_with_zeta_kappa_decays_faster():
    kappa = -0.5
    fast = RatePlan(RateFunction(C=1.0, log_power=0.0 / 0.5, pathway="subexp", kappa=kappa, zeta=kappa))
    slow_zeta = -0.8
    slow = RatePlan(
        RateFunction(C=1.0, log_power=(kappa + slow_zeta) / (1 + slow_zeta), pathway="subexp", kappa=kappa, zeta=slow_zeta)
    )
    for t in (10.0, 100.0, 1000.0):
        assert psi(fast, t) < psi(slow, t)


def test_bounded_F_raises():
    f = RateFunction(C=1.0, power=1.5)
    assert big_F(f, 1e6) < 2.0
    with pytest.raises(RateRangeError, match="bounded"):
        inverse_F(f, 2.5)
    tagged = RateFunction(C=1.0, power=1.5, pathway="poly", kappa=1.5, p=1.0)
    with pytest.raises(RateRangeError):
        inverse_F(tagged, 2.5)


def test_invalid_rate_functions():
    with pytest.raises(InvalidRateFunctionError):
        RateFunction(C=0.0)
    with pytest.raises(InvalidRateFunctionError):
        big_F(lambda w: 1.0 - w, 5.0)
    with pytest.raises(PreconditionError):
        big_F(EXP, 0.5)
    with pytest.raises(PreconditionError):
        psi(RatePlan(EXP), -1.0)


def test_untagged_callable_uses_numeric_path():
    assert big_F(lambda w: 2.0 * w, math.e**2) == pytest.approx(1.0, rel=1e-10)
    rows = F_table(POLY, [1.0, 10.0, 64.0], method="numeric")
    for t, _, back in rows:
        assert back == pytest.approx(t, rel=1e-9)


def test_psi_csv(tmp_path):
    path = tmp_path / "rate.csv"
    write_psi_csv(path, RatePlan(EXP), [0.0, 1.0], config={"a": 1})
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[2] == "t,psi"
    assert float(lines[4].split(",")[1]) == pytest.approx(math.exp(-1))
