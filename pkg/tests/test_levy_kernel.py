import math

import numpy as np
import pytest

from levy_ergodicity import KernelSpec, LevyTypeModel, tail_constants
from levy_ergodicity.errors import DivergenceError, ModelInvalidError, PreconditionError, TailIndexMismatchError
from levy_ergodicity.levy_kernel import (
    Drift,
    boundedness,
    check_symmetry,
    density,
    exp_moment,
    exp_moment_is_finite,
    power_moment_tail,
    small_jump_moment,
    tail,
    tail_ratio_extrema,
)
from levy_ergodicity.quadrature import integrate_panel

from conftest import make_model


def test_invalid_parameters_rejected():
    with pytest.raises(ModelInvalidError):
        KernelSpec(alpha=0.0)
    with pytest.raises(ModelInvalidError):
        KernelSpec(family="tempered", theta=0.0)
    with pytest.raises(ModelInvalidError):
        KernelSpec(family="gaussian")
    with pytest.raises(ModelInvalidError):
        KernelSpec(alpha=1.5, sigma=2.0, delta=1.8)
    with pytest.raises(ModelInvalidError):
        Drift(kind="table", xs=(0.0,), values=(1.0,))


def test_stable_tail_closed_form():
    k = KernelSpec(alpha=1.5, c=2.0)
    assert tail(k, 0.0, 4.0) == pytest.approx(2.0 * 4.0**-1.5 / 1.5)
    assert tail(k, 0.0, 0.5) == pytest.approx(2.0 * ((0.5**-1.5 - 1) / 1.5 + 1 / 1.5))


@pytest.mark.parametrize("u", [0.3, 1.0, 3.0])
def test_tempered_tail_matches_density_integral(u):
    k = KernelSpec(family="tempered", alpha=1.5, theta=2.0, zeta=-0.3)
    direct = integrate_panel(lambda r: float(density(k, 0.0, r)), u, math.inf)
    assert tail(k, 0.0, u) == pytest.approx(direct, rel=1e-7)


def test_small_jump_moment_and_divergence():
    assert small_jump_moment(KernelSpec(alpha=1.5), 0.0) == pytest.approx(2.0 / 0.5)
    with pytest.raises(DivergenceError):
        small_jump_moment(KernelSpec(alpha=2.5), 0.0)
    # alpha_small keeps small jumps integrable for a thin-tailed kernel
    assert small_jump_moment(KernelSpec(alpha=2.5, alpha_small=1.5), 0.0) == pytest.approx(4.0)


def test_power_moment_tail_diverges_beyond_index():
    k = KernelSpec(alpha=1.5)
    assert power_moment_tail(k, 0.0, 2.0, 1.2) == pytest.approx(2.0**-0.3 / 0.3)
    with pytest.raises(DivergenceError):
        power_moment_tail(k, 0.0, 2.0, 1.6)


def test_exp_moment_classification_and_value():
    k = KernelSpec(family="tempered", alpha=1.5, theta=2.0)
    assert exp_moment(KernelSpec(alpha=1.5), 0.0, 1.0, 0.0) == math.inf
    assert not exp_moment_is_finite(k, 2.5, 0.0)
    direct = 2 * integrate_panel(lambda u: math.exp(u - 2.0 * u) * u**-2.5, 1.0, math.inf, )
    assert exp_moment(k, 0.0, 1.0, 0.0) == pytest.approx(direct, rel=1e-9)
    # lighter weight zeta < kernel zeta is always finite
    assert math.isfinite(exp_moment(k, 0.0, 5.0, -0.5))


def test_symmetry_and_boundedness():
    m = make_model(alpha=1.2, alpha_amp=0.4, c_amp=1.0)
    assert check_symmetry(m, 3.0) < 1e-8
    assert math.isfinite(boundedness(m, [0.0, 1.0, 100.0]))


def test_tail_constants_stable():
    t = tail_constants(make_model(alpha=1.5))
    assert t.N_sigma == pytest.approx(2 / 3)
    assert t.N_delta == pytest.approx(2 / 3)
    assert t.nu_small == pytest.approx(4.0)
    for lam, lo, hi in t.ratio_bounds:
        assert lo == pytest.approx(lam**-1.5) and hi == pytest.approx(lam**-1.5)


def test_tail_index_mismatch_detected():
    with pytest.raises(TailIndexMismatchError):
        tail_constants(LevyTypeModel(kernel=KernelSpec(alpha=1.5, sigma=2.0, delta=2.0)))


def test_state_dependent_sandwich():
    m = make_model(alpha=1.3, alpha_amp=0.4)
    t = tail_constants(m)
    assert t.sigma == 1.3 and t.delta == pytest.approx(1.7)
    lo, hi = tail_ratio_extrema(m, 10.0, 2.0)
    assert 2.0**-1.7 <= lo <= hi <= 2.0**-1.3


def test_tail_constants_grid_must_reach_far():
    with pytest.raises(PreconditionError):
        tail_constants(make_model(), grid=np.geomspace(1, 100, 5))


def test_table_drift_extrapolates_linearly():
    d = Drift(kind="table", xs=(-1.0, 0.0, 1.0), values=(1.0, 0.0, -1.0))
    assert d(0.5) == pytest.approx(-0.5)
    assert d(10.0) == pytest.approx(-10.0)
    assert d(-4.0) == pytest.approx(4.0)
