import json
import math
import warnings

import numpy as np
import pytest
from scipy import stats

from levy_ergodicity import (
    KernelSpec,
    LevyTypeModel,
    LyapunovSpec,
    SimConfig,
    char_exponent,
    empirical_skeleton_drift,
    monte_carlo_functional,
    sample_increment,
    sample_increments,
    simulate_chain,
)
from levy_ergodicity._accel import HAVE_NUMBA
from levy_ergodicity.errors import CutoffError, ExplosionError, PreconditionError
from levy_ergodicity.simulator import _jump_integral, default_eps, small_jump_variance

from conftest import make_model

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def cf_z_scores(model, x, h, draws, freqs, eps=None, seed=0, backend=None):
    d = sample_increments(model, x, h, draws, eps=eps, seed=seed, backend=backend)
    out = []
    for xi in freqs:
        emp = np.mean(np.exp(1j * xi * d))
        th = np.exp(-h * char_exponent(model, x, xi))
        # standard error of the complex mean, per component
        se = math.sqrt(max(1.0 - abs(th) ** 2, 1e-12) / (2 * draws))
        out.append(abs(emp - th) / se / math.sqrt(2))
    return np.array(out)


def test_char_exponent_examples():
    assert char_exponent(make_model(A=0.0, alpha=1.0), 0.0, 1.0) == pytest.approx(complex(math.pi, 0.0))
    assert char_exponent(make_model(alpha=1.5), 3.0, 0.0) == 0
    assert char_exponent(make_model(alpha=1.5), 2.0, 1.0).imag == pytest.approx(2.0)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 1.9])
def test_char_exponent_quadrature_matches_closed_form(alpha):
    k = KernelSpec(alpha=alpha)
    for xi in (0.3, 2.0, 7.0):
        closed = char_exponent(LevyTypeModel(kernel=k), 0.0, xi).real
        assert 2.0 * _jump_integral(k, alpha, alpha, xi) == pytest.approx(closed, rel=1e-8)


def test_zero_kernel_increment_is_deterministic():
    m = make_model(c=0.0)
    assert sample_increment(m, 1.0, 0.1) == pytest.approx(-0.1, abs=1e-15)
    assert np.all(sample_increments(m, 1.0, 0.1, 10) == pytest.approx(-0.1, abs=1e-15))


def test_symmetric_increments_have_zero_mean():
    m = make_model(A=0.0, family="tempered", alpha=1.5, theta=2.0)
    d = sample_increments(m, 0.0, 0.1, 1_000_000, seed=5)
    assert abs(d.mean()) <= 4 * d.std() / math.sqrt(d.size)


def test_sign_symmetry():
    d = sample_increments(make_model(A=0.0, alpha=1.5), 0.0, 0.05, 200_000, seed=9)
    half = d.size // 2
    assert stats.ks_2samp(d[:half], -d[half:]).pvalue > 1e-3


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize(
    "kernel",
    [dict(alpha=1.5), dict(alpha=1.3, alpha_small=1.7), dict(family="tempered", alpha=0.8, theta=1.0, zeta=-0.4)],
    ids=["stable", "split-index", "tempered-stretched"],
)
def test_sampler_matches_characteristic_function(backend, kernel):
    m = make_model(**kernel)
    z = cf_z_scores(m, 0.4, 0.02, 100_000, (0.5, 1.0, 2.0, 4.0, 8.0), seed=21, backend=backend)
    assert np.all(z < 3.0), z


def test_halving_eps_is_within_noise():
    m = make_model(A=0.0, alpha=1.5)
    h, n, xi = 0.01, 200_000, 3.0
    a = sample_increments(m, 0.0, h, n, eps=0.1, seed=1)
    b = sample_increments(m, 0.0, h, n, eps=0.05, seed=2)
    diff = abs(np.mean(np.cos(xi * a)) - np.mean(np.cos(xi * b)))
    se = math.sqrt(np.var(np.cos(xi * a)) / n + np.var(np.cos(xi * b)) / n)
    assert diff < 3 * se


def test_small_jump_variance_series():
    m = make_model(family="tempered", alpha=1.5, theta=3.0, zeta=-0.5)
    from levy_ergodicity.quadrature import integrate_panel

    eps = 0.3
    direct = 2 * integrate_panel(lambda u: u ** (1 - 1.5) * math.exp(-3.0 * u**0.5), 0, eps)
    assert small_jump_variance(m, 0.0, eps) == pytest.approx(direct, rel=1e-10)


def test_simconfig_validation():
    with pytest.raises(PreconditionError):
        SimConfig(n=10, t=0.05, N=1)
    with pytest.raises(PreconditionError):
        SimConfig(n=10, t=1.0, N=1, eps=2.0)
    assert SimConfig(n=3, t=1.0, N=1).steps == 3
    assert default_eps(1e-12) == 1e-4 and default_eps(4.0) == 1.0


def test_cutoff_errors():
    with pytest.raises(CutoffError):
        sample_increments(make_model(alpha=1.5), 0.0, 0.1, 10, eps=0.0)
    with pytest.raises(CutoffError):
        sample_increments(make_model(alpha=1.9, c=50.0), 0.0, 1.0, 10, eps=1e-4)


@pytest.mark.parametrize("backend", BACKENDS)
def test_euler_flow_first_order(backend):
    m = make_model(c=0.0)
    errs = []
    for n in (100, 1000, 10000):
        s = simulate_chain(m, SimConfig(n=n, t=1.0, N=2, x0=1.0, backend=backend))
        assert s.endpoints[0] == pytest.approx((1 - 1 / n) ** n, rel=1e-12)
        errs.append(abs(s.endpoints[0] - math.exp(-1)))
    orders = -np.diff(np.log10(errs))
    assert np.all(orders >= 0.9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_determinism_and_seed_sensitivity(backend):
    m = make_model(alpha=1.5)
    cfg = SimConfig(n=50, t=1.0, N=500, seed=42, x0=2.0, backend=backend)
    a = simulate_chain(m, cfg).endpoints
    b = simulate_chain(m, cfg).endpoints
    assert np.array_equal(a, b)
    c = simulate_chain(m, SimConfig(n=50, t=1.0, N=500, seed=43, x0=2.0, backend=backend)).endpoints
    assert not np.array_equal(a, c)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree():
    m = make_model(alpha=1.2, alpha_amp=0.3, c_amp=0.5, family="tempered", theta=0.5)
    cfg = dict(n=40, t=1.0, N=400, seed=7, x0=1.5)
    a = simulate_chain(m, SimConfig(**cfg, backend="numba")).endpoints
    b = simulate_chain(m, SimConfig(**cfg, backend="numpy")).endpoints
    assert np.mean(np.isclose(a, b, rtol=1e-9, atol=1e-12)) >= 0.99


def test_replicas_do_not_depend_on_population_size():
    m = make_model(alpha=1.5)
    small = simulate_chain(m, SimConfig(n=20, t=1.0, N=10, seed=3)).endpoints
    large = simulate_chain(m, SimConfig(n=20, t=1.0, N=100, seed=3)).endpoints
    assert np.array_equal(small, large[:10])


def test_snapshots_match_shorter_runs():
    m = make_model(alpha=1.5)
    s = simulate_chain(m, SimConfig(n=20, t=2.0, N=50, seed=3, x0=1.0), record_times=[0.5, 1.0])
    short = simulate_chain(m, SimConfig(n=20, t=1.0, N=50, seed=3, x0=1.0))
    assert np.array_equal(s.snapshots[1.0], short.endpoints)


@pytest.mark.parametrize("backend", BACKENDS)
def test_explosion_reports_step(backend):
    m = make_model(A=-1.0, alpha=1.5)
    with pytest.raises(ExplosionError) as info:
        simulate_chain(m, SimConfig(n=2, t=1200.0, N=20, seed=1, x0=1.0, backend=backend))
    assert info.value.step is not None and 0 < info.value.step <= 2400


def test_monte_carlo_functional():
    m = make_model(alpha=1.5)
    cfg = SimConfig(n=20, t=1.0, N=2000, seed=4, x0=1.0)
    assert monte_carlo_functional(m, lambda y: np.ones_like(y), cfg) == (1.0, 0.0)
    est, _ = monte_carlo_functional(m, lambda y: (np.abs(y) <= 1e12).astype(float), cfg)
    assert est == pytest.approx(1.0)


def test_two_horizon_functional_difference_shrinks():
    m = make_model(alpha=1.5)
    u = np.cos
    base = dict(n=50, N=20000, seed=8, x0=5.0)
    vals = {t: monte_carlo_functional(m, u, SimConfig(t=t, **base))[0] for t in (0.5, 1.0, 4.0, 8.0)}
    assert abs(vals[4.0] - vals[8.0]) < abs(vals[0.5] - vals[1.0])


def test_skeleton_drift_pure_flow():
    m = make_model(c=0.0)
    spec = LyapunovSpec(kind="polynomial", p=2.0)
    h = 0.01
    est, hw = empirical_skeleton_drift(m, spec, 10.0, h, 50, n=1000)
    assert est == pytest.approx(-200 * h, rel=0.02)
    assert hw == 0.0
    with pytest.raises(PreconditionError):
        empirical_skeleton_drift(m, spec, 0.5, h, 10)


def test_skeleton_drift_kurtosis_guard_warns():
    m = make_model(alpha=1.5)
    spec = LyapunovSpec(kind="polynomial", p=1.2)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        empirical_skeleton_drift(m, spec, 10.0, 0.05, 5000, seed=3)
    assert any("kurtosis" in str(w.message) for w in rec)


def test_chain_sample_files(tmp_path):
    s = simulate_chain(make_model(alpha=1.5), SimConfig(n=10, t=1.0, N=5, seed=2))
    s.write(tmp_path / "c.csv", tmp_path / "c.json")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].startswith("# config:") and lines[1] == "replica_index,endpoint" and len(lines) == 7
    side = json.loads((tmp_path / "c.json").read_text())
    assert side["config"]["seed"] == 2 and "mean_jumps" in side["diagnostics"]


def test_stable_half_width_scaling():
    from levy_ergodicity.simulator import _stable_half_width

    m = make_model(alpha=1.5)
    spec = LyapunovSpec(kind="polynomial", p=1.2)
    a = 1.5 / 1.2
    hw1 = _stable_half_width(m, spec, 10.0, 0.05, 10_000, 1.96)
    hw2 = _stable_half_width(m, spec, 10.0, 0.05, 160_000, 1.96)
    assert hw2 / hw1 == pytest.approx(16.0 ** (1.0 / a - 1.0), rel=1e-9)
    assert _stable_half_width(make_model(family="tempered", alpha=1.5, theta=1.0), spec, 10.0, 0.05, 100, 1.96) is None
    assert _stable_half_width(m, LyapunovSpec(kind="polynomial", p=2.0), 10.0, 0.05, 100, 1.96) is None
