"""Monte-Carlo simulation of the frozen-coefficient approximating chain.

Each step freezes a(x) and nu(x, du) at the current state and draws

    a(x) h + G + J,

where J is a compound-Poisson sum of the jumps with |u| >= eps and G is a
centred Gaussian carrying the variance of the jumps below eps.  Jump sizes come
from the analytic inverse of the untempered tail; tempered kernels are then
thinned with acceptance probability exp(-theta |u|^(1+zeta)).
"""
from dataclasses import asdict, dataclass, field
import csv
import json
import math
import warnings

import numpy as np
from scipy import stats
from scipy.special import gamma as gamma_fn

from . import _chain
from ._accel import resolve_backend
from .errors import CutoffError, ExplosionError, PreconditionError
from .generator import LyapunovSpec
from .levy_kernel import LevyTypeModel
from .quadrature import QuadConfig, integrate_panel

_CF_QUAD = QuadConfig(rel_tol=1e-10, abs_tol=1e-13, limit=800)
MAX_JUMP_RATE = 1e7
KURTOSIS_GUARD = 20.0


def default_eps(h):
    return float(min(1.0, max(1e-4, math.sqrt(h))))


@dataclass(frozen=True)
class SimConfig:
    n: int
    t: float
    N: int
    eps: float | None = None
    seed: int = 0
    x0: float = 0.0
    backend: str | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise PreconditionError("n (steps per unit time) must be a positive integer")
        if not self.t > 0 or not math.isfinite(self.t):
            raise PreconditionError("horizon t must be positive and finite")
        if self.steps < 1:
            raise PreconditionError(f"floor(n t) = {self.steps}; need at least one step")
        if int(self.N) != self.N or self.N < 1:
            raise PreconditionError("replica count N must be a positive integer")
        if self.eps is not None and not 0 < self.eps <= 1:
            raise PreconditionError("eps must lie in (0, 1]")
        if not 0 <= int(self.seed) < 2**64:
            raise PreconditionError("seed must be a 64-bit unsigned integer")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def steps(self):
        return steps_for(self.n, self.t)

    @property
    def cutoff(self):
        return default_eps(self.h) if self.eps is None else float(self.eps)

    def to_dict(self):
        return asdict(self)


def steps_for(n, t):
    # tolerate n*t landing a hair below an integer
    return int(math.floor(n * t + 1e-9))


@dataclass
class ChainSample:
    endpoints: np.ndarray
    seeds: np.ndarray
    config: SimConfig
    diagnostics: dict
    snapshots: dict = field(default_factory=dict)

    def write(self, csv_path, json_path, extra=None):
        cfg = self.config.to_dict()
        with open(csv_path, "w", newline="") as fh:
            fh.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replica_index", "endpoint"])
            for i, y in enumerate(self.endpoints):
                w.writerow([i, "%.17g" % y])
        side = {"config": cfg, "diagnostics": self.diagnostics}
        if extra:
            side.update(extra)
        with open(json_path, "w") as fh:
            json.dump(side, fh, indent=2, sort_keys=True)


def _drift_args(model):
    d = model.drift
    if d.kind == "power":
        dummy = np.array([0.0, 1.0])
        return _chain.DRIFT_POWER, float(d.A), float(d.kappa), dummy, dummy
    return _chain.DRIFT_TABLE, 0.0, 0.0, np.asarray(d.xs, dtype=float), np.asarray(d.values, dtype=float)


def _kernel_args(model):
    k = model.kernel
    return (
        float(k.c),
        float(k.c_amp),
        float(k.alpha),
        float(k.alpha_amp),
        float(k.small_offset),
        float(k.theta),
        1.0 + float(k.zeta),
    )


def small_jump_variance(model, x, eps):
    """int_{|u| < eps} u^2 nu(x, du), the per-unit-time Gaussian substitution variance."""
    k = model.kernel
    c, _, a_s = k.coefficients(x)
    return float(_chain._small_var_np(c, np.array([a_s]), float(k.theta), 1.0 + k.zeta, eps)[0])


def proposal_rate(model, x, eps):
    """Mass of the untempered proposal on |u| >= eps (both signs)."""
    c, a, a_s = model.kernel.coefficients(x)
    return 2.0 * c * ((eps ** (-a_s) - 1.0) / a_s + 1.0 / a)


def _check_cutoff(model, x0, h, eps):
    if not 0 < eps <= 1 or not math.isfinite(eps):
        raise CutoffError(f"small-jump cutoff eps = {eps} must lie in (0, 1]")
    k = model.kernel
    worst = max(proposal_rate(model, x, eps) for x in (x0, 1e6))
    if not math.isfinite(worst) or h * worst > MAX_JUMP_RATE:
        raise CutoffError(
            f"nu(x, |u| >= eps) * h = {h * worst:.3g} jumps per step at eps = {eps}; increase eps "
            f"(alpha_small = {k.alpha + k.small_offset})"
        )


def _run(model, y0, seed, nsteps, h, eps, record_steps, backend):
    drift = _drift_args(model)
    kern = _kernel_args(model)
    rec = np.asarray(sorted(set(int(s) for s in record_steps)), dtype=np.int64)
    if backend == "numba":
        out, explode, jumps = _chain.run_numba(
            np.ascontiguousarray(y0, dtype=np.float64), np.uint64(seed), int(nsteps), float(h), float(eps), *drift, *kern, rec
        )
    else:
        out, explode, jumps = _chain.run_numpy(np.asarray(y0, dtype=np.float64), int(seed), int(nsteps), h, eps, drift, kern, rec)
    if np.any(explode):
        bad = np.flatnonzero(explode)
        first = bad[np.argmin(explode[bad])]
        raise ExplosionError(
            f"replica {first} left |y| <= 1e300 at step {explode[first]} ({bad.size} replicas exploded); "
            "the model is probably not certifiable",
            step=int(explode[first]),
            replica=int(first),
        )
    return rec, out, jumps


def simulate_chain(model, cfg, record_times=()):
    """Run N replicas of the chain for floor(n t) steps from cfg.x0.

    ``record_times`` adds snapshots at floor(n s) steps for each s.
    """
    if not isinstance(model, LevyTypeModel):
        raise PreconditionError("simulate_chain needs a LevyTypeModel")
    backend = resolve_backend(cfg.backend)
    eps = cfg.cutoff
    h = cfg.h
    _check_cutoff(model, cfg.x0, h, eps)
    nsteps = cfg.steps
    steps = {float(s): steps_for(cfg.n, s) for s in record_times}
    if any(v > nsteps for v in steps.values()):
        raise PreconditionError("record times must not exceed the horizon")
    rec, out, jumps = _run(model, np.full(cfg.N, float(cfg.x0)), cfg.seed, nsteps, h, eps, [*steps.values(), nsteps], backend)
    row = {int(s): i for i, s in enumerate(rec)}
    snapshots = {s: out[row[k]].copy() for s, k in steps.items()}
    diagnostics = {
        "backend": backend,
        "eps": eps,
        "h": h,
        "steps": nsteps,
        "mean_jumps": float(jumps.mean()),
        "gaussian_variance_at_x0": h * small_jump_variance(model, cfg.x0, eps),
        "proposal_rate_at_x0": proposal_rate(model, cfg.x0, eps),
    }
    return ChainSample(
        endpoints=out[row[nsteps]].copy(),
        seeds=_chain.replica_keys(cfg.seed, cfg.N),
        config=cfg,
        diagnostics=diagnostics,
        snapshots=snapshots,
    )


def sample_increments(model, x, h, size, eps=None, seed=0, backend=None):
    """``size`` independent one-step increments from the frozen state x."""
    eps = default_eps(h) if eps is None else eps
    _check_cutoff(model, x, h, eps)
    backend = resolve_backend(backend)
    _, out, _ = _run(model, np.full(int(size), float(x)), seed, 1, h, eps, [1], backend)
    return out[0] - float(x)


def sample_increment(model, x, h, eps=None, seed=0, replica=0):
    """A single increment; ``(seed, replica)`` names the random stream."""
    eps = default_eps(h) if eps is None else eps
    _check_cutoff(model, x, h, eps)
    y0 = np.full(replica + 1, float(x))
    _, out, _ = _run(model, y0, seed, 1, h, eps, [1], "numpy")
    return float(out[0, replica] - x)


def char_exponent(model, x, xi):
    """q(x, xi) = -i a(x) xi + int (1 - cos(xi u)) nu(x, du)."""
    xi = float(xi)
    drift = float(model.drift(x))
    if xi == 0.0:
        return complex(0.0, 0.0)
    k = model.kernel
    c, a, a_s = k.coefficients(x)
    ax = abs(xi)
    if c == 0:
        re = 0.0
    elif k.family == "stable_like" and k.small_offset == 0:
        if a == 1.0:
            re = math.pi * c * ax
        else:
            re = 2.0 * c * ax**a * gamma_fn(1.0 - a) * math.cos(math.pi * a / 2.0) / a
    else:
        re = 2.0 * c * _jump_integral(k, a, a_s, ax)
    return complex(re, -drift * xi)


def _jump_integral(k, a, a_s, xi):
    """int_0^inf (1 - cos(xi u)) u^(-1-alpha) exp(-theta u^(1+zeta)) du, alpha_s inside u <= 1."""
    def temper(u):
        return math.exp(-k.theta * u ** (1.0 + k.zeta)) if k.theta else 1.0

    def near(u):
        s = math.sin(0.5 * xi * u)
        return 2.0 * s * s / (u * u) * temper(u) if u > 0 else 0.5 * xi * xi

    out = integrate_panel(near, 0.0, 1.0, _CF_QUAD, weight="alg", wvar=(1.0 - a_s, 0.0))
    plain = integrate_panel(lambda u: u ** (-1.0 - a) * temper(u), 1.0, math.inf, _CF_QUAD)
    osc = integrate_panel(lambda u: u ** (-1.0 - a) * temper(u), 1.0, math.inf, _CF_QUAD, weight="cos", wvar=xi)
    return out + plain - osc


def monte_carlo_functional(model, u, cfg, sample=None):
    """Replica mean of u at the endpoints and its standard error."""
    sample = simulate_chain(model, cfg) if sample is None else sample
    vals = np.asarray(u(sample.endpoints), dtype=float)
    if vals.shape == ():
        vals = np.full(sample.endpoints.shape, float(vals))
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(vals.mean()), se


def _stable_half_width(model, spec, x, h, M, z):
    """Half-width from the stable limit of the mean when V(Y_h) - V(x) has infinite variance.

    For V = |x|^p and an untempered kernel, P(V(Y_h) - V(x) > t) ~ h N(x, t^(1/p))
    = h (2 c(x) / alpha(x)) t^(-alpha(x)/p), a one-sided tail.  The centred sum of
    M draws is then close to a totally skewed a-stable law with a = alpha(x)/p.
    Returns None when no such tail is available.
    """
    k = model.kernel
    if k.theta != 0.0 or spec.kind != "polynomial":
        return None
    c, alpha, _ = k.coefficients(float(x))
    a = alpha / spec.p
    if not 1.0 < a < 2.0 or c == 0.0:
        return None
    c_tail = h * 2.0 * c / alpha
    c_a = gamma_fn(a) * math.sin(math.pi * a / 2.0) / math.pi
    scale = (M * c_tail / c_a) ** (1.0 / a) / M
    tail_prob = stats.norm.sf(z)
    lo, hi = stats.levy_stable(a, 1.0).ppf([tail_prob, 1.0 - tail_prob])
    return float(scale * max(-lo, hi))


def empirical_skeleton_drift(model, spec, x, h, M, n=200, seed=0, eps=None, backend=None, z=1.959963984540054):
    """(mean of V(Y_h) - V(x), half-width) for the skeleton-chain drift inequality."""
    if abs(x) < 1:
        raise PreconditionError("the skeleton drift check uses |x| >= 1")
    if not isinstance(spec, LyapunovSpec):
        raise PreconditionError("spec must be a LyapunovSpec")
    cfg = SimConfig(n=n, t=h, N=M, eps=eps, seed=seed, x0=float(x), backend=backend)
    sample = simulate_chain(model, cfg)
    if spec.kind == "polynomial":
        diffs = np.asarray(spec.value(sample.endpoints)) - float(spec.value(x))
    else:
        ex = float(spec._E(x))
        diffs = np.expm1(np.asarray(spec._E(sample.endpoints)) - ex) * math.exp(ex)
    mean = float(diffs.mean())
    sd = float(diffs.std(ddof=1)) if M > 1 else 0.0
    hw = z * sd / math.sqrt(M)
    if sd > 0:
        kurt = float(np.mean(((diffs - mean) / sd) ** 4))
        if kurt > KURTOSIS_GUARD:
            stable = _stable_half_width(model, spec, x, h, M, z)
            hw = max(hw, stable) if stable is not None else hw * math.sqrt(kurt / 3.0)
            warnings.warn(
                f"sample kurtosis {kurt:.1f} signals heavy tails; confidence half-width widened to {hw:.4g}",
                RuntimeWarning,
                stacklevel=2,
            )
    return mean, hw
