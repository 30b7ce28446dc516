"""Drift and jump-kernel description of a one-dimensional Levy-type process.

The jump kernel has density

    nu(x, du) = c(x) |u|^(-1-alpha(x)) exp(-theta |u|^(1+zeta)) du

with ``theta = 0`` for the stable-like family.  State dependence enters through

    s(x) = x^2 / (1 + x^2),  alpha(x) = alpha + alpha_amp * s(x),  c(x) = c * (1 + c_amp * s(x)).

Inside |u| <= 1 the index may be shifted to ``alpha_small`` (continuous at |u| = 1),
which gives kernels whose small-jump and large-jump behaviour differ.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DivergenceError, ModelInvalidError, PreconditionError, TailIndexMismatchError
from .quadrature import QuadConfig, integrate_panel

FAMILIES = ("stable_like", "tempered")
DRIFT_KINDS = ("power", "table")

_KERNEL_QUAD = QuadConfig(rel_tol=1e-11, abs_tol=0.0, limit=500)


@dataclass(frozen=True)
class KernelSpec:
    family: str = "stable_like"
    c: float = 1.0
    alpha: float = 1.5
    theta: float = 0.0
    zeta: float = 0.0
    alpha_small: float | None = None
    alpha_amp: float = 0.0
    c_amp: float = 0.0
    sigma: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelInvalidError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.c < 0 or self.c_amp < 0:
            raise ModelInvalidError("kernel intensity must be nonnegative")
        if self.alpha <= 0:
            raise ModelInvalidError(f"tail index alpha must be positive (got {self.alpha}); the tail integral diverges")
        if self.alpha_amp < 0:
            raise ModelInvalidError("alpha_amp must be nonnegative")
        if self.alpha_small is not None and self.alpha_small <= 0:
            raise ModelInvalidError("alpha_small must be positive")
        if self.family == "stable_like" and self.theta != 0:
            raise ModelInvalidError("stable_like kernels have theta = 0; use the tempered family")
        if self.family == "tempered":
            if self.theta <= 0:
                raise ModelInvalidError("tempered kernels need theta > 0")
            if not -1.0 < self.zeta <= 0.0:
                raise ModelInvalidError("tempering exponent zeta must lie in (-1, 0]")
        sig, dlt = self.declared_sigma, self.declared_delta
        if not 0 < sig <= dlt:
            raise ModelInvalidError(f"need 0 < sigma <= delta, got sigma={sig}, delta={dlt}")

    @property
    def declared_sigma(self):
        return self.alpha if self.sigma is None else float(self.sigma)

    @property
    def declared_delta(self):
        # an undeclared delta never undercuts a declared sigma, so the tail check sees the mismatch
        if self.delta is None:
            return max(self.alpha + self.alpha_amp, self.declared_sigma)
        return float(self.delta)

    @property
    def small_offset(self):
        return 0.0 if self.alpha_small is None else self.alpha_small - self.alpha

    @property
    def state_independent(self):
        return self.alpha_amp == 0 and self.c_amp == 0

    def coefficients(self, x):
        """(c(x), alpha(x), alpha_small(x)) at state x."""
        s = x * x / (1.0 + x * x)
        a = self.alpha + self.alpha_amp * s
        return self.c * (1.0 + self.c_amp * s), a, a + self.small_offset

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Drift:
    """a(x) = -A sign(x) |x|^kappa (kind="power") or a tabulated drift."""

    kind: str = "power"
    A: float = 1.0
    kappa: float = 1.0
    xs: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in DRIFT_KINDS:
            raise ModelInvalidError(f"unknown drift kind {self.kind!r}")
        if self.kind == "table":
            xs = np.asarray(self.xs, dtype=float)
            if xs.size < 2 or xs.size != len(self.values):
                raise ModelInvalidError("tabulated drift needs matching xs/values with at least 2 points")
            if np.any(np.diff(xs) <= 0):
                raise ModelInvalidError("tabulated drift xs must be strictly increasing")
            object.__setattr__(self, "xs", tuple(float(v) for v in xs))
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            ax = np.abs(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                mag = np.where(ax > 0, ax ** self.kappa, 0.0)
            out = -self.A * np.sign(x) * mag
        else:
            xs = np.asarray(self.xs)
            ys = np.asarray(self.values)
            out = np.interp(x, xs, ys)
            # linear extrapolation beyond the table
            lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out = np.where(x < xs[0], ys[0] + lo_slope * (x - xs[0]), out)
            out = np.where(x > xs[-1], ys[-1] + hi_slope * (x - xs[-1]), out)
        return out if out.ndim else float(out)

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "A": self.A, "kappa": self.kappa}
        return {"kind": "table", "xs": list(self.xs), "values": list(self.values)}


@dataclass(frozen=True)
class LevyTypeModel:
    drift: Drift = field(default_factory=Drift)
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def to_dict(self):
        return {"drift": self.drift.to_dict(), "kernel": self.kernel.to_dict()}


@dataclass(frozen=True)
class TailConstants:
    N_sigma: float
    N_delta: float
    N_max: float
    nu_small: float
    x_cutoff: float
    sigma: float
    delta: float
    ratio_bounds: tuple = ()  # (lambda, min ratio, max ratio) triples

    def to_dict(self):
        return {
            "N_sigma": self.N_sigma,
            "N_delta": self.N_delta,
            "N_max": self.N_max,
            "nu_small": self.nu_small,
            "x_cutoff": self.x_cutoff,
            "sigma": self.sigma,
            "delta": self.delta,
            "ratio_bounds": [list(r) for r in self.ratio_bounds],
        }


def _kernel(model_or_kernel):
    return model_or_kernel.kernel if isinstance(model_or_kernel, LevyTypeModel) else model_or_kernel


def log_density(model, x, u):
    """log of the jump density at jump size u (u != 0)."""
    k = _kernel(model)
    c, a, a_s = k.coefficients(x)
    au = np.abs(np.asarray(u, dtype=float))
    idx = np.where(au <= 1.0, a_s, a)
    with np.errstate(divide="ignore"):
        out = math.log(c) if c > 0 else -np.inf
        out = out - (1.0 + idx) * np.log(au)
        if k.theta:
            out = out - k.theta * au ** (1.0 + k.zeta)
    return out


def density(model, x, u):
    return np.exp(log_density(model, x, u))


def _tempering(k, u):
    if not k.theta:
        return np.ones_like(np.asarray(u, dtype=float))
    return np.exp(-k.theta * np.abs(u) ** (1.0 + k.zeta))


def tail(model, x, u):
    """One-sided tail nu(x, [u, inf)), equal to nu(x, (-inf, -u]) by symmetry."""
    if u <= 0:
        raise PreconditionError("tail threshold u must be positive")
    k = _kernel(model)
    c, a, a_s = k.coefficients(x)
    if c == 0:
        return 0.0
    if math.isinf(u):
        return 0.0
    if k.family == "stable_like":
        if u >= 1.0:
            return c * u ** (-a) / a
        return c * ((u ** (-a_s) - 1.0) / a_s + 1.0 / a)
    out = 0.0
    if u < 1.0:
        out += integrate_panel(lambda r: c * r ** (-1.0 - a_s) * _tempering(k, r), u, 1.0, _KERNEL_QUAD)
    lo = max(u, 1.0)
    out += integrate_panel(lambda r: c * r ** (-1.0 - a) * _tempering(k, r), lo, math.inf, _KERNEL_QUAD)
    return out


def power_moment_tail(model, x, U, s):
    """int_U^inf r^s nu(x, dr) for U >= 1."""
    if U < 1.0:
        raise PreconditionError("power_moment_tail needs U >= 1")
    k = _kernel(model)
    c, a, _ = k.coefficients(x)
    if c == 0:
        return 0.0
    if k.family == "stable_like":
        if s >= a:
            raise DivergenceError(f"int r^{s} nu(dr) diverges for tail index {a}")
        return c * U ** (s - a) / (a - s)
    return integrate_panel(lambda r: c * r ** (s - 1.0 - a) * _tempering(k, r), U, math.inf, _KERNEL_QUAD)


def small_jump_moment(model, x):
    """nu_small(x) = int_{|u|<=1} u^2 nu(x, du)."""
    k = _kernel(model)
    c, _, a_s = k.coefficients(x)
    if c == 0:
        return 0.0
    if a_s >= 2.0:
        raise DivergenceError(
            f"small-jump moment diverges: integrand u^(1-alpha) with alpha={a_s} >= 2 is not integrable at 0"
        )
    if k.family == "stable_like":
        return 2.0 * c / (2.0 - a_s)
    val = integrate_panel(
        lambda r: _tempering(k, r), 0.0, 1.0, _KERNEL_QUAD, weight="alg", wvar=(1.0 - a_s, 0.0)
    )
    return 2.0 * c * val


def exp_moment_is_finite(model, alpha, zeta):
    """Analytic classification of int_{|u|>=1} exp(alpha |u|^(1+zeta)) nu(x, du) < inf."""
    k = _kernel(model)
    if k.c == 0:
        return True
    if k.family == "stable_like":
        return False
    if zeta < k.zeta:
        return True
    if zeta > k.zeta:
        return False
    return alpha < k.theta or (alpha == k.theta and k.alpha > 0)


def exp_moment(model, x, alpha, zeta, ratio=0.5, max_panels=64, rtol=1e-13):
    """nu_{alpha,zeta,large}(x), or ``math.inf`` when the integral diverges.

    Integrates on geometric panels [2^j, 2^(j+1)]; the sum is accepted once three
    consecutive panels shrink by at least ``ratio`` and the last panel is below
    ``rtol`` of the running total.
    """
    if alpha <= 0:
        raise PreconditionError("exp_moment needs alpha > 0")
    if not -1.0 < zeta <= 0.0:
        raise PreconditionError("exp_moment needs zeta in (-1, 0]")
    k = _kernel(model)
    c, a, _ = k.coefficients(x)
    if c == 0:
        return 0.0
    if not exp_moment_is_finite(k, alpha, zeta):
        return math.inf

    def integrand(u):
        lg = alpha * u ** (1.0 + zeta) + math.log(c) - (1.0 + a) * math.log(u) - k.theta * u ** (1.0 + k.zeta)
        return math.exp(lg) if lg < 700.0 else math.inf

    total = 0.0
    prev = None
    decays = 0
    for j in range(max_panels):
        lo, hi = 2.0**j, 2.0 ** (j + 1)
        if integrand(hi) == math.inf:
            return math.inf
        v = integrate_panel(integrand, lo, hi, _KERNEL_QUAD)
        if not math.isfinite(v):
            return math.inf
        total += v
        if prev is not None and v <= ratio * prev:
            decays += 1
        else:
            decays = 0
        prev = v
        if decays >= 3 and v <= rtol * total:
            return 2.0 * total
    return math.inf


def check_symmetry(model, x, edges=(1e-3, 0.1, 1.0, 10.0, 100.0), rtol=1e-8):
    """Compare nu(x, [a, b]) with nu(x, [-b, -a]) panel by panel; returns max relative gap."""
    k = _kernel(model)
    worst = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        pos = integrate_panel(lambda u: float(density(k, x, u)), lo, hi, _KERNEL_QUAD)
        neg = integrate_panel(lambda v: float(density(k, x, v)), -hi, -lo, _KERNEL_QUAD)
        scale = max(abs(pos), abs(neg), 1e-300)
        worst = max(worst, abs(pos - neg) / scale)
    if worst > rtol:
        raise ModelInvalidError(f"kernel is not symmetric at x={x}: relative panel gap {worst:.3e}")
    return worst


def boundedness(model, grid):
    """sup over the grid of int (1 ^ u^2) nu(x, du); finite for every valid model."""
    vals = [small_jump_moment(model, x) + 2.0 * tail(model, x, 1.0) for x in np.asarray(grid, dtype=float)]
    out = max(vals)
    if not math.isfinite(out):
        raise ModelInvalidError("sup_x int (1 ^ u^2) nu(x, du) is not finite on the grid")
    return out


DEFAULT_STATE_GRID = tuple(np.geomspace(1.0, 1e4, 25))
DEFAULT_LAMBDA_GRID = (1.0, 1.5, 2.0, 4.0, 8.0, 16.0)


def tail_ratio_extrema(model, x, lam, u0=10.0, J=10):
    """(min, max) of N(x, lam u) / N(x, u) over u in {u0 2^j}, proxies for liminf/limsup."""
    ratios = []
    for j in range(J + 1):
        u = u0 * 2.0**j
        base = tail(model, x, u)
        ratios.append(0.0 if base == 0.0 else tail(model, x, lam * u) / base)
    return min(ratios), max(ratios)


def tail_constants(
    model,
    grid=DEFAULT_STATE_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    u0=10.0,
    J=10,
    tol=0.02,
    check_sandwich=True,
):
    """Empirical N_sigma, N_delta, N_max, nu_small and the tail-ratio sandwich check."""
    k = _kernel(model)
    xs = np.unique(np.abs(np.asarray(grid, dtype=float)))
    if xs.size == 0 or xs.max() < 1e3:
        raise PreconditionError("state grid must extend to at least x = 1e3")
    xs_far = xs[xs >= 1.0]
    sigma, delta = k.declared_sigma, k.declared_delta
    nx = np.array([tail(k, x, x) for x in xs_far])
    n_sigma = float(np.max(xs_far**sigma * nx))
    n_delta = float(np.min(xs_far**delta * nx))
    n_max = float(max(tail(k, x, 1.0) for x in xs_far))
    nu_small = float(max(small_jump_moment(k, x) for x in xs_far))

    bounds = []
    if check_sandwich:
        probe = xs_far[:1] if k.state_independent else xs_far
        for lam in lambda_grid:
            lo_all, hi_all = math.inf, -math.inf
            for x in probe:
                lo, hi = tail_ratio_extrema(k, x, lam, u0, J)
                lo_all, hi_all = min(lo_all, lo), max(hi_all, hi)
            bounds.append((float(lam), lo_all, hi_all))
            if hi_all > lam ** (-sigma) * (1.0 + tol) or lo_all < lam ** (-delta) * (1.0 - tol):
                raise TailIndexMismatchError(
                    f"tail ratios at lambda={lam} span [{lo_all:.4g}, {hi_all:.4g}], outside "
                    f"[lambda^-delta, lambda^-sigma] = [{lam ** -delta:.4g}, {lam ** -sigma:.4g}] "
                    f"(declared sigma={sigma}, delta={delta}, tolerance {tol:.0%})"
                )
    return TailConstants(
        N_sigma=n_sigma,
        N_delta=n_delta,
        N_max=n_max,
        nu_small=nu_small,
        x_cutoff=float(xs_far.min()),
        sigma=sigma,
        delta=delta,
        ratio_bounds=tuple(bounds),
    )
