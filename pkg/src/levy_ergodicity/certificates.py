"""Ergodicity certificates for one-dimensional Levy-type processes.

A certificate evaluates the limsup drift conditions on a geometric outer grid
(a falsifiable proxy for the limit) and, separately, extracts the constants of
the skeleton-chain drift inequality E_x V(X_1) - V(x) <= -f(V(x)) + C together
with a compact set [-R, R] on which the small-set argument is run.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    BalanceViolationError,
    InvalidRateFunctionError,
    NoInwardDriftError,
    NotApplicableError,
    PreconditionError,
)
from .generator import LyapunovSpec, apply_generator_scaled
from .levy_kernel import (
    check_symmetry,
    exp_moment,
    exp_moment_is_finite,
    small_jump_moment,
    tail_constants,
)
from .quadrature import DEFAULT_QUAD
from .rates import RateFunction
from .series import even_binomial_series

_EQ = 1e-12
X_FAR = 100.0
MARGIN_FRACTION = 0.05


def outer_grid(x_far=X_FAR, x_max=1e4, points=9):
    pos = np.geomspace(x_far, x_max, points)
    return np.concatenate((-pos[::-1], pos))


def inner_grid(x_far=X_FAR):
    pos = np.unique(np.concatenate((np.linspace(0.0, 4.0, 17), np.geomspace(4.0, x_far, 12))))
    return np.unique(np.concatenate((-pos, pos)))


DEFAULT_OUTER_GRID = tuple(outer_grid())


def _is(a, b):
    return abs(a - b) <= _EQ


def classify_case(sigma, delta):
    if not 0 < sigma <= delta + _EQ:
        raise PreconditionError(f"need 0 < sigma <= delta, got ({sigma}, {delta})")
    if _is(sigma, 2.0) and _is(delta, 2.0):
        return 2
    if sigma > 1 and delta < 2 - _EQ:
        return 1
    if sigma >= 2 - _EQ and delta > 2 + _EQ:
        return 3
    if 1 < sigma < 2 - _EQ and delta >= 2 - _EQ:
        return 4
    raise NotApplicableError(f"(sigma, delta) = ({sigma}, {delta}) lies outside the four polynomial cases")


def _case1_weight(p, n_delta, delta):
    def weight(k):
        two_k = 2.0 * k
        return n_delta * two_k / (two_k - delta) - n_delta * (two_k - p) / (two_k - p + delta)

    return weight


def constant_C(case, p, tails, sigma=None, delta=None, series_tol=1e-12):
    """C^(i) for the polynomial cases 1-4."""
    sigma = tails.sigma if sigma is None else sigma
    delta = tails.delta if delta is None else delta
    if not 1 < p < sigma:
        raise PreconditionError(f"p must lie in (1, sigma) = (1, {sigma}); got {p}")
    ns, nd = tails.N_sigma, tails.N_delta
    if case == 1:
        drift_part = 2.0 * p * ns / (sigma - p)
        if not _is(sigma, delta):
            return drift_part
        series = even_binomial_series(p, _case1_weight(p, nd, delta), tol=series_tol)
        return 2.0 * series + drift_part
    if case == 2:
        return 2.0 * p * (p - 1.0) * nd
    if case == 3:
        extra = 2.0 * p * ns / (sigma - p) if _is(sigma, 2.0) else 0.0
        return p * (p - 1.0) / 2.0 * (tails.nu_small + 2.0 * tails.N_max + 4.0 * nd / (delta - 2.0)) + extra
    if case == 4:
        return 2.0 * p * ns / (sigma - p)
    raise PreconditionError(f"unknown polynomial case {case}")


def log_scaling_phi(case, p, sigma, x, kappa=None, zeta=None, beta=None):
    ax = abs(float(x))
    if ax < 1:
        raise PreconditionError("scalings are only used for |x| >= 1")
    lx = math.log(ax)
    if case in (1, 4):
        return (p - sigma) * lx
    if case == 2:
        return (p - 2.0) * lx + math.log(math.log1p(ax))
    if case == 3:
        return (p - 2.0) * lx
    if case == 5:
        if None in (kappa, zeta, beta):
            raise PreconditionError("the exponential scaling needs kappa, zeta and beta")
        return (kappa + zeta) * lx + beta * ax ** (1.0 + zeta)
    raise PreconditionError(f"unknown case {case}")


def scaling_phi(case, p, sigma, x, kappa=None, zeta=None, beta=None):
    return math.exp(log_scaling_phi(case, p, sigma, x, kappa, zeta, beta))


def _log_f(f, log_v):
    if isinstance(f, RateFunction):
        return f.log_eval(log_v)
    val = float(f(math.exp(log_v)))
    return math.log(val) if val > 0 else -math.inf


def _f_value(f, v):
    return float(f(v))


def validate_rate_function(f, v_max, points=64, rtol=1e-10):
    """Grid test for a nonnegative, nondecreasing, concave f on [domain_lo, v_max]."""
    lo = getattr(f, "domain_lo", 1.0)
    hi = max(min(v_max, 1e300), lo * 10.0)
    vs = np.geomspace(lo, hi, points)
    vals = np.array([_f_value(f, v) for v in vs])
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        raise InvalidRateFunctionError("rate function is negative or non-finite on the check grid")
    scale = np.maximum(np.abs(vals), 1e-300)
    if np.any(np.diff(vals) < -rtol * scale[1:]):
        raise InvalidRateFunctionError("rate function is not nondecreasing on the check grid")
    mids = 0.5 * (vs[:-2] + vs[2:])
    fm = np.array([_f_value(f, v) for v in mids])
    chord = 0.5 * (vals[:-2] + vals[2:])
    if np.any(fm < chord - rtol * np.maximum(np.abs(chord), 1e-300)):
        raise InvalidRateFunctionError("rate function fails the midpoint concavity test")
    return True


def drift_growth(model, grid=DEFAULT_OUTER_GRID):
    """(kappa, A_kappa) with limsup a(x) sign(x) / |x|^kappa <= -A_kappa."""
    d = model.drift
    xs = np.asarray(grid, dtype=float)
    xs = xs[np.abs(xs) >= 1.0]
    inward = -np.asarray(d(xs)) * np.sign(xs)
    if np.any(inward < 0) or not np.any(inward > 0) or np.any(inward == 0):
        raise NoInwardDriftError("a(x) sign(x) must be negative on the whole outer grid")
    if d.kind == "power":
        return float(d.kappa), float(d.A)
    lx = np.log(np.abs(xs))
    kappa = float(np.polyfit(lx, np.log(inward), 1)[0])
    ratios = -inward / np.abs(xs) ** kappa
    return kappa, float(-np.max(ratios))


def optimal_zeta(kappa):
    if not -1.0 < kappa < 0.0:
        raise NotApplicableError("the zeta = kappa choice applies only for kappa in (-1, 0)")
    return float(kappa)


def corollary_rate(kappa, p=None, sigma=None, zeta=0.0, beta=1.0, pathway="poly", C=1.0, delta=None, A_kappa=None, C5=None):
    """The rate function f supplied by the polynomial or exponential corollary."""
    if pathway == "poly":
        if p is None or sigma is None:
            raise PreconditionError("the poly pathway needs p and sigma")
        if kappa + min(sigma, 2.0) <= 1.0:
            raise BalanceViolationError(f"kappa + min(sigma, 2) = {kappa + min(sigma, 2.0):g} must exceed 1")
        if kappa < -1.0:
            raise BalanceViolationError("the polynomial corollary needs kappa >= -1")
        if _is(kappa, -1.0) and _is(sigma, 2.0) and (delta is None or _is(delta, 2.0)):
            raise BalanceViolationError("kappa = -1 is excluded when sigma = delta = 2")
        constraint = f"C < p * A_kappa = {p} * A_kappa"
        if A_kappa is not None:
            constraint = f"C < p * A_kappa = {p * A_kappa:g}"
        if kappa >= 1.0:
            return RateFunction(C=C, power=1.0, pathway="exp", kappa=kappa, p=p, constraint=constraint)
        return RateFunction(C=C, power=1.0 + (kappa - 1.0) / p, pathway="poly", kappa=kappa, p=p, constraint=constraint)
    if pathway != "exp":
        raise PreconditionError("pathway must be 'poly' or 'exp'")
    if kappa >= 0.0:
        if not _is(zeta, 0.0):
            raise PreconditionError("for kappa >= 0 the exponential corollary uses zeta = 0")
        constraint = "-beta A_kappa + C + C5 < 0"
        if A_kappa is not None and C5 is not None:
            constraint = f"C < beta A_kappa - C5 = {beta * A_kappa - C5:g}"
        return RateFunction(C=C, power=1.0, beta=beta, pathway="exp", kappa=kappa, zeta=0.0, constraint=constraint)
    if not -1.0 < kappa < 0.0 or not -1.0 < zeta <= kappa:
        raise PreconditionError("for kappa in (-1, 0) the exponential corollary needs zeta in (-1, kappa]")
    eta = (kappa + zeta) / (1.0 + zeta)
    constraint = "-beta (1 + zeta) A_kappa + C + C5 < 0"
    if A_kappa is not None and C5 is not None:
        constraint = f"C < beta (1 + zeta) A_kappa - C5 = {beta * (1 + zeta) * A_kappa - C5:g}"
    return RateFunction(
        C=C, power=1.0, log_power=eta, beta=beta, pathway="subexp", kappa=kappa, zeta=zeta, constraint=constraint
    )


@dataclass(frozen=True)
class Certificate:
    theorem: int
    case: int
    constants: dict
    f: dict
    margin: float
    required_margin: float
    evidence: tuple
    lyapunov_C: float
    radius_R: float | None
    lyap11: bool
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def certified(self):
        return self.verdict == "certified"

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "case": self.case,
            "constants": self.constants,
            "f": self.f,
            "margin": self.margin,
            "required_margin": self.required_margin,
            "grid": [list(e) for e in self.evidence],
            "lyapunov_C": self.lyapunov_C,
            "lyap11_radius": self.radius_R,
            "lyap11": self.lyap11,
            "verdict": self.verdict,
            "details": self.details,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _f_descriptor(f):
    if isinstance(f, RateFunction):
        return f.to_dict()
    return {"callable": getattr(f, "__name__", repr(f))}


def _log_V(spec, x):
    if spec.kind == "polynomial":
        return float(np.log(spec.value(x)))
    return float(spec._E(x))


def _lyapunov_constant(model, spec, f, xs, quad):
    """sup over xs of LV(x) + f(V(x)), clamped at 0, and the per-point values."""
    vals = []
    for x in xs:
        lv_scaled, log_s = apply_generator_scaled(model, spec, x, quad)
        log_v = _log_V(spec, x)
        log_fv = _log_f(f, log_v) if log_v > 0 or not getattr(f, "log_power", 0) else -math.inf
        vals.append((lv_scaled + math.exp(log_fv - log_s)) * math.exp(log_s))
    vals = np.array(vals)
    return max(0.0, float(np.max(vals))), vals


def _lyap11_radius(spec, f, C, radii):
    for r in radii:
        log_v = _log_V(spec, r)
        # f(1 + V) with 1 + V = exp(log_v + log1p(exp(-log_v)))
        lv1 = log_v + math.log1p(math.exp(-log_v))
        if math.exp(min(_log_f(f, lv1), 700.0)) > 2.0 * C:
            return float(r)
    return None


def _verdict(max_ratio, m, lyap11):
    margin = -max_ratio
    ok = margin > 0 and margin >= m and lyap11
    return margin, ("certified" if ok else "not certified")


def check_theorem1(model, p, f, grid=DEFAULT_OUTER_GRID, x_far=X_FAR, tails=None, quad=DEFAULT_QUAD, margin_fraction=MARGIN_FRACTION):
    """Polynomial Lyapunov certificate for V(x) = |x|^p at large |x|."""
    k = model.kernel
    sigma, delta = k.declared_sigma, k.declared_delta
    if not 1 < p < sigma:
        raise PreconditionError(f"p must lie in (1, sigma) = (1, {sigma}); got {p}")
    grid = np.asarray(grid, dtype=float)
    x_max = float(np.max(np.abs(grid)))
    validate_rate_function(f, x_max**p)
    if tails is None:
        tails = tail_constants(model)
    case = classify_case(sigma, delta)
    c_i = constant_C(case, p, tails, sigma, delta)

    def drift_term(x):
        return p * float(model.drift(x)) * math.copysign(1.0, x) * abs(x) ** (p - 1.0)

    evidence = []
    for x in grid:
        log_phi = log_scaling_phi(case, p, sigma, x)
        fv = math.exp(_log_f(f, p * math.log(abs(x))) - log_phi)
        r = drift_term(x) * math.exp(-log_phi) + fv + c_i
        evidence.append((float(x), float(r)))
    max_ratio = max(r for _, r in evidence)
    m = margin_fraction * abs(drift_term(x_far) / scaling_phi(case, p, sigma, x_far))

    spec = LyapunovSpec(kind="polynomial", p=p)
    xs_in = inner_grid(x_far)
    C, lv_vals = _lyapunov_constant(model, spec, f, xs_in, quad)
    radius = _lyap11_radius(spec, f, C, np.unique(np.abs(np.concatenate((xs_in, grid)))))
    margin, verdict = _verdict(max_ratio, m, radius is not None)
    return Certificate(
        theorem=1,
        case=case,
        constants={"C_case": float(c_i), "tails": tails.to_dict(), "p": p},
        f=_f_descriptor(f),
        margin=float(margin),
        required_margin=float(m),
        evidence=tuple(evidence),
        lyapunov_C=C,
        radius_R=radius,
        lyap11=radius is not None,
        verdict=verdict,
        details={"x_far": x_far, "inner_sup_x": float(xs_in[int(np.argmax(lv_vals))])},
    )


def c0_constant(alpha, beta, zeta):
    """sup_{x > 1} x^2 exp((beta - alpha) x^(1+zeta)), by bounded 1-D maximisation in ln x."""
    if beta >= alpha:
        raise PreconditionError("need beta < alpha; otherwise the supremum is infinite")
    g = alpha - beta
    q = 1.0 + zeta
    obj = lambda s: -(2.0 * s - g * math.exp(q * s))  # noqa: E731
    s_star_guess = math.log(2.0 / (g * q)) / q
    s_max = max(1.0, s_star_guess + 5.0)
    res = minimize_scalar(obj, bounds=(0.0, s_max), method="bounded", options={"xatol": 1e-12})
    best = max(-res.fun, -obj(0.0))
    return math.exp(best)


def constant_C5(beta, zeta, nu_small, nu_large, c0):
    return 0.5 * beta**2 * (1.0 + zeta) ** 2 * (math.exp(beta) * nu_small + c0 * nu_large)


def _default_exp_alpha(kernel, beta, zeta):
    if kernel.family != "tempered":
        raise PreconditionError("stable-like kernels have no finite exponential moment")
    if zeta < kernel.zeta:
        return 2.0 * beta + 1.0
    if _is(zeta, kernel.zeta) and beta < kernel.theta:
        return 0.5 * (beta + kernel.theta)
    raise PreconditionError(f"no alpha > beta = {beta} gives a finite exponential moment at zeta = {zeta}")


def check_theorem2(model, beta, zeta, kappa=None, f=None, grid=DEFAULT_OUTER_GRID, x_far=X_FAR, alpha=None, quad=DEFAULT_QUAD, margin_fraction=MARGIN_FRACTION):
    """Exponential Lyapunov certificate for V(x) = exp(beta |x|^(1+zeta))."""
    if f is None:
        raise PreconditionError("check_theorem2 needs a rate function f")
    if not -1.0 < zeta <= 0.0:
        raise PreconditionError("zeta must lie in (-1, 0]")
    k = model.kernel
    if alpha is None:
        alpha = _default_exp_alpha(k, beta, zeta)
    if beta >= alpha:
        raise PreconditionError(f"need beta < alpha (beta = {beta}, alpha = {alpha})")
    if not exp_moment_is_finite(k, alpha, zeta):
        raise PreconditionError(f"exponential moment is infinite at (alpha, zeta) = ({alpha}, {zeta})")
    grid = np.asarray(grid, dtype=float)
    check_symmetry(model, float(np.max(np.abs(grid))))
    if kappa is None:
        kappa = drift_growth(model, grid)[0]

    probe = grid[grid > 0] if not k.state_independent else grid[grid > 0][:1]
    nu_small = max(small_jump_moment(k, x) for x in probe)
    nu_large = max(exp_moment(k, x, alpha, zeta) for x in probe)
    c0 = c0_constant(alpha, beta, zeta)
    c5 = constant_C5(beta, zeta, nu_small, nu_large, c0)
    x_max = float(np.max(np.abs(grid)))
    log_vmax = beta * x_max ** (1.0 + zeta)
    validate_rate_function(f, math.exp(min(log_vmax, 690.0)))

    def drift_term(x):
        return beta * (1.0 + zeta) * float(model.drift(x)) * math.copysign(1.0, x) / abs(x) ** kappa

    evidence = []
    for x in grid:
        log_v = beta * abs(x) ** (1.0 + zeta)
        log_phi = log_scaling_phi(5, None, None, x, kappa, zeta, beta)
        fv = math.exp(min(_log_f(f, log_v) - log_phi, 700.0))
        evidence.append((float(x), float(drift_term(x) + fv + c5)))
    max_ratio = max(r for _, r in evidence)
    m = margin_fraction * abs(drift_term(x_far))

    spec = LyapunovSpec(kind="exponential", beta=beta, zeta=zeta)
    xs_in = inner_grid(x_far)
    C, lv_vals = _lyapunov_constant(model, spec, f, xs_in, quad)
    radius = _lyap11_radius(spec, f, C, np.unique(np.abs(np.concatenate((xs_in, grid)))))
    margin, verdict = _verdict(max_ratio, m, radius is not None)
    return Certificate(
        theorem=2,
        case=5,
        constants={
            "C5": c5,
            "c0": c0,
            "nu_small": nu_small,
            "nu_large": nu_large,
            "alpha": alpha,
            "beta": beta,
            "zeta": zeta,
            "kappa": kappa,
        },
        f=_f_descriptor(f),
        margin=float(margin),
        required_margin=float(m),
        evidence=tuple(evidence),
        lyapunov_C=C,
        radius_R=radius,
        lyap11=radius is not None,
        verdict=verdict,
        details={"x_far": x_far, "inner_sup_x": float(xs_in[int(np.argmax(lv_vals))])},
    )
