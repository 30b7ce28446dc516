"""Rate calculus: F(t) = int_1^t dw / f(w), its inverse, and psi(t) = 1 / f(F^{-1}(gamma t)).

Rate functions are represented as ``f(v) = C v^power (ln(v) / beta)^log_power``, which
covers every f produced by the corollaries.  Closed forms are used when the
function carries a pathway tag; otherwise F is integrated numerically in
s = ln(w) and inverted by bracketing, also in s, so that F^{-1} never overflows.
"""
from dataclasses import dataclass
import csv
import json
import math

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidRateFunctionError, PreconditionError, RateRangeError
from .quadrature import QuadConfig, integrate_panel

PATHWAYS = ("exp", "poly", "subexp")
_F_QUAD = QuadConfig(rel_tol=1e-13, abs_tol=1e-15, limit=500)
_S_MAX = 2.0**16


@dataclass(frozen=True)
class RateFunction:
    C: float
    power: float = 1.0
    log_power: float = 0.0
    beta: float = 1.0
    pathway: str | None = None
    kappa: float | None = None
    p: float | None = None
    zeta: float | None = None
    constraint: str = ""

    def __post_init__(self):
        if not self.C > 0:
            raise InvalidRateFunctionError("rate constant C must be positive")
        if self.pathway is not None and self.pathway not in PATHWAYS:
            raise InvalidRateFunctionError(f"unknown pathway {self.pathway!r}")
        if self.pathway == "poly" and (self.kappa is None or self.p is None):
            raise InvalidRateFunctionError("poly pathway needs kappa and p")
        if self.pathway == "subexp" and (self.kappa is None or self.zeta is None):
            raise InvalidRateFunctionError("subexp pathway needs kappa and zeta")

    def log_eval(self, log_v):
        log_v = np.asarray(log_v, dtype=float)
        out = math.log(self.C) + self.power * log_v
        if self.log_power:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out + self.log_power * np.log(log_v / self.beta)
        return out if out.ndim else float(out)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.exp(self.log_eval(np.log(v)))

    @property
    def domain_lo(self):
        """Left end of the range where f is increasing and concave."""
        if self.log_power >= 0:
            return 1.0
        return math.exp(1.0 - self.log_power)

    def scaled(self, factor):
        return RateFunction(**{**self.to_dict(), "C": self.C * factor})

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def describe(self):
        s = f"{self.C:g} * v^{self.power:g}"
        if self.log_power:
            s += f" * (ln(v)/{self.beta:g})^{self.log_power:g}"
        return s


def linear_rate(C):
    return RateFunction(C=C, power=1.0, pathway="exp")


def _log_f(f, s):
    if isinstance(f, RateFunction):
        return f.log_eval(s)
    val = f(math.exp(s))
    if not val > 0:
        raise InvalidRateFunctionError(f"rate function is not positive at w = e^{s:g}")
    return math.log(val)


def _integrand(f, s):
    lf = _log_f(f, s)
    if np.isnan(lf) or (lf == -math.inf and s > 0):
        raise InvalidRateFunctionError(f"rate function is not positive at w = e^{s:g}")
    return math.exp(s - lf) if np.isfinite(lf) else 0.0


def big_F_numeric_log(f, s):
    """F(e^s) by quadrature in s = ln(w)."""
    if s < 0:
        raise PreconditionError("F is defined for t >= 1")
    if s == 0:
        return 0.0
    return integrate_panel(lambda r: _integrand(f, r), 0.0, s, _F_QUAD)


def _closed_F_log(f, s):
    C = f.C
    if f.pathway == "exp":
        return s / C
    if f.pathway == "poly":
        k, p = f.kappa, f.p
        return p / (C * (1.0 - k)) * math.expm1((1.0 - k) / p * s)
    k, z, b = f.kappa, f.zeta, f.beta
    return (1.0 + z) / (C * (1.0 - k)) * b ** ((k + z) / (1.0 + z)) * s ** ((1.0 - k) / (1.0 + z))


def _closed_inverse_log(f, y):
    C = f.C
    if f.pathway == "exp":
        return C * y
    if f.pathway == "poly":
        k, p = f.kappa, f.p
        arg = 1.0 + C * (1.0 - k) * y / p
        if arg <= 0:
            sup = p / (C * (k - 1.0))
            raise RateRangeError(
                f"F is bounded (sup F = {sup:.6g}) for kappa > 1; y = {y:g} is out of range, "
                "use the kappa >= 1 closed form f(x) = C x"
            )
        return p / (1.0 - k) * math.log(arg)
    k, z, b = f.kappa, f.zeta, f.beta
    eta = (k + z) / (1.0 + z)
    return (C * (1.0 - k) * y / ((1.0 + z) * b**eta)) ** ((1.0 + z) / (1.0 - k))


def _use_closed(f, method):
    if method not in ("auto", "closed", "numeric"):
        raise ValueError("method must be auto, closed or numeric")
    tagged = isinstance(f, RateFunction) and f.pathway is not None
    if method == "closed" and not tagged:
        raise PreconditionError("closed form requested for an untagged rate function")
    return tagged and method != "numeric"


def big_F(f, t, method="auto"):
    """F(t) = int_1^t dw / f(w) for t >= 1."""
    if t < 1:
        raise PreconditionError("F is defined for t >= 1")
    s = math.log(t)
    if _use_closed(f, method):
        return _closed_F_log(f, s)
    return big_F_numeric_log(f, s)


def inverse_F_log(f, y, method="auto"):
    """ln F^{-1}(y)."""
    if y < 0:
        raise PreconditionError("inverse_F needs y >= 0")
    if y == 0:
        return 0.0
    if _use_closed(f, method):
        return _closed_inverse_log(f, y)
    tol = 1e-9 * (1.0 + y)
    s_hi = 1.0
    F_hi = big_F_numeric_log(f, s_hi)
    while F_hi < y:
        if s_hi >= _S_MAX:
            raise RateRangeError(
                f"F appears bounded (F(exp({s_hi:g})) = {F_hi:.6g} < y = {y:g}); "
                "the power-law F is bounded for kappa > 1, use the kappa >= 1 closed form f(x) = C x"
            )
        s_hi *= 2.0
        F_hi = big_F_numeric_log(f, s_hi)
    s_lo = 0.0 if s_hi == 1.0 else s_hi / 2.0
    g = lambda s: big_F_numeric_log(f, s) - y  # noqa: E731
    s = brentq(g, s_lo, s_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(g(s)) > tol:
        raise RateRangeError(f"inverse_F bracketing did not reach |F(t) - y| <= {tol:g}")
    return s


def inverse_F(f, y, method="auto"):
    return math.exp(inverse_F_log(f, y, method))


@dataclass(frozen=True)
class RatePlan:
    f: RateFunction
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise PreconditionError("gamma must be positive")

    @property
    def closed_form(self):
        return self.f.pathway

    def psi(self, t, method="auto"):
        return psi(self, t, method)

    def predicted_exponent(self):
        """Decay exponent of psi: -C gamma (exp, per unit t) or 1 - p/(1-kappa) (poly, log-log)."""
        f = self.f
        if f.pathway == "exp":
            return -f.C * self.gamma
        if f.pathway == "poly":
            return 1.0 - f.p / (1.0 - f.kappa)
        if f.pathway == "subexp":
            k, z, b = f.kappa, f.zeta, f.beta
            eta = (k + z) / (1.0 + z)
            return -((f.C * b ** (-eta) * self.gamma * (1.0 - k) / (1.0 + z)) ** ((1.0 + z) / (1.0 - k)))
        raise PreconditionError("untagged rate function has no predicted exponent")

    def to_dict(self):
        return {"f": self.f.to_dict(), "gamma": self.gamma, "closed_form": self.closed_form}


def _psi_closed(plan, t):
    f, g = plan.f, plan.gamma
    C = f.C
    if f.pathway == "exp":
        return math.exp(-C * g * t) / C
    if f.pathway == "poly":
        k, p = f.kappa, f.p
        return (C * g * (1.0 - k) * t / p + 1.0) ** (1.0 - p / (1.0 - k)) / C
    k, z, b = f.kappa, f.zeta, f.beta
    base = g * (1.0 - k) * t / (1.0 + z)
    pref = C ** ((1.0 + z) / (k - 1.0)) * b ** ((k + z) / (1.0 - k)) * base ** ((k + z) / (k - 1.0))
    return pref * math.exp(-((C * b ** (-(k + z) / (1.0 + z)) * base) ** ((1.0 + z) / (1.0 - k))))


def psi(plan, t, method="auto"):
    """psi(t) = 1 / f(F^{-1}(gamma t))."""
    if t < 0:
        raise PreconditionError("psi needs t >= 0")
    if _use_closed(plan.f, method):
        return _psi_closed(plan, t)
    s = inverse_F_log(plan.f, plan.gamma * t, method="numeric")
    lf = _log_f(plan.f, s)
    return math.exp(-lf)


def F_table(f, ts, method="auto"):
    """Tabulated (t, F(t), F^{-1}(F(t))) rows; the last column checks the inversion."""
    rows = []
    for t in ts:
        val = big_F(f, t, method)
        rows.append((t, val, inverse_F(f, val, method)))
    return rows


def log_time_grid(t_min, t_max, points):
    if points == 1:
        return np.array([float(t_min)])
    return np.geomspace(t_min, t_max, int(points))


def write_psi_csv(path, plan, ts, method="auto", config=None):
    with open(path, "w", newline="") as fh:
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        fh.write(f"# closed_form: {plan.closed_form}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "psi"])
        for t in ts:
            w.writerow(["%.17g" % t, "%.17g" % psi(plan, float(t), method)])
