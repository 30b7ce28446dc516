"""Generator of a Levy-type process applied to Lyapunov and validation functions.

The integral part is evaluated in symmetrised form

    L0 V(x) = int_0^inf (V(x+u) + V(x-u) - 2 V(x)) nu(x, du),

which equals the compensated integral for symmetric kernels.  The u-axis is split into

* ``[0, R]``: second-order Taylor remainder
  ``u^2 int_0^1 (1-s) (V''(x+su) + V''(x-su)) ds`` (Gauss-Legendre in s), which
  removes both the 1/u^(1+alpha) singularity and the cancellation for |u| << |x|;
  ``R = 1`` for |x| < 2 and ``|x|/2`` otherwise;
* ``[R, U]``: direct adaptive quadrature, ``U = max(10|x|, 1e3)``;
* ``[U, inf)``: a family-specific tail (binomial series against analytic power
  moments for |x|^p, oscillatory quadrature for cosines, mass only for compact
  functions).

Exponential Lyapunov functions are handled in units of V(x) (``log_scale``) so that
exp(beta |x|^(1+zeta)) never overflows.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import PreconditionError
from .levy_kernel import exp_moment_is_finite, power_moment_tail, tail
from .quadrature import DEFAULT_QUAD, gauss_legendre_unit, integrate_panel

LYAPUNOV_KINDS = ("polynomial", "exponential")


def smooth_norm(x):
    """C^2 norm-like function: |x| outside [-1, 1], 3/8 + 3x^2/4 - x^4/8 inside."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return np.where(ax > 1.0, ax, 0.375 + 0.75 * x * x - 0.125 * x**4)


def smooth_norm_d1(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) > 1.0, np.sign(x), 1.5 * x - 0.5 * x**3)


def smooth_norm_d2(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) > 1.0, 0.0, 1.5 - 1.5 * x * x)


class TestFunction:
    """Interface used by the quadrature: values are reported in units of exp(log_scale(x))."""

    # keep pytest from collecting this class
    __test__ = False

    def value(self, y):
        raise NotImplementedError

    def d1(self, y):
        raise NotImplementedError

    def d2(self, y):
        raise NotImplementedError

    def log_scale(self, x):
        return 0.0

    def d1_scaled(self, x):
        return float(self.d1(x))

    def d2_weighted(self, y, x, logw):
        return self.d2(y) * np.exp(logw)

    def second_diff_weighted(self, x, u, logw):
        return (float(self.value(x + u)) + float(self.value(x - u)) - 2.0 * float(self.value(x))) * math.exp(logw)

    def far_tail_scaled(self, model, x, U, quad):
        raise NotImplementedError


@dataclass(frozen=True)
class LyapunovSpec(TestFunction):
    """V(x) = phi(x)^p (polynomial) or exp(beta phi(x)^(1+zeta)) (exponential)."""

    kind: str = "polynomial"
    p: float = 1.2
    beta: float = 0.1
    zeta: float = 0.0

    def __post_init__(self):
        if self.kind not in LYAPUNOV_KINDS:
            raise PreconditionError(f"unknown Lyapunov kind {self.kind!r}")
        if self.kind == "polynomial" and not self.p > 1.0:
            raise PreconditionError("polynomial Lyapunov functions need p > 1")
        if self.kind == "exponential":
            if self.beta <= 0:
                raise PreconditionError("exponential Lyapunov functions need beta > 0")
            if not -1.0 < self.zeta <= 0.0:
                raise PreconditionError("exponential Lyapunov functions need zeta in (-1, 0]")

    # exponent E(y) = beta phi^(1+zeta) and its derivatives
    def _E(self, y):
        return self.beta * smooth_norm(y) ** (1.0 + self.zeta)

    def _E1(self, y):
        ph = smooth_norm(y)
        return self.beta * (1.0 + self.zeta) * ph**self.zeta * smooth_norm_d1(y)

    def _E2(self, y):
        ph = smooth_norm(y)
        z = self.zeta
        return self.beta * (1.0 + z) * (z * ph ** (z - 1.0) * smooth_norm_d1(y) ** 2 + ph**z * smooth_norm_d2(y))

    def value(self, y):
        if self.kind == "polynomial":
            return smooth_norm(y) ** self.p
        return np.exp(self._E(y))

    def d1(self, y):
        if self.kind == "polynomial":
            return self.p * smooth_norm(y) ** (self.p - 1.0) * smooth_norm_d1(y)
        return np.exp(self._E(y)) * self._E1(y)

    def d2(self, y):
        if self.kind == "polynomial":
            ph, d1, d2 = smooth_norm(y), smooth_norm_d1(y), smooth_norm_d2(y)
            p = self.p
            return p * (p - 1.0) * ph ** (p - 2.0) * d1 * d1 + p * ph ** (p - 1.0) * d2
        return np.exp(self._E(y)) * (self._E1(y) ** 2 + self._E2(y))

    def log_scale(self, x):
        return 0.0 if self.kind == "polynomial" else float(self._E(x))

    def d1_scaled(self, x):
        if self.kind == "polynomial":
            return float(self.d1(x))
        return float(self._E1(x))

    def d2_weighted(self, y, x, logw):
        if self.kind == "polynomial":
            return self.d2(y) * np.exp(logw)
        return np.exp(self._E(y) - self._E(x) + logw) * (self._E1(y) ** 2 + self._E2(y))

    def second_diff_weighted(self, x, u, logw):
        if self.kind == "polynomial":
            return super().second_diff_weighted(x, u, logw)
        ex = float(self._E(x))
        up = float(self._E(x + u)) - ex + logw
        dn = float(self._E(x - u)) - ex + logw
        return math.exp(up) + math.exp(dn) - 2.0 * math.exp(logw)

    def far_tail_scaled(self, model, x, U, quad):
        if self.kind == "exponential":
            return integrate_panel(
                lambda u: self.second_diff_weighted(x, u, _log_density_scalar(model.kernel, x, u)),
                U,
                math.inf,
                quad,
            )
        # (u+x)^p + (u-x)^p = 2 sum_k C_p^{2k} x^{2k} u^{p-2k} for u > |x|
        p = self.p
        x2 = x * x
        total = 0.0
        coef = 1.0
        for k in range(200):
            term = coef * x2**k * power_moment_tail(model, x, U, p - 2.0 * k)
            total += term
            if abs(term) <= 1e-17 * abs(total):
                break
            coef *= (p - 2 * k) * (p - 2 * k - 1) / ((2 * k + 1) * (2 * k + 2))
        return 2.0 * total - 2.0 * float(self.value(x)) * tail(model, x, U)

    def to_dict(self):
        if self.kind == "polynomial":
            return {"kind": "polynomial", "p": self.p}
        return {"kind": "exponential", "beta": self.beta, "zeta": self.zeta}


@dataclass(frozen=True)
class CosineFunction(TestFunction):
    """cos(omega y); a validation function with known generator values."""

    omega: float = 1.0

    def value(self, y):
        return np.cos(self.omega * np.asarray(y, dtype=float))

    def d1(self, y):
        return -self.omega * np.sin(self.omega * np.asarray(y, dtype=float))

    def d2(self, y):
        return -self.omega**2 * np.cos(self.omega * np.asarray(y, dtype=float))

    def far_tail_scaled(self, model, x, U, quad):
        # cos(w(x+u)) + cos(w(x-u)) = 2 cos(wx) cos(wu)
        cx = math.cos(self.omega * x)
        if self.omega == 0:
            return 0.0
        osc = integrate_panel(
            lambda u: math.exp(_log_density_scalar(model.kernel, x, u)),
            U,
            math.inf,
            quad,
            weight="cos",
            wvar=abs(self.omega),
        )
        return 2.0 * cx * osc - 2.0 * cx * tail(model, x, U)


class CompactFunction(TestFunction):
    """A C^2 function vanishing outside [-radius, radius]."""

    def __init__(self, value, d1, d2, radius):
        self._value, self._d1, self._d2 = value, d1, d2
        self.radius = float(radius)

    def value(self, y):
        return self._value(np.asarray(y, dtype=float))

    def d1(self, y):
        return self._d1(np.asarray(y, dtype=float))

    def d2(self, y):
        return self._d2(np.asarray(y, dtype=float))

    def far_tail_scaled(self, model, x, U, quad):
        if U - abs(x) < self.radius:
            raise PreconditionError("compact test function support reaches the far-tail region")
        return -2.0 * float(self.value(x)) * tail(model, x, U)

    def __add__(self, other):
        return CompactFunction(
            lambda y: self._value(y) + other._value(y),
            lambda y: self._d1(y) + other._d1(y),
            lambda y: self._d2(y) + other._d2(y),
            max(self.radius, other.radius),
        )

    def __rmul__(self, a):
        a = float(a)
        return CompactFunction(
            lambda y: a * self._value(y), lambda y: a * self._d1(y), lambda y: a * self._d2(y), self.radius
        )


def bump(center=0.0, radius=1.0):
    """exp(-1 / (1 - z^2)) with z = (y - center) / radius, zero for |z| >= 1."""

    def _parts(y):
        z = (y - center) / radius
        inside = np.abs(z) < 1.0
        zz = np.where(inside, z, 0.0)
        q = 1.0 - zz * zz
        g = np.where(inside, np.exp(-1.0 / q), 0.0)
        # derivatives of exp(-1/q) with q = 1 - z^2, w.r.t. z
        g1 = np.where(inside, g * (-2.0 * zz / q**2), 0.0)
        g2 = np.where(inside, g * ((4.0 * zz * zz) / q**4 - 2.0 / q**2 - 8.0 * zz * zz / q**3), 0.0)
        return g, g1 / radius, g2 / radius**2

    return CompactFunction(
        lambda y: _parts(y)[0], lambda y: _parts(y)[1], lambda y: _parts(y)[2], abs(center) + radius
    )


def odd_bump(radius=1.0):
    """y^3 * bump(0, radius): odd, C^2, with odd second derivative."""
    b = bump(0.0, radius)

    def value(y):
        return y**3 * b.value(y)

    def d1(y):
        return 3 * y**2 * b.value(y) + y**3 * b.d1(y)

    def d2(y):
        return 6 * y * b.value(y) + 6 * y**2 * b.d1(y) + y**3 * b.d2(y)

    return CompactFunction(value, d1, d2, radius)


def _log_density_scalar(kernel, x, u):
    c, a, a_s = kernel.coefficients(x)
    au = abs(u)
    idx = a_s if au <= 1.0 else a
    out = math.log(c) - (1.0 + idx) * math.log(au)
    if kernel.theta:
        out -= kernel.theta * au ** (1.0 + kernel.zeta)
    return out


def _check_exponential(model, fn):
    if isinstance(fn, LyapunovSpec) and fn.kind == "exponential":
        k = model.kernel
        finite = exp_moment_is_finite(k, fn.beta, fn.zeta) and not (
            fn.zeta == k.zeta and k.family == "tempered" and fn.beta >= k.theta
        )
        if not finite:
            raise PreconditionError(
                "exponential Lyapunov function needs a finite exponential moment at some alpha > beta"
            )


def apply_L0_scaled(model, fn, x, quad=DEFAULT_QUAD):
    """(L0 V(x) / exp(s), s) with s = fn.log_scale(x)."""
    _check_exponential(model, fn)
    x = float(x)
    k = model.kernel
    ls = fn.log_scale(x)
    c, _, a_s = k.coefficients(x)
    if c == 0:
        return 0.0, ls
    ax = abs(x)
    r_taylor = 1.0 if ax < 2.0 else 0.5 * ax
    u_far = max(10.0 * ax, 1e3)
    s_nodes, s_w = gauss_legendre_unit(16 if ax >= 2.0 else 64)
    ws = s_w * (1.0 - s_nodes)
    log_c = math.log(c)

    def remainder(u, logw):
        y = np.concatenate((x + s_nodes * u, x - s_nodes * u))
        vals = fn.d2_weighted(y, x, logw)
        n = s_nodes.size
        return float(np.dot(ws, vals[:n] + vals[n:]))

    def near(u):
        logw = log_c - (k.theta * u ** (1.0 + k.zeta) if k.theta else 0.0)
        return remainder(u, logw)

    # u^2 * u^(-1-alpha_s) carried by the algebraic weight
    # the smooth completion of |y| has a kink in V'' at |y| = 1
    u_kink = abs(ax - 1.0)
    if 0.0 < u_kink < 1.0:
        total = integrate_panel(near, 0.0, u_kink, quad, weight="alg", wvar=(1.0 - a_s, 0.0))
        total += integrate_panel(lambda u: u ** (1.0 - a_s) * near(u), u_kink, 1.0, quad)
    else:
        total = integrate_panel(near, 0.0, 1.0, quad, weight="alg", wvar=(1.0 - a_s, 0.0))
    if r_taylor > 1.0:
        total += integrate_panel(
            lambda u: remainder(u, 2.0 * math.log(u) + _log_density_scalar(k, x, u)), 1.0, r_taylor, quad
        )
    total += integrate_panel(
        lambda u: fn.second_diff_weighted(x, u, _log_density_scalar(k, x, u)),
        r_taylor,
        u_far,
        quad,
        points=(ax - 1.0, ax, ax + 1.0),
    )
    total += fn.far_tail_scaled(model, x, u_far, quad)
    return total, ls


def apply_L0(model, fn, x, quad=DEFAULT_QUAD):
    """Integral part L0 V(x) of the generator."""
    val, ls = apply_L0_scaled(model, fn, x, quad)
    return val * math.exp(ls) if ls else val


def apply_generator_scaled(model, fn, x, quad=DEFAULT_QUAD):
    val, ls = apply_L0_scaled(model, fn, x, quad)
    return float(model.drift(x)) * fn.d1_scaled(x) + val, ls


def apply_generator(model, fn, x, quad=DEFAULT_QUAD):
    """a(x) V'(x) + L0 V(x), the left side of the Lyapunov inequality."""
    val, ls = apply_generator_scaled(model, fn, x, quad)
    return val * math.exp(ls) if ls else val
