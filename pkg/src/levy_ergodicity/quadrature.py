"""Thin wrapper over QUADPACK's adaptive Gauss-Kronrod routines."""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    limit: int = 400
    # Accept QUADPACK warnings when the reported error is within this
    # multiple of the requested tolerance.
    slack: float = 10.0


DEFAULT_QUAD = QuadConfig()


def integrate_panel(func, a, b, quad=DEFAULT_QUAD, points=None, weight=None, wvar=None):
    """Integrate ``func`` over [a, b] (b may be +inf).

    Returns the estimate. Raises QuadratureError carrying the worst
    subinterval when QUADPACK cannot meet the tolerance.
    """
    if a == b:
        return 0.0
    kwargs = dict(epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.limit, full_output=1)
    if points is not None:
        pts = [pt for pt in points if a < pt < b]
        if pts and math.isfinite(b) and weight is None:
            kwargs["points"] = sorted(set(pts))
        elif pts and weight is None:
            # QUADPACK rejects breakpoints on infinite ranges; split by hand.
            pts = sorted(set(pts))
            edges = [a, *pts, b]
            return sum(
                integrate_panel(func, lo, hi, quad, points=None) for lo, hi in zip(edges[:-1], edges[1:])
            )
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(func, a, b, **kwargs)
    value, abserr, info = out[0], out[1], out[2]
    ok = len(out) == 3
    if not np.isfinite(value):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]", worst_panel=(a, b), estimate=value)
    if not ok:
        target = max(quad.abs_tol, quad.rel_tol * abs(value))
        if abserr > quad.slack * target:
            raise QuadratureError(
                f"quadrature on [{a}, {b}] did not converge: {out[3]!s}".strip(),
                worst_panel=_worst_panel(info, a, b),
                estimate=value,
                abserr=abserr,
            )
    return value


def _worst_panel(info, a, b):
    try:
        last = int(info["last"])
        elist = np.asarray(info["elist"][:last])
        i = int(np.argmax(elist))
        return float(info["alist"][i]), float(info["blist"][i])
    except (KeyError, TypeError, ValueError):
        return (a, b)


def gauss_legendre_unit(n):
    """Nodes and weights of the n-point Gauss-Legendre rule mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w
