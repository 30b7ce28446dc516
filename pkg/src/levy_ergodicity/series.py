"""Generalised binomial coefficients and the series built on them."""
import math

import numpy as np

from .errors import SeriesDivergenceError

_BLOCK = 4096


def gen_binom(p, k):
    """C_p^k = p (p-1) ... (p-k+1) / k! for real p and integer k >= 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1.0
    for j in range(k):
        out *= (p - j) / (j + 1)
    return out


def binomial_row(p, n):
    """Array ``[C_p^0, ..., C_p^n]`` by the ratio recursion."""
    j = np.arange(n, dtype=float)
    ratios = (p - j) / (j + 1.0)
    return np.concatenate(([1.0], np.cumprod(ratios)))


def binomial_power(x, y, p, tol=1e-15, max_terms=100_000):
    """(x + y)^p expanded as sum_k C_p^k x^(p-k) y^k; needs |x| > |y|, x > 0."""
    if not abs(x) > abs(y) or x <= 0:
        raise ValueError("expansion needs x > |y|")
    r = y / x
    total, coef, rk = 0.0, 1.0, 1.0
    for k in range(max_terms):
        term = coef * rk
        total += term
        if abs(term) < tol * abs(total) and k > 0:
            break
        coef *= (p - k) / (k + 1)
        rk *= r
    return x**p * total


class SeriesResult(float):
    """A float carrying the truncation metadata of the series that produced it."""

    def __new__(cls, value, n_terms=0, tail=0.0):
        obj = super().__new__(cls, value)
        obj.n_terms = n_terms
        obj.tail = tail
        return obj


def _tail_estimate(k_last, t_prev, t_last):
    """Sum of the terms after k_last, extrapolating the last two terms."""
    if t_last == 0.0 or t_prev == 0.0:
        return 0.0
    r = t_last / t_prev
    if r <= 0.0 or r >= 1.0:
        return 0.0
    if k_last > 1 and r > 0.9:
        s = -math.log(r) / math.log(k_last / (k_last - 1.0))
        if s > 1.0:
            amp = t_last * k_last**s
            return amp * (k_last + 0.5) ** (1.0 - s) / (s - 1.0)
    return t_last * r / (1.0 - r)


def even_binomial_series(p, weight, tol=1e-12, max_terms=5_000_000, add_tail=True):
    """sum_{k>=1} C_p^{2k} * weight(k), truncated once |term| < tol.

    ``weight`` takes an integer array of k values and returns matching floats.
    A tail estimate from a local power-law (or geometric) fit of the last two
    terms is added unless ``add_tail`` is false.
    """
    total = 0.0
    coef = 1.0  # C_p^{2(k-1)} entering each block
    k0 = 1
    growth_run = 0
    prev_abs = math.inf
    prev_term = None
    while k0 <= max_terms:
        ks = np.arange(k0, min(k0 + _BLOCK, max_terms + 1))
        two_k = 2.0 * ks
        # C_p^{2k} / C_p^{2k-2} = (p-2k+2)(p-2k+1) / ((2k-1) 2k)
        ratios = (p - two_k + 2.0) * (p - two_k + 1.0) / ((two_k - 1.0) * two_k)
        coefs = coef * np.cumprod(ratios)
        terms = coefs * np.asarray(weight(ks), dtype=float)
        abs_terms = np.abs(terms)
        for i in range(terms.size):
            a = abs_terms[i]
            if a < tol:
                k_stop = int(ks[i])
                tail = 0.0
                if add_tail and prev_term is not None:
                    tail = _tail_estimate(k_stop, prev_term, terms[i])
                value = math.fsum((total, float(terms[i]), tail))
                return SeriesResult(value, n_terms=k_stop, tail=tail)
            if a >= prev_abs:
                growth_run += 1
                if growth_run >= 5:
                    raise SeriesDivergenceError(
                        f"series terms did not decrease for 5 consecutive k (k={int(ks[i])}, p={p})"
                    )
            else:
                growth_run = 0
            prev_abs = a
            total += float(terms[i])
            prev_term = float(terms[i])
        coef = float(coefs[-1])
        k0 = int(ks[-1]) + 1
    raise SeriesDivergenceError(f"series did not reach tolerance {tol} within {max_terms} terms")
