"""Hot loops of the frozen-coefficient chain, in numba and in vectorised numpy.

Both backends draw from the same counter-based generator: the uniform used by
replica r at (step, slot) is a splitmix64 hash of the replica key and the
counter (step << 24) | slot, so results do not depend on scheduling.

Slots per step: 0, 1 Box-Muller pair (small-jump Gaussian, Poisson normal
approximation); 2 Poisson count; 3 + 3i, 4 + 3i, 5 + 3i size, sign and
tempering acceptance of the i-th proposed jump.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
S30, S27, S31, S11, S24 = (np.uint64(v) for v in (30, 27, 31, 11, 24))
TWO_M53 = 2.0**-53
POISSON_NORMAL_ABOVE = 500.0
MAX_JUMP_SLOTS = (1 << 24) - 3
EXPLODE_AT = 1e300

DRIFT_POWER, DRIFT_TABLE = 0, 1


# ---------------------------------------------------------------- numpy path

def _mix_np(z):
    z = z + GOLDEN
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


def replica_keys(seed, n):
    with np.errstate(over="ignore"):
        r = np.arange(1, n + 1, dtype=np.uint64)
        return _mix_np(np.uint64(seed) + r * GOLDEN)


def _uniform_np(keys, step, slot):
    counter = np.uint64((int(step) << 24) | int(slot))
    with np.errstate(over="ignore"):
        z = _mix_np(keys ^ _mix_np(np.full_like(keys, counter)))
    return ((z >> S11).astype(np.float64) + 0.5) * TWO_M53


def _small_var_np(c, a_s, theta, zeta1, eps):
    """2c int_0^eps u^(1-a_s) exp(-theta u^zeta1) du, elementwise."""
    e0 = 2.0 - a_s
    if theta == 0.0:
        return 2.0 * c * eps**e0 / e0
    total = np.zeros_like(a_s)
    coef = 1.0
    x = theta * eps**zeta1
    for m in range(200):
        term = coef * eps**e0 / (e0 + m * zeta1)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        coef *= -x / (m + 1)
    return 2.0 * c * total


def _drift_np(y, kind, A, kappa, xs, ys):
    if kind == DRIFT_POWER:
        ay = np.abs(y)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            mag = np.where(ay > 0, ay**kappa, 0.0)
        return -A * np.sign(y) * mag
    out = np.interp(y, xs, ys)
    lo = ys[0] + (ys[1] - ys[0]) / (xs[1] - xs[0]) * (y - xs[0])
    hi = ys[-1] + (ys[-1] - ys[-2]) / (xs[-1] - xs[-2]) * (y - xs[-1])
    return np.where(y < xs[0], lo, np.where(y > xs[-1], hi, out))


def run_numpy(y0, seed, nsteps, h, eps, drift, kern, record_steps):
    N = y0.size
    keys = replica_keys(seed, N)
    y = y0.astype(np.float64).copy()
    alive = np.ones(N, dtype=bool)
    explode = np.zeros(N, dtype=np.int64)
    jumps = np.zeros(N, dtype=np.int64)
    out = np.full((len(record_steps), N), np.nan)
    rec = 0
    while rec < len(record_steps) and record_steps[rec] == 0:
        out[rec] = y
        rec += 1
    for step in range(nsteps):
        _step_numpy(step, y, keys, alive, explode, jumps, h, eps, drift, kern)
        while rec < len(record_steps) and record_steps[rec] == step + 1:
            out[rec] = np.where(alive, y, np.nan)
            rec += 1
        if not np.any(alive):
            break
    return out, explode, jumps


def _step_numpy(step, y, keys, alive, explode, jumps, h, eps, drift, kern):
    """Advance every live replica by one step, in place."""
    kind, A, kappa, xs, ys = drift
    c0, c_amp, a0, a_amp, offset, theta, zeta1 = kern
    N = y.size
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        s = np.where(np.abs(y) > 1e150, 1.0, y * y / (1.0 + y * y))
        c = c0 * (1.0 + c_amp * s)
        a = a0 + a_amp * s
        a_s = a + offset
        u0 = _uniform_np(keys, step, 0)
        u1 = _uniform_np(keys, step, 1)
        r = np.sqrt(-2.0 * np.log(u0))
        z0 = r * np.cos(2.0 * math.pi * u1)
        z1 = r * np.sin(2.0 * math.pi * u1)
        var = h * _small_var_np(c, a_s, theta, zeta1, eps)
        inc = _drift_np(y, kind, A, kappa, xs, ys) * h + np.sqrt(var) * z0

        lam_l = 2.0 * c / a
        lam = lam_l + 2.0 * c * (eps ** (-a_s) - 1.0) / a_s
        mean = h * lam
        up = _uniform_np(keys, step, 2)
        K = np.zeros(N, dtype=np.int64)
        small = mean <= POISSON_NORMAL_ABOVE
        if np.any(small):
            p = np.exp(-mean)
            F = p.copy()
            todo = small & (up > F)
            k = 0
            while np.any(todo) and k < 100_000:
                k += 1
                p = np.where(todo, p * mean / k, p)
                F = np.where(todo, F + p, F)
                K = np.where(todo, k, K)
                todo = todo & (up > F)
        if not np.all(small):
            approx = np.floor(mean + np.sqrt(mean) * z1 + 0.5)
            approx = np.where(np.isfinite(approx) & (approx > 0), approx, 0.0).astype(np.int64)
            K = np.where(small, K, approx)
        K = np.where(alive, K, 0)
        kmax = int(K.max()) if N else 0
        if kmax > MAX_JUMP_SLOTS // 3:
            raise OverflowError("too many jumps in one step; increase eps")
        for i in range(kmax):
            act = i < K
            v = _uniform_np(keys, step, 3 + 3 * i) * lam
            big = (v * a / (2.0 * c)) ** (-1.0 / a)
            sml = ((v - lam_l) * a_s / (2.0 * c) + 1.0) ** (-1.0 / a_s)
            size = np.where(v <= lam_l, big, sml)
            sign = np.where(_uniform_np(keys, step, 4 + 3 * i) < 0.5, -1.0, 1.0)
            if theta > 0.0:
                act = act & (_uniform_np(keys, step, 5 + 3 * i) < np.exp(-theta * size**zeta1))
            inc = inc + np.where(act, sign * size, 0.0)
            jumps += act
        y[:] = np.where(alive, y + inc, y)
    bad = alive & ~(np.abs(y) <= EXPLODE_AT)
    if np.any(bad):
        explode[bad] = step + 1
        alive &= ~bad


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, inline="always")
    def _mix(z):
        z = z + GOLDEN
        z = (z ^ (z >> S30)) * M1
        z = (z ^ (z >> S27)) * M2
        return z ^ (z >> S31)

    @njit(cache=True, inline="always")
    def _uniform(key, step, slot):
        counter = (np.uint64(step) << S24) | np.uint64(slot)
        z = _mix(key ^ _mix(counter))
        return (np.float64(z >> S11) + 0.5) * TWO_M53

    @njit(cache=True)
    def _small_var(c, a_s, theta, zeta1, eps):
        e0 = 2.0 - a_s
        if theta == 0.0:
            return 2.0 * c * eps**e0 / e0
        total = 0.0
        coef = 1.0
        x = theta * eps**zeta1
        for m in range(200):
            term = coef * eps**e0 / (e0 + m * zeta1)
            total += term
            if abs(term) <= 1e-17 * abs(total):
                break
            coef *= -x / (m + 1)
        return 2.0 * c * total

    @njit(cache=True)
    def _drift(y, kind, A, kappa, xs, ys):
        if kind == 0:
            if y == 0.0:
                return 0.0
            ay = abs(y)
            return -A * (1.0 if y > 0 else -1.0) * ay**kappa
        n = xs.size
        if y < xs[0]:
            return ys[0] + (ys[1] - ys[0]) / (xs[1] - xs[0]) * (y - xs[0])
        if y > xs[n - 1]:
            return ys[n - 1] + (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]) * (y - xs[n - 1])
        return np.interp(y, xs, ys)

    @njit(cache=True, parallel=True)
    def run_numba(y0, seed, nsteps, h, eps, kind, A, kappa, xs, ys, c0, c_amp, a0, a_amp, offset, theta, zeta1, record_steps):
        N = y0.size
        R = record_steps.size
        out = np.full((R, N), np.nan)
        explode = np.zeros(N, dtype=np.int64)
        jumps = np.zeros(N, dtype=np.int64)
        seed_u = np.uint64(seed)
        for rep in prange(N):
            key = _mix(seed_u + np.uint64(rep + 1) * GOLDEN)
            y = y0[rep]
            rec = 0
            while rec < R and record_steps[rec] == 0:
                out[rec, rep] = y
                rec += 1
            nj = 0
            for step in range(nsteps):
                s = 1.0 if abs(y) > 1e150 else y * y / (1.0 + y * y)
                c = c0 * (1.0 + c_amp * s)
                a = a0 + a_amp * s
                a_s = a + offset
                u0 = _uniform(key, step, 0)
                u1 = _uniform(key, step, 1)
                r = math.sqrt(-2.0 * math.log(u0))
                z0 = r * math.cos(2.0 * math.pi * u1)
                z1 = r * math.sin(2.0 * math.pi * u1)
                var = h * _small_var(c, a_s, theta, zeta1, eps)
                inc = _drift(y, kind, A, kappa, xs, ys) * h + math.sqrt(var) * z0

                lam_l = 2.0 * c / a
                lam = lam_l + 2.0 * c * (eps ** (-a_s) - 1.0) / a_s
                mean = h * lam
                K = 0
                if mean <= POISSON_NORMAL_ABOVE:
                    up = _uniform(key, step, 2)
                    p = math.exp(-mean)
                    F = p
                    while up > F and K < 100_000:
                        K += 1
                        p *= mean / K
                        F += p
                else:
                    K = max(0, int(math.floor(mean + math.sqrt(mean) * z1 + 0.5)))
                for i in range(K):
                    v = _uniform(key, step, 3 + 3 * i) * lam
                    if v <= lam_l:
                        size = (v * a / (2.0 * c)) ** (-1.0 / a)
                    else:
                        size = ((v - lam_l) * a_s / (2.0 * c) + 1.0) ** (-1.0 / a_s)
                    sign = -1.0 if _uniform(key, step, 4 + 3 * i) < 0.5 else 1.0
                    if theta > 0.0:
                        if not _uniform(key, step, 5 + 3 * i) < math.exp(-theta * size**zeta1):
                            continue
                    inc += sign * size
                    nj += 1
                y = y + inc
                if not abs(y) <= EXPLODE_AT:
                    explode[rep] = step + 1
                    break
                while rec < R and record_steps[rec] == step + 1:
                    out[rec, rep] = y
                    rec += 1
            jumps[rep] = nj
        return out, explode, jumps

else:  # pragma: no cover
    run_numba = None
