"""Empirical total-variation estimates, convergence curves and rate comparison."""
from dataclasses import dataclass, field
import csv
import json
import math
import warnings

import numpy as np

from .errors import PreconditionError
from .rates import psi as psi_of
from .simulator import SimConfig, simulate_chain


class DegenerateSampleWarning(RuntimeWarning):
    """Both samples sit on a single point, so the histogram has no width."""


def default_bins(n_a, n_b):
    return max(2, int(math.ceil(min(n_a, n_b) ** (1.0 / 3.0))))


def _tv_from_edges(a, b, edges):
    pa = np.histogram(a, bins=edges)[0] / a.size
    pb = np.histogram(b, bins=edges)[0] / b.size
    return float(min(1.0, 0.5 * np.abs(pa - pb).sum()))


def empirical_tv(sample_a, sample_b, bins=None):
    """Histogram total-variation distance on equal-width bins over the common range."""
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise PreconditionError("empirical_tv needs two nonempty samples")
    bins = default_bins(a.size, b.size) if bins is None else int(bins)
    if bins < 2:
        raise PreconditionError("bins must be at least 2")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if not lo < hi:
        warnings.warn("degenerate range: all points coincide; returning TV = 0", DegenerateSampleWarning, stacklevel=2)
        return 0.0
    return _tv_from_edges(a, b, np.linspace(lo, hi, bins + 1))


def quantile_edges(reference, bins):
    """Bin edges at reference quantiles, open at both ends."""
    qs = np.quantile(reference, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    inner = np.unique(qs)
    return np.concatenate(([-np.inf], inner, [np.inf]))


def quantile_tv(sample, reference, bins=None):
    """TV on bins holding equal reference mass; robust to heavy tails."""
    sample = np.asarray(sample, dtype=float)
    reference = np.asarray(reference, dtype=float)
    bins = default_bins(sample.size, reference.size) if bins is None else int(bins)
    return _tv_from_edges(sample, reference, quantile_edges(reference, bins))


@dataclass
class TVCurve:
    t: np.ndarray
    tv: np.ndarray
    half_width: np.ndarray
    psi_overlay: np.ndarray
    reference: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if np.any(np.diff(self.t) <= 0):
            raise PreconditionError("TV curve times must be strictly increasing")

    def to_csv(self, path, config=None):
        with open(path, "w", newline="") as fh:
            if config is not None:
                fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "tv", "half_width", "psi_overlay"])
            for row in zip(self.t, self.tv, self.half_width, self.psi_overlay):
                w.writerow(["%.17g" % v for v in row])

    def to_dict(self):
        return {
            "t": self.t.tolist(),
            "tv": np.asarray(self.tv).tolist(),
            "half_width": np.asarray(self.half_width).tolist(),
            "psi_overlay": np.asarray(self.psi_overlay).tolist(),
            "reference": self.reference,
        }


def convergence_curve(model, cfg_base, x0, t_grid, T_ref, plan=None, bins=None, n_boot=200, boot_seed=None):
    """Empirical TV between the chain at each t and a pooled sample at T_ref.

    One simulation to T_ref with snapshots supplies both the curve samples and
    the reference (common random numbers), so TV(T_ref) is exactly 0.
    Half-widths come from a paired bootstrap over replicas.
    """
    ts = np.asarray(sorted(float(t) for t in t_grid))
    if ts.size == 0 or ts[0] <= 0:
        raise PreconditionError("t_grid must contain positive times")
    if T_ref < 4.0 * ts[-1] and not np.isclose(T_ref, ts[-1]):
        raise PreconditionError(f"T_ref = {T_ref} must be at least 4 * max(t_grid) = {4 * ts[-1]}")
    cfg = SimConfig(n=cfg_base.n, t=T_ref, N=cfg_base.N, eps=cfg_base.eps, seed=cfg_base.seed, x0=float(x0), backend=cfg_base.backend)
    sample = simulate_chain(model, cfg, record_times=ts[ts < T_ref])
    ref = sample.endpoints
    N = ref.size
    bins = default_bins(N, N) if bins is None else int(bins)
    edges = quantile_edges(ref, bins)
    seed = cfg.seed if boot_seed is None else boot_seed
    rng = np.random.default_rng([int(seed), 0xB007])
    idx = rng.integers(0, N, size=(n_boot, N))
    tvs, hws = [], []
    for t in ts:
        snap = sample.snapshots.get(float(t), ref) if t < T_ref else ref
        tvs.append(_tv_from_edges(snap, ref, edges))
        boot = np.array([_tv_from_edges(snap[i], ref[i], quantile_edges(ref[i], bins)) for i in idx])
        lo, hi = np.percentile(boot, [2.5, 97.5])
        hws.append(0.5 * float(hi - lo))
    tvs = np.asarray(tvs)
    overlay = np.full(ts.size, np.nan)
    bias = None
    if plan is not None:
        ps = np.array([psi_of(plan, float(t)) for t in ts])
        if ps[0] > 0:
            overlay = ps * (tvs[0] / ps[0])
        bias = float(psi_of(plan, float(T_ref)))
    reference = {
        "T_ref": float(T_ref),
        "pooled_size": int(N),
        "bins": bins,
        "bootstrap": int(n_boot),
        "psi_at_T_ref": bias,
        "x0": float(x0),
        "diagnostics": sample.diagnostics,
    }
    return TVCurve(t=ts, tv=tvs, half_width=np.asarray(hws), psi_overlay=overlay, reference=reference)


def rate_comparison(curve, plan, factor=2.0, noise_multiple=3.0, min_points=4):
    """Fit the decay family of the plan to the points above the noise floor."""
    t = np.asarray(curve.t, dtype=float)
    tv = np.asarray(curve.tv, dtype=float)
    hw = np.asarray(curve.half_width, dtype=float)
    keep = tv > noise_multiple * hw
    pathway = plan.closed_form
    predicted = float(plan.predicted_exponent())
    record = {
        "pathway": pathway,
        "predicted": predicted,
        "fitted": None,
        "ratio": None,
        "n_points": int(keep.sum()),
        "noise_floor": float(np.max(noise_multiple * hw)) if hw.size else None,
        "factor": factor,
    }
    if keep.sum() < min_points:
        record["verdict"] = "inconclusive"
        return record
    y = np.log(tv[keep])
    if pathway == "exp":
        x = t[keep]
    elif pathway == "poly":
        x = np.log(t[keep])
    else:
        f = plan.f
        x = t[keep] ** ((1.0 + f.zeta) / (1.0 - f.kappa))
    fitted = float(np.polyfit(x, y, 1)[0])
    ratio = fitted / predicted if predicted != 0 else math.inf
    record["fitted"] = fitted
    record["ratio"] = ratio
    record["verdict"] = "pass" if ratio > 0 and 1.0 / factor <= ratio <= factor else "fail"
    return record
