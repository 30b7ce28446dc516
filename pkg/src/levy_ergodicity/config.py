"""JSON run configuration shared by the command-line subcommands."""
from dataclasses import dataclass, field
import copy
import json
import math

from .certificates import X_FAR, corollary_rate, outer_grid
from .errors import LevyErgodicityError
from .levy_kernel import Drift, KernelSpec, LevyTypeModel
from .rates import RateFunction, RatePlan
from .simulator import SimConfig


class ConfigError(LevyErgodicityError, ValueError):
    """The run configuration is malformed or incomplete."""


DEFAULTS = {
    "certificate": {"theorem": None, "x_far": X_FAR, "x_max": 1e4, "points": 9, "margin_fraction": 0.05},
    "rate": {"gamma": 1.0, "t_min": 0.1, "t_max": 100.0, "points": 50, "method": "auto"},
    "simulation": {"eps": None, "seed": 0, "x0": 0.0, "backend": None},
    "convergence": {"bins": None, "n_boot": 200, "factor": 2.0},
    "output": {"dir": "out"},
}


def _check_finite(obj, path="config"):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            raise ConfigError(f"{path} must be finite, got {obj}")
        return
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
        return
    if isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")
        return
    raise ConfigError(f"{path} has unsupported type {type(obj).__name__}")


@dataclass
class RunConfig:
    model: dict
    certificate: dict = field(default_factory=dict)
    rate: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    BLOCKS = ("model", "certificate", "rate", "simulation", "convergence", "output")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(data) - set(cls.BLOCKS)
        if unknown:
            raise ConfigError(f"unknown configuration blocks: {sorted(unknown)}")
        if "model" not in data:
            raise ConfigError("configuration needs a 'model' block")
        _check_finite(data)
        blocks = {}
        for name in cls.BLOCKS:
            raw = copy.deepcopy(data.get(name, {}))
            if not isinstance(raw, dict):
                raise ConfigError(f"block '{name}' must be an object")
            blocks[name] = {**DEFAULTS.get(name, {}), **raw}
        cfg = cls(**blocks)
        cfg.build_model()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self):
        return {name: copy.deepcopy(getattr(self, name)) for name in self.BLOCKS}

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    # ------------------------------------------------------------ builders

    def build_model(self):
        m = self.model
        if "kernel" not in m or not isinstance(m["kernel"], dict):
            raise ConfigError("model block needs a 'kernel' object")
        if "drift" not in m or not isinstance(m["drift"], dict):
            raise ConfigError("model block needs a 'drift' object")
        try:
            drift = Drift(**m["drift"])
            kernel = KernelSpec(**m["kernel"])
        except TypeError as exc:
            raise ConfigError(f"model block: {exc}") from exc
        return LevyTypeModel(drift=drift, kernel=kernel)

    def theorem(self):
        c = self.certificate
        if c.get("theorem") is not None:
            th = int(c["theorem"])
        elif "beta" in c:
            th = 2
        elif "p" in c:
            th = 1
        else:
            raise ConfigError("certificate block needs 'p' (theorem 1) or 'beta' (theorem 2)")
        if th not in (1, 2):
            raise ConfigError("certificate.theorem must be 1 or 2")
        return th

    def outer_grid(self):
        c = self.certificate
        return outer_grid(float(c["x_far"]), float(c["x_max"]), int(c["points"]))

    def rate_function(self, block="certificate"):
        """The rate function of the given block, or of the certificate block as a fallback."""
        spec = self.rate.get("f") if block == "rate" else None
        if spec is None:
            spec = self.certificate.get("f")
        if spec is None:
            raise ConfigError("no rate function: set certificate.f or rate.f")
        spec = dict(spec)
        if spec.pop("corollary", False):
            model = self.build_model()
            k = model.kernel
            kappa = spec.pop("kappa", model.drift.kappa if model.drift.kind == "power" else None)
            if kappa is None:
                raise ConfigError("corollary rate needs kappa for tabulated drifts")
            pathway = spec.pop("pathway", "poly")
            c = self.certificate
            try:
                return corollary_rate(
                    kappa,
                    p=c.get("p"),
                    sigma=k.declared_sigma,
                    zeta=c.get("zeta", 0.0),
                    beta=c.get("beta", 1.0),
                    pathway=pathway,
                    C=spec.pop("C", 1.0),
                    delta=k.declared_delta,
                    A_kappa=model.drift.A if model.drift.kind == "power" else None,
                )
            except TypeError as exc:
                raise ConfigError(f"corollary rate: {exc}") from exc
        try:
            return RateFunction(**spec)
        except TypeError as exc:
            raise ConfigError(f"rate function: {exc}") from exc

    def rate_plan(self):
        return RatePlan(self.rate_function("rate"), gamma=float(self.rate["gamma"]))

    def sim_config(self, seed=None, **override):
        s = {**self.simulation, **override}
        missing = [k for k in ("n", "t", "N") if s.get(k) is None]
        if missing:
            raise ConfigError(f"simulation block is missing {missing}")
        return SimConfig(
            n=int(s["n"]),
            t=float(s["t"]),
            N=int(s["N"]),
            eps=s.get("eps"),
            seed=int(s["seed"] if seed is None else seed),
            x0=float(s["x0"]),
            backend=s.get("backend"),
        )
