"""JSON experiment configuration.

Every physical quantity names its unit in the key: ``L_dB``, and exactly one
of ``snr_db`` / ``snr_linear`` per sensor. Example::

    {
      "detector": {"p": 2, "N": 5000},
      "sensors": [{"L_dB": 1.0, "snr_db": -5.0, "noise_power": 1.0},
                  {"L_dB": 0.5, "snr_linear": 0.0316}],
      "rule": {"name": "k_of_m", "k": 2},
      "sweep": {"lambda_min": 0.8, "lambda_max": 1.6, "points": 20},
      "sim": {"trials": 20000, "seed": 1, "resample_beta": true},
      "output": {"path": null, "format": "csv"}
    }

``sweep``, ``sim`` and ``output`` are optional.
"""

from dataclasses import dataclass, field, replace
from importlib import resources
import json
import math
from pathlib import Path

from .detector import DetectorParams, SensorProfile
from .errors import ConfigError, DomainError
from .fusion import FusionRule, NetworkConfig
from .montecarlo import SimSpec
from .uncertainty import UncertaintyBound

RULE_NAMES = ("or", "and", "k_of_m", "soft_egc")
OUTPUT_FORMATS = ("csv",)


@dataclass(frozen=True)
class SensorSpec:
    L_dB: float
    snr: float
    snr_unit: str  # "dB" or "linear"
    noise_power: float = 1.0

    @property
    def snr_linear(self):
        return 10.0 ** (self.snr / 10.0) if self.snr_unit == "dB" else self.snr


@dataclass(frozen=True)
class SweepSpec:
    lambda_min: float
    lambda_max: float
    points: int

    def grid(self):
        if self.points == 1:
            return [self.lambda_min]
        step = (self.lambda_max - self.lambda_min) / (self.points - 1)
        return [self.lambda_min + i * step for i in range(self.points - 1)] + [self.lambda_max]


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    p: float
    N: int
    sensors: tuple
    rule: str
    k: int | None = None
    sweep: SweepSpec | None = None
    sim: SimSpec = field(default_factory=SimSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def fusion_rule(self):
        return FusionRule(self.rule, self.k)

    def network(self, N=None):
        params = DetectorParams(self.p, self.N if N is None else N)
        sensors = [
            SensorProfile(UncertaintyBound(s.L_dB), s.snr_linear, s.noise_power) for s in self.sensors
        ]
        return NetworkConfig(sensors, params, self.fusion_rule())

    def with_sim(self, **changes):
        return replace(self, sim=replace(self.sim, **changes))

    def with_output(self, **changes):
        return replace(self, output=replace(self.output, **changes))

    def to_dict(self):
        sensors = []
        for s in self.sensors:
            key = "snr_db" if s.snr_unit == "dB" else "snr_linear"
            sensors.append({"L_dB": s.L_dB, key: s.snr, "noise_power": s.noise_power})
        rule = {"name": self.rule}
        if self.k is not None:
            rule["k"] = self.k
        out = {
            "detector": {"p": self.p, "N": self.N},
            "sensors": sensors,
            "rule": rule,
            "sim": {
                "trials": self.sim.trials,
                "seed": self.sim.seed,
                "resample_beta": self.sim.resample_beta_per_trial,
            },
            "output": {"path": self.output.path, "format": self.output.format},
        }
        if self.sweep is not None:
            out["sweep"] = {
                "lambda_min": self.sweep.lambda_min,
                "lambda_max": self.sweep.lambda_max,
                "points": self.sweep.points,
            }
        return out

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data):
        return _parse(data)

    @classmethod
    def loads(cls, text, source="<string>"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", source) from None
        return _parse(data)


def load_config(path):
    """Load a config file; a bare name like ``kofm_roc`` resolves to a bundled config."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and p.name == str(path):
        bundled = resources.files("sensewall") / "configs" / f"{path}.json"
        if bundled.is_file():
            return ExperimentConfig.loads(bundled.read_text(encoding="utf-8"), str(path))
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return ExperimentConfig.loads(text, str(path))


def bundled_names():
    root = resources.files("sensewall") / "configs"
    return sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".json"))


# ---------------------------------------------------------------- parsing


def _obj(data, where, allowed, required=()):
    if not isinstance(data, dict):
        raise ConfigError("expected a JSON object", where)
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}; allowed: {sorted(allowed)}", where)
    for key in required:
        if key not in data:
            raise ConfigError("missing required key", f"{where}.{key}" if where else key)
    return data


def _number(value, where, *, integer=False, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", where)
    if integer and (not isinstance(value, int) and not float(value).is_integer()):
        raise ConfigError(f"expected an integer, got {value!r}", where)
    if not math.isfinite(value):
        raise ConfigError("must be finite", where)
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise ConfigError(f"must be {'>' if strict else '>='} {minimum}, got {value!r}", where)
    return int(value) if integer else float(value)


def _parse(data):
    top = _obj(data, "", ("detector", "sensors", "rule", "sweep", "sim", "output"),
               ("detector", "sensors", "rule"))

    det = _obj(top["detector"], "detector", ("p", "N"), ("p", "N"))
    p = _number(det["p"], "detector.p", minimum=0, strict=True)
    N = _number(det["N"], "detector.N", integer=True, minimum=1)

    if not isinstance(top["sensors"], list) or not top["sensors"]:
        raise ConfigError("expected a non-empty list", "sensors")
    sensors = []
    for i, raw in enumerate(top["sensors"]):
        where = f"sensors[{i}]"
        s = _obj(raw, where, ("L_dB", "snr_db", "snr_linear", "noise_power"), ("L_dB",))
        L = _number(s["L_dB"], f"{where}.L_dB", minimum=0)
        has_db, has_lin = "snr_db" in s, "snr_linear" in s
        if has_db == has_lin:
            raise ConfigError("give exactly one of snr_db or snr_linear", where)
        if has_db:
            snr, unit = _number(s["snr_db"], f"{where}.snr_db"), "dB"
        else:
            snr, unit = _number(s["snr_linear"], f"{where}.snr_linear", minimum=0), "linear"
        power = _number(s.get("noise_power", 1.0), f"{where}.noise_power", minimum=0, strict=True)
        sensors.append(SensorSpec(L, snr, unit, power))

    rule_raw = top["rule"]
    if isinstance(rule_raw, str):
        rule_raw = {"name": rule_raw}
    rule = _obj(rule_raw, "rule", ("name", "k"), ("name",))
    name = rule["name"]
    if name not in RULE_NAMES:
        raise ConfigError(f"unknown rule {name!r}; expected one of {list(RULE_NAMES)}", "rule.name")
    k = None
    if name == "k_of_m":
        if "k" not in rule:
            raise ConfigError("k_of_m needs k", "rule.k")
        k = _number(rule["k"], "rule.k", integer=True, minimum=1)
        if k > len(sensors):
            raise ConfigError(f"k={k} exceeds the number of sensors ({len(sensors)})", "rule.k")
    elif "k" in rule:
        raise ConfigError(f"rule {name!r} takes no k", "rule.k")

    sweep = None
    if top.get("sweep") is not None:
        sw = _obj(top["sweep"], "sweep", ("lambda_min", "lambda_max", "points"),
                  ("lambda_min", "lambda_max", "points"))
        lo = _number(sw["lambda_min"], "sweep.lambda_min", minimum=0)
        hi = _number(sw["lambda_max"], "sweep.lambda_max", minimum=0)
        points = _number(sw["points"], "sweep.points", integer=True, minimum=1)
        if points > 1 and not lo < hi:
            raise ConfigError("lambda_min must be < lambda_max", "sweep")
        sweep = SweepSpec(lo, hi, points)

    sim = SimSpec()
    if top.get("sim") is not None:
        sm = _obj(top["sim"], "sim", ("trials", "seed", "resample_beta"))
        trials = _number(sm.get("trials", sim.trials), "sim.trials", integer=True, minimum=1)
        seed = _number(sm.get("seed", sim.seed), "sim.seed", integer=True, minimum=0)
        if seed >= 2**64:
            raise ConfigError("seed must fit in 64 bits", "sim.seed")
        resample = sm.get("resample_beta", True)
        if not isinstance(resample, bool):
            raise ConfigError("expected true or false", "sim.resample_beta")
        sim = SimSpec(trials, seed, resample)

    output = OutputSpec()
    if top.get("output") is not None:
        out = _obj(top["output"], "output", ("path", "format"))
        path = out.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("expected a string or null", "output.path")
        fmt = out.get("format", "csv")
        if fmt not in OUTPUT_FORMATS:
            raise ConfigError(f"unsupported format {fmt!r}", "output.format")
        output = OutputSpec(path, fmt)

    cfg = ExperimentConfig(p, N, tuple(sensors), name, k, sweep, sim, output)
    try:
        cfg.network()
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
