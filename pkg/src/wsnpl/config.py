"""Sectioned key=value run configuration.

The format is deliberately flat INI-style text so experiment configs diff
cleanly::

    [problem]
    w = 1.0
    d0 = 0.02          # or "auto" (sweep only): 1.1x median pilot floor
    norm = l1

    [sensors]          # exactly one of [sensors] / [topology]
    sigma2 = 0.01, 0.04
    gain = 1e-3, 1e-3  # or: distance = 40, 80 plus g0_db and exponent
    xi2_dbm = -90      # or xi2 = 1e-12; scalars broadcast per sensor

    [topology]
    k = 100
    r_ratio = 0.3
    seed = 1

dB/dBm values are converted to linear units here; the library API is
strictly linear.  Unknown keys, duplicates, and malformed lines are
rejected with the offending key and line number.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .experiments import TopologyParams
from .model import NORMS, NetworkInstance, SensorSpec, channel_gain, db_to_linear, dbm_to_watts

_KNOWN_KEYS = {
    "problem": {"w", "d0", "norm"},
    "sensors": {"sigma2", "gain", "distance", "g0_db", "exponent",
                "xi2", "xi2_dbm", "bandwidth_hz"},
    "topology": {"k", "r_ratio", "mean_distance_m", "g0_db", "exponent",
                 "xi2_dbm", "sigma2_min", "sigma2_max", "bandwidth_hz",
                 "seed"},
    "sweep": {"r_values", "runs"},
    "validate": {"trials", "theta"},
    "output": {"csv"},
}


@dataclass(frozen=True)
class SweepSection:
    r_values: tuple[float, ...]
    runs: int


@dataclass(frozen=True)
class ValidateSection:
    trials: int = 1_000_000
    theta: float | None = None     # defaults to 0.5 w downstream


@dataclass(frozen=True)
class RunConfig:
    w: float
    d0: float | None               # None means "auto" (sweep-only policy)
    norm: str
    network: NetworkInstance | None
    topology: TopologyParams | None
    sweep: SweepSection | None
    validate: ValidateSection
    csv_path: str | None


class _Section:
    """One parsed section with typed, line-aware accessors."""

    def __init__(self, name: str, items: dict):
        self.name = name
        self.items = items            # key -> (raw value, line)
        self.seen: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.items

    def raw(self, key: str):
        self.seen.add(key)
        return self.items[key]

    def get(self, key: str, conv, default=None, required=False):
        if key not in self.items:
            if required:
                raise ConfigError(f"missing required key in [{self.name}]",
                                  key=key)
            return default
        value, line = self.raw(key)
        try:
            return conv(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"cannot parse value {value!r}: {exc}",
                              key=key, line=line) from None

    def require_known(self):
        for key, (_, line) in self.items.items():
            if key not in _KNOWN_KEYS[self.name]:
                raise ConfigError(f"unknown key in [{self.name}]",
                                  key=key, line=line)

    def check(self, key: str, ok: bool, why: str):
        if not ok:
            _, line = self.items[key]
            raise ConfigError(why, key=key, line=line)


def _split_sections(text: str) -> dict[str, _Section]:
    sections: dict[str, dict] = {}
    current: str | None = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if "#" in line:
            line = line.split("#", 1)[0].rstrip()
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if not name:
                raise ConfigError("empty section name", line=lineno)
            if name not in _KNOWN_KEYS:
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", line=lineno)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {rawline.strip()!r}",
                              line=lineno)
        if current is None:
            raise ConfigError("key outside any section", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in sections[current]:
            raise ConfigError(f"duplicate key in [{current}]",
                              key=key, line=lineno)
        sections[current][key] = (value, lineno)
    return {name: _Section(name, items) for name, items in sections.items()}


def _float_list(value: str) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _broadcast(section: _Section, key: str, values, k: int):
    if len(values) == 1:
        return tuple(values) * k
    section.check(key, len(values) == k,
                  f"expected 1 or {k} comma-separated values, got {len(values)}")
    return tuple(values)


def _parse_sensors(sec: _Section, bandwidth_default: float = 1.0e4):
    sec.require_known()
    sigma2 = sec.get("sigma2", _float_list, required=True)
    k = len(sigma2)
    for i, s in enumerate(sigma2):
        sec.check("sigma2", s > 0.0, f"sigma2[{i}] must be positive")

    if sec.has("xi2") == sec.has("xi2_dbm"):
        raise ConfigError("[sensors] needs exactly one of xi2 / xi2_dbm",
                          key="xi2")
    if sec.has("xi2"):
        xi2 = _broadcast(sec, "xi2", sec.get("xi2", _float_list), k)
        for i, x in enumerate(xi2):
            sec.check("xi2", x > 0.0, f"xi2[{i}] must be positive")
    else:
        dbm = _broadcast(sec, "xi2_dbm", sec.get("xi2_dbm", _float_list), k)
        xi2 = tuple(dbm_to_watts(x) for x in dbm)

    if sec.has("gain") == sec.has("distance"):
        raise ConfigError("[sensors] needs exactly one of gain / distance",
                          key="gain")
    if sec.has("gain"):
        gains = _broadcast(sec, "gain", sec.get("gain", _float_list), k)
        for i, g in enumerate(gains):
            sec.check("gain", g > 0.0, f"gain[{i}] must be positive")
        distances: tuple[float | None, ...] = (None,) * k
    else:
        distances = _broadcast(sec, "distance", sec.get("distance", _float_list), k)
        for i, d in enumerate(distances):
            sec.check("distance", d > 0.0, f"distance[{i}] must be positive")
        g0_db = sec.get("g0_db", float, required=True)
        exponent = sec.get("exponent", float, required=True)
        gains = tuple(channel_gain(d, db_to_linear(g0_db), exponent)
                      for d in distances)

    bandwidth = sec.get("bandwidth_hz", float, default=bandwidth_default)
    if sec.has("bandwidth_hz"):
        sec.check("bandwidth_hz", bandwidth > 0.0, "bandwidth_hz must be positive")
    sensors = tuple(SensorSpec(sigma2=s, gain=g, xi2=x, distance=d)
                    for s, g, x, d in zip(sigma2, gains, xi2, distances))
    return sensors, bandwidth


def _parse_topology(sec: _Section, w: float) -> TopologyParams:
    sec.require_known()
    k = sec.get("k", int, required=True)
    params = dict(
        k=k,
        r_ratio=sec.get("r_ratio", float, default=0.0),
        mean_distance=sec.get("mean_distance_m", float, default=80.0),
        g0_db=sec.get("g0_db", float, default=-30.0),
        exponent=sec.get("exponent", float, default=3.5),
        xi2_dbm=sec.get("xi2_dbm", float, default=-90.0),
        sigma2_min=sec.get("sigma2_min", float, default=0.01),
        sigma2_max=sec.get("sigma2_max", float, default=0.08),
        w=w,
        bandwidth=sec.get("bandwidth_hz", float, default=1.0e4),
        seed=sec.get("seed", int, default=0),
    )
    try:
        return TopologyParams(**params)
    except ValueError as exc:
        raise ConfigError(f"invalid [topology] values: {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse one configuration document into a typed RunConfig."""
    sections = _split_sections(text)
    if "problem" not in sections:
        raise ConfigError("missing section: problem")
    prob = sections["problem"]
    prob.require_known()
    w = prob.get("w", float, required=True)
    prob.check("w", w > 0.0, "w must be positive")
    d0_raw, d0_line = prob.raw("d0") if prob.has("d0") else (None, None)
    if d0_raw is None:
        raise ConfigError("missing required key in [problem]", key="d0")
    if d0_raw.lower() == "auto":
        d0 = None
    else:
        try:
            d0 = float(d0_raw)
        except ValueError:
            raise ConfigError(f"cannot parse value {d0_raw!r}",
                              key="d0", line=d0_line) from None
        prob.check("d0", d0 > 0.0, "d0 must be positive")
    norm = prob.get("norm", str, required=True).lower()
    prob.check("norm", norm in NORMS, f"norm must be one of {NORMS}")

    has_sensors = "sensors" in sections
    has_topology = "topology" in sections
    if has_sensors == has_topology:
        raise ConfigError(
            "exactly one of [sensors] / [topology] must be present")

    network = None
    topology = None
    if has_sensors:
        sensors, bandwidth = _parse_sensors(sections["sensors"])
        network = NetworkInstance(w=w, sensors=sensors, bandwidth=bandwidth)
    else:
        topology = _parse_topology(sections["topology"], w)

    sweep = None
    if "sweep" in sections:
        sec = sections["sweep"]
        sec.require_known()
        r_values = sec.get("r_values", _float_list, required=True)
        runs = sec.get("runs", int, required=True)
        sec.check("runs", runs >= 1, "runs must be >= 1")
        sweep = SweepSection(r_values=r_values, runs=runs)

    validate = ValidateSection()
    if "validate" in sections:
        sec = sections["validate"]
        sec.require_known()
        trials = sec.get("trials", int, default=1_000_000)
        if sec.has("trials"):
            sec.check("trials", trials >= 1, "trials must be >= 1")
        theta = sec.get("theta", float, default=None)
        if theta is not None:
            sec.check("theta", abs(theta) <= w, "theta must satisfy |theta| <= w")
        validate = ValidateSection(trials=trials, theta=theta)

    csv_path = None
    if "output" in sections:
        sec = sections["output"]
        sec.require_known()
        csv_path = sec.get("csv", str, default=None)

    if d0 is None and sweep is None:
        raise ConfigError("d0 = auto is only valid together with a [sweep] "
                          "section", key="d0", line=d0_line)

    return RunConfig(w=w, d0=d0, norm=norm, network=network,
                     topology=topology, sweep=sweep, validate=validate,
                     csv_path=csv_path)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
