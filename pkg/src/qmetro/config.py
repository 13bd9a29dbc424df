"""Flat key = value experiment configuration files.

Format: one `key = value` pair per line, `#` comments, blank lines ignored.
Recognized keys: n, chi, gamma, channel, scheme, reference, t_max,
samples_per_period, gamma_min, gamma_max, points_per_decade, n_list
(comma-separated integers).  No nesting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    ChannelKind,
    ExperimentConfig,
    NoiseChannel,
    Scheme,
    default_final_time,
)


class ConfigError(ValueError):
    """Raised with file/line diagnostics for unreadable or invalid configs."""


_KEYS = {
    "n": int,
    "chi": float,
    "gamma": float,
    "channel": str,
    "scheme": str,
    "reference": str,
    "t_max": float,
    "samples_per_period": int,
    "gamma_min": float,
    "gamma_max": float,
    "points_per_decade": int,
    "n_list": str,
}

_DEFAULTS = {
    "chi": 1.0,
    "gamma": 0.0,
    "channel": "dephasing",
    "scheme": "cluster",
    "reference": "ref1-max",
    "t_max": 0.0,
    "samples_per_period": 16,
    "gamma_min": 0.005,
    "gamma_max": 1.0,
    "points_per_decade": 60,
}


@dataclass
class RunConfig:
    """Parsed configuration plus derived experiment objects."""

    values: dict = field(default_factory=dict)
    path: str = "<none>"

    def get(self, key, default=None):
        return self.values.get(key, _DEFAULTS.get(key, default))

    def require(self, key):
        v = self.get(key)
        if v is None:
            raise ConfigError(f"{self.path}: missing required key {key!r}")
        return v

    @property
    def n_list(self) -> list[int]:
        raw = self.values.get("n_list")
        if raw is None:
            return [int(self.require("n"))]
        try:
            return [int(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"{self.path}: bad n_list {raw!r}: {exc}") from None

    def experiment(self, scheme=None, gamma=None) -> ExperimentConfig:
        try:
            return ExperimentConfig(
                n=int(self.require("n")),
                chi=float(self.get("chi")),
                channel=NoiseChannel(ChannelKind(self.get("channel")),
                                     float(gamma if gamma is not None
                                           else self.get("gamma"))),
                scheme=Scheme(scheme if scheme is not None
                              else self.get("scheme")),
                t_max=float(self.get("t_max")),
                samples_per_period=int(self.get("samples_per_period")),
            )
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{self.path}: {exc}") from None

    def gamma_grid(self) -> list[float]:
        lo = float(self.get("gamma_min"))
        hi = float(self.get("gamma_max"))
        ppd = int(self.get("points_per_decade"))
        if not 0 < lo < hi:
            raise ConfigError(
                f"{self.path}: need 0 < gamma_min < gamma_max, "
                f"got {lo}, {hi}")
        if ppd < 1:
            raise ConfigError(f"{self.path}: points_per_decade must be >= 1")
        decades = math.log10(hi / lo)
        count = max(int(round(decades * ppd)), 1) + 1
        return [lo * 10.0 ** (decades * k / (count - 1)) for k in range(count)] \
            if count > 1 else [lo]


def parse_config_text(text: str, path: str = "<string>") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key](val)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: bad value {val!r} for key {key!r}") from None
    return RunConfig(values=values, path=path)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, path=path)
