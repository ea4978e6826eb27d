"""INI-style experiment configuration.

Files use ``[section]`` headers and ``key = value`` lines.  Every key has a
typed default; unknown sections or keys are rejected.  Numeric lists are
comma separated; ranges may be written ``start:step:stop`` (stop inclusive).
Prior entries read ``dist(a, b)``, where numbers may use ``pi``, e.g.
``uniform(-pi/2, pi/2)``.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelConfig, Marginal, PathPrior, PowerPrior, VelocityScenario


class ConfigError(ValueError):
    pass


def parse_number(text: str) -> float:
    """Float literal or a multiple/fraction of ``pi`` such as ``-pi/2`` or ``2*pi``."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?)(?:([0-9.eE+-]+)\*)?pi(?:/([0-9.eE+-]+))?", t)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        mult = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * mult * math.pi / div
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def parse_int(text: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None
    return value


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_list(text: str) -> list[float]:
    """``a, b, c`` or an inclusive range ``start:step:stop``."""
    t = text.strip()
    if ":" in t and "," not in t:
        parts = [parse_number(x) for x in t.split(":")]
        if len(parts) != 3 or parts[1] == 0:
            raise ConfigError(f"range must read start:step:stop, got {text!r}")
        start, step, stop = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(f"empty range {text!r}")
        return [float(x) for x in np.round(start + step * np.arange(count), 12)]
    return [parse_number(x) for x in t.split(",") if x.strip()]


def parse_int_list(text: str) -> list[int]:
    out = parse_list(text)
    if any(x != int(x) for x in out):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(x) for x in out]


def parse_intervals(text: str) -> list[tuple[float, float]]:
    """``lo:hi, lo:hi, ...``"""
    out = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 2:
            raise ConfigError(f"interval must read lo:hi, got {part!r}")
        out.append((parse_number(bits[0]), parse_number(bits[1])))
    return out


def parse_dist(text: str) -> tuple[str, tuple[float, ...]]:
    m = re.fullmatch(r"\s*([A-Za-z_]+)\s*(?:\((.*)\))?\s*", text)
    if not m:
        raise ConfigError(f"cannot parse distribution {text!r}")
    args = m.group(2)
    params = tuple(parse_number(a) for a in args.split(",")) if args and args.strip() else ()
    return m.group(1), params


_S = str
SCHEMA: dict[str, dict[str, tuple]] = {
    "channel": {"m_sc": (parse_int, "1"), "m_sn": (parse_int, "1"), "m_r": (parse_int, "16"),
                "m_t": (parse_int, "1"), "delta_f": (parse_number, "15e3"),
                "delta_t": (parse_number, "5e-4"), "f_c": (parse_number, "2.1e9")},
    "prior": {"n_paths": (parse_int, "3"), "power": (parse_dist, "normalized_uniform_amplitude"),
              "normalize": (parse_bool, "true"),
              "delay": (parse_dist, "constant(0)"), "doppler": (parse_dist, "constant(0)"),
              "theta_r": (parse_dist, "uniform(-pi/2, pi/2)"), "theta_t": (parse_dist, "constant(0)")},
    "velocity": {"bounds": (parse_intervals, "0:5, 10:15, 20:25, 30:35"),
                 "masses": (parse_list, "0.25, 0.25, 0.25, 0.25"), "n_paths": (parse_int, "50"),
                 "m_sn": (parse_int, "16"), "delta_t": (parse_number, "5e-4"),
                 "f_c": (parse_number, "2.1e9"), "power": (parse_dist, "equal")},
    "gen-data": {"kind": (_S, "paths"), "n": (parse_int, "1000"), "file": (_S, "dataset.wslb")},
    "verify-theorem": {"n_xi": (parse_int, "20"), "n_beta": (parse_int, "100000"),
                       "tol": (parse_number, "0.05")},
    "cluster": {"n_train": (parse_int, "20000"), "n_test": (parse_int, "8000"),
                "k_grid": (parse_int_list, "4, 8, 16, 32"), "max_iter": (parse_int, "100"),
                "rel_tol": (parse_number, "1e-6"), "floor": (parse_number, "3e-3"),
                "restarts": (parse_int, "3"), "kmeans_restarts": (parse_int, "10"),
                "on_collapse": (_S, "prune"), "file": (_S, "cluster.csv")},
    "estimate": {"snr_grid": (parse_list, "-10:5:30"), "n_test": (parse_int, "5000"),
                 "n_train": (parse_int, "100000"), "file": (_S, "estimate.csv")},
    "run": {"seed": (parse_int, "0"), "out": (_S, "out")},
}


@dataclass
class ExperimentConfig:
    values: dict[str, dict[str, object]]

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    @property
    def out(self) -> Path:
        return Path(self.values["run"]["out"])

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def channel(self) -> ChannelConfig:
        return ChannelConfig(**self.values["channel"])

    def prior(self) -> PathPrior:
        p = self.values["prior"]
        power = PowerPrior(p["power"][0], p["power"][1], normalize=p["normalize"])
        return PathPrior(power=power,
                         **{k: Marginal(*p[k]) for k in ("delay", "doppler", "theta_r", "theta_t")})

    def velocity(self) -> VelocityScenario:
        v = self.values["velocity"]
        cfg = ChannelConfig(m_sn=v["m_sn"], delta_t=v["delta_t"], f_c=v["f_c"])
        return VelocityScenario(bounds=tuple(v["bounds"]), masses=tuple(v["masses"]),
                                n_paths=v["n_paths"], cfg=cfg, power=PowerPrior(*v["power"]))


def load_config(path=None, overrides: dict[str, dict[str, str]] | None = None) -> ExperimentConfig:
    """Merge defaults, an optional config file and string-valued overrides."""
    raw = {sec: {k: default for k, (_, default) in keys.items()} for sec, keys in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        for sec in parser.sections():
            _merge(raw, sec, dict(parser.items(sec)))
    for sec, items in (overrides or {}).items():
        _merge(raw, sec, items)
    values = {}
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, (parse, _) in keys.items():
            try:
                values[sec][key] = parse(raw[sec][key])
            except ConfigError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}") from None
    seed = values["run"]["seed"]
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return ExperimentConfig(values)


def _merge(raw, sec, items):
    if sec not in SCHEMA:
        raise ConfigError(f"unknown section [{sec}]")
    for key, value in items.items():
        if key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key {key!r} in section [{sec}]")
        raw[sec][key] = value
