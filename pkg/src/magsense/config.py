"""JSON run configuration.

Frequencies are given as ordinary (``/2pi``) values, either bare numbers in
Hz or strings with a unit (``"37.5 GHz"``, ``"15 MHz"``). Temperatures are
kelvin, optionally as ``"50 mK"``. Unknown keys are rejected. The resolved
form (:meth:`RunConfig.resolved`) fills every default and replaces unit
strings with plain numbers, and parses back to identical floats.
"""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PreconditionError
from .model import SystemParams, hz
from .modulation import ModulationSettings
from .timedomain import SdeConfig, SignalSpec

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}
_TEMP_UNITS = {"k": 1.0, "mk": 1e-3, "uk": 1e-6}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z]*)\s*$")

DEFAULTS = {
    "system": {
        "omega_m": 37.5e9,
        "omega_a": None,
        "g_over_omega_m": 0.01,
        "delta_a": 0.0,
        "delta_m": 0.0,
        "kappa_a": 33e6,
        "kappa_m": 15e6,
        "temperature": 0.05,
    },
    "modulation": {
        "lambda1": 0.16,
        "lambda2_ratio": 0.95,
        "phi1": 0.0,
        "phi2": 0.0,
        "omega_L": None,
        "omega_d": None,
        "omega1": None,
        "omega2": None,
    },
    "grid": {
        "omega_min_over_kappa_m": 1e-3,
        "omega_max_over_kappa_m": 10.0,
        "points": 200,
        "spacing": "log",
    },
    "output": {"directory": "out", "format": "csv", "metadata": True},
}

OPTIONAL_SECTIONS = {
    "sweep": {"parameter", "values"},
    "montecarlo": {"dt", "duration", "burn_in", "seed", "segments", "segment_overlap"},
    "signal": {"kind", "amplitude", "omega_s", "channel"},
    "stability_map": {"param1", "values1", "param2", "values2"},
}

# mutually exclusive spellings
ALTERNATIVES = {
    "system": [("g", "g_over_omega_m")],
    "modulation": [("lambda2", "lambda2_ratio")],
}

FREQUENCY_KEYS = {
    "system": {"omega_m", "omega_a", "g", "delta_a", "delta_m", "kappa_a", "kappa_m"},
    "modulation": {"omega_L", "omega_d", "omega1", "omega2"},
    "signal": {"omega_s"},
}

SWEEP_PARAMETERS = ("lambda2_ratio", "temperature", "cooperativity", "detuning")
TOP_LEVEL = set(DEFAULTS) | set(OPTIONAL_SECTIONS) | {"metadata"}


def parse_frequency(value, where="") -> float:
    """Ordinary frequency in Hz from a number or a ``"<x> <unit>"`` string."""
    return _parse(value, _FREQ_UNITS, "Hz", where)


def parse_temperature(value, where="") -> float:
    return _parse(value, _TEMP_UNITS, "K", where)


def _parse(value, units, base, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _QUANTITY.match(value)
        if not m:
            raise ConfigError(f"{where}: cannot parse quantity {value!r}")
        unit = (m.group(2) or base).lower()
        if unit not in units:
            raise ConfigError(f"{where}: unknown unit {m.group(2)!r} (use one of {sorted(units)})")
        try:
            out = float(m.group(1)) * units[unit]
        except ValueError:
            raise ConfigError(f"{where}: cannot parse number in {value!r}") from None
    else:
        raise ConfigError(f"{where}: expected a number or unit string, got {value!r}")
    if not math.isfinite(out):
        raise ConfigError(f"{where}: value must be finite")
    return out


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


@dataclass
class RunConfig:
    raw: dict

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - TOP_LEVEL
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
        resolved = {}
        for section, defaults in DEFAULTS.items():
            given = data.get(section, {}) or {}
            if not isinstance(given, dict):
                raise ConfigError(f"{section}: expected an object")
            allowed = set(defaults)
            for a, b in ALTERNATIVES.get(section, []):
                allowed |= {a, b}
                if a in given and b in given:
                    raise ConfigError(f"{section}: give either {a!r} or {b!r}, not both")
            bad = set(given) - allowed
            if bad:
                raise ConfigError(f"{section}: unknown key(s): {', '.join(sorted(bad))}")
            merged = dict(defaults)
            for a, b in ALTERNATIVES.get(section, []):
                if a in given:
                    merged.pop(b, None)
            merged.update(given)
            resolved[section] = merged
        for section, keys in OPTIONAL_SECTIONS.items():
            if data.get(section) is None:
                continue
            given = data[section]
            if not isinstance(given, dict):
                raise ConfigError(f"{section}: expected an object")
            bad = set(given) - keys
            if bad:
                raise ConfigError(f"{section}: unknown key(s): {', '.join(sorted(bad))}")
            resolved[section] = dict(given)
        cfg = cls(_normalise(resolved))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> tuple["RunConfig", dict]:
        """Parse a config file or an emitted metadata sidecar.

        Returns the config and the sidecar metadata (empty for plain configs).
        """
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        meta = {}
        if isinstance(data, dict) and "metadata" in data:
            meta = data["metadata"] or {}
        try:
            return cls.from_dict(data), meta
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def resolved(self) -> dict:
        return copy.deepcopy(self.raw)

    # -- validation ---------------------------------------------------------
    def validate(self):
        self.system()
        self.modulation()
        self.omega_grid()
        if "sweep" in self.raw:
            self.sweep()
        if "montecarlo" in self.raw:
            self.sde_config(None, None)
        if "signal" in self.raw:
            self.signal()
        out = self.raw["output"]
        if out["format"] != "csv":
            raise ConfigError(f"output.format: only 'csv' is supported, got {out['format']!r}")
        if not isinstance(out["directory"], str):
            raise ConfigError("output.directory: expected a string")

    # -- typed views --------------------------------------------------------
    def system(self) -> SystemParams:
        s = self.raw["system"]
        omega_m = hz(s["omega_m"])
        g = hz(s["g"]) if "g" in s else s["g_over_omega_m"] * omega_m
        try:
            return SystemParams(
                omega_m=omega_m,
                omega_a=None if s["omega_a"] is None else hz(s["omega_a"]),
                kappa_a=hz(s["kappa_a"]),
                kappa_m=hz(s["kappa_m"]),
                g=g,
                delta_a=hz(s["delta_a"]),
                delta_m=hz(s["delta_m"]),
                temperature=s["temperature"],
            )
        except ValueError as exc:
            raise ConfigError(f"system: {exc}") from None

    def modulation(self, system: SystemParams | None = None) -> ModulationSettings:
        m = self.raw["modulation"]
        system = system or self.system()
        lam2 = m["lambda2"] if "lambda2" in m else m["lambda2_ratio"] * m["lambda1"]
        omega_L = system.omega_a - system.delta_a if m["omega_L"] is None else hz(m["omega_L"])
        omega_d = system.omega_m - system.delta_m if m["omega_d"] is None else hz(m["omega_d"])
        try:
            return ModulationSettings(
                lambda1=m["lambda1"], lambda2=lam2, omega_L=omega_L, omega_d=omega_d,
                omega1=None if m["omega1"] is None else hz(m["omega1"]),
                omega2=None if m["omega2"] is None else hz(m["omega2"]),
                phi1=m["phi1"], phi2=m["phi2"],
            )
        except ValueError as exc:
            raise ConfigError(f"modulation: {exc}") from None

    def omega_grid(self) -> np.ndarray:
        """Grid in units of kappa_m."""
        g = self.raw["grid"]
        lo, hi, n = g["omega_min_over_kappa_m"], g["omega_max_over_kappa_m"], g["points"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError("grid.points: expected an integer >= 1")
        if g["spacing"] not in ("log", "linear"):
            raise ConfigError(f"grid.spacing: expected 'log' or 'linear', got {g['spacing']!r}")
        if n == 1:
            return np.array([lo])
        if hi < lo:
            raise ConfigError("grid: omega_max_over_kappa_m < omega_min_over_kappa_m")
        if g["spacing"] == "log":
            if lo <= 0:
                raise ConfigError("grid: log spacing needs omega_min_over_kappa_m > 0")
            return np.logspace(np.log10(lo), np.log10(hi), n)
        return np.linspace(lo, hi, n)

    def sweep(self):
        sw = self.raw.get("sweep")
        if sw is None:
            raise ConfigError("sweep: section required for this command")
        if set(sw) != {"parameter", "values"}:
            raise ConfigError("sweep: needs exactly 'parameter' and 'values'")
        if sw["parameter"] not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter: expected one of {SWEEP_PARAMETERS}, got {sw['parameter']!r}")
        if not isinstance(sw["values"], list) or not sw["values"]:
            raise ConfigError("sweep.values: expected a nonempty list")
        return sw["parameter"], list(sw["values"])

    def sde_config(self, params, couplings, seed_override=None) -> SdeConfig | None:
        mc = self.raw.get("montecarlo")
        if mc is None:
            return None
        seed = mc.get("seed", 0) if seed_override is None else seed_override
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("montecarlo.seed: expected an unsigned 64-bit integer")
        overrides = {k: _number(v, f"montecarlo.{k}") for k, v in mc.items()
                     if k in ("dt", "duration", "burn_in", "segment_overlap") and v is not None}
        if "segments" in mc and mc["segments"] is not None:
            if not isinstance(mc["segments"], int) or isinstance(mc["segments"], bool):
                raise ConfigError("montecarlo.segments: expected an integer")
            overrides["segments"] = mc["segments"]
        if params is None:
            return None
        try:
            return SdeConfig.default(params, couplings, seed=seed, **overrides)
        except PreconditionError as exc:
            raise ConfigError(f"montecarlo: {exc}") from None

    def signal(self) -> SignalSpec | None:
        s = self.raw.get("signal")
        if s is None:
            return None
        try:
            return SignalSpec(
                kind=s.get("kind", "none"),
                amplitude=_number(s.get("amplitude", 0.0), "signal.amplitude"),
                omega_s=hz(s.get("omega_s", 0.0)),
                channel=s.get("channel", "x_m"),
            )
        except PreconditionError as exc:
            raise ConfigError(f"signal: {exc}") from None


def _normalise(cfg: dict) -> dict:
    """Replace unit strings by numbers (Hz, K) and type-check scalars."""
    out = copy.deepcopy(cfg)
    for section, keys in FREQUENCY_KEYS.items():
        block = out.get(section)
        if block is None:
            continue
        for k in keys:
            if k in block and block[k] is not None:
                block[k] = parse_frequency(block[k], f"{section}.{k}")
    sysb = out["system"]
    sysb["temperature"] = parse_temperature(sysb["temperature"], "system.temperature")
    if "g_over_omega_m" in sysb:
        sysb["g_over_omega_m"] = _number(sysb["g_over_omega_m"], "system.g_over_omega_m")
    mod = out["modulation"]
    for k in ("lambda1", "lambda2", "lambda2_ratio", "phi1", "phi2"):
        if k in mod:
            mod[k] = _number(mod[k], f"modulation.{k}")
    grid = out["grid"]
    for k in ("omega_min_over_kappa_m", "omega_max_over_kappa_m"):
        grid[k] = _number(grid[k], f"grid.{k}")
    sw = out.get("sweep")
    if sw is not None and isinstance(sw.get("values"), list):
        p = sw.get("parameter")
        conv = {"temperature": parse_temperature, "detuning": parse_frequency}.get(p)
        vals = []
        for i, v in enumerate(sw["values"]):
            where = f"sweep.values[{i}]"
            vals.append(conv(v, where) if conv else _number(v, where))
        sw["values"] = vals
    return out
