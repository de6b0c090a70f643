"""Flat ``key = value`` scenario configuration files."""

from __future__ import annotations

import re
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable

from .arch import ArchKind
from .channel import Position, RadioConfig
from .linkadapt import TABLES, read_thresholds
from .sched import Policy, SchedulerKind
from .sim import (
    ON_GNB,
    PATH_END,
    PATH_START,
    UE_POSITIONS,
    ScenarioConfig,
    ScenarioMode,
    mc_positions,
)


class ConfigError(ValueError):
    pass


_ARCH_ALIASES = {
    "mobilegnb": ArchKind.MOBILE_GNB,
    "wab": ArchKind.MOBILE_GNB,
    "gnbdurelay": ArchKind.GNB_DU_RELAY,
    "relay": ArchKind.GNB_DU_RELAY,
    "iabnode": ArchKind.IAB_NODE,
    "iab": ArchKind.IAB_NODE,
}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _arch(v: str) -> ArchKind:
    return _ARCH_ALIASES[v.lower().replace("-", "").replace("_", "")]


def _bool(v: str) -> bool:
    v = v.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(v)


def _position(v: str) -> Position:
    parts = [float(p) for p in v.split(",")]
    if len(parts) not in (2, 3):
        raise ValueError(v)
    return Position(*parts)


def _choice(options: Iterable[str]) -> Callable[[str], str]:
    options = tuple(options)

    def parse(v: str) -> str:
        v = v.lower()
        if v not in options:
            raise ValueError(v)
        return v

    return parse


def _positive_int(v: str) -> int:
    n = int(v)
    if n < 0:
        raise ValueError(v)
    return n


_PARSERS: dict[str, Callable[[str], object]] = {
    "arch": _arch,
    "scheduler": lambda v: Policy(v.lower()),
    "alpha": float,
    "tx_power_dbm": float,
    "noise_dbm": float,
    "carrier_ghz": float,
    "bandwidth_mhz": float,
    "scs_khz": float,
    "n_prb": int,
    "tti_ms": float,
    "positions_n": int,
    "path_start": _position,
    "path_end": _position,
    "on_gnb_pos": _position,
    "ttis_per_position": int,
    "seed": int,
    "scenario": lambda v: ScenarioMode(v.lower()),
    "max_retx": _positive_int,
    "gap_db": float,
    "crt_ms": float,
    # extensions beyond the core key set
    "cqi_table": _choice(TABLES),
    "bler_model": _choice(("stochastic", "deterministic")),
    "bler_slope_db": float,
    "re_per_prb": int,
    "backhaul_cap": _bool,
    "packet_bytes": int,
    "thresholds_file": str,
}
_UE_KEY = re.compile(r"ue(\d+)_pos$")


def is_known_key(key: str) -> bool:
    return key in _PARSERS or bool(_UE_KEY.match(key))


def _parse_value(key: str, value: str, where: str) -> object:
    m = _UE_KEY.match(key)
    parser = _position if m else _PARSERS.get(key)
    if parser is None:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return parser(value)
    except (ValueError, KeyError, TypeError):
        raise ConfigError(f"{where}: cannot parse value {value!r} for key {key!r}") from None


def _split(line: str, sep: str, where: str) -> tuple[str, str]:
    if sep not in line:
        raise ConfigError(f"{where}: expected 'key {sep} value', got {line!r}")
    k, v = line.split(sep, 1)
    return k.strip().lower(), v.strip()


def parse_file(path: str | Path) -> dict[str, tuple[object, str]]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    out: dict[str, tuple[object, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        key, value = _split(line, "=", where)
        out[key] = (_parse_value(key, value, where), where)
    return out


def parse_overrides(overrides: Iterable[str]) -> dict[str, tuple[object, str]]:
    out: dict[str, tuple[object, str]] = {}
    for i, item in enumerate(overrides, start=1):
        where = f"--set #{i}"
        key, value = _split(item, "=", where)
        out[key] = (_parse_value(key, value, where), where)
    return out


def build_config(values: dict[str, tuple[object, str]]) -> ScenarioConfig:
    """Turn parsed ``key -> (value, origin)`` pairs into a ScenarioConfig."""
    v = {k: val for k, (val, _) in values.items()}

    def fail(key: str, msg: str) -> ConfigError:
        return ConfigError(f"{values[key][1]}: {msg}" if key in values else msg)

    ue_keys = sorted((int(_UE_KEY.match(k).group(1)), k) for k in v if _UE_KEY.match(k))
    ues = list(UE_POSITIONS)
    for idx, key in ue_keys:
        if idx < 1 or idx > len(ues) + 1:
            raise fail(key, f"UE index {idx} leaves a gap after ue{len(ues)}")
        if idx == len(ues) + 1:
            ues.append(v[key])
        else:
            ues[idx - 1] = v[key]

    radio = RadioConfig()
    try:
        radio = RadioConfig(
            carrier_freq=v.get("carrier_ghz", radio.carrier_freq / 1e9) * 1e9,
            bandwidth=v.get("bandwidth_mhz", radio.bandwidth / 1e6) * 1e6,
            tx_power=v.get("tx_power_dbm", radio.tx_power),
            noise_floor=v.get("noise_dbm", radio.noise_floor),
            subcarrier_spacing=v.get("scs_khz", radio.subcarrier_spacing / 1e3) * 1e3,
            n_prb=v.get("n_prb", radio.n_prb),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid radio configuration: {exc}") from None

    try:
        sched = SchedulerKind(v.get("scheduler", Policy.PF), v.get("alpha", SchedulerKind().alpha))
    except ValueError as exc:
        raise fail("alpha", str(exc)) from None

    n = v.get("positions_n", 21)
    try:
        positions = mc_positions(v.get("path_start", PATH_START), v.get("path_end", PATH_END), n)
    except ValueError as exc:
        raise fail("positions_n", str(exc)) from None

    thresholds = ()
    if "thresholds_file" in v:
        try:
            thresholds = tuple(sorted(read_thresholds(v["thresholds_file"]).items()))
        except (OSError, ValueError) as exc:
            raise fail("thresholds_file", str(exc)) from None

    base = ScenarioConfig()
    try:
        cfg = replace(
            base,
            arch_kind=v.get("arch", base.arch_kind),
            scheduler=sched,
            radio=radio,
            positions=tuple(positions),
            ue_positions=tuple(ues),
            on_gnb_position=v.get("on_gnb_pos", ON_GNB),
            ttis_per_position=v.get("ttis_per_position", base.ttis_per_position),
            tti_duration=v.get("tti_ms", base.tti_duration * 1e3) / 1e3,
            seed=v.get("seed", base.seed),
            scenario_mode=v.get("scenario", base.scenario_mode),
            max_retx=v.get("max_retx", base.max_retx),
            cqi_table=v.get("cqi_table", base.cqi_table),
            gap_db=v.get("gap_db", base.gap_db),
            bler_slope_db=v.get("bler_slope_db", base.bler_slope_db),
            thresholds=thresholds,
            re_per_prb=v.get("re_per_prb", base.re_per_prb),
            deterministic_bler=v.get("bler_model", "stochastic") == "deterministic",
            backhaul_cap=v.get("backhaul_cap", base.backhaul_cap),
            packet_bytes=v.get("packet_bytes", base.packet_bytes),
            crt_limit=v.get("crt_ms", base.crt_limit * 1e3) / 1e3,
        )
        cfg.table()
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    return cfg


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """Load a config file (or pure defaults when ``path`` is None) and apply
    ``KEY=VALUE`` overrides, which take precedence over the file."""
    values = parse_file(path) if path is not None else {}
    values.update(parse_overrides(overrides))
    return build_config(values)
