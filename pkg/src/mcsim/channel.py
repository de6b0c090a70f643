"""Geometry and radio propagation for the Mobile Cell scenario.

All links use the line-of-sight 3GPP UMi street-canyon path loss with no
shadowing or fast fading, so every quantity here is a pure function of the
node positions and the radio configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MIN_DISTANCE_M = 1.0
VALID_SCS_HZ = (15e3, 30e3, 60e3, 120e3)


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    h: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x, self.y, self.h)):
            raise ValueError(f"non-finite coordinate in {self!r}")
        if self.h < 0:
            raise ValueError(f"antenna height must be >= 0, got {self.h}")


@dataclass(frozen=True)
class RadioConfig:
    carrier_freq: float = 3.6e9
    bandwidth: float = 20e6
    tx_power: float = 48.0
    noise_floor: float = -101.0
    subcarrier_spacing: float = 30e3
    n_prb: int = 51

    def __post_init__(self) -> None:
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.n_prb < 1:
            raise ValueError("n_prb must be >= 1")
        if self.subcarrier_spacing not in VALID_SCS_HZ:
            raise ValueError(
                f"subcarrier_spacing must be one of {VALID_SCS_HZ}, got {self.subcarrier_spacing}"
            )


@dataclass(frozen=True)
class LinkState:
    distance_3d: float
    path_loss: float
    rsrp: float
    sinr: float


def distance_3d(a: Position, b: Position) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.h - b.h) ** 2)


def umi_path_loss(d3d: float, fc: float) -> float:
    """LOS UMi path loss in dB for a 3-D distance in meters and carrier in Hz.

    Uses the single-slope expression ``32.4 + 21 log10(d) + 20 log10(fc_GHz)``
    for every distance; scenario distances stay below the LOS breakpoint.
    """
    if not d3d >= MIN_DISTANCE_M:
        raise ValueError(f"UMi path loss undefined below {MIN_DISTANCE_M} m (got {d3d})")
    fc_ghz = fc / 1e9
    if not 0.5 <= fc_ghz <= 100.0:
        raise ValueError(f"carrier {fc_ghz} GHz outside the 0.5-100 GHz model range")
    return 32.4 + 21.0 * math.log10(d3d) + 20.0 * math.log10(fc_ghz)


def rsrp(cfg: RadioConfig, path_loss: float) -> float:
    """Received power per resource element, in dBm."""
    return cfg.tx_power - 10.0 * math.log10(12 * cfg.n_prb) - path_loss


def sinr(rsrp_dbm: float, noise_dbm: float, interference_dbm: float | None = None) -> float:
    if interference_dbm is None or interference_dbm == -math.inf:
        return rsrp_dbm - noise_dbm
    denom_mw = 10.0 ** (noise_dbm / 10.0) + 10.0 ** (interference_dbm / 10.0)
    return rsrp_dbm - 10.0 * math.log10(denom_mw)


def link_state(
    cfg: RadioConfig,
    tx: Position,
    rx: Position,
    interference_dbm: float | None = None,
) -> LinkState:
    """Evaluate the full channel chain for one link.

    Distances below 1 m are clamped before path loss evaluation.
    """
    d = distance_3d(tx, rx)
    pl = umi_path_loss(max(d, MIN_DISTANCE_M), cfg.carrier_freq)
    p = rsrp(cfg, pl)
    return LinkState(distance_3d=d, path_loss=pl, rsrp=p, sinr=sinr(p, cfg.noise_floor, interference_dbm))
