"""Deterministic TTI-stepped scenario engine.

The Mobile Cell visits a sequence of quasi-static positions. At each one the
access links (MC -> UE) and the backhaul link (ON-gNB -> MC) are evaluated
once, then ``ttis_per_position`` TTIs of full-buffer downlink traffic are
simulated. Throughput is the access-delivered rate capped by the UE's share
of the backhaul capacity.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import arch as arch_mod
from .channel import LinkState, Position, RadioConfig, link_state
from .linkadapt import (
    DEFAULT_RE_PER_PRB,
    CqiTable,
    McsDecision,
    build_cqi_table,
    decide,
    mcs_from_cqi,
)
from .sched import SchedulerKind, TtiRecord, UeSchedState, run_tti

RESULT_COLUMNS = (
    "position_index",
    "ue_id",
    "distance_m",
    "rsrp_dbm",
    "sinr_db",
    "mean_cqi",
    "throughput_bps",
    "tti_share",
)
TRACE_COLUMNS = ("t", "ue_id", "cqi", "mcs", "tbs", "error", "delivered_bits")

PATH_START = Position(1000.0, 25.0, 15.0)
PATH_END = Position(1990.0, 1225.0, 15.0)
ON_GNB = Position(0.0, 0.0, 15.0)
UE_POSITIONS = (
    Position(1000.0, 0.0, 2.0),
    Position(1495.0, 625.0, 2.0),
    Position(2050.0, 1250.0, 2.0),
)
MC_HEIGHT_M = 15.0


class ScenarioMode(str, enum.Enum):
    SINGLE_UE = "single"
    ALL_UES = "all"


def mc_positions(start: Position, end: Position, n: int) -> list[Position]:
    """``n`` linearly spaced MC positions, endpoints included, at mast height."""
    if n < 2:
        raise ValueError(f"need at least 2 positions, got {n}")
    return [
        Position(
            start.x + (end.x - start.x) * k / (n - 1),
            start.y + (end.y - start.y) * k / (n - 1),
            MC_HEIGHT_M,
        )
        for k in range(n)
    ]


@dataclass(frozen=True)
class ScenarioConfig:
    arch_kind: arch_mod.ArchKind = arch_mod.ArchKind.GNB_DU_RELAY
    scheduler: SchedulerKind = field(default_factory=SchedulerKind)
    radio: RadioConfig = field(default_factory=RadioConfig)
    positions: tuple[Position, ...] = field(
        default_factory=lambda: tuple(mc_positions(PATH_START, PATH_END, 21))
    )
    ue_positions: tuple[Position, ...] = UE_POSITIONS
    on_gnb_position: Position = ON_GNB
    ttis_per_position: int = 10_000
    tti_duration: float = 0.5e-3
    seed: int = 1
    scenario_mode: ScenarioMode = ScenarioMode.SINGLE_UE
    max_retx: int = 4
    cqi_table: str = "64qam"
    gap_db: float = 10.0
    bler_slope_db: float = 0.5
    thresholds: tuple[tuple[int, float], ...] = ()
    re_per_prb: int = DEFAULT_RE_PER_PRB
    deterministic_bler: bool = False
    backhaul_cap: bool = True
    packet_bytes: int = 1500
    crt_limit: float = arch_mod.CRT_LIMIT_S

    def __post_init__(self) -> None:
        object.__setattr__(self, "arch_kind", arch_mod.ArchKind(self.arch_kind))
        object.__setattr__(self, "scenario_mode", ScenarioMode(self.scenario_mode))
        object.__setattr__(self, "positions", tuple(self.positions))
        object.__setattr__(self, "ue_positions", tuple(self.ue_positions))
        if not self.positions:
            raise ValueError("positions must be non-empty")
        if not self.ue_positions:
            raise ValueError("at least one UE is required")
        if self.ttis_per_position < 1:
            raise ValueError("ttis_per_position must be >= 1")
        if self.tti_duration <= 0:
            raise ValueError("tti_duration must be positive")
        if self.max_retx < 0:
            raise ValueError("max_retx must be >= 0")
        if self.packet_bytes < 1:
            raise ValueError("packet_bytes must be >= 1")
        if self.crt_limit <= 0:
            raise ValueError("crt_limit must be positive")

    def table(self) -> CqiTable:
        return build_cqi_table(
            self.cqi_table, self.gap_db, dict(self.thresholds), self.bler_slope_db
        )

    @property
    def ue_ids(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.ue_positions) + 1))


@dataclass(frozen=True)
class ResultRow:
    position_index: int
    ue_id: int
    distance_m: float
    rsrp_dbm: float
    sinr_db: float
    mean_cqi: float
    throughput_bps: float
    tti_share: float


def _decision(cfg: ScenarioConfig, table: CqiTable, link: LinkState) -> McsDecision:
    return decide(
        link.sinr, table, cfg.radio.n_prb, cfg.re_per_prb, cfg.deterministic_bler
    )


def backhaul_capacity(
    mc: Position,
    cfg: ScenarioConfig,
    table: CqiTable | None = None,
) -> float:
    """Raw achievable rate of the ON-gNB -> MC link over the full grid, bit/s."""
    table = table or cfg.table()
    link = link_state(cfg.radio, cfg.on_gnb_position, mc)
    return _decision(cfg, table, link).tbs / cfg.tti_duration


def backhaul_goodput(mc: Position, cfg: ScenarioConfig, table: CqiTable | None = None) -> float:
    """Backhaul capacity left for user IP packets after tunnel headers."""
    model = arch_mod.build_arch(cfg.arch_kind)
    ovh = arch_mod.overhead_bytes(model, arch_mod.Plane.UP, model.backhaul_index)
    return backhaul_capacity(mc, cfg, table) * cfg.packet_bytes / (cfg.packet_bytes + ovh)


def attachment_ok(cfg: ScenarioConfig) -> bool:
    return arch_mod.crt_check(arch_mod.build_arch(cfg.arch_kind), cfg.crt_limit).success


def _simulate(
    cfg: ScenarioConfig,
    table: CqiTable,
    ue_ids: Sequence[int],
    decisions: dict[int, McsDecision],
    rng: np.random.Generator,
    t0: int,
    trace: list[TtiRecord] | None,
) -> tuple[dict[int, int], dict[int, int]]:
    """Run the TTI loop for one set of active UEs.

    Returns delivered bits and scheduled-TTI counts per UE. The channel is
    static within a position, so a retransmitted block has the same size and
    error probability as a fresh one; ``max_retx`` therefore does not change
    the totals and no separate retransmission queue is kept.
    """
    # R(0): rate of CQI 1 on a single PRB
    r0 = mcs_from_cqi(1, table, 1, cfg.re_per_prb).tbs / cfg.tti_duration
    states = [UeSchedState(ue_id=u, R=r0) for u in ue_ids]
    delivered = {u: 0 for u in ue_ids}
    scheduled = {u: 0 for u in ue_ids}
    n = cfg.ttis_per_position
    draws = rng.random((n, len(ue_ids)))
    for k in range(n):
        row = draws[k]
        rec = run_tti(
            cfg.scheduler,
            states,
            decisions,
            {u: row[i] for i, u in enumerate(ue_ids)},
            t=t0 + k,
            tti=cfg.tti_duration,
        )
        if trace is not None:
            trace.append(rec)
        u = rec.ue_id
        if u is None:
            continue
        scheduled[u] += 1
        delivered[u] += rec.delivered_bits
    return delivered, scheduled


def run_position(
    cfg: ScenarioConfig,
    mc: Position,
    position_index: int = 0,
    trace: list[TtiRecord] | None = None,
) -> list[ResultRow]:
    """Simulate one MC position and return one row per UE."""
    table = cfg.table()
    links = {u: link_state(cfg.radio, mc, p) for u, p in zip(cfg.ue_ids, cfg.ue_positions)}
    decisions = {u: _decision(cfg, table, links[u]) for u in cfg.ue_ids}
    n = cfg.ttis_per_position
    elapsed = n * cfg.tti_duration
    t0 = position_index * n

    delivered: dict[int, int] = {}
    scheduled: dict[int, int] = {}
    if not attachment_ok(cfg):
        delivered = {u: 0 for u in cfg.ue_ids}
        scheduled = dict(delivered)
    elif cfg.scenario_mode is ScenarioMode.SINGLE_UE:
        for u in cfg.ue_ids:
            rng = np.random.default_rng([cfg.seed, position_index, u])
            d, s = _simulate(cfg, table, [u], {u: decisions[u]}, rng, t0, trace)
            delivered.update(d)
            scheduled.update(s)
    else:
        rng = np.random.default_rng([cfg.seed, position_index, 0])
        delivered, scheduled = _simulate(cfg, table, list(cfg.ue_ids), decisions, rng, t0, trace)

    access = {u: delivered[u] / elapsed for u in cfg.ue_ids}
    if cfg.backhaul_cap:
        bh = backhaul_goodput(mc, cfg, table)
        if cfg.scenario_mode is ScenarioMode.SINGLE_UE:
            # each UE runs alone and owns the whole backhaul
            tput = {u: min(access[u], bh) for u in cfg.ue_ids}
        else:
            total = sum(access.values())
            tput = {
                u: min(access[u], bh * access[u] / total) if total > 0 else 0.0
                for u in cfg.ue_ids
            }
    else:
        tput = access

    return [
        ResultRow(
            position_index=position_index,
            ue_id=u,
            distance_m=links[u].distance_3d,
            rsrp_dbm=links[u].rsrp,
            sinr_db=links[u].sinr,
            # channel is static within a position
            mean_cqi=float(decisions[u].cqi),
            throughput_bps=tput[u],
            tti_share=scheduled[u] / n,
        )
        for u in cfg.ue_ids
    ]


def run_scenario(
    cfg: ScenarioConfig, trace: list[TtiRecord] | None = None
) -> list[ResultRow]:
    rows: list[ResultRow] = []
    for i, mc in enumerate(cfg.positions):
        rows.extend(run_position(cfg, mc, i, trace))
    rows.sort(key=lambda r: (r.position_index, r.ue_id))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def results_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow(
            [
                r.position_index,
                r.ue_id,
                _fmt(r.distance_m),
                _fmt(r.rsrp_dbm),
                _fmt(r.sinr_db),
                _fmt(r.mean_cqi),
                _fmt(r.throughput_bps),
                _fmt(r.tti_share),
            ]
        )
    return buf.getvalue()


def write_trace(records: Iterable[TtiRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for rec in records:
        w.writerow(
            [
                rec.t,
                "" if rec.ue_id is None else rec.ue_id,
                rec.cqi,
                "" if rec.mcs_index is None else rec.mcs_index,
                rec.tbs,
                int(rec.error),
                rec.delivered_bits,
            ]
        )


def with_mode(cfg: ScenarioConfig, mode: ScenarioMode | str) -> ScenarioConfig:
    return replace(cfg, scenario_mode=ScenarioMode(mode))
