"""CQI reporting, MCS/TBS selection and the transport block error model."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from pathlib import Path

# (modulation order, code rate x 1024) per CQI 1..15, 3GPP TS 38.214 CQI tables.
_CQI_TABLE_64QAM = [
    (2, 78), (2, 120), (2, 193), (2, 308), (2, 449), (2, 602),
    (4, 378), (4, 490), (4, 616),
    (6, 466), (6, 567), (6, 666), (6, 772), (6, 873), (6, 948),
]
_CQI_TABLE_256QAM = [
    (2, 78), (2, 193), (2, 449),
    (4, 378), (4, 490), (4, 616),
    (6, 466), (6, 567), (6, 666), (6, 772), (6, 873),
    (8, 711), (8, 797), (8, 885), (8, 948),
]
_CQI_TABLE_LOW_SE = [
    (2, 30), (2, 50), (2, 78), (2, 120), (2, 193), (2, 308), (2, 449), (2, 602),
    (4, 378), (4, 490), (4, 616),
    (6, 466), (6, 567), (6, 666), (6, 772),
]

TABLES = {
    "64qam": (_CQI_TABLE_64QAM, 0.1),
    "256qam": (_CQI_TABLE_256QAM, 0.1),
    "lowse": (_CQI_TABLE_LOW_SE, 0.00001),
}

DEFAULT_GAP_DB = 10.0
DEFAULT_SLOPE_DB = 0.5
DEFAULT_RE_PER_PRB = 144


@dataclass(frozen=True)
class CqiEntry:
    cqi: int
    modulation_order: int
    code_rate: float
    sinr_threshold: float | None

    @property
    def efficiency(self) -> float:
        return self.modulation_order * self.code_rate


@dataclass(frozen=True)
class CqiTable:
    entries: tuple[CqiEntry, ...]
    target_bler: float = 0.1
    slope_db: float = DEFAULT_SLOPE_DB
    _thresholds: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.entries) != 16:
            raise ValueError(f"CQI table needs 16 entries, got {len(self.entries)}")
        if self.target_bler not in (0.1, 0.00001):
            raise ValueError(f"target BLER must be 0.1 or 1e-5, got {self.target_bler}")
        if self.slope_db <= 0:
            raise ValueError("BLER slope must be positive")
        if self.entries[0].sinr_threshold is not None:
            raise ValueError("CQI 0 is out of range and takes no threshold")
        prev = -math.inf
        for k, e in enumerate(self.entries):
            if e.cqi != k:
                raise ValueError(f"entry {k} carries cqi {e.cqi}")
            if k == 0:
                continue
            if e.modulation_order not in (2, 4, 6, 8) or not 0 < e.code_rate < 1:
                raise ValueError(f"invalid modulation/code rate for cqi {k}")
            if e.sinr_threshold is None or not e.sinr_threshold > prev:
                raise ValueError(f"SINR thresholds must increase strictly (cqi {k})")
            prev = e.sinr_threshold
        object.__setattr__(
            self, "_thresholds", tuple(e.sinr_threshold for e in self.entries[1:])
        )

    def __getitem__(self, cqi: int) -> CqiEntry:
        return self.entries[cqi]

    @property
    def thresholds(self) -> tuple[float, ...]:
        return self._thresholds


@dataclass(frozen=True)
class McsDecision:
    """Per-TTI link adaptation outcome. ``mcs_index`` is None for no transmission."""

    mcs_index: int | None
    tbs: int
    expected_bler: float
    cqi: int = 0


def shannon_gap_threshold(efficiency: float, gap_db: float = DEFAULT_GAP_DB) -> float:
    return 10.0 * math.log10((2.0 ** efficiency - 1.0) * 10.0 ** (gap_db / 10.0))


def build_cqi_table(
    name: str = "64qam",
    gap_db: float = DEFAULT_GAP_DB,
    thresholds: dict[int, float] | None = None,
    slope_db: float = DEFAULT_SLOPE_DB,
) -> CqiTable:
    """Build one of the standard CQI tables with Shannon-gap SINR thresholds.

    ``thresholds`` maps cqi -> dB and overrides the generated values.
    """
    try:
        rows, target = TABLES[name]
    except KeyError:
        raise ValueError(f"unknown CQI table {name!r}; expected one of {sorted(TABLES)}") from None
    thresholds = thresholds or {}
    entries = [CqiEntry(0, 0, 0.0, None)]
    for k, (qm, rate1024) in enumerate(rows, start=1):
        rate = rate1024 / 1024
        th = thresholds.get(k, shannon_gap_threshold(qm * rate, gap_db))
        entries.append(CqiEntry(k, qm, rate, float(th)))
    return CqiTable(tuple(entries), target_bler=target, slope_db=slope_db)


def read_thresholds(path: str | Path) -> dict[int, float]:
    """Parse a ``k<TAB>sinr_threshold_dB`` override file."""
    out: dict[int, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'k<TAB>threshold', got {raw!r}")
        try:
            k, th = int(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unparseable entry {raw!r}") from None
        if not 1 <= k <= 15:
            raise ValueError(f"{path}:{lineno}: cqi {k} outside 1..15")
        out[k] = th
    return out


def cqi_from_sinr(sinr_db: float, table: CqiTable) -> int:
    # thresholds are inclusive lower bounds
    return bisect.bisect_right(table.thresholds, sinr_db)


def mcs_from_cqi(
    cqi: int, table: CqiTable, n_prb: int = 51, re_per_prb: int = DEFAULT_RE_PER_PRB
) -> McsDecision:
    """Map a reported CQI to the table row used for transmission.

    The MCS index is the CQI table row; cqi 0 means no transmission.
    ``expected_bler`` is the table target, i.e. the value at the threshold.
    """
    if not 0 <= cqi <= 15:
        raise ValueError(f"cqi must be in 0..15, got {cqi}")
    if cqi == 0:
        return McsDecision(mcs_index=None, tbs=0, expected_bler=1.0, cqi=0)
    return McsDecision(
        mcs_index=cqi,
        tbs=tbs(table[cqi], n_prb, re_per_prb),
        expected_bler=table.target_bler,
        cqi=cqi,
    )


def tbs(entry: CqiEntry, n_prb: int, re_per_prb: int = DEFAULT_RE_PER_PRB) -> int:
    if n_prb < 1 or re_per_prb < 1:
        raise ValueError("n_prb and re_per_prb must be >= 1")
    return math.floor(n_prb * re_per_prb * entry.modulation_order * entry.code_rate)


def bler(sinr_db: float, entry: CqiEntry, table: CqiTable) -> float:
    """Transport block error probability, logistic in dB.

    Anchored so that the value at the entry's SINR threshold is exactly the
    table's target BLER.
    """
    if entry.sinr_threshold is None:
        raise ValueError("cqi 0 has no BLER curve")
    t = table.target_bler
    z = (sinr_db - entry.sinr_threshold) / table.slope_db + math.log((1.0 - t) / t)
    if z > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


def decide(
    sinr_db: float,
    table: CqiTable,
    n_prb: int,
    re_per_prb: int = DEFAULT_RE_PER_PRB,
    deterministic_bler: bool = False,
) -> McsDecision:
    """Full chain SINR -> CQI -> MCS -> TBS, with the BLER at that SINR.

    With ``deterministic_bler`` a block fails iff the SINR is below the
    selected entry's threshold, which never happens with zero reporting delay.
    """
    cqi = cqi_from_sinr(sinr_db, table)
    base = mcs_from_cqi(cqi, table, n_prb, re_per_prb)
    if cqi == 0:
        return base
    entry = table[cqi]
    if deterministic_bler:
        p = 0.0 if sinr_db >= entry.sinr_threshold else 1.0
    else:
        p = bler(sinr_db, entry, table)
    return McsDecision(mcs_index=base.mcs_index, tbs=base.tbs, expected_bler=p, cqi=cqi)


def achievable_rate(decision: McsDecision, tti: float) -> float:
    if tti <= 0:
        raise ValueError("tti must be positive")
    return decision.tbs / tti
