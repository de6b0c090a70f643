"""TTI-level downlink schedulers (MT, BET, PF) and the moving-average
throughput estimator they share.

One UE receives the whole band each TTI. ``R`` is updated for every UE on
every TTI, with ``r = 0`` for UEs that were not scheduled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .linkadapt import McsDecision

DEFAULT_ALPHA = 0.01


class Policy(str, enum.Enum):
    MT = "mt"
    BET = "bet"
    PF = "pf"


@dataclass(frozen=True)
class SchedulerKind:
    policy: Policy = Policy.PF
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", Policy(self.policy))
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")

    @classmethod
    def from_window(cls, policy: Policy | str, w: float) -> "SchedulerKind":
        """Window form of the average: alpha = 1 / w."""
        if w < 1:
            raise ValueError(f"window must be >= 1 TTI, got {w}")
        return cls(Policy(policy), 1.0 / w)


@dataclass
class UeSchedState:
    ue_id: int
    d: float = 0.0
    r: float = 0.0
    R: float = 1.0
    last_scheduled: int = -1


@dataclass(frozen=True)
class TtiRecord:
    t: int
    ue_id: int | None
    cqi: int
    mcs_index: int | None
    tbs: int
    error: bool
    delivered_bits: int


def priority(kind: SchedulerKind, state: UeSchedState) -> float:
    """Scheduling metric; ``state.R`` must be the average entering this TTI.

    An average of exactly zero (reachable only with alpha = 1) gives BET and
    PF infinite priority; a negative average is a contract violation.
    """
    if kind.policy is Policy.MT:
        return state.d
    if state.R < 0 or math.isnan(state.R):
        raise ValueError(f"UE {state.ue_id}: average throughput must be >= 0, got {state.R}")
    if kind.policy is Policy.BET:
        return math.inf if state.R == 0 else 1.0 / state.R
    if state.R == 0:
        return math.inf if state.d > 0 else 0.0
    return state.d / state.R


def select_ue(kind: SchedulerKind, states: Sequence[UeSchedState]) -> int:
    """Return the ue_id with the highest priority.

    Exact ties go to the least recently scheduled UE, then the lowest id.
    """
    if not states:
        raise ValueError("select_ue needs at least one UE")
    best = max(states, key=lambda s: (priority(kind, s), -s.last_scheduled, -s.ue_id))
    return best.ue_id


def update_avg(R_prev: float, r: float, alpha: float) -> float:
    return (1.0 - alpha) * R_prev + alpha * r


def run_tti(
    kind: SchedulerKind,
    states: Sequence[UeSchedState],
    decisions: Mapping[int, McsDecision],
    error_draws: Mapping[int, float],
    t: int = 0,
    tti: float = 0.5e-3,
) -> TtiRecord:
    """Advance the scheduler by one TTI, mutating ``states`` in place.

    ``error_draws`` holds one uniform [0, 1) variate per UE; the scheduled
    block fails when its draw falls below the decision's expected BLER.
    UEs reporting cqi 0 are never scheduled.
    """
    for s in states:
        s.d = decisions[s.ue_id].tbs / tti
    eligible = [s for s in states if decisions[s.ue_id].mcs_index is not None]
    chosen = select_ue(kind, eligible) if eligible else None

    record = TtiRecord(t, None, 0, None, 0, False, 0)
    for s in states:
        if s.ue_id == chosen:
            dec = decisions[s.ue_id]
            error = error_draws[s.ue_id] < dec.expected_bler
            delivered = 0 if error else dec.tbs
            s.r = delivered / tti
            s.last_scheduled = t
            record = TtiRecord(t, s.ue_id, dec.cqi, dec.mcs_index, dec.tbs, error, delivered)
        else:
            s.r = 0.0
        s.R = update_avg(s.R, s.r, kind.alpha)
    return record
