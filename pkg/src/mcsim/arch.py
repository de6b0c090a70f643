"""Static protocol-stack models of the three Mobile Cell architectures.

Each architecture is a chain of path segments from the UE to the core
function that terminates the plane. A segment lists every header present on
the wire or air interface there, outermost first, so nested tunnels appear
once per nesting level.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

DEFAULT_HEADER_BYTES: dict[str, int] = {
    "IP": 20,
    "UDP": 8,
    "GTP-U": 8,
    "SDAP": 1,
    "PDCP": 3,
    "RLC": 3,
    "MAC": 3,
    "BAP": 2,
    # 12-byte common header plus one 16-byte DATA chunk header
    "SCTP": 28,
    # message bodies are not modeled
    "F1AP": 0,
    "NGAP": 0,
    "RRC": 0,
    "NAS": 0,
}

RADIO_LATENCY_S = 2e-3
WIRE_LATENCY_S = 0.5e-3
PROCESSING_S = 2e-3
CRT_LIMIT_S = 0.064

COMPARISON_COLUMNS = (
    "arch",
    "radio_hops",
    "wire_hops",
    "tunnel_depth",
    "up_overhead_bytes",
    "cp_overhead_bytes",
    "cp_rtt_ms",
    "onboard_upf",
    "roaming_free",
    "backhaul_agnostic",
    "e2e_qos",
)


class ArchKind(str, enum.Enum):
    MOBILE_GNB = "MobileGnb"
    GNB_DU_RELAY = "GnbDuRelay"
    IAB_NODE = "IabNode"


class Plane(str, enum.Enum):
    CP = "CP"
    UP = "UP"


class Medium(str, enum.Enum):
    RADIO = "radio"
    WIRE = "wire"


@dataclass(frozen=True)
class LayerSpec:
    name: str
    header_bytes: int
    plane: str = "both"

    def __post_init__(self) -> None:
        if self.header_bytes < 0:
            raise ValueError(f"{self.name}: header size must be >= 0")


@dataclass(frozen=True)
class PathSegment:
    from_node: str
    to_node: str
    medium: Medium
    one_way_latency: float
    stack: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        if self.one_way_latency < 0:
            raise ValueError(f"{self.label}: negative latency")

    @property
    def label(self) -> str:
        return f"{self.from_node}->{self.to_node}"

    @property
    def overhead_bytes(self) -> int:
        return sum(layer.header_bytes for layer in self.stack)


@dataclass(frozen=True)
class Capabilities:
    onboard_upf: bool
    roaming_free: bool
    backhaul_agnostic: bool
    e2e_qos: bool


# Table-1 style properties; static per architecture.
CAPABILITIES = {
    ArchKind.MOBILE_GNB: Capabilities(onboard_upf=True, roaming_free=True, backhaul_agnostic=True, e2e_qos=False),
    ArchKind.GNB_DU_RELAY: Capabilities(onboard_upf=False, roaming_free=True, backhaul_agnostic=True, e2e_qos=False),
    ArchKind.IAB_NODE: Capabilities(onboard_upf=False, roaming_free=False, backhaul_agnostic=False, e2e_qos=True),
}


@dataclass(frozen=True)
class ArchModel:
    kind: ArchKind
    up_path: tuple[PathSegment, ...]
    cp_path: tuple[PathSegment, ...]
    rrc_node: str
    backhaul_index: int
    tunnel_depth_backhaul: int
    capabilities: Capabilities = field(repr=False)

    def __post_init__(self) -> None:
        if self.tunnel_depth_backhaul < 1:
            raise ValueError("tunnel_depth_backhaul must be >= 1")
        for path in (self.up_path, self.cp_path):
            if not path:
                raise ValueError("paths must be non-empty")
            for seg in path:
                if not seg.stack:
                    raise ValueError(f"{seg.label}: empty stack")
            for a, b in zip(path, path[1:]):
                if a.to_node != b.from_node:
                    raise ValueError(f"disconnected path at {a.label} / {b.label}")
        if self.rrc_node not in {s.to_node for s in self.cp_path}:
            raise ValueError(f"RRC terminator {self.rrc_node} not on CP path")

    def path(self, plane: Plane | str) -> tuple[PathSegment, ...]:
        return self.up_path if Plane(plane) is Plane.UP else self.cp_path

    def cp_path_to_rrc(self) -> tuple[PathSegment, ...]:
        out = []
        for seg in self.cp_path:
            out.append(seg)
            if seg.to_node == self.rrc_node:
                break
        return tuple(out)


# Stacks per architecture as (from, to, medium, [layers outermost first]).
_RAN_UP = ["MAC", "RLC", "PDCP", "SDAP"]
_RAN_CP = ["MAC", "RLC", "PDCP", "RRC", "NAS"]
_PDU_SESSION = ["MAC", "RLC", "PDCP", "SDAP"]
_GTP = ["IP", "UDP", "GTP-U"]
_N2 = ["IP", "SCTP", "NGAP"]
_F1C = ["IP", "SCTP", "F1AP"]

_R, _W = Medium.RADIO, Medium.WIRE

_TOPOLOGY = {
    ArchKind.MOBILE_GNB: dict(
        up=[
            ("UE", "MC-gNB", _R, _RAN_UP),
            ("MC-gNB", "ON-gNB", _R, _PDU_SESSION + _GTP),
            ("ON-gNB", "ON-UPF", _W, _GTP + _GTP),
            ("ON-UPF", "HN-UPF", _W, _GTP),
        ],
        cp=[
            ("UE", "MC-gNB", _R, _RAN_CP),
            ("MC-gNB", "ON-gNB", _R, _PDU_SESSION + _N2),
            ("ON-gNB", "ON-UPF", _W, _GTP + _N2),
            ("ON-UPF", "HN-AMF", _W, _N2),
        ],
        rrc="MC-gNB",
        backhaul=1,
        tunnels=2,
    ),
    ArchKind.GNB_DU_RELAY: dict(
        up=[
            ("UE", "MC-DU", _R, ["MAC", "RLC"]),
            ("MC-DU", "ON-gNB", _R, _PDU_SESSION + _GTP),
            ("ON-gNB", "ON-UPF", _W, _GTP + _GTP),
            ("ON-UPF", "MC-CU", _W, _GTP),
            ("MC-CU", "HN-UPF", _W, _GTP),
        ],
        cp=[
            ("UE", "MC-DU", _R, ["MAC", "RLC"]),
            ("MC-DU", "ON-gNB", _R, _PDU_SESSION + _F1C),
            ("ON-gNB", "ON-UPF", _W, _GTP + _F1C),
            ("ON-UPF", "MC-CU", _W, _F1C),
            ("MC-CU", "HN-AMF", _W, _N2),
        ],
        rrc="MC-CU",
        backhaul=1,
        tunnels=2,
    ),
    ArchKind.IAB_NODE: dict(
        up=[
            ("UE", "MC-DU", _R, ["MAC", "RLC"]),
            ("MC-DU", "IAB-donor-DU", _R, ["MAC", "RLC", "BAP"] + _GTP),
            ("IAB-donor-DU", "IAB-donor-CU", _W, _GTP),
            ("IAB-donor-CU", "UPF", _W, _GTP),
        ],
        cp=[
            ("UE", "MC-DU", _R, ["MAC", "RLC"]),
            ("MC-DU", "IAB-donor-DU", _R, ["MAC", "RLC", "BAP"] + _F1C),
            ("IAB-donor-DU", "IAB-donor-CU", _W, _F1C),
            ("IAB-donor-CU", "AMF", _W, _N2),
        ],
        rrc="IAB-donor-CU",
        backhaul=1,
        tunnels=1,
    ),
}


def build_arch(
    kind: ArchKind | str,
    latencies: Mapping[str, float] | None = None,
    headers: Mapping[str, int] | None = None,
) -> ArchModel:
    """Build the canonical segment/stack structure for one architecture.

    ``latencies`` (seconds) may hold ``radio`` / ``wire`` defaults, a
    ``backhaul`` value for the radio backhaul hop, or per-segment entries keyed
    ``FROM->TO``; the most specific key wins. ``headers`` overrides the
    default header-size table.
    """
    try:
        kind = ArchKind(kind)
    except ValueError:
        raise ValueError(f"unknown architecture {kind!r}") from None
    lat = dict(latencies or {})
    hdr = {**DEFAULT_HEADER_BYTES, **(headers or {})}
    topo = _TOPOLOGY[kind]

    def segments(rows, plane: Plane) -> tuple[PathSegment, ...]:
        out = []
        for i, (a, b, medium, layers) in enumerate(rows):
            base = lat.get(medium.value, RADIO_LATENCY_S if medium is _R else WIRE_LATENCY_S)
            if i == topo["backhaul"]:
                base = lat.get("backhaul", base)
            one_way = lat.get(f"{a}->{b}", base)
            stack = tuple(LayerSpec(n, hdr[n], plane.value) for n in layers)
            out.append(PathSegment(a, b, medium, one_way, stack))
        return tuple(out)

    return ArchModel(
        kind=kind,
        up_path=segments(topo["up"], Plane.UP),
        cp_path=segments(topo["cp"], Plane.CP),
        rrc_node=topo["rrc"],
        backhaul_index=topo["backhaul"],
        tunnel_depth_backhaul=topo["tunnels"],
        capabilities=CAPABILITIES[kind],
    )


def overhead_bytes(arch: ArchModel, plane: Plane | str, segment_index: int) -> int:
    path = arch.path(plane)
    if not 0 <= segment_index < len(path):
        raise IndexError(f"segment {segment_index} out of range for {len(path)}-segment path")
    return path[segment_index].overhead_bytes


def _processing_at(node: str, processing: float | Mapping[str, float]) -> float:
    if isinstance(processing, Mapping):
        return processing.get(node, 0.0)
    return processing


def path_rtt(
    arch: ArchModel,
    plane: Plane | str = Plane.CP,
    processing: float | Mapping[str, float] = PROCESSING_S,
) -> float:
    """Round trip from the UE to the RRC terminator (CP) or the UP anchor.

    Processing is charged at every node the request reaches, excluding the
    UE; ``processing`` is a per-node mapping or one value for all nodes.
    """
    segs = arch.cp_path_to_rrc() if Plane(plane) is Plane.CP else arch.up_path
    one_way = 0.0
    for seg in segs:
        proc = _processing_at(seg.to_node, processing)
        if seg.one_way_latency < 0 or proc < 0:
            raise ValueError("latencies and processing delays must be >= 0")
        one_way += seg.one_way_latency + proc
    return 2.0 * one_way


@dataclass(frozen=True)
class AttachmentOutcome:
    rtt: float
    crt_limit: float
    success: bool


def crt_check(
    arch: ArchModel,
    crt_limit: float = CRT_LIMIT_S,
    processing: float | Mapping[str, float] = PROCESSING_S,
) -> AttachmentOutcome:
    if crt_limit <= 0:
        raise ValueError("crt_limit must be positive")
    rtt = path_rtt(arch, Plane.CP, processing)
    # the bound is inclusive
    return AttachmentOutcome(rtt=rtt, crt_limit=crt_limit, success=rtt <= crt_limit)


def compare_table(
    archs: Iterable[ArchModel],
    processing: float | Mapping[str, float] = PROCESSING_S,
) -> list[dict[str, object]]:
    archs = list(archs)
    if not archs:
        raise ValueError("compare_table needs at least one architecture")
    rows = []
    for a in archs:
        caps = a.capabilities
        rows.append(
            {
                "arch": a.kind.value,
                "radio_hops": sum(s.medium is Medium.RADIO for s in a.up_path),
                "wire_hops": sum(s.medium is Medium.WIRE for s in a.up_path),
                "tunnel_depth": a.tunnel_depth_backhaul,
                "up_overhead_bytes": overhead_bytes(a, Plane.UP, a.backhaul_index),
                "cp_overhead_bytes": overhead_bytes(a, Plane.CP, a.backhaul_index),
                "cp_rtt_ms": path_rtt(a, Plane.CP, processing) * 1e3,
                "onboard_upf": caps.onboard_upf,
                "roaming_free": caps.roaming_free,
                "backhaul_agnostic": caps.backhaul_agnostic,
                "e2e_qos": caps.e2e_qos,
            }
        )
    return rows


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def comparison_csv(rows: list[dict[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COMPARISON_COLUMNS])
    return buf.getvalue()


def _read_tab_file(path: str | Path, what: str) -> list[tuple[int, str, str]]:
    rows = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '{what}', got {raw!r}")
        rows.append((lineno, parts[0].strip(), parts[1].strip()))
    return rows


def read_header_table(path: str | Path) -> dict[str, int]:
    """Parse a ``LAYER<TAB>bytes`` header-size override file."""
    out = {}
    for lineno, name, value in _read_tab_file(path, "LAYER<TAB>bytes"):
        if name not in DEFAULT_HEADER_BYTES:
            raise ValueError(f"{path}:{lineno}: unknown layer {name!r}")
        try:
            n = int(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: header size for {name} is not an integer: {value!r}") from None
        if n < 0:
            raise ValueError(f"{path}:{lineno}: negative header size for {name}")
        out[name] = n
    return out


def read_latency_table(path: str | Path) -> dict[str, float]:
    """Parse a ``KEY<TAB>milliseconds`` latency override file.

    KEY is ``radio``, ``wire``, ``backhaul``, ``processing`` or ``FROM->TO``.
    Values are returned in seconds.
    """
    out = {}
    for lineno, key, value in _read_tab_file(path, "KEY<TAB>milliseconds"):
        if key not in ("radio", "wire", "backhaul", "processing") and "->" not in key:
            raise ValueError(f"{path}:{lineno}: unknown latency key {key!r}")
        try:
            ms = float(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: latency for {key} is not a number: {value!r}") from None
        if ms < 0:
            raise ValueError(f"{path}:{lineno}: negative latency for {key}")
        out[key] = ms / 1e3
    return out
