"""Text codecs for graphs, cycles and summaries.

Graphs use a plain edge list: a header ``graph n m stage``, a ``v`` line listing
every vertex, then one ``u v`` line per edge in ascending order. Cycles are a
single line of IDs in canonical order. Commitments hash the canonical byte
forms below. Trace records are one tab-separated line each:
``time event node packet-kind packet-id size extra``.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum, StrEnum
from pathlib import Path
from typing import Any

import numpy as np

from core.exceptions import ErrorContext, TraceCorruptError
from core.graph import HamiltonianCycle, NetworkGraph

try:
    import orjson as _orjson

    def _dumps_bytes(obj: Any, *, pretty: bool = False) -> bytes:
        opt = _orjson.OPT_SORT_KEYS
        if pretty:
            opt |= _orjson.OPT_INDENT_2
        return _orjson.dumps(obj, option=opt)

except Exception:  # pragma: no cover - exercised in fallback test
    import json as _json

    def _dumps_bytes(obj: Any, *, pretty: bool = False) -> bytes:
        return _json.dumps(
            obj, indent=2 if pretty else None, sort_keys=True, ensure_ascii=False
        ).encode("utf-8")


__all__ = [
    "TraceEvent",
    "TraceRecord",
    "canonical_cycle_bytes",
    "canonical_graph_bytes",
    "cycle_from_text",
    "cycle_to_text",
    "dumps",
    "graph_from_text",
    "graph_to_text",
    "parse_trace",
    "to_jsonable",
]


def graph_to_text(g: NetworkGraph) -> str:
    lines = [f"graph {g.n} {g.m} {g.stage}", " ".join(["v", *(str(v) for v in sorted(g.vertices))])]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> NetworkGraph:
    """Parse the edge-list format; the ``v`` line keeps isolated vertices."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("Empty graph text")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "graph":
        raise ValueError(f"Bad graph header: {lines[0]!r}")
    n, m, stage = (int(x) for x in header[1:])
    if len(lines) < 2 or lines[1].split()[0] != "v":
        raise ValueError("Missing vertex line after the header")
    vertices = frozenset(int(x) for x in lines[1].split()[1:])
    edges = []
    for ln in lines[2:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"Bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if len(vertices) != n or len(set(edges)) != m:
        raise ValueError(f"Header says n={n} m={m}, body has n={len(vertices)} m={len(edges)}")
    return NetworkGraph(stage=stage, vertices=vertices, edges=frozenset(edges))


def cycle_to_text(hc: HamiltonianCycle) -> str:
    return " ".join(str(v) for v in hc.order) + "\n"


def cycle_from_text(text: str) -> HamiltonianCycle:
    return HamiltonianCycle(tuple(int(x) for x in text.split()))


def canonical_graph_bytes(g: NetworkGraph) -> bytes:
    """Stage-free byte form: vertex list then sorted edge list."""
    vertices = " ".join(str(v) for v in sorted(g.vertices))
    edges = ";".join(f"{u},{v}" for u, v in sorted(g.edges))
    return f"V:{vertices}|E:{edges}".encode("ascii")


def canonical_cycle_bytes(hc: HamiltonianCycle) -> bytes:
    return ("C:" + " ".join(str(v) for v in hc.order)).encode("ascii")


def to_jsonable(obj: Any) -> Any:
    """Convert summaries and configs to JSON-safe structures.

    Dataclasses become dicts, sets become sorted lists, enums their value,
    numpy scalars plain numbers and paths strings.
    """
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    if obj is None or isinstance(obj, (str, bool, int, float)):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def dumps(obj: Any, *, pretty: bool = False) -> bytes:
    """Serialize to bytes using orjson if available, else stdlib json.

    Keys are sorted so output is byte-stable. The input should already be
    JSON-safe (use to_jsonable first for non-JSON types).
    """
    return _dumps_bytes(obj, pretty=pretty)


class TraceEvent(StrEnum):
    SEND = "send"
    FORWARD = "fwd"
    RECEIVE = "recv"
    DROP = "drop"
    EXPIRE = "expire"
    STATE = "state"
    GRAPH = "graph"
    INSERT = "insert"
    DELETE = "delete"
    ACCESS = "access"
    TERMINATE = "terminate"
    META = "meta"


@dataclass(slots=True, frozen=True, kw_only=True)
class TraceRecord:
    """One line of the trace stream.

    ``node`` is -1 for network-wide records; ``extra`` holds ordered
    ``key=value`` pairs (channel, sender, creation time, ...).
    """

    time: float
    event: TraceEvent
    node: int = -1
    packet_kind: str = "-"
    packet_id: int = -1
    size: int = 0
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "event", TraceEvent(self.event))
        object.__setattr__(self, "extra", tuple((str(k), str(v)) for k, v in self.extra))
        if self.size < 0:
            raise ValueError("Packet size cannot be negative")

    @property
    def extras(self) -> dict[str, str]:
        return dict(self.extra)

    def to_line(self) -> str:
        extra = ";".join(f"{k}={v}" for k, v in self.extra) or "-"
        return "\t".join(
            (
                f"{self.time:.6f}",
                self.event.value,
                str(self.node),
                self.packet_kind,
                str(self.packet_id),
                str(self.size),
                extra,
            )
        )

    @classmethod
    def from_line(cls, line: str, lineno: int | None = None) -> TraceRecord:
        """Parse one trace line.

        Raises:
            TraceCorruptError: wrong column count or unparsable field
        """
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 7:
            raise TraceCorruptError(
                f"Expected 7 columns, got {len(cols)}",
                context=ErrorContext(line=lineno),
                line=lineno,
            )
        try:
            extra: tuple[tuple[str, str], ...] = ()
            if cols[6] != "-":
                extra = tuple(
                    (k, v) for k, _, v in (item.partition("=") for item in cols[6].split(";"))
                )
            return cls(
                time=float(cols[0]),
                event=TraceEvent(cols[1]),
                node=int(cols[2]),
                packet_kind=cols[3],
                packet_id=int(cols[4]),
                size=int(cols[5]),
                extra=extra,
            )
        except ValueError as e:
            raise TraceCorruptError(
                f"Unparsable trace record: {e}", context=ErrorContext(line=lineno), line=lineno
            ) from e


def parse_trace(lines: Iterable[str]) -> list[TraceRecord]:
    """Parse a trace stream, skipping blank lines; line numbers are 1-based."""
    return [
        TraceRecord.from_line(line, lineno)
        for lineno, line in enumerate(lines, start=1)
        if line.strip()
    ]
