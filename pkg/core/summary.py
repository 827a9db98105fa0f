"""Trace aggregation into run summaries and summary CSVs."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from types import MappingProxyType

import pandas as pd

from core.serialization import TraceEvent, TraceRecord, parse_trace

__all__ = [
    "CSV_COLUMNS",
    "KeyScheme",
    "RunSummary",
    "storage_estimate",
    "summarize",
    "summarize_records",
    "summary_frame",
    "write_summary_csv",
]

CSV_COLUMNS = (
    "nodes",
    "connections",
    "generated",
    "forwarded",
    "lost",
    "mean_delay",
    "max_delay",
    "mean_proc",
    "max_proc",
    "pol_share",
    "zkp_share",
    "storage_rsa",
    "storage_ecc",
)

_TX = (TraceEvent.SEND.value, TraceEvent.FORWARD.value)
_LOST = (TraceEvent.DROP.value, TraceEvent.EXPIRE.value)
_HANDLED = (TraceEvent.SEND.value, TraceEvent.FORWARD.value, TraceEvent.RECEIVE.value)
_COLUMNS = ("time", "event", "node", "size", "ch", "src", "created")


class KeyScheme(StrEnum):
    RSA1024 = "rsa1024"
    ECC160 = "ecc160"

    @property
    def key_bits(self) -> int:
        return 1024 if self is KeyScheme.RSA1024 else 160


def storage_estimate(n: int, scheme: KeyScheme | str) -> int:
    """Bits a node stores for ``n`` peers: one public key plus one signature each."""
    if n < 0:
        raise ValueError("Peer count cannot be negative")
    return n * KeyScheme(scheme).key_bits * 2


@dataclass(slots=True, frozen=True, kw_only=True)
class RunSummary:
    """Aggregates of one trace.

    Attributes:
        traffic_share: Channel -> fraction of transmitted bytes
        mean_processing: Per-node processing time, averaged over nodes that
            handled at least one packet
        final_n: Vertex count at the last graph record
    """

    nodes: int = 0
    connections: int = 0
    generated: int = 0
    forwarded: int = 0
    lost: int = 0
    mean_delay: float = 0.0
    max_delay: float = 0.0
    mean_processing: float = 0.0
    max_processing: float = 0.0
    traffic_share: Mapping[str, float] = field(default_factory=lambda: MappingProxyType({}))
    storage_bits_rsa: int = 0
    storage_bits_ecc: int = 0
    insertions: int = 0
    deletions: int = 0
    access_controls: int = 0
    final_n: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "traffic_share", MappingProxyType(dict(self.traffic_share)))
        if self.lost > self.generated:
            raise ValueError("Lost packets cannot exceed generated packets")

    def share(self, channel: str) -> float:
        return self.traffic_share.get(channel, 0.0)

    def csv_row(self) -> dict[str, float | int]:
        return {
            "nodes": self.nodes,
            "connections": self.connections,
            "generated": self.generated,
            "forwarded": self.forwarded,
            "lost": self.lost,
            "mean_delay": self.mean_delay,
            "max_delay": self.max_delay,
            "mean_proc": self.mean_processing,
            "max_proc": self.max_processing,
            "pol_share": self.share("pol"),
            "zkp_share": self.share("zkp"),
            "storage_rsa": self.storage_bits_rsa,
            "storage_ecc": self.storage_bits_ecc,
        }


def _frame(records: Iterable[TraceRecord]) -> pd.DataFrame:
    rows = []
    for r in records:
        extras = r.extras
        rows.append(
            {
                "time": r.time,
                "event": r.event.value,
                "node": r.node,
                "size": r.size,
                "ch": extras.get("ch", "-"),
                "src": extras.get("src"),
                "created": extras.get("created"),
                "status": extras.get("status"),
                "n": extras.get("n"),
                "proc_cost": extras.get("proc_cost"),
            }
        )
    return pd.DataFrame(rows, columns=[*_COLUMNS, "status", "n", "proc_cost"])


def summarize_records(records: Iterable[TraceRecord], nodes: int | None = None) -> RunSummary:
    """Aggregate parsed trace records; an empty trace gives an all-zero summary."""
    df = _frame(records)
    if df.empty:
        return RunSummary(nodes=nodes or 0)

    meta = df.loc[df["event"] == TraceEvent.META.value, "proc_cost"].dropna()
    proc_cost = float(meta.iloc[0]) if not meta.empty else 0.0

    tx = df[df["event"].isin(_TX)]
    recv = df[df["event"] == TraceEvent.RECEIVE.value]
    generated = len(tx)
    total_bytes = int(tx["size"].sum())
    shares: dict[str, float] = {}
    if total_bytes > 0:
        per_channel = tx.groupby("ch", sort=True)["size"].sum()
        shares = {str(ch): float(b) / total_bytes for ch, b in per_channel.items()}

    delays = recv["time"] - pd.to_numeric(recv["created"])
    handled = df[df["event"].isin(_HANDLED)].groupby("node").size() * proc_cost

    graph_n = df.loc[df["event"] == TraceEvent.GRAPH.value, "n"].dropna()
    final_n = int(graph_n.iloc[-1]) if not graph_n.empty else 0
    inserts = df[df["event"] == TraceEvent.INSERT.value]

    return RunSummary(
        nodes=nodes if nodes is not None else final_n,
        connections=len(recv[["src", "node"]].drop_duplicates()),
        generated=generated,
        forwarded=int((df["event"] == TraceEvent.FORWARD.value).sum()),
        lost=int(df["event"].isin(_LOST).sum()),
        mean_delay=float(delays.mean()) if not delays.empty else 0.0,
        max_delay=float(delays.max()) if not delays.empty else 0.0,
        mean_processing=float(handled.mean()) if not handled.empty else 0.0,
        max_processing=float(handled.max()) if not handled.empty else 0.0,
        traffic_share=shares,
        storage_bits_rsa=storage_estimate(final_n, KeyScheme.RSA1024),
        storage_bits_ecc=storage_estimate(final_n, KeyScheme.ECC160),
        insertions=int((inserts["status"] == "committed").sum()),
        deletions=int((df["event"] == TraceEvent.DELETE.value).sum()),
        access_controls=int((df["event"] == TraceEvent.ACCESS.value).sum()),
        final_n=final_n,
    )


def summarize(lines: Iterable[str], nodes: int | None = None) -> RunSummary:
    """Summarize trace lines.

    Raises:
        TraceCorruptError: a line does not parse, with its 1-based number
    """
    return summarize_records(parse_trace(lines), nodes)


def summary_frame(summaries: Iterable[RunSummary]) -> pd.DataFrame:
    """One CSV row per summary, sorted by node count (stable for ties)."""
    df = pd.DataFrame([s.csv_row() for s in summaries], columns=list(CSV_COLUMNS))
    return df.sort_values("nodes", kind="mergesort").reset_index(drop=True)


def write_summary_csv(summaries: Iterable[RunSummary], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    summary_frame(summaries).to_csv(path, index=False, float_format="%.6f")
    return path
