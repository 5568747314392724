"""Per-node and aggregate counters collected by a simulation run."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["NodeStats", "RunStats", "STATS_FIELDS", "write_stats_csv"]


@dataclass
class NodeStats:
    node_id: str
    offered: int = 0  # frames that entered the queue
    delivered: int = 0  # frames acknowledged
    failed: int = 0  # transmission attempts without an acknowledgement
    collided: int = 0  # failed attempts that overlapped another frame
    payload_bits: int = 0  # user payload bits delivered
    payload_airtime_us: float = 0.0  # channel time those bits occupied
    tx_airtime_us: float = 0.0  # all data airtime, failed attempts included
    access_delay_sum_us: int = 0  # head-of-line to acknowledgement, delivered only
    queued: int = 0  # frames still waiting at the end of the run

    @property
    def attempts(self) -> int:
        return self.delivered + self.failed

    @property
    def mean_access_delay_us(self) -> float:
        return self.access_delay_sum_us / self.delivered if self.delivered else 0.0

    def efficiency(self, elapsed_us: int) -> float:
        return self.payload_airtime_us / elapsed_us if elapsed_us else 0.0


@dataclass
class RunStats:
    elapsed_us: int
    nodes: dict[str, NodeStats] = field(default_factory=dict)
    busy_us: float = 0.0  # every transmission: data, acks, beacons
    ack_airtime_us: float = 0.0
    beacon_airtime_us: float = 0.0
    beacons: int = 0

    @property
    def idle_us(self) -> float:
        return self.elapsed_us - self.busy_us

    @property
    def offered(self) -> int:
        return sum(n.offered for n in self.nodes.values())

    @property
    def delivered(self) -> int:
        return sum(n.delivered for n in self.nodes.values())

    @property
    def failed(self) -> int:
        return sum(n.failed for n in self.nodes.values())

    @property
    def collided(self) -> int:
        return sum(n.collided for n in self.nodes.values())

    @property
    def payload_airtime_us(self) -> float:
        return sum(n.payload_airtime_us for n in self.nodes.values())

    @property
    def efficiency(self) -> float:
        return self.payload_airtime_us / self.elapsed_us if self.elapsed_us else 0.0

    def check_conservation(self) -> None:
        """Channel-busy time must equal the sum of all transmission
        airtimes, and no frame may be both delivered and still queued."""
        total = (
            sum(n.tx_airtime_us for n in self.nodes.values())
            + self.ack_airtime_us
            + self.beacon_airtime_us
        )
        if abs(total - self.busy_us) > 1e-6:
            raise AssertionError(f"busy {self.busy_us} != airtime sum {total}")
        for n in self.nodes.values():
            if n.delivered + n.queued != n.offered:
                raise AssertionError(
                    f"{n.node_id}: delivered {n.delivered} + queued {n.queued} "
                    f"!= offered {n.offered}"
                )


STATS_FIELDS = [
    "node",
    "offered",
    "delivered",
    "failed",
    "collided",
    "queued",
    "payload_bits",
    "payload_airtime_us",
    "tx_airtime_us",
    "mean_access_delay_us",
    "efficiency",
    "busy_us",
    "idle_us",
    "elapsed_us",
]


def write_stats_csv(stats: RunStats, out) -> None:
    """One row per node plus an aggregate row named `all`. Fixed decimal
    formatting keeps equal runs byte-identical."""
    own = isinstance(out, (str, Path))
    fh = open(out, "w", newline="") if own else out
    try:
        writer = csv.writer(fh)
        writer.writerow(STATS_FIELDS)
        for node_id in sorted(stats.nodes):
            n = stats.nodes[node_id]
            writer.writerow(
                [
                    node_id,
                    n.offered,
                    n.delivered,
                    n.failed,
                    n.collided,
                    n.queued,
                    n.payload_bits,
                    f"{n.payload_airtime_us:.1f}",
                    f"{n.tx_airtime_us:.1f}",
                    f"{n.mean_access_delay_us:.1f}",
                    f"{n.efficiency(stats.elapsed_us):.6f}",
                    "",
                    "",
                    "",
                ]
            )
        delivered = stats.delivered
        delay_sum = sum(n.access_delay_sum_us for n in stats.nodes.values())
        writer.writerow(
            [
                "all",
                stats.offered,
                delivered,
                stats.failed,
                stats.collided,
                sum(n.queued for n in stats.nodes.values()),
                sum(n.payload_bits for n in stats.nodes.values()),
                f"{stats.payload_airtime_us:.1f}",
                f"{sum(n.tx_airtime_us for n in stats.nodes.values()):.1f}",
                f"{delay_sum / delivered if delivered else 0.0:.1f}",
                f"{stats.efficiency:.6f}",
                f"{stats.busy_us:.1f}",
                f"{stats.idle_us:.1f}",
                stats.elapsed_us,
            ]
        )
    finally:
        if own:
            fh.close()
