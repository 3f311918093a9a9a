"""Per-run reporting: node-level rows, trend bins, and file exports.

A run collapses to one RunSummary with three parts: the run identity
(scenario hash, scheme, seed, totals), one row per reward-eligible
vehicle (every tree member except the root), and aggregate statistics
(mean reward binned by stored time / forward count / distance, plus the
reward-vs-descendants rank correlation). Exports are deterministic
byte-for-byte for a given summary: JSON is written with sorted keys, CSV
with a fixed header, LF newlines, "." decimals, and repr floats.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from scipy.stats import spearmanr

from .engine import RunResult
from .incentives import IncentiveConfig, effective_distance
from .model import ValidationError
from .routing import descendant_counts, path_from_root

SCHEMA_VERSION = 1

ROW_FIELDS = (
    "vehicle_id",
    "reward",
    "contribution",
    "stored_time",
    "forward_count",
    "effective_distance",
    "receive_distance",
    "descendants",
    "depth",
)

# bin key -> (row attribute, default bin width)
BIN_KEYS: dict[str, tuple[str, float]] = {
    "time": ("stored_time", 10.0),
    "forwards": ("forward_count", 1.0),
    "distance": ("effective_distance", 50.0),
}


@dataclass(frozen=True)
class NodeRow:
    """One reward-eligible vehicle's outcome in one run."""

    vehicle_id: int
    reward: float
    contribution: float
    stored_time: float
    forward_count: int
    effective_distance: float
    receive_distance: float
    descendants: int
    depth: int


@dataclass(frozen=True)
class RunSummary:
    """Everything exported about one run."""

    scenario: dict
    rows: tuple[NodeRow, ...]
    aggregates: dict
    schema_version: int = SCHEMA_VERSION

    # identity shortcuts used all over reporting code
    @property
    def scenario_hash(self) -> str:
        return self.scenario["scenario_hash"]

    @property
    def scheme(self) -> str:
        return self.scenario["scheme"]

    @property
    def seed(self) -> int:
        return self.scenario["seed"]

    @property
    def source_id(self) -> int:
        return self.scenario["source_id"]

    @property
    def delivered(self) -> bool | None:
        return self.scenario["delivered"]

    @property
    def settle_time(self) -> float:
        return self.scenario["settle_time"]

    @property
    def reward_budget(self) -> float:
        return self.scenario["reward_budget"]

    @property
    def total_paid(self) -> float:
        return self.scenario["total_paid"]

    @property
    def shortfall(self) -> float:
        return self.scenario["shortfall"]

    @property
    def tree_size(self) -> int:
        return self.scenario["tree_size"]

    @property
    def link_count(self) -> int:
        return self.scenario["link_count"]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "scenario": dict(self.scenario),
            "rows": [asdict(r) for r in self.rows],
            "aggregates": self.aggregates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunSummary":
        return cls(
            scenario=d["scenario"],
            rows=tuple(NodeRow(**r) for r in d["rows"]),
            aggregates=d["aggregates"],
            schema_version=d["schema_version"],
        )


def bin_rewards(
    rows: list[NodeRow] | tuple[NodeRow, ...],
    key: str,
    bin_width: float | None = None,
) -> list[tuple[float, float, int]]:
    """Mean reward per occupied bin of ``key``, ascending by bin start.

    Keys: "time" (stored seconds, default 10 s bins), "forwards" (default
    width 1), "distance" (effective metres, default 50 m bins). Returns
    (bin_start, mean_reward, count) triples; empty bins are omitted.
    """
    if key not in BIN_KEYS:
        raise ValidationError(f"bin key must be one of {sorted(BIN_KEYS)}")
    attr, default_width = BIN_KEYS[key]
    width = default_width if bin_width is None else bin_width
    if width <= 0:
        raise ValidationError("bin width must be positive")
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for row in rows:
        idx = int(math.floor(getattr(row, attr) / width))
        sums[idx] = sums.get(idx, 0.0) + row.reward
        counts[idx] = counts.get(idx, 0) + 1
    return [
        (idx * width, sums[idx] / counts[idx], counts[idx]) for idx in sorted(sums)
    ]


def reward_vs_descendants(
    rows: list[NodeRow] | tuple[NodeRow, ...],
) -> tuple[list[tuple[int, float]], float | None]:
    """(descendants, reward) pairs and their Spearman rank correlation.

    The correlation is None when it is undefined: fewer than two rows or
    either variable constant.
    """
    pairs = [(row.descendants, row.reward) for row in rows]
    if len(pairs) < 2:
        return pairs, None
    desc = [p[0] for p in pairs]
    rew = [p[1] for p in pairs]
    if len(set(desc)) < 2 or len(set(rew)) < 2:
        return pairs, None
    rho = spearmanr(desc, rew).statistic
    if math.isnan(rho):
        return pairs, None
    return pairs, float(rho)


def build_summary(
    result: RunResult, incentive_cfg: IncentiveConfig, scenario_hash: str
) -> RunSummary:
    """Flatten a finished run into its reportable summary."""
    tree = result.tree
    desc = descendant_counts(tree)
    rows = []
    for rec in result.records:
        vid = rec.vehicle_id
        rows.append(
            NodeRow(
                vehicle_id=vid,
                reward=result.report.shares.get(vid, 0.0),
                contribution=rec.contribution,
                stored_time=rec.stored_time,
                forward_count=rec.forward_count,
                effective_distance=effective_distance(
                    rec.relay_distances,
                    rec.receive_distance,
                    incentive_cfg.distance_aggregate,
                ),
                receive_distance=rec.receive_distance,
                descendants=desc[vid],
                depth=len(path_from_root(tree, vid)),
            )
        )
    rows_t = tuple(rows)
    _, rho = reward_vs_descendants(rows_t)
    aggregates = {
        "reward_by_time": [list(b) for b in bin_rewards(rows_t, "time")],
        "reward_by_forwards": [list(b) for b in bin_rewards(rows_t, "forwards")],
        "reward_by_distance": [list(b) for b in bin_rewards(rows_t, "distance")],
        "spearman_reward_descendants": rho,
        "total_reward": math.fsum(r.reward for r in rows_t),
    }
    identity = {
        "scenario_hash": scenario_hash,
        "scheme": result.scheme.value,
        "seed": result.seed,
        "source_id": result.source_id,
        "destination_id": result.destination_id,
        "delivered": result.delivered,
        "settle_time": result.settle_time,
        "reward_budget": result.packet.reward_budget,
        "total_paid": result.report.total_paid,
        "overspend": result.report.overspend,
        "shortfall": result.report.shortfall,
        "paid_link_count": result.report.paid_link_count,
        "tree_size": len(tree.nodes()),
        "link_count": len(tree.links),
        "contact_events": result.contact_events,
    }
    return RunSummary(scenario=identity, rows=rows_t, aggregates=aggregates)


def summary_to_json(summary: RunSummary) -> str:
    return json.dumps(summary.to_dict(), sort_keys=True, indent=2) + "\n"


def write_summary_json(summary: RunSummary, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(summary_to_json(summary), encoding="utf-8", newline="\n")
    return path


def load_summary_json(path: str | Path) -> RunSummary:
    with open(path, encoding="utf-8") as fh:
        return RunSummary.from_dict(json.load(fh))


def rows_to_csv(rows: list[NodeRow] | tuple[NodeRow, ...]) -> str:
    """Node rows as CSV text: fixed header, LF newlines, repr floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for row in rows:
        writer.writerow([repr(getattr(row, f)) for f in ROW_FIELDS])
    return buf.getvalue()


def write_rows_csv(
    rows: list[NodeRow] | tuple[NodeRow, ...], path: str | Path
) -> Path:
    path = Path(path)
    path.write_text(rows_to_csv(rows), encoding="utf-8", newline="\n")
    return path


def load_rows_csv(path: str | Path) -> list[NodeRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            rows.append(
                NodeRow(
                    vehicle_id=int(raw["vehicle_id"]),
                    reward=float(raw["reward"]),
                    contribution=float(raw["contribution"]),
                    stored_time=float(raw["stored_time"]),
                    forward_count=int(raw["forward_count"]),
                    effective_distance=float(raw["effective_distance"]),
                    receive_distance=float(raw["receive_distance"]),
                    descendants=int(raw["descendants"]),
                    depth=int(raw["depth"]),
                )
            )
    return rows
