"""Shared fixtures: hand-built trees, packets and records used across tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from vanetsim.model import ForwardingTree, Packet, TreeLink, WeightSet

REPO_ROOT = Path(__file__).resolve().parents[1]
BASELINE_YAML = REPO_ROOT / "scenarios" / "baseline.yaml"


def make_packet(
    budget: float = 100.0,
    deadline: float = 300.0,
    interest_radius: float = 500.0,
    weights: WeightSet | None = None,
    packet_id: str = "p0",
    source_id: int = 0,
) -> Packet:
    return Packet(
        id=packet_id,
        source_id=source_id,
        origin_position=(0.0, 0.0),
        created_at=0.0,
        reward_budget=budget,
        deadline=deadline,
        interest_radius=interest_radius,
        weights=weights or WeightSet(0.25, 0.5, 0.25),
    )


def make_link(
    from_id: int, to_id: int, timestamp: float = 0.0, dist: float = 10.0
) -> TreeLink:
    return TreeLink(
        from_id=from_id,
        to_id=to_id,
        timestamp=timestamp,
        from_position=(dist, 0.0),
        to_position=(dist + 1.0, 0.0),
        distance_from_origin=dist,
    )


def chain_tree(packet_id: str = "p0", root: int = 0, length: int = 3) -> ForwardingTree:
    """root -> root+1 -> ... -> root+length, one link per hop."""
    links = [
        make_link(root + i, root + i + 1, timestamp=float(i)) for i in range(length)
    ]
    return ForwardingTree(packet_id=packet_id, root=root, links=links)


@pytest.fixture
def packet() -> Packet:
    return make_packet()


@pytest.fixture
def baseline_path() -> Path:
    assert BASELINE_YAML.is_file()
    return BASELINE_YAML
