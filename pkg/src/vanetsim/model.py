"""Shared domain types for the simulator and the reward accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

Vec2 = tuple[float, float]

WEIGHT_SUM_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when a config or domain object violates its invariants."""


class PayloadClass(Enum):
    SAFETY = "safety"
    ADDED_VALUE = "added_value"


class Scheme(Enum):
    BASIC_LINEAR = "basic_linear"
    FIRST_PROPOSAL = "first_proposal"
    SECOND_PROPOSAL = "second_proposal"
    PACKET_PURSE = "packet_purse"
    PACKET_TRADE = "packet_trade"


PROPORTIONAL_SCHEMES = frozenset(
    {Scheme.BASIC_LINEAR, Scheme.FIRST_PROPOSAL, Scheme.SECOND_PROPOSAL}
)


def distance(a: Vec2, b: Vec2) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


@dataclass(frozen=True)
class WeightSet:
    """Convex balance between the storage-time, forwarding and distance credits.

    The three weights must sum to 1; two-term metrics use (alpha, 1-alpha, 0).
    """

    time_weight: float
    forward_weight: float
    distance_weight: float

    def __post_init__(self) -> None:
        for name, w in (
            ("time_weight", self.time_weight),
            ("forward_weight", self.forward_weight),
            ("distance_weight", self.distance_weight),
        ):
            if not (0.0 <= w <= 1.0):
                raise ValidationError(f"{name} must be in [0, 1], got {w}")
        total = self.time_weight + self.forward_weight + self.distance_weight
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights must sum to 1 (got {total!r})")

    @classmethod
    def two_term(cls, alpha: float) -> "WeightSet":
        """Build (alpha, 1-alpha, 0) for the metrics without a distance credit."""
        if not (0.0 <= alpha <= 1.0):
            raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
        return cls(alpha, 1.0 - alpha, 0.0)

    @property
    def is_two_term(self) -> bool:
        return self.distance_weight == 0.0


@dataclass(frozen=True)
class Packet:
    """A sprayed message with its reward budget and validity limits."""

    id: str
    source_id: int
    origin_position: Vec2
    created_at: float
    reward_budget: float
    deadline: float
    interest_radius: float
    weights: WeightSet
    payload_class: PayloadClass = PayloadClass.ADDED_VALUE

    def __post_init__(self) -> None:
        if self.deadline <= 0:
            raise ValidationError(f"deadline must be > 0, got {self.deadline}")
        if self.interest_radius <= 0:
            raise ValidationError(
                f"interest_radius must be > 0, got {self.interest_radius}"
            )
        if self.reward_budget < 0:
            raise ValidationError(
                f"reward_budget must be >= 0, got {self.reward_budget}"
            )

    @property
    def deadline_time(self) -> float:
        return self.created_at + self.deadline


@dataclass
class CarryState:
    """Per-packet bookkeeping held by a vehicle that stores the packet."""

    packet_id: str
    received_at: float
    received_from: int | None  # None for the packet's own source
    receive_position: Vec2
    forward_count: int = 0
    relay_distances: list[float] = field(default_factory=list)


@dataclass
class Vehicle:
    """A mobile node: position/velocity, credit account and carried packets."""

    id: int
    position: Vec2
    velocity: Vec2 = (0.0, 0.0)
    credit_balance: float = 0.0
    carried: dict[str, CarryState] = field(default_factory=dict)


@dataclass(frozen=True)
class TreeLink:
    """One relay event: an encounter that copied the packet to a new node."""

    from_id: int
    to_id: int
    timestamp: float
    from_position: Vec2
    to_position: Vec2
    distance_from_origin: float  # origin -> forwarder position at relay time


@dataclass
class ForwardingTree:
    """Relay tree for one packet, rooted at the source vehicle.

    Every vehicle appears at most once: nodes that have already carried the
    packet never re-enter, so links arrive in strictly tree-growing order.
    """

    packet_id: str
    root: int
    links: list[TreeLink] = field(default_factory=list)

    def nodes(self) -> set[int]:
        return {self.root} | {link.to_id for link in self.links}

    def non_root_nodes(self) -> list[int]:
        return [link.to_id for link in self.links]

    def contains(self, vehicle_id: int) -> bool:
        return vehicle_id == self.root or any(
            link.to_id == vehicle_id for link in self.links
        )

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {}
        for link in self.links:
            kids.setdefault(link.from_id, []).append(link.to_id)
        return kids

    def parent(self, vehicle_id: int) -> int | None:
        for link in self.links:
            if link.to_id == vehicle_id:
                return link.from_id
        return None


@dataclass
class ContributionRecord:
    """One node's reported participation in disseminating one packet."""

    vehicle_id: int
    packet_id: str
    stored_time: float
    forward_count: int
    relay_distances: list[float]
    receive_distance: float  # origin -> receive position; used when f == 0
    contribution: float = 0.0


@dataclass
class SettlementReport:
    """Final per-node reward shares for one packet under one scheme."""

    packet_id: str
    scheme: Scheme
    total_contribution: float
    shares: dict[int, float]
    payer_id: int
    overspend: float = 0.0
    shortfall: float = 0.0  # purse scheme: demand beyond the loaded budget
    paid_link_count: int | None = None  # purse scheme only
    delivered: bool | None = None  # trade scheme only

    @property
    def total_paid(self) -> float:
        return math.fsum(self.shares.values())

    @property
    def token(self) -> str:
        """Replay-guard key: one application per (packet, scheme)."""
        return f"{self.packet_id}:{self.scheme.value}"
