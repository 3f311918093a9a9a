"""Discrete-tick simulation driver.

One run: place a fleet, inject a single packet at a source vehicle at
t=0, then per tick move everyone, detect radio contacts, and hand the
packet across contacts epidemically. Settlement fires once per run, at
the packet deadline, at end of run, or at first delivery when the run is
configured for delivery-triggered settlement (always the case for the
packet-trade scheme). Everything is driven by two child RNG streams of
the run seed, one for mobility and one for the engine's own draws, so a
(scenario, seed) pair fully determines the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .incentives import IncentiveConfig
from .kernels import contact_pairs
from .mobility import MobilityConfig, RandomWaypointModel
from .model import (
    PROPORTIONAL_SCHEMES,
    ContributionRecord,
    ForwardingTree,
    Packet,
    PayloadClass,
    Scheme,
    SettlementReport,
    ValidationError,
    Vehicle,
)
from .routing import PacketTransit, collect_records, handle_encounter, start_transit
from .settlement import (
    apply_settlement,
    settle_packet_purse,
    settle_packet_trade,
    settle_proportional,
)


@dataclass(frozen=True)
class PacketSpec:
    """Parameters of the single packet a run injects."""

    reward_budget: float = 100.0
    deadline: float = 300.0
    interest_radius: float = 500.0
    payload_class: PayloadClass = PayloadClass.SAFETY
    packet_id: str = "p0"


@dataclass(frozen=True)
class EngineConfig:
    radio_range: float = 100.0
    duration: float = 600.0
    source_id: int | None = None  # None: drawn from the engine RNG stream
    destination_id: int | None = None  # None: drawn when a destination is needed
    settle_on_delivery: bool = False
    hop_price: float = 1.0

    def __post_init__(self) -> None:
        if self.radio_range <= 0:
            raise ValidationError("radio_range must be positive")
        if self.duration < 0:
            raise ValidationError("duration must be non-negative")
        if self.hop_price <= 0:
            raise ValidationError("hop_price must be positive")


@dataclass
class RunResult:
    """Everything a finished run produced."""

    seed: int
    scheme: Scheme
    source_id: int
    destination_id: int | None
    packet: Packet
    tree: ForwardingTree
    records: list[ContributionRecord]
    report: SettlementReport
    vehicles: dict[int, Vehicle]
    settle_time: float
    final_time: float
    ticks_run: int
    contact_events: int
    delivered: bool | None


def contacts_at(model: RandomWaypointModel, radio_range: float) -> list[tuple[int, int]]:
    """Vehicle-id pairs currently in radio range, sorted."""
    a, b = contact_pairs(model.x, model.y, radio_range)
    return [(int(i), int(j)) for i, j in zip(a, b)]


def _settle(
    transit: PacketTransit,
    source_id: int,
    destination_id: int | None,
    incentives: IncentiveConfig,
    engine_cfg: EngineConfig,
    settle_time: float,
) -> tuple[list[ContributionRecord], SettlementReport]:
    packet = transit.packet
    records = collect_records(transit, settle_time)
    scheme = incentives.scheme
    if scheme in PROPORTIONAL_SCHEMES:
        incentives.score_records(records, packet)
        report = settle_proportional(packet, source_id, records, scheme)
    elif scheme is Scheme.PACKET_PURSE:
        report = settle_packet_purse(packet, source_id, transit.tree, engine_cfg.hop_price)
    elif scheme is Scheme.PACKET_TRADE:
        if destination_id is None:
            raise ValidationError("packet trade needs a destination vehicle")
        report = settle_packet_trade(
            packet, source_id, transit.tree, destination_id, engine_cfg.hop_price
        )
    else:  # pragma: no cover - enum is exhaustive
        raise ValidationError(f"unhandled scheme {scheme}")
    return records, report


def run(
    mobility_cfg: MobilityConfig,
    engine_cfg: EngineConfig,
    incentive_cfg: IncentiveConfig,
    packet_spec: PacketSpec,
    seed: int,
) -> RunResult:
    """Simulate one packet's lifetime and settle its rewards."""
    n = mobility_cfg.vehicle_count
    mob_seq, eng_seq = np.random.SeedSequence(seed).spawn(2)
    rng_engine = np.random.default_rng(eng_seq)
    model = RandomWaypointModel(mobility_cfg, np.random.default_rng(mob_seq))

    source = engine_cfg.source_id
    if source is None:
        forbidden = engine_cfg.destination_id
        candidates = [i for i in range(n) if i != forbidden]
        if not candidates:
            raise ValidationError("no vehicle left to act as the source")
        source = candidates[int(rng_engine.integers(0, len(candidates)))]
    elif not 0 <= source < n:
        raise ValidationError(f"source_id {source} outside fleet of {n}")

    scheme = incentive_cfg.scheme
    settle_on_delivery = engine_cfg.settle_on_delivery or scheme is Scheme.PACKET_TRADE
    destination = engine_cfg.destination_id
    if destination is None and (settle_on_delivery or scheme is Scheme.PACKET_TRADE):
        others = [i for i in range(n) if i != source]
        if not others:
            raise ValidationError("delivery settlement needs at least 2 vehicles")
        destination = others[int(rng_engine.integers(0, len(others)))]
    if destination is not None and not 0 <= destination < n:
        raise ValidationError(f"destination_id {destination} outside fleet of {n}")
    if destination is not None and destination == source:
        raise ValidationError("destination must differ from the source")

    packet = Packet(
        id=packet_spec.packet_id,
        source_id=source,
        origin_position=model.position_of(source),
        created_at=0.0,
        reward_budget=packet_spec.reward_budget,
        deadline=packet_spec.deadline,
        interest_radius=packet_spec.interest_radius,
        weights=incentive_cfg.weights,
        payload_class=packet_spec.payload_class,
    )
    transit = start_transit(packet, source)
    vehicles = {i: Vehicle(id=i, position=model.position_of(i)) for i in range(n)}

    contact_events = 0
    settle_time: float | None = None
    records: list[ContributionRecord] = []
    report: SettlementReport | None = None
    applied: set[str] = set()

    def do_settle(at: float) -> None:
        nonlocal records, report, settle_time
        transit.active = False
        settle_time = at
        records, report = _settle(
            transit, source, destination, incentive_cfg, engine_cfg, at
        )
        apply_settlement(report, vehicles, applied)

    def route_tick(now: float) -> None:
        nonlocal contact_events
        pairs = contacts_at(model, engine_cfg.radio_range)
        contact_events += len(pairs)
        for a, b in pairs:
            link = handle_encounter(
                transit, a, b, model.position_of(a), model.position_of(b), now
            )
            if link is None:
                continue
            if link.to_id == destination and transit.delivered_at is None:
                transit.delivered_to = destination
                transit.delivered_at = now
                if settle_on_delivery:
                    do_settle(now)
                    return

    ticks_total = int(round(engine_cfg.duration / mobility_cfg.tick_seconds))
    route_tick(0.0)
    ticks_run = 0
    for _ in range(ticks_total):
        model.step()
        ticks_run += 1
        now = model.now
        if report is None and now > packet.deadline_time:
            do_settle(packet.deadline_time)
        if transit.active and now <= packet.deadline_time:
            route_tick(now)

    if report is None:
        do_settle(min(model.now, packet.deadline_time))

    for i, veh in vehicles.items():
        veh.position = model.position_of(i)
        veh.velocity = (float(model.vx[i]), float(model.vy[i]))

    delivered: bool | None = None
    if destination is not None:
        delivered = transit.delivered_at is not None

    assert report is not None and settle_time is not None
    return RunResult(
        seed=seed,
        scheme=scheme,
        source_id=source,
        destination_id=destination,
        packet=packet,
        tree=transit.tree,
        records=records,
        report=report,
        vehicles=vehicles,
        settle_time=settle_time,
        final_time=model.now,
        ticks_run=ticks_run,
        contact_events=contact_events,
        delivered=delivered,
    )
