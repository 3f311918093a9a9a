"""Turning a packet's relay history into credit transfers.

Three settlement styles:

* proportional: the source's fixed reward budget is split across the
  non-source carriers in proportion to their contribution scores. Zero
  total contribution means nothing is paid and the budget stays put.
* packet purse: the source loads the budget onto the packet and each
  handoff drains a fixed hop price from it, in handoff order, until the
  purse runs dry. Later handoffs earn nothing.
* packet trade: the packet travels for free and the destination, once
  reached, pays the hop price to every vehicle that sold the packet
  onward along its delivery path. The source is never debited.

``apply_settlement`` posts a report to vehicle balances exactly once.
"""

from __future__ import annotations

import math

from .model import (
    PROPORTIONAL_SCHEMES,
    ContributionRecord,
    ForwardingTree,
    Packet,
    Scheme,
    SettlementReport,
    ValidationError,
    Vehicle,
)
from .routing import path_from_root

# tolerates float noise in budget/price division when counting fundable hops
_FUND_EPS = 1e-9


def settle_proportional(
    packet: Packet,
    source_id: int,
    records: list[ContributionRecord],
    scheme: Scheme,
) -> SettlementReport:
    """Split the reward budget by contribution share.

    Records must already be scored. The paid total never exceeds the
    budget: rounding overshoot is shaved off the largest share.
    """
    if scheme not in PROPORTIONAL_SCHEMES:
        raise ValidationError(f"{scheme.value} is not a proportional scheme")
    for rec in records:
        if rec.contribution < 0:
            raise ValidationError(
                f"negative contribution for vehicle {rec.vehicle_id}"
            )
    total_c = math.fsum(rec.contribution for rec in records)
    budget = packet.reward_budget

    if total_c <= 0.0 or budget == 0.0:
        shares = {rec.vehicle_id: 0.0 for rec in records}
        return SettlementReport(
            packet_id=packet.id,
            scheme=scheme,
            total_contribution=total_c,
            shares=shares,
            payer_id=source_id,
        )

    shares = {rec.vehicle_id: budget * (rec.contribution / total_c) for rec in records}
    paid = math.fsum(shares.values())
    guard = 0
    while paid > budget:
        # overshoot is a few ulps at most; shave it off the largest share
        largest = max(shares, key=lambda vid: (shares[vid], -vid))
        shares[largest] = max(0.0, shares[largest] - (paid - budget))
        paid = math.fsum(shares.values())
        guard += 1
        if guard > 10:  # pragma: no cover - would indicate broken float logic
            raise AssertionError("budget shaving failed to converge")

    return SettlementReport(
        packet_id=packet.id,
        scheme=scheme,
        total_contribution=total_c,
        shares=shares,
        payer_id=source_id,
        overspend=max(0.0, paid - budget),
    )


def fundable_hops(budget: float, hop_price: float) -> int:
    """How many hop payments a purse of ``budget`` can cover."""
    if hop_price <= 0:
        raise ValidationError("hop_price must be positive")
    if budget <= 0:
        return 0
    return int(math.floor(budget / hop_price + _FUND_EPS))


def settle_packet_purse(
    packet: Packet,
    source_id: int,
    tree: ForwardingTree,
    hop_price: float,
) -> SettlementReport:
    """Pay handoffs from the packet's purse in the order they happened.

    Each funded link pays its sender one hop price. Once the purse cannot
    cover the next hop, every remaining link goes unpaid: the packet is
    economically dead from that point on, which is the scheme's known
    failure mode. ``shortfall`` reports the unfunded demand.
    """
    if tree.root != source_id:
        raise ValidationError("purse settlement must be rooted at the source")
    links = tree.links
    affordable = fundable_hops(packet.reward_budget, hop_price)
    paid_links = min(len(links), affordable)

    # every funded link pays its sender, the source included: its own
    # handoffs are a wash once the payer debit is applied
    shares: dict[int, float] = {vid: 0.0 for vid in tree.nodes()}
    for link in links[:paid_links]:
        shares[link.from_id] += hop_price

    demand = len(links) * hop_price
    shortfall = max(0.0, demand - packet.reward_budget)
    return SettlementReport(
        packet_id=packet.id,
        scheme=Scheme.PACKET_PURSE,
        total_contribution=float(len(links)),
        shares=shares,
        payer_id=source_id,
        shortfall=shortfall,
        paid_link_count=paid_links,
    )


def settle_packet_trade(
    packet: Packet,
    source_id: int,
    tree: ForwardingTree,
    destination_id: int,
    hop_price: float,
) -> SettlementReport:
    """Destination pays each seller on its delivery path one hop price.

    If the packet never reached the destination nobody pays anything.
    The source is never debited; at most it earns for the first sale.
    """
    if hop_price <= 0:
        raise ValidationError("hop_price must be positive")
    if tree.root != source_id:
        raise ValidationError("trade settlement must be rooted at the source")

    shares: dict[int, float] = {vid: 0.0 for vid in tree.nodes()}
    shares.setdefault(source_id, 0.0)
    delivered = tree.contains(destination_id) and destination_id != source_id
    if delivered:
        for link in path_from_root(tree, destination_id):
            shares[link.from_id] += hop_price
    shares.pop(destination_id, None)

    return SettlementReport(
        packet_id=packet.id,
        scheme=Scheme.PACKET_TRADE,
        total_contribution=0.0,
        shares=shares,
        payer_id=destination_id,
        delivered=delivered,
    )


def apply_settlement(
    report: SettlementReport,
    vehicles: dict[int, Vehicle],
    applied_tokens: set[str],
) -> None:
    """Post a report to vehicle balances, refusing replays.

    Credits every share, debits the payer by the paid total, and records
    the report token so the same settlement cannot be applied twice.
    """
    if report.token in applied_tokens:
        raise ValidationError(f"settlement {report.token} was already applied")
    for vid, amount in sorted(report.shares.items()):
        if amount != 0.0:
            vehicles[vid].credit_balance += amount
    total = report.total_paid
    if total != 0.0:
        vehicles[report.payer_id].credit_balance -= total
    applied_tokens.add(report.token)
