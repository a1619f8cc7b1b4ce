"""Dynamic placement over the available / preempting zone partition."""

from collections import Counter
from typing import Dict, Iterable

from ..errors import ZoneLookupError
from ..models.policy import ZoneBook


def _require_zone(book: ZoneBook, zone: str):
    if zone not in book.available and zone not in book.preempting:
        raise ZoneLookupError(f"zone '{zone}' is not enabled")


def handle_preemption(book: ZoneBook, zone: str) -> ZoneBook:
    """Move `zone` to the preempting list; merge everything back when fewer than two remain."""
    _require_zone(book, zone)
    available = book.available
    preempting = book.preempting
    if zone in available:
        available = tuple(z for z in available if z != zone)
        preempting = preempting + (zone,)
    if len(available) < 2:
        available = available + preempting
        preempting = ()
    return ZoneBook(available=available, preempting=preempting)


def handle_launch(book: ZoneBook, zone: str) -> ZoneBook:
    """A replica became ready in `zone`: it is available again."""
    _require_zone(book, zone)
    if zone in book.available:
        return book
    return ZoneBook(
        available=book.available + (zone,),
        preempting=tuple(z for z in book.preempting if z != zone),
    )


def select_next_zone(book: ZoneBook, current: Iterable[str], costs: Dict[str, float]) -> str:
    """Zone for the next spot launch.

    Unoccupied zones of Z_A win over occupied ones, then cheaper, then the
    lexicographically smaller id. With more replicas than zones the least
    occupied zones are preferred.
    """
    if not book.available:
        raise ZoneLookupError("no available zone")
    occupancy = Counter(current)
    for zone in book.available:
        if zone not in costs:
            raise ZoneLookupError(f"no cost known for zone '{zone}'")
    return min(book.available, key=lambda zone: (occupancy[zone], costs[zone], zone))
