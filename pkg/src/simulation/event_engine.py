"""
Event Engine
Future event list for the fleet simulator, ordered by time and then by scheduling order
"""
import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class EventType(str, Enum):
    CALLER_ARRIVAL = "caller_arrival"
    LEG_END = "leg_end"
    REBALANCE_DISPATCH = "rebalance_dispatch"
    HORIZON = "horizon"


@dataclass(order=True)
class Event:
    time: float
    sequence: int
    type: EventType = field(compare=False)
    payload: Dict[str, Any] = field(default_factory=dict, compare=False)


class FutureEventList:
    """Min-heap of pending events; equal times pop in scheduling order"""

    def __init__(self):
        self._events: List[Event] = []
        self._counter = itertools.count()

    def schedule(self, time: float, event_type: EventType, **payload) -> Event:
        event = Event(time, next(self._counter), event_type, payload)
        heapq.heappush(self._events, event)
        return event

    def next_event(self) -> Optional[Event]:
        if self._events:
            return heapq.heappop(self._events)
        return None

    def peek(self) -> Optional[Event]:
        return self._events[0] if self._events else None

    def is_empty(self) -> bool:
        return not self._events

    def __len__(self) -> int:
        return len(self._events)
