"""
Cache Manager
In-process cache for design evaluations and converged steady states, used
for exact reuse and for warm-start guesses of nearby designs
"""
import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from ...config.config_manager import CacheConfig


class CacheType(str, Enum):
    """Types of cached content"""
    EVALUATION = "evaluation"
    STEADY_STATE = "steady_state"


@dataclass
class CacheEntry:
    """A cached entry with access statistics"""
    key: str
    cache_type: CacheType
    data: Any
    created_at: int
    access_count: int = 0
    last_accessed: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


class CacheManager:
    """LRU store of evaluation outcomes and seeker-count solutions, keyed by design"""

    def __init__(self, config: Optional[CacheConfig] = None):
        self.cache_config = config or CacheConfig()
        self.logger = logging.getLogger(__name__)

        self.entries: Dict[str, CacheEntry] = {}
        self._clock = 0

        self.stats = {
            "hits": 0,
            "misses": 0,
            "evictions": 0,
            "guess_queries": 0,
        }

    @property
    def enabled(self) -> bool:
        return self.cache_config.enabled and self.cache_config.max_entries > 0

    def get(self, key: str, cache_type: CacheType, default: Any = None) -> Any:
        """Retrieve item from cache"""
        if not self.enabled:
            return default
        entry = self.entries.get(self._build_key(key, cache_type))
        if entry is None:
            self.stats["misses"] += 1
            return default
        entry.access_count += 1
        entry.last_accessed = self._tick()
        self.stats["hits"] += 1
        return entry.data

    def set(
        self,
        key: str,
        data: Any,
        cache_type: CacheType,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> bool:
        """Store item; the least recently used entry goes first when full"""
        if not self.enabled:
            return False
        cache_key = self._build_key(key, cache_type)
        if cache_key not in self.entries:
            while len(self.entries) >= self.cache_config.max_entries:
                self._evict_lru()
        self.entries[cache_key] = CacheEntry(
            key=cache_key,
            cache_type=cache_type,
            data=data,
            created_at=self._tick(),
            metadata=metadata or {},
        )
        return True

    def delete(self, key: str, cache_type: CacheType) -> bool:
        return self.entries.pop(self._build_key(key, cache_type), None) is not None

    def clear(self, cache_type: Optional[CacheType] = None) -> int:
        doomed = [k for k, e in self.entries.items() if cache_type is None or e.cache_type == cache_type]
        for k in doomed:
            del self.entries[k]
        return len(doomed)

    def remember_solution(self, key: str, design_vector: np.ndarray, seeker_vector: np.ndarray):
        """Keep a converged x for later solves of nearby designs"""
        self.set(
            key,
            np.array(seeker_vector, dtype=float),
            CacheType.STEADY_STATE,
            metadata={"design_vector": np.array(design_vector, dtype=float)},
        )

    def nearest_solutions(self, design_vector: np.ndarray, count: Optional[int] = None) -> List[np.ndarray]:
        """Stored solutions ordered by distance between their designs and ``design_vector``"""
        if not self.enabled:
            return []
        count = self.cache_config.guess_neighbors if count is None else count
        self.stats["guess_queries"] += 1
        design_vector = np.asarray(design_vector, dtype=float)
        ranked = []
        for entry in self.entries.values():
            if entry.cache_type != CacheType.STEADY_STATE:
                continue
            stored = entry.metadata.get("design_vector")
            if stored is None or stored.shape != design_vector.shape:
                continue
            ranked.append((float(np.linalg.norm(stored - design_vector)), entry.created_at, entry.data))
        ranked.sort(key=lambda item: (item[0], item[1]))
        return [data.copy() for _, _, data in ranked[:count]]

    def get_cache_stats(self) -> Dict[str, Any]:
        total_requests = self.stats["hits"] + self.stats["misses"]
        by_type = {t.value: 0 for t in CacheType}
        for entry in self.entries.values():
            by_type[entry.cache_type.value] += 1
        return {
            "performance": {
                "hit_rate": (self.stats["hits"] / total_requests) if total_requests else 0.0,
                "total_hits": self.stats["hits"],
                "total_misses": self.stats["misses"],
                "total_requests": total_requests,
            },
            "entries": {
                "count": len(self.entries),
                "max_entries": self.cache_config.max_entries,
                "by_type": by_type,
            },
            "operations": {
                "evictions": self.stats["evictions"],
                "guess_queries": self.stats["guess_queries"],
            },
        }

    @staticmethod
    def create_design_key(scenario_digest: str, design_digest: str) -> str:
        """Cache key for a (scenario, design) pair"""
        return hashlib.sha256(f"{scenario_digest}:{design_digest}".encode()).hexdigest()[:32]

    def _build_key(self, key: str, cache_type: CacheType) -> str:
        """Build full cache key with type prefix"""
        return f"{cache_type.value}:{key}"

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def _evict_lru(self):
        if not self.entries:
            return
        lru_key = min(
            self.entries,
            key=lambda k: self.entries[k].last_accessed or self.entries[k].created_at,
        )
        del self.entries[lru_key]
        self.stats["evictions"] += 1
