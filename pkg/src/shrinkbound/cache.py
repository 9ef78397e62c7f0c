from __future__ import annotations

import hashlib
import json
from collections import OrderedDict
from threading import Lock
from typing import Any

from .config import load_config


class LRUCache:
    """In-memory LRU cache for fitted heterogeneity posteriors.

    A fit holds ~1000 nodes, so even a few hundred entries stay small.
    """

    def __init__(self, max_entries: int = 64):
        self._cache: OrderedDict[str, Any] = OrderedDict()
        self._max = max_entries
        self._lock = Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Any | None:
        with self._lock:
            if key not in self._cache:
                self.misses += 1
                return None
            self._cache.move_to_end(key)
            self.hits += 1
            return self._cache[key]

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
            self._cache[key] = value
            while len(self._cache) > self._max:
                self._cache.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)


def cache_key(prefix: str, *parts: Any) -> str:
    data = json.dumps(parts, sort_keys=True, default=float)
    h = hashlib.sha256(data.encode()).hexdigest()[:16]
    return f"{prefix}-{h}"


posterior_cache = LRUCache(max_entries=load_config().cache_entries)
