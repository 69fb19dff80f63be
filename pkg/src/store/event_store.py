"""
In-memory event stores with ordered key indexes and an optional append-only NDJSON log
"""
import bisect
import json
import logging
import os
import threading
import numpy as np
from src.core.datatypes import SpectrumEvent
from src.core.errors import DuplicateId, MalformedRecord, QueryError
from src.store.geo import haversine_m_many, latitude_band
from src.store.queries import QUERYABLE_FIELDS, LocationQuery, RangeQuery, parse_query
from typing import Dict, List, NamedTuple, Optional, Set, Union

TRANSMISSIONS = 'Transmissions'
MERGED_TX = 'MergedTx'
STORE_NAMES = (TRANSMISSIONS, MERGED_TX)


class StoredEvent(NamedTuple):
    seq: int
    event: SpectrumEvent


class KeyIndex:
    """
    Keys in ascending order with the sequence numbers holding them, equal keys ordered by sequence
    """
    def __init__(self):
        self.keys = []
        self.seqs = []

    def add(self, key: float, seq: int):
        i = bisect.bisect_right(self.keys, key)
        self.keys.insert(i, key)
        self.seqs.insert(i, seq)

    def greater_than(self, value: float) -> List[int]:
        return self.seqs[bisect.bisect_right(self.keys, value):]

    def less_than(self, value: float) -> List[int]:
        return self.seqs[:bisect.bisect_left(self.keys, value)]

    def not_equal(self, value: float) -> List[int]:
        lo = bisect.bisect_left(self.keys, value)
        hi = bisect.bisect_right(self.keys, value)
        return self.seqs[:lo] + self.seqs[hi:]

    def between(self, lo: float, hi: float) -> List[int]:
        """
        Sequence numbers with lo <= key <= hi
        """
        return self.seqs[bisect.bisect_left(self.keys, lo):bisect.bisect_right(self.keys, hi)]

    def __len__(self) -> int:
        return len(self.keys)


class EventStore:
    def __init__(self, name: str, path: Optional[str] = None):
        self.name = name
        self.path = path
        self._events = []  # type: List[SpectrumEvent]
        self._seq_of_id = {}  # type: Dict[int, int]
        self._indexes = {field: KeyIndex() for field in QUERYABLE_FIELDS}
        # Latitude-ordered index of located events
        self._geo = KeyIndex()
        # Single writer, many readers
        self._lock = threading.RLock()
        self._log = None
        if path is not None:
            self._reload()
            self._log = open(path, 'a')

    def _reload(self):
        if not os.path.exists(self.path):
            return
        with open(self.path, 'r') as f:
            for line_no, line in enumerate(f):
                if line.strip() == '':
                    continue
                try:
                    event = SpectrumEvent.from_record(json.loads(line))
                except (ValueError, KeyError, TypeError) as e:
                    raise MalformedRecord("{0}: unreadable event record ({1})".format(self.path, e),
                                          line_no) from None
                self._index(event)
        logging.info("Reloaded {0} events into store {1} from {2}".format(len(self._events), self.name,
                                                                          self.path))

    def _index(self, event: SpectrumEvent) -> int:
        if event.id in self._seq_of_id:
            raise DuplicateId("store {0} already holds event id {1}".format(self.name, event.id))
        seq = len(self._events)
        self._events.append(event)
        self._seq_of_id[event.id] = seq
        for field, key_of in QUERYABLE_FIELDS.items():
            self._indexes[field].add(key_of(event), seq)
        if event.location is not None:
            self._geo.add(event.location[0], seq)
        return seq

    def insert(self, event: SpectrumEvent) -> int:
        """
        :return: insertion sequence number
        """
        with self._lock:
            seq = self._index(event)
            if self._log is not None:
                self._log.write(json.dumps(event.to_record(), separators=(',', ':')) + '\n')
                self._log.flush()
            return seq

    def close(self):
        with self._lock:
            if self._log is not None:
                self._log.close()
                self._log = None

    def __len__(self) -> int:
        return len(self._events)

    def get(self, event_id: int) -> Optional[StoredEvent]:
        with self._lock:
            seq = self._seq_of_id.get(event_id)
            return None if seq is None else StoredEvent(seq, self._events[seq])

    def all(self) -> List[SpectrumEvent]:
        with self._lock:
            return list(self._events)

    def index_ids(self, field: str) -> Set[int]:
        """
        Event ids reachable through one key index
        """
        with self._lock:
            return {self._events[seq].id for seq in self._indexes[field].seqs}

    def _candidates(self, predicate) -> List[int]:
        index = self._indexes[predicate.field]
        if predicate.op == '$gt':
            return index.greater_than(predicate.value)
        if predicate.op == '$lt':
            return index.less_than(predicate.value)
        return index.not_equal(predicate.value)

    def query(self, q: RangeQuery) -> List[SpectrumEvent]:
        """
        Events satisfying every predicate, in insertion order
        """
        with self._lock:
            selected = None
            for predicate in q.predicates:
                seqs = set(self._candidates(predicate))
                selected = seqs if selected is None else selected & seqs
                if not selected:
                    return []
            return [self._events[seq] for seq in sorted(selected)]

    def query_location(self, q: LocationQuery) -> List[SpectrumEvent]:
        """
        Located events ordered by ascending great-circle distance, ties by insertion order
        Range predicates of the query drop events before the radius or the limit is applied
        """
        with self._lock:
            if q.radius_m is not None:
                lo, hi = latitude_band(q.latitude, q.radius_m)
                seqs = np.array(sorted(self._geo.between(lo, hi)), dtype=np.int64)
            else:
                seqs = np.array(sorted(self._geo.seqs), dtype=np.int64)
            if q.predicates and seqs.size:
                keep = np.array([q.matches(self._events[int(s)]) for s in seqs], dtype=bool)
                seqs = seqs[keep]
            if seqs.size == 0:
                return []
            lats = np.array([self._events[s].location[0] for s in seqs], dtype=np.float64)
            lons = np.array([self._events[s].location[1] for s in seqs], dtype=np.float64)
            dist = haversine_m_many(q.latitude, q.longitude, lats, lons)
            order = np.lexsort((seqs, dist))
            if q.radius_m is not None:
                order = order[dist[order] <= q.radius_m]
            else:
                order = order[:q.limit]
            return [self._events[int(seqs[i])] for i in order]


class SpectrumDatabase:
    """
    The two named stores: frequency grouped transmissions and time grouped (merged) events
    """
    def __init__(self, directory: Optional[str] = None):
        self.directory = directory
        if directory is not None:
            os.makedirs(directory, exist_ok=True)
        self.stores = {}
        for name in STORE_NAMES:
            path = None if directory is None else os.path.join(directory, name + '.ndjson')
            self.stores[name] = EventStore(name, path)

    def store(self, name: str) -> EventStore:
        if name not in self.stores:
            raise QueryError("unknown store {0!r}, expected one of {1}".format(name, list(STORE_NAMES)))
        return self.stores[name]

    @property
    def transmissions(self) -> EventStore:
        return self.stores[TRANSMISSIONS]

    @property
    def merged(self) -> EventStore:
        return self.stores[MERGED_TX]

    def execute(self, document: Union[str, bytes, Dict]) -> List[SpectrumEvent]:
        store_name, q = parse_query(document)
        store = self.store(store_name)
        if isinstance(q, LocationQuery):
            return store.query_location(q)
        return store.query(q)

    def close(self):
        for store in self.stores.values():
            store.close()


def insert(store: EventStore, event: SpectrumEvent) -> int:
    return store.insert(event)


def query(store: EventStore, q: RangeQuery) -> List[SpectrumEvent]:
    return store.query(q)


def query_location(store: EventStore, q: LocationQuery) -> List[SpectrumEvent]:
    return store.query_location(q)
