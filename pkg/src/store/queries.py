"""
Query documents over the event stores

Range query, conjunction of per-field predicates:
    {"$from": "MergedTx", "tStart": {"$gt": 10, "$lt": 30}, "channelHz": {"$ne": 868.3e6}}
Location query, either by radius in metres or by record count:
    {"$from": "MergedTx", "location": {"$location": [46.05, 14.50], "$radius": 1000}}
    {"$from": "MergedTx", "location": {"$location": [46.05, 14.50], "$limit": 5}}
Range predicates next to a location constraint filter the located events before the radius or count applies:
    {"location": {"$location": [46.05, 14.50], "$limit": 5}, "tStart": {"$gt": 10}}
"""
from dataclasses import dataclass, replace
import json
import math
from src.core.datatypes import SpectrumEvent
from src.core.errors import QueryError, UnknownField
from src.store.geo import validate_position
from typing import Any, Callable, Dict, Optional, Tuple, Union

RANGE_OPERATORS = ('$ne', '$gt', '$lt')
DEFAULT_STORE = 'MergedTx'

# Document field name -> key extractor
QUERYABLE_FIELDS = {
    'id': lambda e: e.id,
    'tStart': lambda e: e.t_start,
    'tStop': lambda e: e.t_stop,
    'durationMs': lambda e: e.duration_ms,
    'fStartBin': lambda e: e.f_start_bin,
    'fStopBin': lambda e: e.f_stop_bin,
    'fStartHz': lambda e: e.f_start_hz,
    'fStopHz': lambda e: e.f_stop_hz,
    'channelHz': lambda e: e.channel_hz,
    'meanPowerDbm': lambda e: e.mean_power_dbm,
    'cellCount': lambda e: e.cell_count,
}  # type: Dict[str, Callable[[SpectrumEvent], float]]

# Short names of the key-indexed fields
FIELD_ALIASES = {'time': 'tStart', 'channel': 'channelHz'}


def resolve_field(name: str) -> str:
    name = FIELD_ALIASES.get(name, name)
    if name not in QUERYABLE_FIELDS:
        raise UnknownField("no queryable field named {0!r}".format(name))
    return name


@dataclass(frozen=True)
class Predicate:
    field: str
    op: str
    value: float

    def __call__(self, event: SpectrumEvent) -> bool:
        key = QUERYABLE_FIELDS[self.field](event)
        if self.op == '$ne':
            return key != self.value
        if self.op == '$gt':
            return key > self.value
        return key < self.value


@dataclass(frozen=True)
class RangeQuery:
    predicates: Tuple[Predicate, ...]

    def __post_init__(self):
        if not self.predicates:
            raise QueryError("a range query needs at least one predicate")
        for predicate in self.predicates:
            if predicate.field not in QUERYABLE_FIELDS:
                raise UnknownField("no queryable field named {0!r}".format(predicate.field))
            if predicate.op not in RANGE_OPERATORS:
                raise QueryError("unsupported operator {0!r}".format(predicate.op))

    def matches(self, event: SpectrumEvent) -> bool:
        return all(predicate(event) for predicate in self.predicates)


@dataclass(frozen=True)
class LocationQuery:
    latitude: float
    longitude: float
    radius_m: Optional[float] = None
    limit: Optional[int] = None
    predicates: Tuple[Predicate, ...] = ()

    def __post_init__(self):
        if self.predicates:
            RangeQuery(self.predicates)
        if (self.radius_m is None) == (self.limit is None):
            raise QueryError("a location query takes exactly one of $radius and $limit")
        if self.radius_m is not None and not self.radius_m > 0:
            raise QueryError("$radius must be > 0, got {0}".format(self.radius_m))
        if self.limit is not None and self.limit < 1:
            raise QueryError("$limit must be >= 1, got {0}".format(self.limit))
        try:
            validate_position(self.latitude, self.longitude)
        except ValueError as e:
            raise QueryError(str(e)) from None

    def matches(self, event: SpectrumEvent) -> bool:
        return all(predicate(event) for predicate in self.predicates)

    @property
    def center(self) -> Tuple[float, float]:
        return self.latitude, self.longitude


def _operand(field: str, op: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise QueryError("{0}.{1} needs a finite number, got {2!r}".format(field, op, value))
    return value


def _location_query(clause: Dict[str, Any]) -> LocationQuery:
    unknown = set(clause) - {'$location', '$radius', '$limit'}
    if unknown:
        raise QueryError("unsupported location operators {0}".format(sorted(unknown)))
    center = clause.get('$location')
    if not isinstance(center, (list, tuple)) or len(center) != 2:
        raise QueryError("$location must be [latitude, longitude]")
    lat, lon = (_operand('location', '$location', c) for c in center)
    radius = clause.get('$radius')
    limit = clause.get('$limit')
    if radius is not None:
        radius = float(_operand('location', '$radius', radius))
    if limit is not None:
        if isinstance(limit, bool) or not isinstance(limit, int):
            raise QueryError("$limit must be an integer, got {0!r}".format(limit))
    return LocationQuery(latitude=float(lat), longitude=float(lon), radius_m=radius, limit=limit)


def parse_query(document: Union[str, bytes, Dict[str, Any]]) -> Tuple[str, Union[RangeQuery, LocationQuery]]:
    """
    :return: (store name, query)
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise QueryError("query document is not valid JSON: {0}".format(e)) from None
    if not isinstance(document, dict):
        raise QueryError("query document must be a JSON object")
    document = dict(document)
    store = document.pop('$from', DEFAULT_STORE)
    if not isinstance(store, str):
        raise QueryError("$from must name a store")

    location = None
    predicates = []
    for name, clause in document.items():
        if not isinstance(clause, dict) or not clause:
            raise QueryError("field {0!r} needs an operator object".format(name))
        if '$location' in clause:
            if location is not None:
                raise QueryError("only one location constraint per query")
            location = _location_query(clause)
            continue
        field = resolve_field(name)
        for op, value in clause.items():
            if op not in RANGE_OPERATORS:
                raise QueryError("unsupported operator {0!r} on {1!r}".format(op, name))
            predicates.append(Predicate(field=field, op=op, value=_operand(name, op, value)))

    if location is not None:
        return store, replace(location, predicates=tuple(predicates))
    return store, RangeQuery(predicates=tuple(predicates))
