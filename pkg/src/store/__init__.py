from src.store.geo import EARTH_RADIUS_M, haversine_m, haversine_m_many
from src.store.queries import LocationQuery, Predicate, RangeQuery, QUERYABLE_FIELDS, parse_query
from src.store.event_store import EventStore, SpectrumDatabase, StoredEvent, KeyIndex, MERGED_TX, TRANSMISSIONS
