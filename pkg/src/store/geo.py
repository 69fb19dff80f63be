"""
Great-circle helpers on a spherical Earth
"""
import math
import numpy as np

# Mean Earth radius in metres
EARTH_RADIUS_M = 6371008.8


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlambda = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlambda / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(min(1.0, a)))


def haversine_m_many(lat: float, lon: float, lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """
    Distances from one point to many, same formula as haversine_m
    """
    phi1 = np.radians(lat)
    phi2 = np.radians(lats)
    dphi = np.radians(lats - lat)
    dlambda = np.radians(lons - lon)
    a = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlambda / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(1.0, a)))


def latitude_band(lat: float, radius_m: float, slack_deg: float = 1e-9):
    """
    Latitudes that can hold a point within radius_m of a point at latitude lat
    A great-circle path is never shorter than the meridian arc between the two latitudes
    """
    delta = math.degrees(radius_m / EARTH_RADIUS_M) + slack_deg
    return max(-90.0, lat - delta), min(90.0, lat + delta)


def validate_position(lat: float, lon: float):
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ValueError("non-finite position ({0}, {1})".format(lat, lon))
    if not -90.0 <= lat <= 90.0:
        raise ValueError("latitude {0} outside [-90, 90]".format(lat))
