"""
Location surrogates drawn by an exponential mechanism over feature space.

Each city carries normalized statistical/medical features. A city is
replaced by one of its ``k`` feature-nearest neighbours inside a
geographic radius, chosen with probability proportional to
``exp(eps * (1 - d))`` where ``d`` is the Euclidean feature distance.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import IO, List, Optional, Sequence, Union

import numpy as np

from .dpcore import RandomSource, canonical_key, check_epsilon

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088

REQUIRED_COLUMNS = ("name", "lat", "lon")


class LocationDbError(ValueError):
    pass


@dataclass(frozen=True)
class LocationRecord:
    name: str
    lat: float
    lon: float
    features: tuple


@dataclass
class LocationDb:
    """Public substitution universe.

    ``features`` is the normalized ``(N, n)`` matrix; ``bounds`` holds the
    per-feature ``(min, max)`` used for min-max scaling.
    """

    names: List[str]
    lat: np.ndarray
    lon: np.ndarray
    features: np.ndarray
    feature_names: List[str]
    bounds: np.ndarray
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.lat = np.asarray(self.lat, dtype=float)
        self.lon = np.asarray(self.lon, dtype=float)
        n_rec = len(self.names)
        if n_rec < 1:
            raise LocationDbError("location database is empty")
        if self.features.shape[0] != n_rec or len(self.lat) != n_rec or len(self.lon) != n_rec:
            raise LocationDbError("names, coordinates and features disagree on the number of records")
        seen = {}
        for i, name in enumerate(self.names):
            key = canonical_key(name)
            if key in seen:
                raise LocationDbError(f"duplicate location name {name!r} (rows {seen[key] + 1} and {i + 1})")
            seen[key] = i
        self._index = seen

    @classmethod
    def from_arrays(cls, names: Sequence[str], lat, lon, raw_features, feature_names=None,
                    normalize: bool = True) -> "LocationDb":
        raw = np.atleast_2d(np.asarray(raw_features, dtype=float))
        if raw.shape[0] != len(names) and raw.shape[1] == len(names):
            raw = raw.T
        if feature_names is None:
            feature_names = [f"f{i}" for i in range(raw.shape[1])]
        warnings = []
        if normalize:
            lo, hi = raw.min(axis=0), raw.max(axis=0)
            span = hi - lo
            flat = span == 0
            for c in np.flatnonzero(flat):
                warnings.append(f"feature {feature_names[c]!r} is constant; normalized to 0")
                logger.warning(warnings[-1])
            feats = np.where(flat, 0.0, (raw - lo) / np.where(flat, 1.0, span))
        else:
            lo, hi = np.zeros(raw.shape[1]), np.ones(raw.shape[1])
            feats = raw
        return cls(list(names), lat, lon, feats, list(feature_names), np.column_stack([lo, hi]), warnings)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def index_of(self, name: str) -> Optional[int]:
        return self._index.get(canonical_key(name))

    def record(self, i: int) -> LocationRecord:
        return LocationRecord(self.names[i], float(self.lat[i]), float(self.lon[i]),
                              tuple(float(v) for v in self.features[i]))

    def raw_features(self) -> np.ndarray:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return lo + self.features * (hi - lo)


def load_location_db(source: Union[IO, str, bytes], feature_columns: Optional[Sequence[str]] = None) -> LocationDb:
    """Read a comma-separated table with ``name``, ``lat``, ``lon`` and feature columns.

    ``feature_columns=None`` uses every column other than the required three.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if feature_columns is None:
        feature_columns = [h for h in header if h not in REQUIRED_COLUMNS]
    missing += [c for c in feature_columns if c not in header]
    if missing:
        raise LocationDbError(f"location table is missing column(s): {', '.join(missing)}")
    if not feature_columns:
        raise LocationDbError("no feature columns")

    names, lat, lon, rows = [], [], [], []
    for rowno, row in enumerate(reader, start=2):
        try:
            lat.append(float(row["lat"]))
            lon.append(float(row["lon"]))
            rows.append([float(row[c]) for c in feature_columns])
        except (TypeError, ValueError):
            raise LocationDbError(f"non-numeric value in row {rowno}") from None
        names.append(row["name"].strip())
    return LocationDb.from_arrays(names, lat, lon, rows, feature_columns)


def haversine_km(lat1, lon1, lat2, lon2):
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlmb = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def feature_distance(db: LocationDb, j: int, i: int) -> float:
    return float(np.linalg.norm(db.features[j] - db.features[i]))


def feature_distances(db: LocationDb, j: int) -> np.ndarray:
    return np.linalg.norm(db.features - db.features[j], axis=1)


@dataclass(frozen=True)
class CandidateSet:
    origin: int
    indices: np.ndarray
    distances: np.ndarray
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def entries(self):
        return list(zip(self.indices.tolist(), self.distances.tolist()))


def candidate_set(db: LocationDb, j: int, k: int = 10, geo_threshold_km: Optional[float] = 100.0) -> CandidateSet:
    """The ``k`` feature-nearest records within ``geo_threshold_km`` of ``j``.

    The origin always comes first. Equal distances are ordered by record
    index. ``geo_threshold_km=None`` disables the geographic filter. When
    fewer than ``k`` records qualify, all of them are returned and the set
    is flagged as truncated.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    d = feature_distances(db, j)
    d[j] = 0.0
    idx = np.arange(len(db))
    if geo_threshold_km is not None:
        geo = haversine_km(db.lat[j], db.lon[j], db.lat, db.lon)
        keep = (geo <= geo_threshold_km) | (idx == j)
        idx = idx[keep]
    # sort by distance, then origin first among equals, then index
    order = np.lexsort((idx, idx != j, d[idx]))
    idx = idx[order]
    truncated = len(idx) < k
    if truncated:
        logger.debug("candidate set for record %d has only %d of %d entries", j, len(idx), k)
    idx = idx[:k]
    return CandidateSet(j, idx, d[idx], truncated)


@dataclass(frozen=True)
class CandidateDistribution:
    candidates: CandidateSet
    probabilities: np.ndarray

    def full(self, n: int) -> np.ndarray:
        """Probability vector over all ``n`` records, zero off the candidate set."""
        p = np.zeros(n)
        p[self.candidates.indices] = self.probabilities
        return p


def selection_logits(distances, eps: float, score=None) -> np.ndarray:
    """Log-probabilities ``eps * U - log Z`` with ``U = 1 - d`` unless ``score`` is given."""
    distances = np.asarray(distances, dtype=float)
    u = 1.0 - distances if score is None else score(distances)
    z = eps * u
    return z - (z.max() + np.log(np.exp(z - z.max()).sum()))


def location_distribution(cands: CandidateSet, eps_share: float) -> CandidateDistribution:
    eps = check_epsilon(eps_share)
    if len(cands) == 0:
        raise ValueError("empty candidate set")
    p = np.exp(selection_logits(cands.distances, eps))
    return CandidateDistribution(cands, p / p.sum())


def draw_index(probabilities: np.ndarray, u: float) -> int:
    """Invert the cumulative distribution at ``u``."""
    cdf = np.cumsum(probabilities)
    return int(min(np.searchsorted(cdf, u * cdf[-1], side="right"), len(cdf) - 1))


def sanitize_location(db: LocationDb, j: int, eps_share: float, k: int = 10,
                      geo_threshold_km: Optional[float] = 100.0,
                      rng: Optional[RandomSource] = None) -> LocationRecord:
    rng = rng or RandomSource()
    dist = location_distribution(candidate_set(db, j, k, geo_threshold_km), eps_share)
    pos = draw_index(dist.probabilities, rng.uniform())
    return db.record(int(dist.candidates.indices[pos]))
