import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dpdeid.dpcore import RandomSource
from dpdeid.geoloc import (CandidateSet, LocationDb, LocationDbError, candidate_set, draw_index,
                           feature_distance, haversine_km, load_location_db, location_distribution,
                           sanitize_location)
from dpdeid.verify import toy_location_db


def eq4(distances, eps):
    """Direct evaluation: exp(eps * (1 - d)) / sum over the candidate set."""
    w = [math.exp(eps * (1.0 - d)) for d in distances]
    z = math.fsum(w)
    return [x / z for x in w]


def _cands(distances):
    n = len(distances)
    return CandidateSet(0, np.arange(n), np.asarray(distances, dtype=float))


def test_min_max_normalization():
    db = load_location_db("name,lat,lon,pop\na,47,5,10\nb,47.1,5,20\nc,47.2,5,30\n")
    assert db.features[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert db.bounds.tolist() == [[10.0, 30.0]]
    assert np.allclose(db.raw_features()[:, 0], [10, 20, 30])


def test_duplicate_name():
    with pytest.raises(LocationDbError, match="(?i)dijon"):
        load_location_db("name,lat,lon,pop\nDijon,47,5,10\nDIJON,47.1,5,20\n")


def test_missing_column():
    with pytest.raises(LocationDbError, match="lon"):
        load_location_db("name,lat,pop\na,47,10\n")
    with pytest.raises(LocationDbError, match="strokes"):
        load_location_db("name,lat,lon,pop\na,47,5,10\n", ["pop", "strokes"])


def test_non_numeric_row_number():
    with pytest.raises(LocationDbError, match="row 3"):
        load_location_db("name,lat,lon,pop\na,47,5,10\nb,47,5,many\n")


def test_constant_column_warns():
    db = load_location_db("name,lat,lon,pop,x\na,47,5,10,1\nb,47,5,20,1\n")
    assert db.features[:, 1].tolist() == [0.0, 0.0]
    assert db.warnings and "'x'" in db.warnings[0]


def test_region_table_three_features(region_db):
    assert region_db.n_features == 3
    assert region_db.feature_names == ["population", "cancer_incidence", "strokes"]
    assert region_db.features.min() >= 0 and region_db.features.max() <= 1


def test_feature_distance_examples():
    db = LocationDb.from_arrays(["a", "b"], [0, 0], [0, 0], [[0, 0, 0], [1, 1, 1]], normalize=False)
    assert feature_distance(db, 0, 0) == 0
    assert feature_distance(db, 0, 1) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert feature_distance(db, 0, 1) == pytest.approx(1.7320508, abs=1e-7)


def test_feature_distance_symmetric():
    db = toy_location_db(12, 4, seed=3)
    for j in range(12):
        for i in range(12):
            assert feature_distance(db, j, i) == feature_distance(db, i, j)


def test_haversine_known_distance():
    # Paris (48.8566, 2.3522) to Lyon (45.7640, 4.8357): about 392 km
    assert haversine_km(48.8566, 2.3522, 45.7640, 4.8357) == pytest.approx(392, abs=3)


def test_candidate_k1():
    db = toy_location_db()
    cs = candidate_set(db, 4, k=1, geo_threshold_km=None)
    assert cs.entries == [(4, 0.0)]


def test_candidate_threshold_zero():
    db = toy_location_db()
    cs = candidate_set(db, 4, k=10, geo_threshold_km=0.0)
    assert cs.entries == [(4, 0.0)]
    assert cs.truncated


def test_candidate_dijon_k10(region_db):
    j = region_db.index_of("Dijon")
    cs = candidate_set(region_db, j, k=10, geo_threshold_km=100)
    assert len(cs) == 10 and not cs.truncated
    assert cs.entries[0] == (j, 0.0)
    assert np.all(np.diff(cs.distances) >= 0)
    geo = haversine_km(region_db.lat[j], region_db.lon[j], region_db.lat[cs.indices], region_db.lon[cs.indices])
    assert np.all(geo <= 100)
    assert "Besançon" in [region_db.names[i] for i in cs.indices]


def test_candidate_ties_by_index_origin_first():
    db = LocationDb.from_arrays(list("abcde"), [47] * 5, [5] * 5,
                                [[0.5], [0.5], [0.0], [1.0], [0.5]], normalize=False)
    cs = candidate_set(db, 4, k=5, geo_threshold_km=None)
    assert cs.indices.tolist() == [4, 0, 1, 2, 3]


def test_candidate_fewer_than_k(region_db):
    j = region_db.index_of("Nevers")
    cs = candidate_set(region_db, j, k=10, geo_threshold_km=50)
    assert cs.truncated and 1 <= len(cs) < 10


def test_distribution_values():
    dist = location_distribution(_cands([0.0, 0.2, 0.5]), 1.0)
    # frozen from a 30-digit evaluation of the same formula
    assert dist.probabilities == pytest.approx([0.4123266856, 0.3375845378, 0.2500887766], abs=1e-10)
    assert dist.probabilities == pytest.approx(eq4([0.0, 0.2, 0.5], 1.0), abs=1e-14)


def test_distribution_single():
    assert location_distribution(_cands([0.0]), 0.3).probabilities.tolist() == [1.0]


def test_distribution_uniform_limit():
    p = location_distribution(_cands([0.0, 0.3, 0.9, 1.4]), 1e-9).probabilities
    assert np.max(np.abs(p - 0.25)) < 1e-6


def test_distribution_zero_off_support():
    db = toy_location_db()
    dist = location_distribution(candidate_set(db, 0, k=4, geo_threshold_km=None), 1.0)
    full = dist.full(len(db))
    assert np.count_nonzero(full) == 4 and full.sum() == pytest.approx(1, abs=1e-12)


@settings(max_examples=100)
@given(st.integers(2, 15), st.integers(1, 15), st.floats(0.01, 20), st.integers(0, 10 ** 6))
def test_normalization_random(n, k, eps, seed):
    db = toy_location_db(n, 3, seed)
    dist = location_distribution(candidate_set(db, seed % n, k, None), eps)
    assert abs(dist.probabilities.sum() - 1.0) <= 1e-12
    assert dist.probabilities == pytest.approx(eq4(dist.candidates.distances, eps), rel=1e-12)


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1.8), min_size=2, max_size=12), st.floats(1e-3, 50))
def test_monotone(distances, eps):
    p = location_distribution(_cands(sorted(distances)), eps).probabilities
    d = sorted(distances)
    for a in range(len(d)):
        for b in range(len(d)):
            if d[a] < d[b] and eps * (d[b] - d[a]) > 1e-12:
                assert p[a] > p[b]


def test_draw_index_inversion():
    p = np.array([0.2, 0.5, 0.3])
    assert [draw_index(p, u) for u in (0.1, 0.2, 0.69, 0.7, 0.99)] == [0, 1, 1, 2, 2]


def test_sanitize_concentrates_at_self(region_db):
    j = region_db.index_of("Dijon")
    rng = RandomSource(1, "conc")
    hits = sum(sanitize_location(region_db, j, 1e6, 10, 100, rng).name == "Dijon" for _ in range(1000))
    assert hits == 1000


def test_sanitize_golden():
    db = toy_location_db()
    rec = sanitize_location(db, 3, 1.0, k=5, geo_threshold_km=None, rng=RandomSource(20201231, "loc"))
    assert rec.name == "city2"


def test_sanitize_chi_square():
    db = toy_location_db()
    eps, k = 2.0, 6
    dist = location_distribution(candidate_set(db, 5, k, None), eps)
    rng = RandomSource(77, "chi2")
    counts = dict.fromkeys(dist.candidates.indices.tolist(), 0)
    n = 100_000
    for _ in range(n):
        counts[db.index_of(sanitize_location(db, 5, eps, k, None, rng).name)] += 1
    observed = np.array([counts[i] for i in dist.candidates.indices])
    res = stats.chisquare(observed, n * dist.probabilities)
    assert res.pvalue > 0.01
