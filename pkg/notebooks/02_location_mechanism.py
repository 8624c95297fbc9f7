"""
Choosing a surrogate city
=========================

Candidates are the k cities closest to the original in normalized
feature space, within a geographic radius. One is drawn with probability
proportional to exp(eps * (1 - d)).
"""

# %%
import numpy as np

from dpdeid.data import path
from dpdeid.geoloc import candidate_set, load_location_db, location_distribution, sanitize_location
from dpdeid.dpcore import RandomSource

with open(path("bfc_cities.csv"), encoding="utf-8") as fh:
    db = load_location_db(fh)
print(len(db), "cities, features:", db.feature_names)

# %%
j = db.index_of("Dijon")
cands = candidate_set(db, j, k=10, geo_threshold_km=100.0)
for eps in (0.5, 2.0, 10.0):
    dist = location_distribution(cands, eps)
    top = np.argsort(-dist.probabilities)[:4]
    print(f"eps={eps:<5}", ", ".join(f"{db.names[cands.indices[i]]} {dist.probabilities[i]:.3f}" for i in top))

# %%
# The radius matters: without it, far cities with similar features enter the set.
wide = candidate_set(db, j, k=10, geo_threshold_km=None)
print("within 100 km:", [db.names[i] for i in cands.indices])
print("no radius:   ", [db.names[i] for i in wide.indices])

# %%
rng = RandomSource(7, "dijon")
draws = [sanitize_location(db, j, 1.0, 10, 100.0, rng).name for _ in range(2000)]
names, counts = np.unique(draws, return_counts=True)
for name, c in sorted(zip(names, counts), key=lambda t: -t[1])[:6]:
    print(f"{name:<24} {c / len(draws):.3f}")
