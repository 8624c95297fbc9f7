"""
One clinical sentence, end to end
=================================
"""

# %%
import datetime as dt
import json

from dpdeid.annotation import load_annotated
from dpdeid.config import PipelineConfig
from dpdeid.data import path
from dpdeid.geoloc import load_location_db
from dpdeid.rewrite import SurrogatePool, audit_report, sanitize_document

with open(path("thread_example.json"), "rb") as fh:
    doc = load_annotated(fh)
with open(path("bfc_cities.csv"), encoding="utf-8") as fh:
    db = load_location_db(fh)
print(doc.text)
for s in doc.spans:
    print(f"  {s.label.value:<5} {s.surface!r}")

# %%
# Four DP keys share the budget: two dates, one age, one city.
# Both mentions of the city reuse the same surrogate.
config = PipelineConfig(epsilon=1.0, seed=20201231, locale="en", reference_date=dt.date(2020, 12, 31))
sdoc = sanitize_document(doc, db, SurrogatePool.default(), config)
print(sdoc.text)
print(json.dumps(audit_report(sdoc), indent=1))

# %%
# Different seeds, same structure.
for seed in range(5):
    print(sanitize_document(doc, db, SurrogatePool.default(), config.override(seed=seed)).text)

# %%
# With order restoration the admission date stays before the discharge date.
for seed in range(5):
    cfg = config.override(seed=seed, restore_order=True, epsilon=0.2)
    reps = sanitize_document(doc, db, SurrogatePool.default(), cfg).replacements
    print(" -> ".join(r.surrogate for r in reps if r.label.value == "DATE"))
