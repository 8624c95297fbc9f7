"""
Laplace noise on dates and ages
===============================

A date becomes a count of days (or weeks, months, years) before a
reference date. Noise is added in that unit, then the value is rendered
back in the original surface format.
"""

# %%
import datetime as dt

import numpy as np

from dpdeid.dpcore import RandomSource, sanitize_temporal
from dpdeid.temporal import LocaleConfig, parse_temporal, render_temporal

ref = dt.date(2020, 12, 31)
locale = LocaleConfig("en", "dmy", ref)

for surface in ["12/02/2020", "February 26, 2020", "3 weeks ago", "40 years"]:
    label = "AGE" if surface.endswith("years") else "DATE"
    ent = parse_temporal(surface, label, locale)
    print(f"{surface!r:22} -> {ent.magnitude} {ent.granularity.value.lower()}(s) before reference")

# %%
# Smaller epsilon, wider noise. Each row is 10 draws for the same date.
ent = parse_temporal("12/02/2020", "DATE", locale)
for eps in (0.1, 0.5, 2.0):
    rng = RandomSource(0, f"eps-{eps}")
    outs = [render_temporal(sanitize_temporal(ent, eps, rng), ref) for _ in range(10)]
    print(f"eps={eps:<4}", " ".join(outs))

# %%
# Empirical spread of the rounded output against the noise scale 1/eps.
rng = RandomSource(1, "spread")
for eps in (0.25, 1.0, 4.0):
    m = np.array([sanitize_temporal(ent, eps, rng).magnitude for _ in range(20000)])
    print(f"eps={eps:<5} mean shift {m.mean() - ent.magnitude:+.3f}  std {m.std():.3f}  "
          f"(continuous std {np.sqrt(2) / eps:.3f})")
