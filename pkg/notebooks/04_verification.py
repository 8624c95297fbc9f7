"""
Checking the privacy inequality
===============================

The Laplace check is analytic on an integer grid. The location check is
exhaustive on a small database. Broken mechanisms must fail.
"""

# %%
import numpy as np

from dpdeid.verify import (check_exponential_dprivacy, check_laplace_dprivacy, check_sampler,
                           squared_score, squared_score_control_db, toy_location_db)

for eps in (0.1, 1.0, 5.0):
    r = check_laplace_dprivacy(eps)
    print(f"laplace     eps={eps:<4} worst excess {r.worst_excess:+.2e}  passed={r.passed}")
print("gaussian control:", check_laplace_dprivacy(1.0, density="gaussian").passed)

# %%
# The exponential mechanism on full support. The normalizer differs per
# origin, so the log ratio can reach 2 * eps * d rather than eps * d.
db = toy_location_db()
for eps in (0.1, 1.0, 5.0):
    tight = check_exponential_dprivacy(db, eps)
    loose = check_exponential_dprivacy(db, eps, bound_factor=2.0)
    print(f"exponential eps={eps:<4} excess at eps*d {tight.worst_excess:+.3f}, "
          f"at 2*eps*d {loose.worst_excess:+.3f}")

# %%
ctrl = check_exponential_dprivacy(squared_score_control_db(), 1.0, score=squared_score, bound_factor=2.0)
print("squared-score control passes:", ctrl.passed)

# %%
rep = check_sampler(1.0, 100_000)
print({k: round(v, 5) if isinstance(v, float) else v for k, v in rep.items()})
