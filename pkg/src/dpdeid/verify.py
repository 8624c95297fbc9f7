"""
Checks of the metric privacy inequality

    log P[M(v1) = y] - log P[M(v2) = y] <= eps * d(v1, v2)

for the temporal Laplace mechanism (analytic densities on a grid) and the
location exponential mechanism (exact probabilities on a small database),
with negative controls that must fail. Sampling checks are secondary.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .dpcore import RandomSource, check_epsilon, laplace_cdf, laplace_inverse_cdf, laplace_logpdf
from .geoloc import LocationDb, selection_logits

ANALYTIC_TOL = 1e-9
EXHAUSTIVE_MAX_N = 20
MIN_SAMPLES = 10_000


@dataclass
class PrivacyCheckResult:
    mechanism: str
    epsilon: float
    worst_excess: float
    passed: bool
    domain: str
    tolerance: float = ANALYTIC_TOL

    def to_dict(self) -> dict:
        return asdict(self)


def default_grid(lo: int = -50, hi: int = 50):
    """All integer triples (y, v1, v2) in [lo, hi]^3 as three broadcastable arrays."""
    r = np.arange(lo, hi + 1, dtype=float)
    return r[:, None, None], r[None, :, None], r[None, None, :]


def _gaussian_logpdf(x, scale):
    return -0.5 * np.log(2 * np.pi * scale ** 2) - 0.5 * (x / scale) ** 2


def check_laplace_dprivacy(eps: float, grid=None, density: str = "laplace") -> PrivacyCheckResult:
    """Worst excess of the density log-ratio over ``eps * |v1 - v2|``.

    ``grid`` is ``(y, v1, v2)``, either three broadcastable arrays or an
    ``(m, 3)`` array of triples. ``density="gaussian"`` swaps in a normal
    density of the same scale as a negative control.
    """
    eps = check_epsilon(eps)
    if grid is None:
        grid = default_grid()
    if isinstance(grid, np.ndarray) and grid.ndim == 2:
        y, v1, v2 = grid[:, 0], grid[:, 1], grid[:, 2]
    else:
        y, v1, v2 = (np.asarray(g, dtype=float) for g in grid)
    scale = 1.0 / eps
    logpdf = {"laplace": laplace_logpdf, "gaussian": _gaussian_logpdf}[density]
    ratio = logpdf(y - v1, scale) - logpdf(y - v2, scale)
    excess = float(np.max(ratio - eps * np.abs(v1 - v2)))
    size = int(np.broadcast(y, v1, v2).size)
    return PrivacyCheckResult(f"{density}-temporal", eps, excess, excess <= ANALYTIC_TOL,
                              f"{size} (y, v1, v2) triples")


def exact_location_logprobs(db: LocationDb, eps: float, score: Optional[Callable] = None) -> np.ndarray:
    """``L[v, y] = log P[M(v) = y]`` with full support (k = N, no radius)."""
    D = np.linalg.norm(db.features[:, None, :] - db.features[None, :, :], axis=-1)
    return np.vstack([selection_logits(D[v], eps, score) for v in range(len(db))])


def check_exponential_dprivacy(db: LocationDb, eps: float, score: Optional[Callable] = None,
                               bound_factor: float = 1.0) -> PrivacyCheckResult:
    """Exhaustive check over every (v1, v2, y) of
    ``|log P_v1(y) - log P_v2(y)| <= bound_factor * eps * d(v1, v2)``.

    ``score`` maps feature distances to scores (default ``1 - d``).
    """
    eps = check_epsilon(eps)
    n = len(db)
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"{n} locations is too many for the exhaustive check (max {EXHAUSTIVE_MAX_N}); "
                         "use sampling instead")
    L = exact_location_logprobs(db, eps, score)
    D = np.linalg.norm(db.features[:, None, :] - db.features[None, :, :], axis=-1)
    gap = np.abs(L[:, None, :] - L[None, :, :])
    excess = float(np.max(gap - bound_factor * eps * D[:, :, None]))
    name = "exponential-location" if score is None else "exponential-location(custom score)"
    return PrivacyCheckResult(name, eps, excess, excess <= ANALYTIC_TOL,
                              f"N={n}, n_features={db.n_features}, full support, bound factor {bound_factor:g}")


def shared_support_ratios(db: LocationDb, eps: float, k: int, geo_threshold_km=None) -> dict:
    """Worst ``|log P_v1(y) - log P_v2(y)| / d(v1, v2)`` over outputs in both supports.

    Informational for truncated candidate sets; nothing is asserted.
    """
    from .geoloc import candidate_set, location_distribution

    n = len(db)
    logp = np.full((n, n), -np.inf)
    for v in range(n):
        dist = location_distribution(candidate_set(db, v, k, geo_threshold_km), eps)
        logp[v, dist.candidates.indices] = np.log(dist.probabilities)
    D = np.linalg.norm(db.features[:, None, :] - db.features[None, :, :], axis=-1)
    worst, pairs_disjoint = 0.0, 0
    for a in range(n):
        for b in range(a + 1, n):
            both = np.isfinite(logp[a]) & np.isfinite(logp[b])
            if not np.array_equal(both, np.isfinite(logp[a])) or not np.array_equal(both, np.isfinite(logp[b])):
                pairs_disjoint += 1
            if D[a, b] > 0 and both.any():
                worst = max(worst, float(np.max(np.abs(logp[a, both] - logp[b, both]))) / (eps * D[a, b]))
    return {"worst_ratio_over_eps_d": worst, "pairs_with_different_support": pairs_disjoint}


def toy_location_db(n: int = 10, n_features: int = 3, seed: int = 0) -> LocationDb:
    """Random ``n``-city database with normalized features, all within a few km."""
    g = np.random.default_rng(seed)
    raw = g.random((n, n_features))
    lat = 47.0 + 0.05 * g.random(n)
    lon = 5.0 + 0.05 * g.random(n)
    return LocationDb.from_arrays([f"city{i}" for i in range(n)], lat, lon, raw)


def squared_score_control_db(seed: int = 0) -> LocationDb:
    """Unnormalized features spread over [0, 3] so that distances exceed 1."""
    g = np.random.default_rng(seed)
    raw = 3.0 * g.random((10, 3))
    return LocationDb.from_arrays([f"city{i}" for i in range(10)], np.full(10, 47.0), np.full(10, 5.0),
                                  raw, normalize=False)


def squared_score(d):
    return 1.0 - np.asarray(d) ** 2


def check_sampler(scale: float, n: int, rng: Optional[RandomSource] = None, alpha: float = 0.01) -> dict:
    """KS test against the Laplace CDF plus mean and variance against 0 and 2 * scale**2."""
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    x = sample_laplace(scale, n, rng or RandomSource())
    ks = stats.kstest(x, lambda t: laplace_cdf(t, scale))
    critical = stats.kstwo.ppf(1 - alpha, n)
    var = float(np.var(x, ddof=1))
    target = 2.0 * scale ** 2
    return {
        "n": n,
        "scale": scale,
        "ks_statistic": float(ks.statistic),
        "ks_critical": float(critical),
        "ks_pvalue": float(ks.pvalue),
        "ks_pass": bool(ks.statistic < critical),
        "mean": float(np.mean(x)),
        "variance": var,
        "variance_target": target,
        "variance_rel_error": abs(var - target) / target,
        "variance_pass": abs(var - target) / target <= 0.02,
    }


def sample_laplace(scale: float, n: int, rng: RandomSource) -> np.ndarray:
    """``n`` draws through the scalar sampler, one uniform each."""
    return np.array([laplace_inverse_cdf(rng.uniform(), scale) for _ in range(n)])


def run_all(epsilons=(0.1, 0.5, 1.0, 2.0, 5.0), seed: int = 0, negative_controls: bool = True,
            sampler_n: int = 100_000, inject_failure: bool = False) -> dict:
    """Every check on the default fixtures.

    ``inject_failure`` runs the positive checks against the broken control
    mechanisms instead, to exercise the failure path.
    """
    results = []
    db = toy_location_db(seed=seed)
    for eps in epsilons:
        if inject_failure:
            results.append(check_laplace_dprivacy(eps, density="gaussian"))
            results.append(check_exponential_dprivacy(squared_score_control_db(seed), eps, score=squared_score))
        else:
            results.append(check_laplace_dprivacy(eps))
            results.append(check_exponential_dprivacy(db, eps))
    controls = []
    if negative_controls:
        controls.append(check_laplace_dprivacy(1.0, density="gaussian"))
        controls.append(check_exponential_dprivacy(squared_score_control_db(seed), 1.0, score=squared_score))
    sampler = check_sampler(1.0, sampler_n, RandomSource(seed, "verify-sampler"))
    ok = all(r.passed for r in results) and not any(c.passed for c in controls) \
        and sampler["ks_pass"] and sampler["variance_pass"]
    return {
        "checks": [r.to_dict() for r in results],
        "negative_controls": [c.to_dict() for c in controls],
        "sampler": sampler,
        "passed": ok,
    }
