"""
Randomness, the Laplace mechanism on temporal magnitudes, per-document
budget sharing and memoization of surrogates.
"""

from __future__ import annotations

import hashlib
import math
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .annotation import DP_LABELS, AnnotatedDocument, EntityLabel, EntitySpan
from .temporal import LocaleConfig, TemporalEntity, TemporalError, parse_temporal


def check_epsilon(value) -> float:
    """Return ``value`` as a float, or raise ValueError unless it is finite and > 0."""
    eps = float(value)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"epsilon must be a positive finite number, got {value!r}")
    return eps


class RandomSource:
    """Seedable uniform stream.

    The stream for a document depends only on ``(seed, stream_id)``, so
    documents can be processed in any order or in parallel and still give
    the same draws. ``seed=None`` draws fresh OS entropy.
    """

    def __init__(self, seed: Optional[int] = None, stream_id: str = ""):
        self.seed = seed
        self.stream_id = stream_id
        digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
        spawn_key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
        entropy = None if seed is None else int(seed) & 0xFFFFFFFFFFFFFFFF
        self._ss = np.random.SeedSequence(entropy, spawn_key=spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(self._ss))

    def uniform(self) -> float:
        """One draw from the open interval (0, 1)."""
        while True:
            u = self.generator.random()
            if u > 0.0:
                return u

    def integers(self, high: int) -> int:
        return int(self.generator.integers(high))


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Quantile of the centered Laplace distribution at ``u`` in (0, 1)."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale!r}")
    c = u - 0.5
    if c == 0:
        return 0.0
    # 1 - 2|u - 0.5| written as 2 * min(u, 1 - u) to keep precision in the tails
    return -scale * math.copysign(1.0, c) * math.log(2.0 * min(u, 1.0 - u))


def laplace_sample(scale: float, rng: RandomSource) -> float:
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale!r}")
    return laplace_inverse_cdf(rng.uniform(), scale)


def laplace_cdf(x, scale: float):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.5 * np.exp(x / scale), 1.0 - 0.5 * np.exp(-x / scale))


def laplace_logpdf(x, scale: float):
    return -np.log(2.0 * scale) - np.abs(x) / scale


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def sanitize_temporal(entity: TemporalEntity, eps_share: float, rng: RandomSource,
                      age_cap: Optional[int] = None) -> TemporalEntity:
    """Add Laplace(1/eps_share) noise in the entity's own unit.

    The noisy value is rounded to the nearest unit and clamped at zero;
    ``age_cap`` optionally caps the result. All three are post-processing.
    """
    eps = check_epsilon(eps_share)
    noisy = entity.magnitude + laplace_sample(1.0 / eps, rng)
    magnitude = max(0, round_half_up(noisy))
    if age_cap is not None:
        magnitude = min(magnitude, int(age_cap))
    return entity.with_magnitude(magnitude)


# --- memoization ------------------------------------------------------------

def canonical_key(surface: str) -> str:
    """Case-folded, NFC-normalized surface with runs of whitespace collapsed."""
    return " ".join(unicodedata.normalize("NFC", surface).casefold().split())


def temporal_key(entity: TemporalEntity) -> str:
    return f"{entity.granularity.value.lower()}:{entity.magnitude}"


def memo_key(span: EntitySpan, locale: Optional[LocaleConfig] = None) -> Tuple[EntityLabel, str]:
    """Memoization key of a span.

    Dates and ages key on (granularity, magnitude), so two renderings of one
    date share a surrogate while a date and an age never do. Unparseable
    temporal surfaces fall back to their canonical text.
    """
    if span.label in (EntityLabel.DATE, EntityLabel.AGE):
        try:
            return span.label, temporal_key(parse_temporal(span.surface, span.label, locale))
        except TemporalError:
            return span.label, "text:" + canonical_key(span.surface)
    return span.label, canonical_key(span.surface)


@dataclass
class MemoTable:
    """Per-document map from (label, canonical key) to a surrogate."""

    entries: Dict[Tuple[EntityLabel, str], object] = field(default_factory=dict)

    def get_or_insert(self, label: EntityLabel, key: str, produce: Callable[[], object]):
        if not key:
            raise ValueError("memoization key must be non-empty")
        k = (label, canonical_key(key))
        if k not in self.entries:
            self.entries[k] = produce()
        return self.entries[k]

    def __contains__(self, item) -> bool:
        label, key = item
        return (label, canonical_key(key)) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def memo_get_or_insert(table: MemoTable, label: EntityLabel, key: str, produce: Callable[[], object]):
    return table.get_or_insert(label, key, produce)


# --- budget -----------------------------------------------------------------

@dataclass
class BudgetLedger:
    """Uniform split of a document's epsilon over its distinct DP keys."""

    total: float
    shares: Dict[Tuple[EntityLabel, str], float] = field(default_factory=dict)
    policy: str = "UNIFORM"
    spent: Dict[Tuple[EntityLabel, str], float] = field(default_factory=dict)

    @classmethod
    def uniform(cls, total: float, keys: Iterable[Tuple[EntityLabel, str]]) -> "BudgetLedger":
        total = check_epsilon(total)
        distinct = list(dict.fromkeys(keys))
        shares = {k: total / len(distinct) for k in distinct} if distinct else {}
        return cls(total, shares)

    def share(self, key: Tuple[EntityLabel, str]) -> float:
        return self.shares[key]

    def spend(self, key: Tuple[EntityLabel, str]) -> float:
        """Record that the mechanism for ``key`` ran; each key runs once."""
        if key in self.spent:
            raise RuntimeError("budget share already consumed for this key")
        self.spent[key] = self.shares[key]
        return self.spent[key]

    @property
    def consumed(self) -> float:
        return math.fsum(self.spent.values())


def allocate_budget(doc: AnnotatedDocument, total: float,
                    locale: Optional[LocaleConfig] = None) -> BudgetLedger:
    """Give each distinct DATE/AGE/LOC memoization key an equal share of ``total``."""
    keys = [memo_key(s, locale) for s in doc.spans if s.label in DP_LABELS]
    return BudgetLedger.uniform(total, keys)


# --- order restoration ------------------------------------------------------

def restore_order(originals: List[int], sanitized: List[int]) -> List[int]:
    """Reassign sanitized magnitudes so their order matches the originals'.

    ``originals`` must be distinct. The sorted sanitized values are handed
    out in the originals' rank order, and ties are pushed apart by one unit
    so that the ranks match strictly. Only released values are used.
    """
    if len(originals) != len(sanitized):
        raise ValueError("length mismatch")
    if len(set(originals)) != len(originals):
        raise ValueError("original magnitudes must be distinct")
    values = sorted(sanitized)
    for i in range(1, len(values)):
        values[i] = max(values[i], values[i - 1] + 1)
    order = sorted(range(len(originals)), key=lambda i: originals[i])
    out = [0] * len(originals)
    for rank, idx in enumerate(order):
        out[idx] = values[rank]
    return out
