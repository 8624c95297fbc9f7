"""
Per-document surrogate generation and splicing.

DATE/AGE/LOC go through the d-private mechanisms with a uniform share of
the document budget; PER/ORG come from name pools; TEL/QID/REF get a
random string with the same character layout. Every surrogate is
memoized, so repeated values are replaced identically.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence

from .annotation import DP_LABELS, AnnotatedDocument, EntityLabel, EntitySpan
from .config import PipelineConfig
from .dpcore import (BudgetLedger, MemoTable, RandomSource, allocate_budget, canonical_key,
                     memo_key, restore_order, sanitize_temporal)
from .geoloc import LocationDb, candidate_set, draw_index, location_distribution
from .temporal import Kind, TemporalEntity, TemporalError, parse_temporal, render_temporal


class SanitizationError(RuntimeError):
    """A strict-mode policy rejected a span. Messages carry offsets, never surfaces."""


def _read_lines(name: str) -> List[str]:
    text = resources.files("dpdeid.data").joinpath(name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


@dataclass
class SurrogatePool:
    per: List[str]
    org: List[str]

    def __post_init__(self):
        if not self.per or not self.org:
            raise ValueError("PER and ORG pools must be non-empty")

    @classmethod
    def default(cls) -> "SurrogatePool":
        return cls(_read_lines("names.txt"), _read_lines("organizations.txt"))


def layout_surrogate(surface: str, rng: RandomSource, attempts: int = 20) -> str:
    """Random string with the same layout: digit to digit, letter to letter
    (case kept), anything else copied."""
    out = surface
    for _ in range(attempts):
        chars = []
        for ch in surface:
            if ch.isdigit():
                chars.append(string.digits[rng.integers(10)])
            elif ch.isalpha():
                letters = string.ascii_uppercase if ch.isupper() else string.ascii_lowercase
                chars.append(letters[rng.integers(26)])
            else:
                chars.append(ch)
        out = "".join(chars)
        if out != surface:
            break
    return out


@dataclass(frozen=True)
class Replacement:
    source_start: int
    source_end: int
    label: EntityLabel
    surrogate: str
    start: int
    end: int


@dataclass
class SanitizedDocument:
    doc_id: str
    text: str
    replacements: List[Replacement]
    ledger: BudgetLedger
    warnings: List[str] = field(default_factory=list)

    def to_sidecar(self) -> dict:
        """Replacement map in the standoff annotation layout, plus source offsets."""
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "spans": [
                {"start": r.start, "end": r.end, "label": r.label.value, "surface": r.surrogate,
                 "source_start": r.source_start, "source_end": r.source_end}
                for r in self.replacements
            ],
        }


def _draw_from_pool(pool: Sequence[str], used: set, banned: set, rng: RandomSource) -> str:
    avail = [p for p in pool if canonical_key(p) not in used and canonical_key(p) not in banned]
    if not avail:
        raise SanitizationError("surrogate pool exhausted for this document")
    choice = avail[rng.integers(len(avail))]
    used.add(canonical_key(choice))
    return choice


def sanitize_document(doc: AnnotatedDocument, db: Optional[LocationDb], pools: SurrogatePool,
                      config: PipelineConfig, rng: Optional[RandomSource] = None) -> SanitizedDocument:
    """Replace every annotated span of ``doc`` with a surrogate.

    Strict mode raises SanitizationError for LOC surfaces missing from
    ``db`` and for unparseable DATE/AGE surfaces; lenient mode falls back
    to a uniformly random city or a ``[LABEL]`` placeholder and records a
    warning.
    """
    rng = rng or RandomSource(config.seed, doc.doc_id)
    locale = config.locale_config
    ref = config.reference_date
    ledger = allocate_budget(doc, config.epsilon, locale)
    memo = MemoTable()
    warnings: List[str] = []
    used_names: Dict[EntityLabel, set] = {EntityLabel.PER: set(), EntityLabel.ORG: set()}
    banned = {lab: {canonical_key(s.surface) for s in doc.spans if s.label is lab} for lab in used_names}

    entities: Dict[int, TemporalEntity] = {}
    keys = []
    for n, span in enumerate(doc.spans):
        key = memo_key(span, locale)
        keys.append(key)
        if span.label in (EntityLabel.DATE, EntityLabel.AGE):
            try:
                entities[n] = parse_temporal(span.surface, span.label, locale)
            except TemporalError as exc:
                if config.strict:
                    raise SanitizationError(f"{doc.doc_id}: span {span.describe()}: {exc}") from None
                warnings.append(f"span {span.describe()}: unparseable {span.label.value}, placeholder used")

    # pass 1: draw one surrogate value per memo key, in document order
    def produce(n: int, span: EntitySpan):
        key = keys[n]
        if span.label in (EntityLabel.DATE, EntityLabel.AGE):
            if n not in entities:
                return f"[{span.label.value}]"
            age_cap = config.age_cap if span.label is EntityLabel.AGE else None
            return sanitize_temporal(entities[n], ledger.spend(key), rng, age_cap).magnitude
        if span.label is EntityLabel.LOC:
            if db is None:
                raise SanitizationError(f"{doc.doc_id}: LOC span {span.describe()} but no location database")
            j = db.index_of(span.surface)
            if j is None:
                if config.strict:
                    raise SanitizationError(f"{doc.doc_id}: LOC span {span.describe()} not in location database")
                warnings.append(f"span {span.describe()}: location not in database, uniform fallback")
                return db.names[rng.integers(len(db))]
            cands = candidate_set(db, j, config.k, config.geo_threshold_km)
            if cands.truncated:
                warnings.append(f"span {span.describe()}: candidate set truncated to {len(cands)} of k={config.k}")
            dist = location_distribution(cands, ledger.spend(key))
            return db.names[int(cands.indices[draw_index(dist.probabilities, rng.uniform())])]
        if span.label in (EntityLabel.PER, EntityLabel.ORG):
            pool = pools.per if span.label is EntityLabel.PER else pools.org
            return _draw_from_pool(pool, used_names[span.label], banned[span.label], rng)
        return layout_surrogate(span.surface, rng)

    for n, span in enumerate(doc.spans):
        memo.get_or_insert(keys[n][0], keys[n][1], lambda n=n, span=span: produce(n, span))

    if config.restore_order:
        _restore_date_order(doc, keys, entities, memo)

    # pass 2: render
    surrogates = []
    for n, span in enumerate(doc.spans):
        value = memo.get_or_insert(keys[n][0], keys[n][1], lambda: None)
        if n in entities:
            value = render_temporal(entities[n].with_magnitude(value), ref)
        surrogates.append(str(value))

    text = doc.text
    for span, sur in sorted(zip(doc.spans, surrogates), key=lambda t: t[0].start, reverse=True):
        text = text[:span.start] + sur + text[span.end:]

    replacements = []
    shift = 0
    for span, sur in zip(doc.spans, surrogates):
        start = span.start + shift
        replacements.append(Replacement(span.start, span.end, span.label, sur, start, start + len(sur)))
        shift += len(sur) - (span.end - span.start)

    return SanitizedDocument(doc.doc_id, text, replacements, ledger, warnings)


def _restore_date_order(doc, keys, entities, memo: MemoTable) -> None:
    groups: Dict[str, dict] = {}
    for n, span in enumerate(doc.spans):
        if span.label is EntityLabel.DATE and n in entities:
            ent = entities[n]
            groups.setdefault(ent.granularity.value, {})[keys[n]] = ent.magnitude
    for group in groups.values():
        ks = list(group)
        new = restore_order([group[k] for k in ks], [memo.entries[k] for k in ks])
        for k, v in zip(ks, new):
            memo.entries[k] = v


def audit_report(sdoc: SanitizedDocument) -> dict:
    """Counts, budget shares and warnings. Never includes original surfaces."""
    counts = Counter(r.label.value for r in sdoc.replacements)
    ledger = sdoc.ledger
    return {
        "doc_id": sdoc.doc_id,
        "label_counts": dict(sorted(counts.items())),
        "epsilon_total": ledger.total if ledger.shares else 0.0,
        "budget_policy": ledger.policy,
        "dp_keys": len(ledger.shares),
        "shares": [{"label": k[0].value, "epsilon": v} for k, v in ledger.shares.items()],
        "epsilon_consumed": ledger.consumed,
        "warnings": list(sdoc.warnings),
    }


def containment_violations(doc: AnnotatedDocument, sanitized_text: str, min_len: int = 3) -> List[EntitySpan]:
    """Spans whose original surface still occurs in ``sanitized_text``.

    Surfaces shorter than ``min_len`` are skipped.
    """
    return [s for s in doc.spans if len(s.surface) >= min_len and s.surface in sanitized_text]
