"""
Entity annotation model and standoff document I/O.

A document is its untouched text plus a sorted list of labeled,
non-overlapping character spans. Offsets count Unicode code points
(Python ``str`` indices), never bytes.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Union


class AnnotationError(ValueError):
    """Base class for malformed or inconsistent annotations."""


class FormatError(AnnotationError):
    """Input is not a well-formed standoff file."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ValidationError(AnnotationError):
    """Spans violate an offset, overlap or surface invariant."""


class EntityLabel(str, enum.Enum):
    PER = "PER"
    DATE = "DATE"
    LOC = "LOC"
    ORG = "ORG"
    AGE = "AGE"
    TEL = "TEL"
    REF = "REF"
    QID = "QID"

    @classmethod
    def parse(cls, value: str) -> "EntityLabel":
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise AnnotationError(f"unknown entity label {value!r}; expected one of {allowed}") from None


# Labels whose surrogates come from a d-private mechanism and consume budget.
DP_LABELS = frozenset({EntityLabel.DATE, EntityLabel.AGE, EntityLabel.LOC})


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    label: EntityLabel
    surface: str

    def __post_init__(self):
        if not isinstance(self.label, EntityLabel):
            object.__setattr__(self, "label", EntityLabel.parse(self.label))
        if self.start < 0 or self.start >= self.end:
            raise ValidationError(f"span ({self.start},{self.end},{self.label.value}): need 0 <= start < end")

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.start < other.end and other.start < self.end

    def describe(self) -> str:
        """Offsets and label only; safe to put in logs."""
        return f"({self.start},{self.end},{self.label.value})"


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    text: str
    spans: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.doc_id:
            raise ValidationError("doc_id must be non-empty")
        spans = tuple(sorted(self.spans, key=lambda s: (s.start, s.end)))
        object.__setattr__(self, "spans", spans)
        validate_spans(self.text, spans)


def validate_spans(text: str, spans: Iterable[EntitySpan]) -> None:
    """Raise ValidationError unless spans fit the text, match it and do not overlap.

    ``spans`` must already be sorted by start.
    """
    prev = None
    for span in spans:
        if span.end > len(text):
            raise ValidationError(f"span {span.describe()} exceeds text length {len(text)}")
        if text[span.start:span.end] != span.surface:
            raise ValidationError(f"span {span.describe()}: surface does not match text at these offsets")
        if prev is not None and prev.overlaps(span):
            raise ValidationError(f"overlapping spans {prev.describe()} and {span.describe()}")
        prev = span


def document_from_dict(data: dict) -> AnnotatedDocument:
    if not isinstance(data, dict):
        raise FormatError("top-level value must be an object")
    for key in ("doc_id", "text", "spans"):
        if key not in data:
            raise FormatError(f"missing field {key!r}")
    if not isinstance(data["text"], str) or not isinstance(data["doc_id"], str):
        raise FormatError("'doc_id' and 'text' must be strings")
    if not isinstance(data["spans"], list):
        raise FormatError("'spans' must be an array")
    spans = []
    for n, rec in enumerate(data["spans"]):
        try:
            start, end = int(rec["start"]), int(rec["end"])
            label, surface = rec["label"], rec["surface"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"span record #{n} is malformed: {exc}") from None
        spans.append(EntitySpan(start, end, EntityLabel.parse(label), surface))
    return AnnotatedDocument(data["doc_id"], data["text"], tuple(spans))


def document_to_dict(doc: AnnotatedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "spans": [
            {"start": s.start, "end": s.end, "label": s.label.value, "surface": s.surface}
            for s in doc.spans
        ],
    }


def load_annotated(source: Union[IO, bytes, str]) -> AnnotatedDocument:
    """Read one standoff JSON document from a stream, bytes or string."""
    raw = source.read() if hasattr(source, "read") else source
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"input is not UTF-8: {exc.reason} at byte {exc.start}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    return document_from_dict(data)


def dumps_annotated(doc: AnnotatedDocument) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2) + "\n"


def save_annotated(doc: AnnotatedDocument, sink: IO) -> None:
    sink.write(dumps_annotated(doc))


# ---------------------------------------------------------------------------
# Pattern recognizer. A convenience front-end for DATE, AGE and TEL only.
# ---------------------------------------------------------------------------

_MONTHS_EN = ("january|february|march|april|may|june|july|august|september|october|november|december"
              "|jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec")
_MONTHS_FR = "janvier|février|mars|avril|mai|juin|juillet|août|septembre|octobre|novembre|décembre"

_UNITS_EN = r"(?:years?|months?|weeks?|days?)"
_UNITS_FR = r"(?:ans?|années?|mois|semaines?|jours?)"

_DATE_PATTERNS = [
    # relative phrases first so that "10 years ago" is a DATE, not an AGE
    rf"\bil y a \d{{1,3}} {_UNITS_FR}\b",
    rf"\b\d{{1,3}} {_UNITS_EN} ago\b",
    r"\b\d{4}-\d{2}-\d{2}\b",
    r"\b\d{1,2}[/.\-]\d{1,2}[/.\-](?:\d{4}|\d{2})\b",
    rf"\b(?:{_MONTHS_EN})\.? \d{{1,2}}, \d{{4}}\b",
    rf"\b\d{{1,2}} (?:{_MONTHS_EN}|{_MONTHS_FR}) \d{{4}}\b",
]

_AGE_PATTERNS = {
    "en": [r"\b\d{1,3} years?\b"],
    "fr": [r"\b\d{1,3} ans\b"],
}

_TEL_PATTERNS = {
    "fr": [r"(?<![\d/])(?:\+33 ?|0)[1-9](?:[ .\-]?\d{2}){4}(?![\d/])"],
    "en": [r"(?<![\d/])(?:\+1[ .\-]?)?(?:\(\d{3}\) ?|\d{3}[ .\-])\d{3}[ .\-]\d{4}(?![\d/])"],
}


def pattern_recognize(text: str, locale=None) -> List[EntitySpan]:
    """Find DATE, AGE and TEL candidates with regular expressions.

    Best-effort only. Earlier patterns win over later overlapping ones;
    the result is sorted and non-overlapping.
    """
    lang = getattr(locale, "locale", None) or "fr"
    groups = [
        (EntityLabel.TEL, _TEL_PATTERNS.get(lang, []) + [p for k, v in _TEL_PATTERNS.items() if k != lang for p in v]),
        (EntityLabel.DATE, _DATE_PATTERNS),
        (EntityLabel.AGE, _AGE_PATTERNS.get(lang, []) + [p for k, v in _AGE_PATTERNS.items() if k != lang for p in v]),
    ]
    found: List[EntitySpan] = []
    for label, patterns in groups:
        for pat in patterns:
            for m in re.finditer(pat, text, flags=re.IGNORECASE):
                cand = EntitySpan(m.start(), m.end(), label, m.group(0))
                if not any(cand.overlaps(s) for s in found):
                    found.append(cand)
    found.sort(key=lambda s: s.start)
    return found
