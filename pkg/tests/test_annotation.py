import io
import json

import pytest
from hypothesis import given, strategies as st

from dpdeid.annotation import (AnnotatedDocument, AnnotationError, EntityLabel, EntitySpan, FormatError,
                               ValidationError, dumps_annotated, load_annotated, pattern_recognize,
                               validate_spans)
from dpdeid.temporal import LocaleConfig


def _doc(text, spans, doc_id="d1"):
    return json.dumps({"doc_id": doc_id, "text": text,
                       "spans": [dict(start=s, end=e, label=l, surface=text[s:e] if sf is None else sf)
                                 for s, e, l, sf in spans]})


def test_labels_are_the_eight_table_values():
    assert {m.value for m in EntityLabel} == {"PER", "DATE", "LOC", "ORG", "AGE", "TEL", "REF", "QID"}
    with pytest.raises(AnnotationError):
        EntityLabel.parse("NAME")


def test_load_thread_sentence():
    doc = load_annotated(io.BytesIO(_doc("Mr. Durand born in Dijon", [(4, 10, "PER", None)]).encode()))
    assert doc.spans[0].surface == "Durand"
    assert doc.spans[0].label is EntityLabel.PER


def test_empty_spans():
    doc = load_annotated(_doc("nothing to see", []))
    assert doc.spans == ()


def test_start_after_end_rejected():
    with pytest.raises(ValidationError):
        load_annotated(_doc("Mr. Durand born in Dijon", [(10, 4, "PER", "")]))


def test_overlap_names_both_spans():
    with pytest.raises(ValidationError) as exc:
        load_annotated(_doc("Mr. Durand born in Dijon", [(4, 10, "PER", None), (8, 15, "LOC", None)]))
    assert "(4,10,PER)" in str(exc.value) and "(8,15,LOC)" in str(exc.value)


def test_surface_mismatch():
    with pytest.raises(ValidationError):
        load_annotated(_doc("Mr. Durand born in Dijon", [(4, 10, "PER", "Dupont")]))


def test_span_past_end():
    with pytest.raises(ValidationError):
        load_annotated(_doc("short", [(2, 9, "PER", "ort")]))


def test_malformed_json_reports_line():
    with pytest.raises(FormatError) as exc:
        load_annotated(b'{\n  "doc_id": "x",\n  "text": \n}')
    assert exc.value.line == 4


def test_missing_field():
    with pytest.raises(FormatError):
        load_annotated('{"doc_id": "x", "text": "t"}')


def test_unicode_offsets_are_code_points():
    text = "Née à Besançon le 3 mars"
    i = text.index("Besançon")
    doc = load_annotated(_doc(text, [(i, i + 8, "LOC", None)]).encode("utf-8"))
    assert doc.spans[0].surface == "Besançon"


def test_spans_get_sorted():
    text = "Dijon and Beaune"
    doc = AnnotatedDocument("x", text, (EntitySpan(10, 16, EntityLabel.LOC, "Beaune"),
                                        EntitySpan(0, 5, EntityLabel.LOC, "Dijon")))
    assert [s.start for s in doc.spans] == [0, 10]


@st.composite
def documents(draw):
    text = draw(st.text(alphabet="abcdéç Dijon0123456789/", min_size=1, max_size=60))
    cuts = sorted(draw(st.sets(st.integers(0, len(text)), max_size=8)))
    spans = []
    for a, b in zip(cuts[::2], cuts[1::2]):
        if a < b:
            spans.append((a, b, draw(st.sampled_from(list(EntityLabel))).value, None))
    return _doc(text, spans, doc_id=draw(st.text(min_size=1, max_size=8)))


@given(documents())
def test_round_trip(raw):
    doc = load_annotated(raw)
    again = load_annotated(dumps_annotated(doc).encode("utf-8"))
    assert again == doc
    assert dumps_annotated(again) == dumps_annotated(doc)


@pytest.mark.parametrize("lang,text,label,surface", [
    ("en", "admitted on 12/02/2020", EntityLabel.DATE, "12/02/2020"),
    ("en", "40 years old", EntityLabel.AGE, "40 years"),
    ("fr", "patient de 40 ans", EntityLabel.AGE, "40 ans"),
    ("en", "seen on February 26, 2020.", EntityLabel.DATE, "February 26, 2020"),
    ("fr", "vu le 26 février 2020", EntityLabel.DATE, "26 février 2020"),
    ("en", "surgery 10 years ago", EntityLabel.DATE, "10 years ago"),
    ("fr", "opéré il y a 10 ans", EntityLabel.DATE, "il y a 10 ans"),
    ("fr", "tel 03 80 12 34 56", EntityLabel.TEL, "03 80 12 34 56"),
    ("en", "call (555) 123-4567 today", EntityLabel.TEL, "(555) 123-4567"),
])
def test_pattern_recognize_single(lang, text, label, surface):
    spans = pattern_recognize(text, LocaleConfig(lang))
    assert [(s.label, s.surface) for s in spans] == [(label, surface)]


def test_pattern_recognize_nothing():
    assert pattern_recognize("no entities here") == []


@given(st.text(alphabet="0123456789/ -.:abyearsnoldago", max_size=80))
def test_pattern_recognize_output_is_valid(text):
    spans = pattern_recognize(text, LocaleConfig("en"))
    validate_spans(text, spans)
