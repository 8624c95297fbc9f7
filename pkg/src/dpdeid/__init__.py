"""d-private surrogate generation for de-identifying annotated clinical text."""

__version__ = "0.1.0"

from .annotation import (AnnotatedDocument, EntityLabel, EntitySpan, load_annotated,
                         pattern_recognize, save_annotated)
from .config import PipelineConfig
from .dpcore import (BudgetLedger, MemoTable, RandomSource, allocate_budget, laplace_sample,
                     memo_get_or_insert, sanitize_temporal)
from .geoloc import (LocationDb, candidate_set, feature_distance, load_location_db,
                     location_distribution, sanitize_location)
from .rewrite import SanitizedDocument, SurrogatePool, audit_report, sanitize_document
from .temporal import (Granularity, LocaleConfig, TemporalEntity, parse_temporal, render_temporal,
                       temporal_distance)
