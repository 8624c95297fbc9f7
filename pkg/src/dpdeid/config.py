"""Pipeline configuration: one JSON file, overridden by command-line flags."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional

from .dpcore import check_epsilon
from .temporal import LocaleConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    epsilon: float = 1.0
    seed: Optional[int] = None
    locale: str = "fr"
    day_month_order: str = "dmy"
    reference_date: dt.date = field(default_factory=dt.date.today)
    locations_db: Optional[str] = None
    feature_columns: Optional[List[str]] = None
    k: int = 10
    geo_threshold_km: Optional[float] = 100.0
    restore_order: bool = False
    age_cap: Optional[int] = None
    strict: bool = True
    workers: int = 1
    input_dir: Optional[str] = None
    output_dir: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.reference_date, str):
            try:
                object.__setattr__(self, "reference_date", dt.date.fromisoformat(self.reference_date))
            except ValueError:
                raise ConfigError(f"reference_date must be ISO-8601, got {self.reference_date!r}") from None
        try:
            object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
            self.locale_config
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.seed is not None and not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ConfigError("k must be an integer >= 1")
        if self.geo_threshold_km is not None and not self.geo_threshold_km >= 0:
            raise ConfigError("geo_threshold_km must be >= 0")
        if self.age_cap is not None and not (isinstance(self.age_cap, int) and self.age_cap >= 0):
            raise ConfigError("age_cap must be a non-negative integer")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError("workers must be an integer >= 1")

    @property
    def locale_config(self) -> LocaleConfig:
        return LocaleConfig(self.locale, self.day_month_order, self.reference_date)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)

    def override(self, **changes) -> "PipelineConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        known = {f.name for f in fields(self)}
        unknown = sorted(set(changes) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reference_date"] = self.reference_date.isoformat()
        return d
