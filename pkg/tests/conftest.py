import datetime as dt

import pytest

from dpdeid import PipelineConfig, SurrogatePool, load_annotated, load_location_db
from dpdeid.data import path

REFERENCE = dt.date(2020, 12, 31)


@pytest.fixture(scope="session")
def thread_doc():
    with open(path("thread_example.json"), "rb") as fh:
        return load_annotated(fh)


@pytest.fixture(scope="session")
def region_db():
    with open(path("bfc_cities.csv"), encoding="utf-8") as fh:
        return load_location_db(fh)


@pytest.fixture(scope="session")
def pools():
    return SurrogatePool.default()


@pytest.fixture
def config():
    return PipelineConfig(epsilon=1.0, seed=20201231, locale="en", day_month_order="dmy",
                          reference_date=REFERENCE)
