from pathlib import Path

import pytest

from genderlens.morpho import default_articles, default_lexicon

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def articles():
    return default_articles()


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def pro_anti_records():
    from winomt_fixture import build_pro_anti

    return build_pro_anti()


@pytest.fixture(scope="session")
def regular_records(pro_anti_records):
    from winomt_fixture import build_extras

    pro, anti = pro_anti_records
    return pro + anti + build_extras()
