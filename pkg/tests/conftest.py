import json
from importlib.resources import files

import pytest

from plansearch.dataset import bundled_fixtures, bundled_scene_document
from plansearch.dsl import parse_plan
from plansearch.scene import scene_from_document


@pytest.fixture(scope="session")
def ptr_doc():
    return bundled_scene_document("appendix_ptr")


@pytest.fixture(scope="session")
def clevr_doc():
    return bundled_scene_document("appendix_clevr")


@pytest.fixture(scope="session")
def ptr(ptr_doc):
    return scene_from_document(ptr_doc)


@pytest.fixture(scope="session")
def clevr(clevr_doc):
    return scene_from_document(clevr_doc)


@pytest.fixture(scope="session")
def appendix():
    return json.loads(files("plansearch.data").joinpath("appendix_plans.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def gold_plans(appendix):
    """question type -> corrected appendix plan"""
    return {g["question_type"]: parse_plan("\n".join(g["plan"])) for g in appendix["gold_plans"]}


@pytest.fixture(scope="session")
def fixtures():
    return bundled_fixtures()


@pytest.fixture(scope="session")
def records(fixtures):
    return {r.id: r for r in fixtures.records}


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
