import json
import pathlib

import pytest

from retegraph import Session, load_graph

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fg1_doc():
    return json.loads((DATA / "fg1.json").read_text())


@pytest.fixture()
def fg1(fg1_doc):
    return load_graph(fg1_doc)


@pytest.fixture()
def fg1_session(fg1_doc):
    session = Session()
    session.load(fg1_doc)
    return session


@pytest.fixture()
def fg1_path():
    return str(DATA / "fg1.json")
