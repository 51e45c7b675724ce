import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sniresume import fixtures, trust  # noqa: E402


@pytest.fixture(scope="session")
def google():
    return fixtures.google_tree()


@pytest.fixture(scope="session")
def google_chain():
    return fixtures.google_chain_relations()


@pytest.fixture(scope="session")
def corpus():
    return fixtures.corpus10()


@pytest.fixture(scope="session")
def corpus_relations(corpus):
    cert = trust.cert_trust_relations(corpus)
    records = trust.read_resumption_csv(fixtures.data_path("corpus10_resumption.csv"))
    res = trust.resumption_trust_relations(records)
    return {"certificate": cert, "resumption": res, "union": trust.union_relations(cert, res)}


@pytest.fixture(scope="session")
def data_dir():
    return fixtures.data_path("")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
