import pytest

from newsdebias.pipeline import fit_models
from newsdebias.synthetic import SyntheticConfig, generate

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE_KEY]


@pytest.fixture(scope="session")
def synthetic_records():
    return generate(SyntheticConfig(n_sentences=500, seed=0))


@pytest.fixture(scope="session")
def synthetic_models(synthetic_records):
    return fit_models(synthetic_records)
