import pytest

from syntrophy.growth import ChemostatConfig, GrowthModel

ACCEPTANCE_LINES = []


@pytest.fixture
def p10():
    return GrowthModel("monod_product", 8, 1, 2, 4, 2, 1)


@pytest.fixture
def p11():
    return GrowthModel("monod_product", 8, 1, 1.5, 7, 1, 1)


@pytest.fixture
def cfg():
    return ChemostatConfig(0.5, 3.0, 3.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
