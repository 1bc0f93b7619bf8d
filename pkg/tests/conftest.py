import pytest

import helpers
from r5curve import analyze, load_fixture
from r5curve.darboux import all_geodesics


@pytest.fixture(scope="session")
def example_scene():
    return load_fixture("worked_example")


@pytest.fixture(scope="session")
def example_app(example_scene):
    return analyze(example_scene.surfaces, example_scene.start())


@pytest.fixture(scope="session")
def example_geodesics(example_app):
    return all_geodesics(example_app)


@pytest.fixture(scope="session")
def example_trace():
    return helpers.example_trace()


@pytest.fixture(scope="session")
def circle_loop():
    return helpers.circle_loop()


@pytest.fixture(scope="session")
def helix_scene():
    return load_fixture("ruled_helix")


@pytest.fixture(scope="session")
def circle_scene():
    return load_fixture("circle")


@pytest.fixture(scope="session")
def line_scene():
    return load_fixture("line")


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(helpers.ACCEPTANCE):
        terminalreporter.write_line(helpers.ACCEPTANCE[n])
