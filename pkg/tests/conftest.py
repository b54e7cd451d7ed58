import pytest

from srfront.metric import builtin_chart, frame_from_metric

CHART_NAMES = ("flat", "sphere", "hyperbolic")


@pytest.fixture(scope="session")
def charts():
    return {name: builtin_chart(name) for name in CHART_NAMES}


@pytest.fixture(scope="session")
def frames(charts):
    return {name: frame_from_metric(chart) for name, chart in charts.items()}


@pytest.fixture(scope="session")
def flat(charts):
    return charts["flat"]


@pytest.fixture(scope="session")
def flat_frame(frames):
    return frames["flat"]


@pytest.fixture(scope="session")
def sphere(charts):
    return charts["sphere"]


@pytest.fixture(scope="session")
def sphere_frame(frames):
    return frames["sphere"]
