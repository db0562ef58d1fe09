import pytest


def pytest_addoption(parser):
    parser.addoption("--longrun", action="store_true", default=False, help="run full-width long checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--longrun"):
        return
    skip = pytest.mark.skip(reason="long-run check; pass --longrun")
    for item in items:
        if "longrun" in item.keywords:
            item.add_marker(skip)
