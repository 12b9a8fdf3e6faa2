import pytest

from mubsorter.hilbert import build_mub_table
from mubsorter.optics import Material, OpticalConfig
from mubsorter.sorter import SorterConfig, build_sorter, find_zmax


@pytest.fixture(scope="session")
def mubs():
    return build_mub_table(3)


@pytest.fixture(scope="session")
def ptr_optics():
    return OpticalConfig(Material(1.4865, 0.0005), wavelength=1085e-9, aperture=1e-2, emulsion_length=1e-2)


@pytest.fixture(scope="session")
def degenerate_spec(ptr_optics):
    return build_sorter(SorterConfig(ptr_optics, mub_index=4, degenerate_kz=True))


@pytest.fixture(scope="session")
def default_spec(ptr_optics):
    return build_sorter(SorterConfig(ptr_optics, mub_index=4))


@pytest.fixture(scope="session")
def degenerate_zmax(degenerate_spec):
    return find_zmax(degenerate_spec)


@pytest.fixture(scope="session")
def default_zmax(default_spec):
    return find_zmax(default_spec)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
