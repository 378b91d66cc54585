import numpy as np
import pytest

from twinbayes.graph import CausalGraph, Intervention
from twinbayes.model import cpts_from_tables

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fig1_graph(latent=()):
    return CausalGraph.from_edges("ZTY", [("Z", "T"), ("Z", "Y"), ("T", "Y")], latent=latent)


# P(Z=1)=0.3, P(Y=1|T=1,Z=0)=0.2, P(Y=1|T=1,Z=1)=0.9; the T and T=0 rows are free.
FIG1_TABLES = {
    "Z": np.array([0.7, 0.3]),
    "T": np.array([[0.8, 0.2], [0.2, 0.8]]),
    "Y": np.array([[[0.9, 0.1], [0.8, 0.2]], [[0.5, 0.5], [0.1, 0.9]]]),
}
FIG1_DO_Y1 = 0.7 * 0.2 + 0.3 * 0.9  # 0.41


@pytest.fixture
def fig1():
    return fig1_graph()


@pytest.fixture
def fig1_cpts(fig1):
    return cpts_from_tables(fig1, FIG1_TABLES)


@pytest.fixture
def do_t1():
    return Intervention("T", 1)
