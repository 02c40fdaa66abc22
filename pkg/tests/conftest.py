import os
from datetime import date, timedelta

import numpy as np
import pytest

from riskindexlab.series import LevelSeries

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def data_dir():
    return DATA


def daily_series(levels, start=date(2020, 1, 1), step_days=1, label="s"):
    dates = [start + timedelta(days=step_days * i) for i in range(len(levels))]
    return LevelSeries(dates, np.asarray(levels, dtype=float), label)


def write_csv(path, rows, header="date,level"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(str(x) for x in r) + "\n")
    return path


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
