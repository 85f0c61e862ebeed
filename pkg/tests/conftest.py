import numpy as np
import pytest

from tlsbath.inference import TLSFitParams
from tlsbath.table import ROWS

TWO_PI = 2 * np.pi
SWEEP_N = np.logspace(0, 5, 20)
SWEEP_DETUNINGS = (-4e6, -1.5e6, 1.5e6, 4e6)


@pytest.fixture
def sio2_row():
    return ROWS[11]


@pytest.fixture
def sio2_truth(sio2_row):
    r = sio2_row
    return TLSFitParams.from_table(r.p0_table, r.g_khz, r.gamma1_khz, 200.0, r.f_c_ghz)
