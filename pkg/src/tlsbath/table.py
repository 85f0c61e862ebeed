"""Published TLS bath parameters for 13 lumped-element resonators.

Columns follow the table layout: TLS damping at zero temperature and pump
``gamma_c0/2pi`` (kHz), coupling ``g/2pi`` (kHz), spectral density ``P0``
(table units, "MHz^-1"), energy relaxation ``gamma1/2pi`` (kHz) and
resonance frequency ``omega_c/2pi`` (GHz).

Unit convention: the rows satisfy ``gamma_c0/2pi = 2 pi * P0 * (g/2pi)^2``
with ``g/2pi`` in MHz, i.e. the table's ``P0`` is a density per 10^6 rad/s.
Internally ``P0`` is per rad/s, so ``P0_internal = 1e-6 * P0_table``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["TableRow", "ROWS", "P0_TABLE_TO_INTERNAL", "rows_for"]

# seconds (per rad/s) per table unit
P0_TABLE_TO_INTERNAL = 1e-6


@dataclass(frozen=True)
class TableRow:
    wafer: str
    gamma_c0_khz: float
    gamma_c0_err: float
    g_khz: float
    g_err: float
    p0_table: float
    p0_err: float
    gamma1_khz: float
    gamma1_err: float
    f_c_ghz: float

    @property
    def p0(self):
        return self.p0_table * P0_TABLE_TO_INTERNAL

    @property
    def g(self):
        return 2 * np.pi * self.g_khz * 1e3

    @property
    def gamma1(self):
        return 2 * np.pi * self.gamma1_khz * 1e3

    @property
    def gamma2(self):
        return 0.5 * self.gamma1

    @property
    def omega_c(self):
        return 2 * np.pi * self.f_c_ghz * 1e9

    def implied_gamma_c0_khz(self):
        """``P0 g^2 / 2pi`` computed from the row's own P0 and g, in kHz."""
        return self.p0 * self.g**2 / (2 * np.pi) / 1e3

    def n_tls(self):
        """Number of TLS within a linewidth, ``P0 gamma2 / 2pi``."""
        return self.p0 * self.gamma2 / (2 * np.pi)


ROWS = (
    TableRow("Si/Si3N4", 2000, 73, 540, 98, 1.1, 0.4, 3400, 1000, 6.037),
    TableRow("Si/Si3N4", 1200, 86, 510, 90, 0.79, 0.31, 3500, 1400, 5.958),
    TableRow("Si/Si3N4", 620, 69, 440, 170, 0.56, 0.4, 4300, 2200, 5.886),
    TableRow("Si/Si3N4", 790, 90, 240, 59, 2.3, 1.4, 5300, 2500, 5.742),
    TableRow("Si", 300, 22, 200, 60, 1.3, 0.39, 2200, 820, 5.069),
    TableRow("Si", 300, 22, 170, 43, 1.8, 0.52, 2200, 710, 5.300),
    TableRow("Si", 330, 19, 200, 44, 1.3, 0.36, 2400, 790, 5.378),
    TableRow("Si", 330, 22, 150, 27, 2.3, 0.54, 2500, 710, 5.229),
    TableRow("Si", 280, 23, 160, 44, 1.8, 0.57, 2300, 800, 5.114),
    TableRow("Si", 410, 24, 220, 37, 1.4, 0.41, 1000, 840, 5.443),
    TableRow("Si/SiO2", 1400, 28, 380, 33, 1.5, 0.25, 2700, 870, 7.657),
    TableRow("Si/SiO2", 1900, 50, 170, 10, 11, 1.4, 2800, 440, 7.521),
    TableRow("Si/SiO2", 1300, 18, 150, 11, 10, 1.4, 1300, 440, 7.109),
)


def rows_for(wafer):
    return [r for r in ROWS if r.wafer == wafer]
