"""Physical constants and unit conversions.

Values come from ``scipy.constants`` (CODATA). They can be overridden by
pointing the ``TLSBATH_CONSTANTS`` environment variable at an INI file with
a ``[constants]`` section, e.g.::

    [constants]
    hbar = 1.054571817e-34
    k_B = 1.380649e-23

Overrides are applied once, at import time.
"""

import configparser
import os

import numpy as np
import scipy.constants as _sc

ENV_VAR = "TLSBATH_CONSTANTS"

HBAR = _sc.hbar
K_B = _sc.k
EPS0 = _sc.epsilon_0
MU0 = _sc.mu_0

_NAMES = {"hbar": "HBAR", "k_b": "K_B", "eps0": "EPS0", "mu0": "MU0"}


def load_overrides(path):
    """Read constant overrides from an INI file and return them as a dict."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"constants override file not found: {path}")
    if not parser.has_section("constants"):
        raise KeyError(f"{path}: missing [constants] section")
    out = {}
    for key, value in parser.items("constants"):
        name = _NAMES.get(key.lower())
        if name is None:
            raise KeyError(f"{path}: unknown constant {key!r}")
        out[name] = float(value)
    return out


def _apply_env_overrides():
    path = os.environ.get(ENV_VAR)
    if path:
        globals().update(load_overrides(path))


_apply_env_overrides()


def current():
    """Return the constants in effect as a plain dict (used in report headers)."""
    return {"hbar": HBAR, "k_B": K_B, "eps0": EPS0, "mu0": MU0}


def hz_to_angular(f):
    return 2.0 * np.pi * f


def angular_to_hz(omega):
    return omega / (2.0 * np.pi)


def db_to_linear(db):
    """Power ratio from decibels (10 log10 convention)."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)
