"""Physical constants (SI) shared by every module and by the tests."""

from __future__ import annotations

import json

G = 6.674e-11
HBAR = 1.054571817e-34
C_LIGHT = 2.99792458e8
MU0 = 1.25663706e-6
EPS0 = 8.8541878e-12
KB = 1.380649e-23
G_EARTH = 9.81
Z0 = 377.0
E_CHARGE = 1.602176634e-19

CONSTANTS = {
    "G": G,
    "hbar": HBAR,
    "c": C_LIGHT,
    "mu0": MU0,
    "eps0": EPS0,
    "kB": KB,
    "g": G_EARTH,
    "Z0": Z0,
    "e": E_CHARGE,
}


def constants_json() -> str:
    """Serialized constants table (sorted keys, full precision)."""
    return json.dumps(CONSTANTS, sort_keys=True, indent=2)
