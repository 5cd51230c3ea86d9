"""Shared fixtures data for the test suite."""

import json
from fractions import Fraction
from pathlib import Path

DATA = Path(__file__).parent / "data"


def reference_densities():
    """{(m, n, l): {"nu_c": Fraction, "nu_nc": Fraction, "nu": Fraction}} of reference values."""
    raw = json.loads((DATA / "reference_densities.json").read_text())
    return {tuple(int(x) for x in k.split(",")): {kk: Fraction(vv) for kk, vv in v.items()}
            for k, v in raw.items()}


# reference nu_nc for this row disagrees with nu - nu_c; only nu_c and nu are compared
SUSPECT_NU_NC = {(1, 4, 6)}
