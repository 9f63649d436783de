import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import qcloak as qc


@pytest.fixture(scope="session")
def free_medium():
    return qc.LayeredMedium((qc.Shell(0.0, 3.0, 1.0, 1.0),))


@pytest.fixture(scope="session")
def cloak_builder():
    """build(R, n_layers, c_inn) -> AcousticSystem with the doubled core."""
    def build(R=1.005, n_layers=50, c_inn=0.0):
        cs, ca = qc.DOUBLED_CORE
        layers = qc.homogenize(qc.truncate(R, cs, ca), n_layers)
        core = qc.CorePotential.step(c_inn, 0.9) if c_inn else None
        return qc.AcousticSystem(layers, core)
    return build
