import numpy as np
import pytest

from fluofloq import Modulation, SystemParams

OMEGA_Z = 40.0


def biharmonic(p: int, phi: float = 0.0, amplitude: float = OMEGA_Z, r: float = 1.0) -> Modulation:
    return Modulation.biharmonic(OMEGA_Z, amplitude, p, r, phi)


@pytest.fixture
def mollow() -> tuple[SystemParams, Modulation]:
    """変調なし、Ω_x = 10κ、δ = 0。"""
    return SystemParams(10.0), Modulation.unmodulated(OMEGA_Z)


@pytest.fixture
def parity_p3() -> tuple[SystemParams, Modulation]:
    """p = 3、δ = 0 で一般化パリティが成り立つ。"""
    return SystemParams(10.0), biharmonic(3)


@pytest.fixture
def detuned_p3() -> tuple[SystemParams, Modulation]:
    """p = 3、δ = 5κ。"""
    return SystemParams(10.0, 5.0), biharmonic(3)


@pytest.fixture
def phase0_p2() -> tuple[SystemParams, Modulation]:
    """p = 2、δ = 0、φ = 0。"""
    return SystemParams(10.0), biharmonic(2)


@pytest.fixture
def quarter_p2() -> tuple[SystemParams, Modulation]:
    """p = 2、δ = 0、φ = π/2。"""
    return SystemParams(10.0), biharmonic(2, 0.5 * np.pi)
