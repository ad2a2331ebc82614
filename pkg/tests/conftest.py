import numpy as np
import pytest

from modesub import GateSpec, HermiteGaussSpec, SignalBeamSpec, preset_bbo

# tau of a 6 nm FWHM comb mode at 795 nm; the gate matches it in Sec.-V runs
TAU_COMB_FS = 93.11618228642854


@pytest.fixture(scope="session")
def bbo1co():
    return preset_bbo(1, "co")


@pytest.fixture(scope="session")
def gate94():
    return GateSpec(spectral=HermiteGaussSpec(order=0, scale=94.0))


@pytest.fixture(scope="session")
def signal_opt():
    return SignalBeamSpec(waist_s_um=107.7, spectral_tau_fs=TAU_COMB_FS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
