import numpy as np
import pytest

from eventspec import Wavelet, SmoothingWindow, eigensystem_cached


@pytest.fixture(scope="session")
def morlet():
    return Wavelet.morlet()


@pytest.fixture(scope="session")
def mexhat():
    return Wavelet.mexican_hat()


@pytest.fixture(scope="session")
def rect10():
    return SmoothingWindow.rectangular(10.0)


@pytest.fixture(scope="session")
def morlet_sys10():
    return eigensystem_cached("morlet", 10.0)


@pytest.fixture(scope="session")
def mexhat_sys10():
    return eigensystem_cached("mexhat", 10.0)


@pytest.fixture(scope="session")
def morlet_sys20():
    return eigensystem_cached("morlet", 20.0)


@pytest.fixture(scope="session")
def mexhat_sys20():
    return eigensystem_cached("mexhat", 20.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
