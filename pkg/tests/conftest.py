import random

import numpy as np
import pytest

from pod_mpc.core.field import M61
from pod_mpc.core.sharing import SharingScheme
from pod_mpc.pod.auth import Identity, Keyring


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


@pytest.fixture
def modulus():
    return M61


@pytest.fixture
def shamir3():
    return SharingScheme.shamir(1, 3)


@pytest.fixture
def additive3():
    return SharingScheme.additive(3)


@pytest.fixture(params=["shamir", "additive"])
def scheme3(request):
    if request.param == "shamir":
        return SharingScheme.shamir(1, 3)
    return SharingScheme.additive(3)


@pytest.fixture
def keyring():
    ring = Keyring()
    for url in ("https://alice.example/profile/card#me", "https://bob.example/profile/card#me",
                "https://app.example/#me", "https://ea.example/#me"):
        ring.add(Identity.generate(url, seed=b"tests"))
    return ring


@pytest.fixture
def directory(keyring):
    return keyring.directory()
