from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from ds3sim.group import OMEGA, OMEGA_BAR, S3
from ds3sim.lattice import ground_state
from ds3sim.protocols import ProtocolContext

DATA = Path(__file__).parent / 'data'
_COEFF = {'1': 1.0 + 0j, 'w': OMEGA, 'wb': OMEGA_BAR}


def load_product_listing(key: str) -> np.ndarray:
    """36x36 matrix on two qudits from the frozen ``|g1,g2><h1,h2|`` listing."""
    rows = json.loads((DATA / 'ribbon_products.json').read_text())[key]
    m = np.zeros((36, 36), dtype=complex)
    for g1, g2, h1, h2, c in rows:
        r = 6 * S3.element(g1) + S3.element(g2)
        k = 6 * S3.element(h1) + S3.element(h2)
        m[r, k] += _COEFF[c]
    return m


@pytest.fixture(scope='session')
def vacuum1():
    return ground_state('plaquette1')


@pytest.fixture(scope='session')
def vacuum2():
    return ground_state('plaquette2')


@pytest.fixture(scope='session')
def ctx1(vacuum1):
    return ProtocolContext('plaquette1', vacuum=vacuum1)


@pytest.fixture(scope='session')
def ctx2(vacuum2):
    return ProtocolContext('plaquette2', vacuum=vacuum2)


@pytest.fixture(scope='session')
def dense_ctx():
    return ProtocolContext('plaquette1', dense=True)
