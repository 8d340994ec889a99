import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore", DeprecationWarning)
    from fastapi.testclient import TestClient

from esrn.service.app import app


@pytest.fixture()
def client():
    return TestClient(app)
