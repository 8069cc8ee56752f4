from __future__ import annotations

import pytest

from bvalid.evaluator import Env


@pytest.fixture
def empty_env():
    return Env({}, {})
