import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

ASSETS = Path(__file__).resolve().parents[1] / "src" / "metaguard" / "assets"


@pytest.fixture
def bench_dir():
    return ASSETS / "bench"


COUNTER_POLICY = "fetch3: GG.onCall(fetch).moreThan(3).deny();\n"


@pytest.fixture
def counter_meta():
    from metaguard.policies import compile_policy, parse_policy
    return compile_policy(parse_policy(COUNTER_POLICY))
