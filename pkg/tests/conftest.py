import pytest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from chadjoint.syntax import parse


@pytest.fixture
def P():
    return parse
