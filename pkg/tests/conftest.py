from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctxmem.geometry import build_structure  # noqa: E402


@pytest.fixture(params=["square", "pentagram", "doily"])
def structure(request):
    return build_structure(request.param)
