"""Acceptance gate: every criterion runs at its pinned tolerance.

One test per criterion; each prints its PASS/FAIL line.  The regularity
criteria share their elliptic solves through a module-level cache.
"""

import pytest

from fraclab.acceptance import CRITERIA

_shared = {}


@pytest.fixture(scope="module")
def out_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance"))


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i:02d}" for i in range(1, 11)])
def test_criterion(fn, out_dir):
    result = fn(out_dir, _shared)
    print(result.line())
    assert result.passed, result.detail
