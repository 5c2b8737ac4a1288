import functools

import pytest

from ergochain import build_family, example_spec


@functools.lru_cache(maxsize=None)
def _fam(name: str, N: int):
    return build_family(example_spec(name), N)


@pytest.fixture
def fam():
    """Cached family factory: fam('geometric', 200)."""
    return _fam
