"""Shared fixtures: coverage sets are built once per session and cached on
disk under .mirage_cache so repeated test runs skip the build."""

from pathlib import Path

import pytest

from mirage import coverage

CACHE_DIR = Path(__file__).resolve().parent.parent / ".mirage_cache"


@pytest.fixture(scope="session")
def cov_cache() -> str:
    CACHE_DIR.mkdir(exist_ok=True)
    return str(CACHE_DIR)


def _pair(n: int, cache_dir: str):
    basis = coverage.BasisGateSpec.iswap_root(n)
    std = coverage.get_coverage(basis, mirror=False, cache_dir=cache_dir)
    ext = coverage.get_coverage(basis, mirror=True, cache_dir=cache_dir)
    return basis, std, ext


@pytest.fixture(scope="session")
def sqiswap_sets(cov_cache):
    return _pair(2, cov_cache)


@pytest.fixture(scope="session")
def niswap3_sets(cov_cache):
    return _pair(3, cov_cache)


@pytest.fixture(scope="session")
def niswap4_sets(cov_cache):
    return _pair(4, cov_cache)
