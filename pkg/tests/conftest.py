import functools

import pytest

from parajc import carrier, green_ansatz


@functools.lru_cache(maxsize=None)
def cached_ops(p: int, M: int):
    return green_ansatz.build_para_ops(p, M)


@functools.lru_cache(maxsize=None)
def cached_rep(p: int, M: int, M_keep: int | None = None):
    ops = cached_ops(p, M)
    basis = carrier.extract_carrier(ops, M_keep=M_keep)
    projected = carrier.project_ops(ops, basis)
    return ops, basis, projected


@pytest.fixture
def ops_factory():
    return cached_ops


@pytest.fixture
def rep_factory():
    return cached_rep
