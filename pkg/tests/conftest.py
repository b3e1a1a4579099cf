"""Shared fixtures: the small corpus of towers every test module exercises."""

from __future__ import annotations

import pytest

import flowcat as fc


@pytest.fixture(scope="session")
def sphere_towers() -> dict[int, fc.Tower]:
    out = {}
    for n in (1, 2, 3):
        fs, decls = fc.sphere_system(n)
        out[n] = fc.build_tower(fs, decls)
    return out


@pytest.fixture(scope="session")
def deformed_fs() -> fc.FlowSystem:
    return fc.deformed_sphere_system()


@pytest.fixture(scope="session")
def deformed_tower(deformed_fs) -> fc.Tower:
    return fc.build_tower(deformed_fs)


@pytest.fixture(scope="session")
def deformed_view(deformed_tower) -> fc.GlobularSet:
    return fc.GlobularSet(deformed_tower)


@pytest.fixture(scope="session")
def random_towers() -> dict[int, fc.Tower]:
    return {seed: fc.build_tower(fc.random_system(seed)) for seed in range(20)}
