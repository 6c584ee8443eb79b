import numpy as np
import pytest

from g2kleinian.cpoly import CPoly, INF, is_inf, sphere_roots
from g2kleinian.disks import (Disk, DiskTriple, chordal, factor_by_disks, find_disks,
                              is_subordinate, pair_roots)
from g2kleinian.errors import SubordinationError

from conftest import random_sextic


def _triple(c1, c2, c3, r):
    return DiskTriple(*(Disk("finite", c, r) for c in (c1, c2, c3)))


def test_chordal():
    assert chordal(0, 0) == 0
    assert chordal(0, INF) == pytest.approx(2.0)
    assert chordal(1, -1) == pytest.approx(2.0)
    assert chordal(1e8, INF) < 1e-7


def test_subordination_examples():
    f = CPoly.from_roots([0, 0, 1, 1, -1, -1])
    assert is_subordinate(f, _triple(0, 1, -1, 0.4))
    with pytest.raises(SubordinationError):
        _triple(0, 1, -1, 0.5)
    assert not is_subordinate(f, _triple(0, 1, 5, 0.4))


def test_exterior_disk_holds_infinity():
    f = CPoly.from_roots([0.1, -0.1, 2, 2.1, 10], 3.0)  # quintic: one root at infinity
    D = DiskTriple(Disk("finite", 0, 0.5), Disk("finite", 2, 0.5), Disk("exterior", 0, 5))
    assert is_subordinate(f, D)
    pairs = pair_roots(sphere_roots(f), D)
    assert any(is_inf(x) for x in pairs[2])


def test_disk_validation():
    with pytest.raises(SubordinationError):
        Disk("finite", 0, -1)
    with pytest.raises(SubordinationError):
        Disk("square", 0, 1)
    with pytest.raises(SubordinationError):
        DiskTriple(Disk("exterior", 0, 5), Disk("exterior", 0, 6), Disk("finite", 0, 1))
    with pytest.raises(SubordinationError):
        DiskTriple.from_json([{"kind": "finite"}] * 3)


def test_json_round_trip():
    D = DiskTriple(Disk("finite", 1j, 0.3), Disk("finite", 2, 0.5), Disk("exterior", 0, 9))
    assert DiskTriple.from_json(D.to_json()) == D


def test_factor_by_disks():
    f = CPoly.from_roots([0.1, -0.1, 1.05, 0.95, -1 + 0.1j, -1 - 0.1j], 2.5)
    D = _triple(0, 1, -1, 0.4)
    p1, p2, p3 = factor_by_disks(f, D)
    assert p1.lead == 1 and p2.lead == 1
    assert (p1 * p2 * p3).allclose(f)
    with pytest.raises(SubordinationError):
        factor_by_disks(f, _triple(0, 1, 5, 0.4))


@pytest.mark.parametrize("roots", [
    [0.01, -0.01, 1.02, 0.98, 5j, 5.1j],
    [1, -1, 1j, -1j, 2, -2],
])
def test_find_disks_finite(roots):
    f = CPoly.from_roots(roots)
    assert is_subordinate(f, find_disks(f))


def test_find_disks_sixth_roots_and_quintic():
    f = CPoly([-1, 0, 0, 0, 0, 0, 1])
    assert is_subordinate(f, find_disks(f))
    q = CPoly([0.3, -1.0, 0.2j, 0.7, 0.5, 4.0])
    assert is_subordinate(q, find_disks(q))


def test_find_disks_random(rng):
    for _ in range(30):
        f = random_sextic(rng)
        D = find_disks(f)
        pairs = pair_roots(sphere_roots(f), D)
        assert pairs is not None
