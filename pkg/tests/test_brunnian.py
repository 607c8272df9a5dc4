import math

import pytest
from hypothesis import given, settings, strategies as st

from hyperstructures.brunnian import (
    BRUNNIAN,
    expected_sizes,
    generate_brunnian,
    is_brunnian_pattern,
    parse_signature,
    remove_element,
)
from hyperstructures.cluster import support
from hyperstructures.core import Bond, ElementId, Hyperstructure
from hyperstructures.errors import BadSignature, UnknownElement


def E(label, level=0):
    return ElementId(label, level)


@pytest.mark.parametrize(
    "sig, sizes",
    [([3, 3], [9, 3, 1]), ([3], [3, 1]), ([3, 3, 3], [27, 9, 3, 1]), ([2, 4], [8, 4, 1])],
)
def test_sizes(sig, sizes):
    h = generate_brunnian(sig)
    assert h.level_sizes() == sizes
    assert h.validate() == []


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=5).filter(lambda s: math.prod(s) <= 10_000))
def test_size_law(sig):
    h = generate_brunnian(sig)
    k = len(sig)
    assert h.level_sizes() == [math.prod(sig[j:]) for j in range(k + 1)]
    assert expected_sizes(sig) == h.level_sizes()
    for b in h.bonds:
        assert len(b.boundary) == sig[b.level - 1]
        assert b.formation_state == BRUNNIAN
    assert is_brunnian_pattern(h)


def test_labels():
    h = generate_brunnian([3, 3])
    assert E("e_1.1") in h.level_elements(0)
    assert h.boundary(E("b_2_1", 2)) == {E(f"b_1_{i}", 1) for i in (1, 2, 3)}
    assert h.boundary(E("b_1_2", 1)) == {E(f"e_{i}.2") for i in (1, 2, 3)}


def test_deterministic():
    assert generate_brunnian([3, 2, 2]).dumps() == generate_brunnian([3, 2, 2]).dumps()


@pytest.mark.parametrize("sig", [[], [0], [3, -1], ["3"], [True]])
def test_bad_signature(sig):
    with pytest.raises(BadSignature):
        generate_brunnian(sig)


def test_parse_signature():
    assert parse_signature("3,3") == (3, 3)
    with pytest.raises(BadSignature):
        parse_signature("3,x")


def test_remove_ring():
    h = generate_brunnian([3, 3])
    out = remove_element(h, E("e_1.1"))
    assert out.level_sizes() == [8, 2, 0]
    assert out.validate() == []
    assert h.level_sizes() == [9, 3, 1]  # input untouched


def test_remove_trimer():
    h = generate_brunnian([3, 3])
    out = remove_element(h, E("b_1_1", 1))
    assert out.level_sizes() == [9, 2, 0]
    assert out.validate() == []


def test_non_brunnian_bond_shrinks():
    h = Hyperstructure(1)
    for x in "xy":
        h.add_base_element(x)
    h.add_bond(1, ["x", "y"], "loose", "p")
    out = remove_element(h, E("x"))
    assert out.boundary(E("p", 1)) == {E("y")}
    assert out.validate() == []
    gone = remove_element(out, E("y"))
    assert gone.level_sizes() == [0, 0]


def test_shrunk_bond_stays_consistent_with_state_table():
    h = Hyperstructure(1)
    for x in "xy":
        h.add_base_element(x)
    h.assign_state(0, ["y"], "other")
    h.add_bond(1, ["x", "y"], "loose", "p")
    out = remove_element(h, E("x"))
    assert out.validate() == []


def test_remove_unknown():
    with pytest.raises(UnknownElement):
        remove_element(generate_brunnian([3]), E("zz"))


@pytest.mark.parametrize("sig", [[3], [3, 3], [2, 3, 2], [1, 3]])
def test_total_fragility_and_locality(sig):
    h = generate_brunnian(sig)
    k = len(sig)
    for z in sorted(h.level_elements(0)):
        out = remove_element(h, z)
        assert out.level_size(k) == 0
        removed = {b.id for b in h.bonds} - {b.id for b in out.bonds}
        ancestors = {b.id for b in h.bonds if z in support(h, b.id)}
        assert removed == ancestors
        assert len(removed) == k


def test_recognizer():
    assert is_brunnian_pattern(generate_brunnian([3, 3]))
    assert not is_brunnian_pattern(Hyperstructure(0))
    assert not is_brunnian_pattern(Hyperstructure(2))

    h = generate_brunnian([3, 3])
    bonds = list(h.bonds)
    moved = E("e_1.1")
    for i, b in enumerate(bonds):
        if b.id == E("b_1_1", 1):
            bonds[i] = Bond(b.id, b.boundary - {moved}, b.formation_state)
        elif b.id == E("b_1_2", 1):
            bonds[i] = Bond(b.id, b.boundary | {moved}, b.formation_state)
    skewed = Hyperstructure.from_parts(h.order, h.base, bonds)
    assert skewed.validate() == []
    assert sorted(len(b.boundary) for b in skewed.bonds if b.level == 1) == [2, 3, 4]
    assert not is_brunnian_pattern(skewed)
