import random

import pytest
from hypothesis import given, settings, strategies as st

from hyperstructures.brunnian import generate_brunnian
from hyperstructures.core import ElementId, Hyperstructure
from hyperstructures.errors import MalformedChain, RepresentationMismatch, UnknownLabel
from hyperstructures.transfer import (
    CompositionChain,
    Representation,
    cluster_by_preimage,
    from_composition,
    pullback,
    relabel_base,
)

from helpers import assert_composition_equivalence, random_chain, random_hyperstructure


@pytest.fixture
def chain():
    return CompositionChain(
        [["a"], ["u", "v"], ["1", "2", "3", "4"]],
        [{"u": "a", "v": "a"}, {"1": "u", "2": "u", "3": "v", "4": "v"}],
    )


def test_identity_pullback():
    h = generate_brunnian([3, 3])
    assert pullback(h, Representation.identity(h)) == h


def test_pullback_onto_one_trimer():
    h = generate_brunnian([3, 3])
    r = Representation({"p": "e_1.1", "q": "e_2.1", "s": "e_3.1"})
    out = pullback(h, r)
    assert out.level_sizes() == [3, 1]
    assert out.boundary(ElementId("b_1_1", 1)) == {ElementId(x, 0) for x in "pqs"}
    assert out.validate() == []


def test_pullback_empty_collection():
    h = generate_brunnian([3, 3])
    out = pullback(h, Representation({}))
    assert out.level_sizes() == [0]
    assert out.bonds == ()


def test_pullback_keeps_empty_top_levels_of_source():
    h = Hyperstructure(3)
    h.add_base_element("x")
    h.add_bond(1, ["x"], label="t")
    assert pullback(h, Representation.identity(h)).level_sizes() == [1, 1, 0, 0]


def test_pullback_carries_states_and_sections():
    h = Hyperstructure(1)
    for x in "ab":
        h.add_base_element(x)
    h.assign_state(0, ["a"], "s")
    h.add_bond(1, ["a"], "s", "i_a")
    h.set_identity_section(0, "a", "i_a")
    h.add_bond(1, ["a", "b"], label="ab")
    out = pullback(h, Representation({"z": "a"}))
    assert out.level_sizes() == [1, 1]
    assert out.state_entry(0, [ElementId("z", 0)]) == {"s"}
    assert out.identity_sections == {ElementId("z", 0): ElementId("i_a", 1)}
    assert out.validate() == []


def test_representation_errors():
    h = generate_brunnian([3])
    with pytest.raises(RepresentationMismatch):
        pullback(h, Representation({"p": "e_1", "q": "e_1"}))
    with pytest.raises(RepresentationMismatch):
        pullback(h, Representation({"p": "nope"}))
    with pytest.raises(RepresentationMismatch):
        pullback(h, Representation({"p": "e_1"}, source={"p", "q"}))


def test_relabel_base_is_invertible():
    h = generate_brunnian([2, 3])
    fwd = {x: f"new_{x}" for x in h.base}
    back = {v: k for k, v in fwd.items()}
    assert relabel_base(relabel_base(h, fwd), back) == h


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_inclusion_is_monotone(seed):
    rng = random.Random(seed)
    h = random_hyperstructure(rng)
    base = sorted(h.base)
    big = rng.sample(base, rng.randint(0, len(base)))
    small = rng.sample(big, rng.randint(0, len(big)))
    kept_small = {b.id for b in pullback(h, Representation({x: x for x in small})).bonds}
    kept_big = {b.id for b in pullback(h, Representation({x: x for x in big})).bonds}
    assert kept_small <= kept_big


def _hand_inclusion(h, image):
    alive = {ElementId(x, 0) for x in image}
    kept = set()
    for k in range(1, h.order + 1):
        level = {b.id for b in h.bonds if b.level == k and b.boundary <= alive}
        kept |= level
        alive = level
    return kept


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pullback_matches_hereditary_rule(seed):
    rng = random.Random(seed)
    h = random_hyperstructure(rng)
    image = rng.sample(sorted(h.base), rng.randint(0, len(h.base)))
    out = pullback(h, Representation({f"z_{x}": x for x in image}))
    assert {b.id for b in out.bonds} == _hand_inclusion(h, image)
    assert out.validate() == []


# -- composition chains ------------------------------------------------------


def test_from_composition(chain):
    h = from_composition(chain)
    assert h.level_sizes() == [4, 2, 1]
    assert h.boundary(ElementId("u", 1)) == {ElementId("1", 0), ElementId("2", 0)}
    assert h.boundary(ElementId("a", 2)) == {ElementId("u", 1), ElementId("v", 1)}
    assert chain.skipped() == []
    assert h.validate() == []


def test_constant_maps_give_a_single_tower():
    c = CompositionChain([["t"], ["m"], ["1", "2", "3"]], [{"m": "t"}, {x: "m" for x in "123"}])
    h = from_composition(c)
    assert h.level_sizes() == [3, 1, 1]
    assert h.boundary(ElementId("m", 1)) == h.level_elements(0)


def test_empty_preimage_is_skipped():
    c = CompositionChain([["a", "b"], ["u", "w"], ["1", "2"]], [{"u": "a", "w": "b"}, {"1": "u", "2": "u"}])
    h = from_composition(c)
    assert c.skipped() == [(1, "b"), (2, "w")]
    assert h.level_sizes() == [2, 1, 1]


def test_malformed_chains():
    with pytest.raises(MalformedChain):
        CompositionChain([["a"], ["u"]], [])
    with pytest.raises(MalformedChain):
        CompositionChain([["a"], ["u", "v"]], [{"u": "a"}])
    with pytest.raises(MalformedChain):
        CompositionChain([["a"], ["u"]], [{"u": "zzz"}])
    with pytest.raises(MalformedChain):
        CompositionChain([["a", "a"]], [])
    with pytest.raises(MalformedChain):
        CompositionChain([], [])


def test_cluster_by_preimage(chain):
    assert cluster_by_preimage(chain, "1", ["u", "a"]) is True
    assert cluster_by_preimage(chain, "3", ["u", "a"]) is False
    assert cluster_by_preimage(chain, "3", ["v"]) is True
    with pytest.raises(UnknownLabel):
        cluster_by_preimage(chain, "9", ["u"])
    with pytest.raises(UnknownLabel):
        cluster_by_preimage(chain, "1", ["zz"])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_composition_equivalence(seed):
    assert_composition_equivalence(random_chain(random.Random(seed)))


def test_chain_file_round_trip(chain):
    assert CompositionChain.from_dict(chain.to_dict()) == chain
