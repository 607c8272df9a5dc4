"""Higher-order Brunnian patterns ``B(n1, ..., nk)``.

Level 0 holds ``n1 * ... * nk`` elements; every bond at level ``j`` binds
``nj`` elements of level ``j - 1`` and the bonds of each level partition
the level below.  All bonds are fragile: losing any constituent destroys
the bond, and the loss propagates upwards.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Sequence

from .core import Bond, ElementId, Hyperstructure
from .errors import BadSignature, UnknownElement

BRUNNIAN = "brunnian"


def check_signature(branching: Sequence[int]) -> tuple:
    sig = tuple(branching)
    if not sig:
        raise BadSignature("signature needs at least one branching number")
    for n in sig:
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise BadSignature(f"branching numbers must be positive integers, got {n!r}")
    return sig


def parse_signature(text: str) -> tuple:
    try:
        return check_signature([int(part) for part in text.split(",")])
    except ValueError as exc:
        raise BadSignature(f"cannot parse signature {text!r}") from exc


def element_label(index: Sequence[int]) -> str:
    return "e_" + ".".join(str(i) for i in index)


def bond_label(level: int, suffix: Sequence[int]) -> str:
    # the single top bond gets suffix "1"
    return f"b_{level}_" + (".".join(str(i) for i in suffix) if suffix else "1")


def expected_sizes(branching: Sequence[int]) -> list:
    sig = check_signature(branching)
    return [math.prod(sig[j:]) for j in range(len(sig) + 1)]


def generate_brunnian(branching: Sequence[int]) -> Hyperstructure:
    """Build ``B(n1, ..., nk)`` with deterministic labels.

    Base elements are ``e_{i1.i2...ik}`` with ``1 <= ij <= nj``; the level-j
    bond grouping all elements that share ``(i_{j+1}, ..., i_k)`` is
    ``b_{j}_{i_{j+1}...i_k}``.
    """
    sig = check_signature(branching)
    k = len(sig)
    h = Hyperstructure(k)
    for index in itertools.product(*(range(1, n + 1) for n in reversed(sig))):
        h.add_base_element(element_label(tuple(reversed(index))))

    def child(level: int, suffix: tuple, i: int) -> ElementId:
        if level == 1:
            return ElementId(element_label((i,) + suffix), 0)
        return ElementId(bond_label(level - 1, (i,) + suffix), level - 1)

    for j in range(1, k + 1):
        for rev in itertools.product(*(range(1, n + 1) for n in reversed(sig[j:]))):
            suffix = tuple(reversed(rev))
            binds = [child(j, suffix, i) for i in range(1, sig[j - 1] + 1)]
            h.add_bond(j, binds, BRUNNIAN, bond_label(j, suffix))
    return h


def remove_element(h: Hyperstructure, z) -> Hyperstructure:
    """Return a copy of ``h`` without ``z`` and with the damage propagated.

    Bonds formed in the ``"brunnian"`` state die with any constituent.
    Other bonds just lose the member and die only when nothing is left.
    Dead bonds are removed constituents of their own parents in turn.
    """
    zid = z if isinstance(z, ElementId) else h.find(z)
    if not h.has_element(zid):
        raise UnknownElement(f"{zid} does not exist")

    dead = {zid}
    boundaries = {b.id: set(b.boundary) for b in h.bonds}
    frontier = [zid]
    while frontier:
        gone = frontier.pop()
        for pid in sorted(h.parents(gone)):
            if pid in dead:
                continue
            boundaries[pid].discard(gone)
            if h.bond(pid).formation_state == BRUNNIAN or not boundaries[pid]:
                dead.add(pid)
                frontier.append(pid)

    bonds = [
        Bond(b.id, frozenset(boundaries[b.id]), b.formation_state)
        for b in h.bonds
        if b.id not in dead
    ]
    shrunk = {b.id: b for b in bonds if b.boundary != h.boundary(b.id)}
    states = {
        key: set(values) for key, values in h.states.items() if not (key[1] & dead)
    }
    for b in shrunk.values():
        entry = states.get((b.level - 1, b.boundary))
        if b.formation_state is not None and entry is not None:
            entry.add(b.formation_state)
    sections = {
        e: bid for e, bid in h.identity_sections.items() if e not in dead and bid not in dead
    }
    base = [label for label in h.base if ElementId(label, 0) not in dead]
    return Hyperstructure.from_parts(h.order, base, bonds, states, sections, h.strict)


def is_brunnian_pattern(h: Hyperstructure) -> bool:
    """Whether ``h`` has the shape of some generated ``B(n1, ..., nk)``."""
    if h.order < 1 or not h.base or h.validate():
        return False
    for j in range(1, h.order + 1):
        level = [b for b in h.bonds if b.level == j]
        if not level or any(b.formation_state != BRUNNIAN for b in level):
            return False
        if len({len(b.boundary) for b in level}) != 1:
            return False
        cover = Counter(m for b in level for m in b.boundary)
        if set(cover) != h.level_elements(j - 1) or any(n != 1 for n in cover.values()):
            return False
    return h.level_size(h.order) == 1
