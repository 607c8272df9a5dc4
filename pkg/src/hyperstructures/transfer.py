"""Moving bond structure onto other collections.

:func:`pullback` represents a foreign collection inside level 0 of an
existing hyperstructure and keeps exactly the bonds that lie entirely over
it.  :func:`from_composition` builds a hyperstructure out of a chain of
maps ``S1 <- S2 <- ... <- Sn`` by taking iterated preimages.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .core import Bond, ElementId, Hyperstructure
from .errors import FormatError, MalformedChain, RepresentationMismatch, UnknownLabel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Representation:
    """Injective assignment of foreign labels to base elements."""

    image_map: Mapping[str, str]
    source: frozenset = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "image_map", dict(self.image_map))
        if self.source is None:
            object.__setattr__(self, "source", frozenset(self.image_map))
        else:
            object.__setattr__(self, "source", frozenset(self.source))

    @classmethod
    def identity(cls, h: Hyperstructure) -> "Representation":
        return cls({label: label for label in h.base})

    def inverse(self) -> dict:
        return {x: z for z, x in self.image_map.items()}


def check_representation(h: Hyperstructure, r: Representation) -> None:
    if set(r.image_map) != set(r.source):
        raise RepresentationMismatch("the map must be defined on exactly the source collection")
    images = list(r.image_map.values())
    if len(set(images)) != len(images):
        raise RepresentationMismatch("representation is not injective")
    for z, x in sorted(r.image_map.items()):
        if not h.has_element(ElementId(x, 0)):
            raise RepresentationMismatch(f"{z!r} maps to {x!r}, which is not a base element")


def pullback(h: Hyperstructure, r: Representation) -> Hyperstructure:
    """Pull the bonds of ``h`` back along ``r``.

    A bond survives when its whole boundary survived one level down; level-1
    boundaries are relabelled into the source collection.  Top levels that
    lost every bond are dropped; levels that were already empty are kept.
    """
    check_representation(h, r)
    inverse = r.inverse()
    kept: dict = {}

    def relabel(e: ElementId) -> ElementId:
        return ElementId(inverse[e.label], 0) if e.level == 0 else e

    alive = {ElementId(x, 0) for x in inverse}
    for k in range(1, h.order + 1):
        for b in sorted(h.bonds, key=lambda b: b.id):
            if b.level == k and b.boundary <= alive:
                kept[b.id] = Bond(b.id, frozenset(relabel(m) for m in b.boundary), b.formation_state)
        alive = {bid for bid in kept if bid.level == k}

    states = {}
    for (level, subset), values in h.states.items():
        if level == 0:
            if all(m.label in inverse for m in subset):
                states[(0, frozenset(relabel(m) for m in subset))] = values
        elif all(m in kept for m in subset):
            states[(level, subset)] = values

    sections = {}
    for elem, bid in h.identity_sections.items():
        if bid in kept and (elem.level > 0 and elem in kept or elem.level == 0 and elem.label in inverse):
            sections[relabel(elem)] = bid

    order = h.order
    top_source = max([0] + [b.level for b in h.bonds])
    top_result = max([0] + [bid.level for bid in kept])
    if top_result < top_source:
        order = top_result
        states = {key: v for key, v in states.items() if key[0] <= order}
    return Hyperstructure.from_parts(order, sorted(r.source), kept.values(), states, sections, h.strict)


def relabel_base(h: Hyperstructure, mapping: Mapping[str, str]) -> Hyperstructure:
    """Rename base elements through a bijection; bonds keep their labels."""
    return pullback(h, Representation({new: old for old, new in mapping.items()}))


@dataclass(frozen=True)
class CompositionChain:
    """Finite sets ``S1..Sn`` and maps ``maps[i]: spaces[i+1] -> spaces[i]``."""

    spaces: tuple
    maps: tuple

    def __post_init__(self):
        object.__setattr__(self, "spaces", tuple(tuple(s) for s in self.spaces))
        object.__setattr__(self, "maps", tuple(dict(m) for m in self.maps))
        self._check()

    def _check(self) -> None:
        if not self.spaces:
            raise MalformedChain("a composition chain needs at least one space")
        if len(self.maps) != len(self.spaces) - 1:
            raise MalformedChain(f"{len(self.spaces)} spaces need {len(self.spaces) - 1} maps")
        for i, space in enumerate(self.spaces):
            if len(set(space)) != len(space):
                raise MalformedChain(f"space {i + 1} has repeated labels")
            if not all(isinstance(x, str) for x in space):
                raise MalformedChain(f"space {i + 1} has non-string labels")
        for i, phi in enumerate(self.maps):
            domain, codomain = set(self.spaces[i + 1]), set(self.spaces[i])
            if set(phi) != domain:
                raise MalformedChain(f"map {i + 1} is not total on space {i + 2}")
            bad = sorted(x for x, y in phi.items() if y not in codomain)
            if bad:
                raise MalformedChain(f"map {i + 1} sends {bad[0]!r} outside space {i + 1}")

    @property
    def length(self) -> int:
        return len(self.spaces)

    def preimage(self, i: int, s: str) -> list:
        """Preimage of ``s`` (in space index ``i``) under ``maps[i]``."""
        return [x for x in self.spaces[i + 1] if self.maps[i][x] == s]

    def skipped(self) -> list:
        """``(space_number, label)`` pairs with no bound preimage, top-down numbering."""
        out = []
        present = set(self.spaces[-1])
        for i in range(len(self.spaces) - 2, -1, -1):
            image = {self.maps[i][x] for x in present}
            out.extend((i + 1, s) for s in self.spaces[i] if s not in image)
            present = image
        return sorted(out)

    def to_dict(self) -> dict:
        return {"spaces": [list(s) for s in self.spaces], "maps": [dict(m) for m in self.maps]}

    @classmethod
    def from_dict(cls, data) -> "CompositionChain":
        try:
            return cls(data["spaces"], data["maps"])
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise FormatError(f"malformed composition chain: {exc!r}") from exc

    @classmethod
    def load(cls, path) -> "CompositionChain":
        return cls.from_dict(_read_json(path))


def from_composition(c: CompositionChain) -> Hyperstructure:
    """Hyperstructure of iterated preimages.

    The base is the last space.  Each element of the space above with a
    nonempty preimage becomes a level-1 bond binding that preimage, and so
    on upwards; elements whose induced boundary is empty are skipped (see
    :meth:`CompositionChain.skipped`).
    """
    n = c.length
    h = Hyperstructure(n - 1)
    for x in c.spaces[-1]:
        h.add_base_element(x)
    present = set(c.spaces[-1])
    for level in range(1, n):
        i = n - 1 - level  # space index of the level-`level` bonds
        made = set()
        for s in c.spaces[i]:
            binds = [x for x in c.preimage(i, s) if x in present]
            if binds:
                h.add_bond(level, binds, label=s)
                made.add(s)
        present = made
    skipped = c.skipped()
    if skipped:
        log.info("skipped %d element(s) with empty preimage: %s", len(skipped), skipped)
    return h


def cluster_by_preimage(c: CompositionChain, z: str, targets: Sequence[str]) -> bool:
    """Whether ``z`` in the last space maps successively onto ``targets``.

    ``targets`` lists ``s_{n-1}, s_{n-2}, ...`` from the space just above the
    base upwards; a shorter prefix asks a lower-order question.
    """
    n = c.length
    if z not in set(c.spaces[-1]):
        raise UnknownLabel(f"{z!r} is not in the base space")
    if len(targets) > n - 1:
        raise UnknownLabel(f"at most {n - 1} targets for a chain of {n} spaces")
    current = z
    for step, s in enumerate(targets):
        i = n - 2 - step
        if s not in set(c.spaces[i]):
            raise UnknownLabel(f"{s!r} is not in space {i + 1}")
        current = c.maps[i][current]
        if current != s:
            return False
    return True


def load_representation(path) -> tuple:
    """Read a representation file; returns ``(target_structure, representation)``.

    The target path is resolved relative to the representation file.
    """
    data = _read_json(path)
    try:
        target = Path(path).parent / data["target"]
        mapping = data["map"]
        if not isinstance(mapping, dict):
            raise FormatError("representation map must be an object")
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed representation: {exc!r}") from exc
    return Hyperstructure.load(target), Representation(mapping)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
