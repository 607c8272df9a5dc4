"""Multilevel bond structures.

A :class:`Hyperstructure` of order ``N`` has levels ``0..N``.  Level 0 holds
plain base elements; every element of a level ``k >= 1`` *is* a bond, and
each bond records the nonempty subset of level ``k - 1`` it binds (its
boundary) plus, optionally, the state under which it formed.  A partial
state table attaches sets of admissible states to subsets of any level.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Union

from .errors import (
    BadLevel,
    BoundaryMismatch,
    DuplicateLabel,
    EmptyBoundary,
    FormatError,
    HyperstructureError,
    InvalidHyperstructure,
    LevelMismatch,
    StateNotAssigned,
    UnknownBond,
    UnknownElement,
    AmbiguousLabel,
)

StateValue = Union[str, int, float, Fraction]

DANGLING = "dangling-reference"
LEVEL = "level-mismatch"
DUPLICATE = "duplicate-id"
EMPTY = "empty-boundary"
STATE = "state-not-assigned"
IDENTITY = "identity-section"
INJECTIVITY = "injectivity"

VIOLATION_KINDS = (DANGLING, LEVEL, DUPLICATE, EMPTY, STATE, IDENTITY, INJECTIVITY)


class InjectivityError(HyperstructureError):
    code = "injectivity"


@total_ordering
@dataclass(frozen=True)
class ElementId:
    label: str
    level: int

    def __lt__(self, other: "ElementId") -> bool:
        return (self.level, self.label) < (other.level, other.label)

    def __str__(self) -> str:
        return f"{self.label}@{self.level}"


@dataclass(frozen=True)
class Bond:
    id: ElementId
    boundary: frozenset
    formation_state: Optional[StateValue] = None

    @property
    def level(self) -> int:
        return self.id.level

    @property
    def label(self) -> str:
        return self.id.label


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}: {self.subject}" + (f" ({self.detail})" if self.detail else "")


class ValidationReport(list):
    """List of :class:`Violation`; empty means valid."""

    @property
    def ok(self) -> bool:
        return not self

    def kinds(self) -> set:
        return {v.kind for v in self}


def is_state_value(value: Any) -> bool:
    return isinstance(value, (str, int, float, Fraction)) and not isinstance(value, bool)


def value_sort_key(value: StateValue):
    """Total order over mixed state values (numbers before text)."""
    if isinstance(value, str):
        return (1, 0, value)
    return (0, value, "")


def _check_value(value: Any) -> StateValue:
    if not is_state_value(value):
        raise FormatError(f"unsupported state value {value!r}")
    return value


def encode_value(value: StateValue):
    if isinstance(value, Fraction):
        return {"rational": str(value)}
    return value


def decode_value(raw: Any) -> StateValue:
    if isinstance(raw, dict):
        if set(raw) != {"rational"}:
            raise FormatError(f"unsupported state value {raw!r}")
        try:
            return Fraction(raw["rational"])
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise FormatError(f"bad rational {raw!r}") from exc
    return _check_value(raw)


class Hyperstructure:
    """Hyperstructure of a fixed order, built bottom-up.

    The builder methods (:meth:`add_base_element`, :meth:`add_bond`,
    :meth:`assign_state`, :meth:`set_identity_section`) check every
    precondition, so a structure produced only through them always
    validates cleanly.  :meth:`from_parts` skips all checks; it exists for
    loaders and for tests that need to build deliberately broken input.
    """

    def __init__(self, order: int = 0, strict: bool = False):
        if not isinstance(order, int) or order < 0:
            raise BadLevel(f"order must be a nonnegative integer, got {order!r}")
        self._order = order
        self.strict = strict
        self._base: list = []
        self._bonds: list = []
        self._states: dict = {}
        self._sections: dict = {}
        self._reindex()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_parts(
        cls,
        order: int,
        base: Iterable[str],
        bonds: Iterable[Bond],
        states: Optional[Mapping] = None,
        identity_sections: Optional[Mapping] = None,
        strict: bool = False,
    ) -> "Hyperstructure":
        h = cls(order, strict)
        h._base = list(base)
        h._bonds = sorted(bonds, key=lambda b: b.id)
        h._states = {key: set(values) for key, values in (states or {}).items()}
        h._sections = dict(identity_sections or {})
        h._reindex()
        return h

    def copy(self) -> "Hyperstructure":
        return Hyperstructure.from_parts(
            self._order, self._base, self._bonds, self._states, self._sections, self.strict
        )

    def _reindex(self) -> None:
        self._base_set = set(self._base)
        self._bond_index = {b.id: b for b in self._bonds}
        self._parents = None

    def add_base_element(self, label: str) -> ElementId:
        if label in self._base_set:
            raise DuplicateLabel(f"{label!r} already exists at level 0")
        self._base.append(label)
        self._base_set.add(label)
        self._parents = None
        return ElementId(label, 0)

    def assign_state(self, level: int, subset: Iterable, value: StateValue) -> None:
        """Record ``value`` as an admissible state of ``subset`` at ``level``.

        A newly created entry is seeded with the formation states of any
        bonds already formed over that subset, so existing bonds never
        become inconsistent with the table.
        """
        self._check_level(level)
        members = self._resolve(subset, level)
        value = _check_value(value)
        key = (level, members)
        if key not in self._states:
            seeded = set()
            if level < self._order:
                seeded = {
                    b.formation_state
                    for b in self._bonds
                    if b.level == level + 1 and b.boundary == members and b.formation_state is not None
                }
            self._states[key] = seeded
        self._states[key].add(value)

    def add_bond(
        self,
        level: int,
        binds: Iterable,
        formation_state: Optional[StateValue] = None,
        label: Optional[str] = None,
    ) -> ElementId:
        if level < 1 or level > self._order:
            raise BadLevel(f"bonds live at levels 1..{self._order}, got {level}")
        members = self._resolve(binds, level - 1)
        if not members:
            raise EmptyBoundary("a bond must bind at least one element")
        if label is None:
            raise HyperstructureError("bond label is required")
        bond_id = ElementId(label, level)
        if bond_id in self._bond_index:
            raise DuplicateLabel(f"{label!r} already exists at level {level}")
        if formation_state is not None:
            formation_state = _check_value(formation_state)
            entry = self._states.get((level - 1, members))
            if entry is not None and formation_state not in entry:
                raise StateNotAssigned(
                    f"state {formation_state!r} is not assigned to the bound subset"
                )
        if self.strict:
            for other in self._bonds:
                if (
                    other.level == level
                    and other.boundary == members
                    and other.formation_state == formation_state
                ):
                    raise InjectivityError(
                        f"{other.id} already binds the same subset in the same state"
                    )
        bond = Bond(bond_id, members, formation_state)
        self._bonds.append(bond)
        self._bond_index[bond_id] = bond
        self._parents = None
        return bond_id

    def set_identity_section(self, level: int, element, bond_id) -> None:
        self._check_level(level)
        elem = self._resolve([element], level)
        (elem,) = elem
        bid = bond_id if isinstance(bond_id, ElementId) else ElementId(bond_id, level + 1)
        if bid.level != level + 1:
            raise LevelMismatch(f"identity bond for level {level} must live at level {level + 1}")
        if self.boundary(bid) != frozenset({elem}):
            raise BoundaryMismatch(f"boundary of {bid} is not {{{elem}}}")
        self._sections[elem] = bid

    def _resolve(self, items: Iterable, level: int) -> frozenset:
        out = set()
        for item in items:
            eid = item if isinstance(item, ElementId) else ElementId(item, level)
            if eid.level != level:
                raise LevelMismatch(f"{eid} is not at level {level}")
            if not self.has_element(eid):
                raise UnknownElement(f"{eid} does not exist")
            out.add(eid)
        return frozenset(out)

    def _check_level(self, k: int) -> None:
        if not isinstance(k, int) or k < 0 or k > self._order:
            raise BadLevel(f"level {k!r} outside 0..{self._order}")

    # -- queries ------------------------------------------------------------

    @property
    def order(self) -> int:
        return self._order

    @property
    def base(self) -> tuple:
        return tuple(self._base)

    @property
    def bonds(self) -> tuple:
        return tuple(self._bonds)

    @property
    def states(self) -> dict:
        return {key: frozenset(values) for key, values in self._states.items()}

    @property
    def identity_sections(self) -> dict:
        return dict(self._sections)

    def has_element(self, eid: ElementId) -> bool:
        if eid.level == 0:
            return eid.label in self._base_set
        return eid in self._bond_index

    def bond(self, bond_id) -> Bond:
        try:
            return self._bond_index[bond_id]
        except (KeyError, TypeError):
            raise UnknownBond(f"no bond {bond_id}") from None

    def boundary(self, bond_id) -> frozenset:
        return self.bond(bond_id).boundary

    def state_entry(self, level: int, subset: Iterable) -> Optional[frozenset]:
        entry = self._states.get((level, frozenset(subset)))
        return None if entry is None else frozenset(entry)

    def level_elements(self, k: int) -> frozenset:
        self._check_level(k)
        if k == 0:
            return frozenset(ElementId(label, 0) for label in self._base)
        return frozenset(b.id for b in self._bonds if b.level == k)

    def level_size(self, k: int) -> int:
        return len(self.level_elements(k))

    def level_sizes(self) -> list:
        return [self.level_size(k) for k in range(self._order + 1)]

    def elements(self) -> list:
        return sorted(ElementId(label, 0) for label in self._base_set) + sorted(self._bond_index)

    def parents(self, eid: ElementId) -> frozenset:
        """Bonds whose boundary contains ``eid``."""
        if self._parents is None:
            index = defaultdict(set)
            for b in self._bonds:
                for m in b.boundary:
                    index[m].add(b.id)
            self._parents = {k: frozenset(v) for k, v in index.items()}
        return self._parents.get(eid, frozenset())

    def find(self, label: str, level: Optional[int] = None) -> ElementId:
        """Look up an element by label, searching all levels if none is given."""
        if level is not None:
            eid = ElementId(label, level)
            if not self.has_element(eid):
                raise UnknownElement(f"{eid} does not exist")
            return eid
        hits = [
            ElementId(label, k)
            for k in range(self._order + 1)
            if self.has_element(ElementId(label, k))
        ]
        if not hits:
            raise UnknownElement(f"no element labelled {label!r}")
        if len(hits) > 1:
            raise AmbiguousLabel(f"{label!r} exists at levels {[e.level for e in hits]}")
        return hits[0]

    def top_bonds(self) -> list:
        """Bonds that are not bound by anything."""
        return [b.id for b in sorted(self._bonds, key=lambda b: b.id) if not self.parents(b.id)]

    # -- validation ---------------------------------------------------------

    def validate(self, strict: Optional[bool] = None) -> ValidationReport:
        strict = self.strict if strict is None else strict
        report = ValidationReport()

        def exists(e: ElementId) -> bool:
            if e.level == 0:
                return e.label in self._base_set
            return 1 <= e.level <= self._order and e in self._bond_index

        for label, n in sorted(Counter(self._base).items()):
            if n > 1:
                report.append(Violation(DUPLICATE, f"{label}@0", f"{n} occurrences"))
        for bid, n in sorted(Counter(b.id for b in self._bonds).items()):
            if n > 1:
                report.append(Violation(DUPLICATE, str(bid), f"{n} occurrences"))

        for b in self._bonds:
            k = b.level
            if k < 1 or k > self._order:
                report.append(Violation(LEVEL, str(b.id), f"bond level outside 1..{self._order}"))
            if not b.boundary:
                report.append(Violation(EMPTY, str(b.id)))
            for m in sorted(b.boundary):
                if m.level != k - 1:
                    report.append(Violation(LEVEL, str(b.id), f"binds {m} from the wrong level"))
                elif not exists(m):
                    report.append(Violation(DANGLING, str(b.id), f"binds missing {m}"))
            if b.formation_state is not None:
                entry = self._states.get((k - 1, b.boundary))
                if entry is not None and b.formation_state not in entry:
                    report.append(
                        Violation(STATE, str(b.id), f"state {b.formation_state!r} not in table")
                    )

        for (level, subset), _ in sorted(
            self._states.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))
        ):
            name = f"states[{level}:{','.join(e.label for e in sorted(subset))}]"
            if level < 0 or level > self._order:
                report.append(Violation(LEVEL, name, f"level outside 0..{self._order}"))
                continue
            for m in sorted(subset):
                if m.level != level:
                    report.append(Violation(LEVEL, name, f"member {m} from the wrong level"))
                elif not exists(m):
                    report.append(Violation(DANGLING, name, f"missing {m}"))

        for elem, bid in sorted(self._sections.items()):
            subject = f"I({elem})"
            if not exists(elem):
                report.append(Violation(IDENTITY, subject, "element missing"))
            elif bid.level != elem.level + 1 or not exists(bid):
                report.append(Violation(IDENTITY, subject, f"bond {bid} missing"))
            elif self._bond_index[bid].boundary != frozenset({elem}):
                report.append(Violation(IDENTITY, subject, f"boundary of {bid} is not {{{elem}}}"))

        if strict:
            groups = defaultdict(list)
            for b in self._bonds:
                groups[(b.level, b.boundary, b.formation_state)].append(b.id)
            for ids in groups.values():
                if len(ids) > 1:
                    names = ", ".join(str(i) for i in sorted(set(ids)))
                    report.append(Violation(INJECTIVITY, names, "same boundary and state"))
        return report

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        bonds = []
        for b in sorted(self._bonds, key=lambda b: b.id):
            entry = {"id": b.label, "level": b.level, "binds": sorted(m.label for m in b.boundary)}
            if b.formation_state is not None:
                entry["state"] = encode_value(b.formation_state)
            bonds.append(entry)
        states = [
            {
                "level": level,
                "subset": sorted(m.label for m in subset),
                "values": [encode_value(v) for v in sorted(values, key=value_sort_key)],
            }
            for (level, subset), values in self._states.items()
        ]
        states.sort(key=lambda s: (s["level"], s["subset"]))
        sections = [
            {"level": e.level, "element": e.label, "bond": bid.label}
            for e, bid in sorted(self._sections.items())
        ]
        return {
            "order": self._order,
            "base": sorted(self._base),
            "bonds": bonds,
            "states": states,
            "identity_sections": sections,
            "strict": self.strict,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hyperstructure):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self) -> str:
        return f"Hyperstructure(order={self._order}, sizes={self.level_sizes()})"

    @classmethod
    def from_dict(cls, data: Mapping, check: bool = True) -> "Hyperstructure":
        """Load the canonical document form.

        Bonds may appear in any order.  With ``check`` (the default) the
        result is validated and :class:`InvalidHyperstructure` is raised on
        any violation; ``check=False`` returns the raw structure so callers
        can inspect the report themselves.
        """
        try:
            order = data["order"]
            if not isinstance(order, int) or isinstance(order, bool) or order < 0:
                raise FormatError(f"bad order {order!r}")
            base = [_label(x) for x in data.get("base", [])]
            bonds = []
            for raw in data.get("bonds", []):
                level = _int(raw["level"])
                binds = frozenset(ElementId(_label(x), level - 1) for x in raw["binds"])
                state = decode_value(raw["state"]) if raw.get("state") is not None else None
                bonds.append(Bond(ElementId(_label(raw["id"]), level), binds, state))
            states: dict = {}
            for raw in data.get("states", []):
                level = _int(raw["level"])
                subset = frozenset(ElementId(_label(x), level) for x in raw["subset"])
                states.setdefault((level, subset), set()).update(
                    decode_value(v) for v in raw["values"]
                )
            sections = {}
            for raw in data.get("identity_sections", None) or []:
                level = _int(raw["level"])
                sections[ElementId(_label(raw["element"]), level)] = ElementId(
                    _label(raw["bond"]), level + 1
                )
            strict = data.get("strict", False)
            if not isinstance(strict, bool):
                raise FormatError("strict must be a boolean")
        except (KeyError, TypeError, AttributeError) as exc:
            raise FormatError(f"malformed hyperstructure document: {exc!r}") from exc
        h = cls.from_parts(order, base, bonds, states, sections, strict)
        if check:
            report = h.validate()
            if report:
                raise InvalidHyperstructure(report)
        return h

    @classmethod
    def loads(cls, text: str, check: bool = True) -> "Hyperstructure":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise FormatError("hyperstructure document must be a JSON object")
        return cls.from_dict(data, check=check)

    @classmethod
    def load(cls, path, check: bool = True) -> "Hyperstructure":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
        return cls.loads(text, check=check)


def _label(x: Any) -> str:
    if not isinstance(x, str):
        raise FormatError(f"labels must be strings, got {x!r}")
    return x


def _int(x: Any) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise FormatError(f"expected an integer, got {x!r}")
    return x


def new_hyperstructure(order: int, strict: bool = False) -> Hyperstructure:
    return Hyperstructure(order, strict)
