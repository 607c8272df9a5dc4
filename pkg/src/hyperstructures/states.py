"""Bottom-up state propagation over a hyperstructure.

Each level ``i >= 1`` has one :class:`Aggregator` that turns the multiset
of states on a bond's boundary into the state of the bond.  Given states
on the base level, :func:`propagate` fills in every bond; :func:`update`
re-propagates after local base changes, touching only the ancestors of
what changed.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    ElementId,
    Hyperstructure,
    StateValue,
    ValidationReport,
    Violation,
    decode_value,
    encode_value,
    is_state_value,
    value_sort_key,
)
from .errors import (
    AggregatorGap,
    FormatError,
    HyperstructureError,
    MissingBaseState,
    SpaceMismatch,
    StalePrior,
    UnknownElement,
)

NUMERIC = "numeric"
RULES = ("product", "sum", "min", "max", "concat-sorted", "table")
NUMERIC_RULES = ("product", "sum", "min", "max")

INCOMPLETE = "incomplete"
INCOMPATIBLE = "incompatible"
GAP = "aggregator-gap"


def _is_number(v) -> bool:
    return isinstance(v, Number) and not isinstance(v, bool)


@dataclass(frozen=True)
class StateSpace:
    name: str
    values: object = NUMERIC  # "numeric" or a frozenset of tokens

    def __post_init__(self):
        if self.values != NUMERIC:
            values = frozenset(self.values)
            if not values:
                raise SpaceMismatch(f"enumerated space {self.name!r} is empty")
            object.__setattr__(self, "values", values)

    @property
    def numeric(self) -> bool:
        return self.values == NUMERIC

    def __contains__(self, v) -> bool:
        if self.numeric:
            return _is_number(v)
        return v in self.values

    def to_dict(self) -> dict:
        if self.numeric:
            return {"name": self.name, "values": NUMERIC}
        return {
            "name": self.name,
            "values": [encode_value(v) for v in sorted(self.values, key=value_sort_key)],
        }

    @classmethod
    def from_dict(cls, data) -> "StateSpace":
        values = data.get("values", NUMERIC)
        if values != NUMERIC:
            values = [decode_value(v) for v in values]
        return cls(str(data["name"]), values)


def multiset_key(values: Iterable[StateValue]) -> tuple:
    return tuple(sorted(values, key=value_sort_key))


@dataclass(frozen=True)
class Aggregator:
    """Level connector: multiset of child states -> parent state."""

    level: int
    rule: str
    child_space: Optional[str] = None
    parent_space: Optional[str] = None
    table: Optional[Mapping] = None
    max_arity: Optional[int] = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise SpaceMismatch(f"unknown aggregation rule {self.rule!r}")
        if self.rule == "table":
            if self.table is None:
                raise AggregatorGap("table rule needs a table")
            object.__setattr__(
                self, "table", {multiset_key(k): v for k, v in dict(self.table).items()}
            )

    def apply(self, values: Sequence[StateValue]) -> StateValue:
        children = multiset_key(values)
        if not children:
            raise AggregatorGap(f"level-{self.level} aggregator applied to nothing")
        if self.rule in NUMERIC_RULES:
            if not all(_is_number(v) for v in children):
                raise SpaceMismatch(f"rule {self.rule!r} needs numeric states, got {children!r}")
            exact = all(isinstance(v, (int, Fraction)) for v in children)
            if self.rule == "sum":
                return sum(children) if exact else math.fsum(children)
            if self.rule == "product":
                return math.prod(children)
            return children[0] if self.rule == "min" else children[-1]
        if self.rule == "concat-sorted":
            return ",".join(str(v) for v in children)
        if self.max_arity is not None and len(children) > self.max_arity:
            raise AggregatorGap(f"arity {len(children)} exceeds the table's max {self.max_arity}")
        try:
            return self.table[children]
        except KeyError:
            raise AggregatorGap(f"table has no entry for {list(children)!r}") from None

    def to_dict(self) -> dict:
        out = {"level": self.level, "rule": self.rule}
        if self.child_space is not None:
            out["child_space"] = self.child_space
        if self.parent_space is not None:
            out["parent_space"] = self.parent_space
        if self.table is not None:
            out["table"] = [
                {"children": [encode_value(v) for v in k], "parent": encode_value(p)}
                for k, p in sorted(self.table.items(), key=lambda kv: [value_sort_key(v) for v in kv[0]])
            ]
        if self.max_arity is not None:
            out["max_arity"] = self.max_arity
        return out

    @classmethod
    def from_dict(cls, data) -> "Aggregator":
        table = None
        if data.get("table") is not None:
            table = {
                tuple(decode_value(v) for v in row["children"]): decode_value(row["parent"])
                for row in data["table"]
            }
        return cls(
            int(data["level"]),
            data["rule"],
            data.get("child_space"),
            data.get("parent_space"),
            table,
            data.get("max_arity"),
        )


@dataclass(frozen=True)
class _Plan:
    """Aggregators and resolved spaces, one entry per level."""

    aggs: dict
    spaces: dict  # level -> StateSpace or None


def _plan(h: Hyperstructure, spaces: Sequence[StateSpace], aggs: Sequence[Aggregator]) -> _Plan:
    by_name = {s.name: s for s in spaces}
    if len(by_name) != len(spaces):
        raise SpaceMismatch("state space names must be unique")
    by_level = {}
    for a in aggs:
        if a.level < 1 or a.level > h.order:
            raise AggregatorGap(f"aggregator for level {a.level} outside 1..{h.order}")
        if a.level in by_level:
            raise AggregatorGap(f"two aggregators for level {a.level}")
        by_level[a.level] = a
    missing = [k for k in range(1, h.order + 1) if k not in by_level]
    if missing:
        raise AggregatorGap(f"no aggregator for level(s) {missing}")

    def space(name: Optional[str], level: int) -> Optional[StateSpace]:
        if name is None:
            return spaces[level] if level < len(spaces) else None
        if name not in by_name:
            raise SpaceMismatch(f"unknown state space {name!r}")
        return by_name[name]

    level_spaces: dict = {}

    def bind(level: int, s: Optional[StateSpace]) -> None:
        if s is None:
            return
        prior = level_spaces.get(level)
        if prior is not None and prior != s:
            raise SpaceMismatch(f"level {level} is declared in both {prior.name!r} and {s.name!r}")
        level_spaces[level] = s

    if h.order == 0 and spaces:
        bind(0, spaces[0])
    for k, a in sorted(by_level.items()):
        child, parent = space(a.child_space, k - 1), space(a.parent_space, k)
        bind(k - 1, child)
        bind(k, parent)
        if a.rule in NUMERIC_RULES:
            for s in (child, parent):
                if s is not None and not s.numeric:
                    raise SpaceMismatch(f"rule {a.rule!r} at level {k} needs numeric spaces")
        if a.rule == "table":
            _check_table(a, child, parent)
    return _Plan(by_level, {k: level_spaces.get(k) for k in range(h.order + 1)})


def _check_table(a: Aggregator, child: Optional[StateSpace], parent: Optional[StateSpace]) -> None:
    if parent is not None:
        bad = [v for v in a.table.values() if v not in parent]
        if bad:
            raise SpaceMismatch(f"table at level {a.level} produces {bad[0]!r} outside {parent.name!r}")
    if child is not None and not child.numeric:
        for key in a.table:
            if any(v not in child for v in key):
                raise SpaceMismatch(f"table at level {a.level} reads {key!r} outside {child.name!r}")
        if a.max_arity is None:
            raise AggregatorGap(f"table at level {a.level} must declare max_arity")
        tokens = sorted(child.values, key=value_sort_key)
        for arity in range(1, a.max_arity + 1):
            for combo in itertools.combinations_with_replacement(tokens, arity):
                if multiset_key(combo) not in a.table:
                    raise AggregatorGap(f"table at level {a.level} misses {list(combo)!r}")


@dataclass(frozen=True)
class StateAssignment:
    """States for every element, tagged with the fingerprint of its inputs."""

    values: Mapping
    fingerprint: str
    spaces: tuple = field(default=())

    def __getitem__(self, eid: ElementId) -> StateValue:
        return self.values[eid]

    def __len__(self) -> int:
        return len(self.values)

    def diff(self, other: "StateAssignment") -> dict:
        """Elements whose state differs, mapped to ``(self_value, other_value)``."""
        keys = set(self.values) | set(other.values)
        return {
            k: (self.values.get(k), other.values.get(k))
            for k in sorted(keys)
            if self.values.get(k) != other.values.get(k)
            or type(self.values.get(k)) is not type(other.values.get(k))
        }

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "states": [
                {"level": e.level, "id": e.label, "value": encode_value(v)}
                for e, v in sorted(self.values.items())
            ],
        }


def fingerprint(h: Hyperstructure, spaces: Sequence[StateSpace], aggs: Sequence[Aggregator]) -> str:
    doc = {
        "h": h.to_dict(),
        "spaces": [s.to_dict() for s in spaces],
        "aggs": sorted((a.to_dict() for a in aggs), key=lambda d: d["level"]),
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _base_value(plan: _Plan, eid: ElementId, value) -> StateValue:
    if not is_state_value(value):
        raise SpaceMismatch(f"{eid} has unsupported state {value!r}")
    space = plan.spaces.get(0)
    if space is not None and value not in space:
        raise SpaceMismatch(f"{value!r} for {eid} is outside space {space.name!r}")
    return value


def _aggregate(h: Hyperstructure, plan: _Plan, values: Mapping, bid: ElementId) -> StateValue:
    b = h.bond(bid)
    out = plan.aggs[b.level].apply([values[m] for m in b.boundary])
    space = plan.spaces.get(b.level)
    if space is not None and out not in space:
        raise SpaceMismatch(f"state {out!r} of {bid} is outside space {space.name!r}")
    return out


def _base_map(h: Hyperstructure, base: Mapping) -> dict:
    out = {}
    for key, value in base.items():
        eid = key if isinstance(key, ElementId) else ElementId(key, 0)
        if eid.level != 0 or not h.has_element(eid):
            raise UnknownElement(f"{eid} is not a base element")
        out[eid] = value
    return out


def propagate(
    h: Hyperstructure,
    spaces: Sequence[StateSpace],
    aggs: Sequence[Aggregator],
    base: Mapping,
) -> StateAssignment:
    """Compute the state of every bond from the base states, bottom-up.

    Each aggregator's child and parent spaces are looked up by name; when
    an aggregator names none, ``spaces[i]`` is taken as the space of level
    ``i``.
    """
    plan = _plan(h, spaces, aggs)
    given = _base_map(h, base)
    values = {}
    for eid in sorted(h.level_elements(0)):
        if eid not in given:
            raise MissingBaseState(f"no state for {eid}")
        values[eid] = _base_value(plan, eid, given[eid])
    for b in sorted(h.bonds, key=lambda b: b.id):
        values[b.id] = _aggregate(h, plan, values, b.id)
    return StateAssignment(values, fingerprint(h, spaces, aggs), tuple(spaces))


def ancestors(h: Hyperstructure, elements: Iterable[ElementId]) -> set:
    out: set = set()
    frontier = list(elements)
    while frontier:
        e = frontier.pop()
        for p in h.parents(e):
            if p not in out:
                out.add(p)
                frontier.append(p)
    return out


def update(
    h: Hyperstructure,
    prior: StateAssignment,
    aggs: Sequence[Aggregator],
    changes: Mapping,
) -> StateAssignment:
    """Apply base changes to ``prior`` and re-propagate along ancestor chains.

    The result equals a full :func:`propagate` with the changed base; states
    outside the ancestors of changed elements are carried over untouched.
    """
    spaces = prior.spaces
    if prior.fingerprint != fingerprint(h, spaces, aggs):
        raise StalePrior("prior was not produced for this structure and these aggregators")
    plan = _plan(h, spaces, aggs)
    delta = {eid: _base_value(plan, eid, v) for eid, v in _base_map(h, changes).items()}
    values = dict(prior.values)
    values.update(delta)
    for bid in sorted(ancestors(h, delta)):
        values[bid] = _aggregate(h, plan, values, bid)
    return StateAssignment(values, prior.fingerprint, spaces)


def check_compatibility(
    h: Hyperstructure,
    assignment: StateAssignment,
    aggs: Sequence[Aggregator],
    rel_tol: float = 1e-9,
) -> ValidationReport:
    """Report every bond whose state disagrees with its aggregated boundary."""
    report = ValidationReport()
    values = assignment.values
    for eid in h.elements():
        if eid not in values:
            report.append(Violation(INCOMPLETE, str(eid), "no state"))
    by_level = {a.level: a for a in aggs}
    for b in sorted(h.bonds, key=lambda b: b.id):
        if b.id not in values or any(m not in values for m in b.boundary):
            continue
        agg = by_level.get(b.level)
        if agg is None:
            report.append(Violation(GAP, str(b.id), f"no aggregator for level {b.level}"))
            continue
        try:
            expected = agg.apply([values[m] for m in b.boundary])
        except HyperstructureError as exc:
            report.append(Violation(INCOMPATIBLE, str(b.id), f"{exc.code}: {exc}"))
            continue
        if not _same(values[b.id], expected, rel_tol):
            report.append(
                Violation(INCOMPATIBLE, str(b.id), f"has {values[b.id]!r}, boundary gives {expected!r}")
            )
    return report


def _same(a, b, rel_tol: float) -> bool:
    if _is_number(a) and _is_number(b):
        if isinstance(a, float) or isinstance(b, float):
            return math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0)
        return a == b
    return a == b


def load_states(data) -> tuple:
    """Parse a states document into ``(spaces, aggregators, base)``."""
    try:
        spaces = [StateSpace.from_dict(s) for s in data.get("spaces", [])]
        for a in data["aggregators"]:
            arity = a.get("max_arity")
            if arity is not None and (not isinstance(arity, int) or arity < 1):
                raise FormatError(f"bad max_arity {arity!r}")
        aggs = [Aggregator.from_dict(a) for a in data["aggregators"]]
        base = {str(k): decode_value(v) for k, v in data.get("base", {}).items()}
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise FormatError(f"malformed states document: {exc!r}") from exc
    return spaces, aggs, base
