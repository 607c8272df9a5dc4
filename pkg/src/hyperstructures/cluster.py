"""Clustering queries, decomposition and resynthesis.

A bond's cluster is its boundary.  Chains of bonds ``(b0, b1, ...)`` with
``b0`` at level 1 and each bond bound by the next give higher-order
clusters.  :func:`decompose` unfolds a bond into a tree down to level 0
and :func:`resynthesize` rebuilds a hyperstructure from such trees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import (
    Bond,
    ElementId,
    Hyperstructure,
    StateValue,
    decode_value,
    encode_value,
)
from .errors import FormatError, MalformedChain, MalformedTree, UnknownBond, UnknownElement


@dataclass(frozen=True)
class DecompositionTree:
    node: ElementId
    state: Optional[StateValue] = None
    children: tuple = field(default=())

    @property
    def is_leaf(self) -> bool:
        return self.node.level == 0

    def leaves(self) -> frozenset:
        if self.is_leaf:
            return frozenset({self.node})
        return frozenset().union(*(c.leaves() for c in self.children))

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"element": self.node.label}
        out = {"bond": self.node.label, "level": self.node.level}
        if self.state is not None:
            out["state"] = encode_value(self.state)
        out["children"] = [c.to_dict() for c in self.children]
        return out

    @classmethod
    def from_dict(cls, data) -> "DecompositionTree":
        """Parse the nested form; levels are inferred from depth when absent."""
        try:
            return _tree_from_dict(data)
        except (KeyError, TypeError, AttributeError) as exc:
            raise FormatError(f"malformed decomposition tree: {exc!r}") from exc


def _tree_from_dict(data) -> DecompositionTree:
    if not isinstance(data, dict):
        raise FormatError(f"tree nodes must be objects, got {data!r}")
    if "element" in data:
        if "children" in data or "bond" in data:
            raise MalformedTree("a leaf cannot have children")
        return DecompositionTree(ElementId(_label(data["element"]), 0))
    if not isinstance(data["children"], list):
        raise FormatError("children must be a list")
    children = tuple(_tree_from_dict(c) for c in data["children"])
    if not children:
        raise MalformedTree(f"bond {data['bond']!r} has no children")
    level = data.get("level", 1 + max(c.node.level for c in children))
    if not isinstance(level, int) or isinstance(level, bool):
        raise FormatError(f"bad level {level!r}")
    state = decode_value(data["state"]) if data.get("state") is not None else None
    return DecompositionTree(ElementId(_label(data["bond"]), level), state, children)


def _label(x) -> str:
    if not isinstance(x, str):
        raise FormatError(f"labels must be strings, got {x!r}")
    return x


def _bond_id(h: Hyperstructure, bond_id) -> ElementId:
    if isinstance(bond_id, ElementId):
        h.bond(bond_id)
        return bond_id
    eid = h.find(bond_id)
    if eid.level == 0:
        raise UnknownBond(f"{eid} is a base element, not a bond")
    return eid


def members(h: Hyperstructure, bond_id) -> frozenset:
    return h.boundary(_bond_id(h, bond_id))


def check_chain(h: Hyperstructure, chain: Sequence) -> list:
    """Resolve a chain of bond labels; position ``i`` lives at level ``i + 1``."""
    if not chain:
        raise MalformedChain("chain is empty")
    resolved = []
    for i, item in enumerate(chain):
        level = i + 1
        eid = item if isinstance(item, ElementId) else ElementId(item, level)
        if eid.level != level:
            raise MalformedChain(f"chain position {i} must be a level-{level} bond, got {eid}")
        if not h.has_element(eid) or level > h.order:
            raise MalformedChain(f"no bond {eid}")
        resolved.append(eid)
    for lower, upper in zip(resolved, resolved[1:]):
        if lower not in h.boundary(upper):
            raise MalformedChain(f"{lower} is not bound by {upper}")
    return resolved


def in_cluster_chain(h: Hyperstructure, z, chain: Sequence) -> bool:
    """Whether base element ``z`` lies in the cluster ``clu(b0, ..., b_{m-1})``.

    A chain whose own links are broken raises :class:`MalformedChain`; only
    the bottom membership of ``z`` can make the answer false.
    """
    resolved = check_chain(h, chain)
    zid = z if isinstance(z, ElementId) else ElementId(z, 0)
    if zid.level != 0 or not h.has_element(zid):
        raise UnknownElement(f"{zid} is not a base element")
    return zid in h.boundary(resolved[0])


def support(h: Hyperstructure, bond_id) -> frozenset:
    """Base elements transitively bound by ``bond_id``."""
    root = bond_id if isinstance(bond_id, ElementId) and bond_id.level == 0 else None
    if root is not None:
        if not h.has_element(root):
            raise UnknownElement(f"{root} does not exist")
        return frozenset({root})
    root = _bond_id(h, bond_id)
    memo: dict = {}

    def walk(e: ElementId) -> frozenset:
        if e.level == 0:
            return frozenset({e})
        if e not in memo:
            memo[e] = frozenset().union(*(walk(m) for m in h.boundary(e)))
        return memo[e]

    return walk(root)


def decompose(h: Hyperstructure, bond_id) -> DecompositionTree:
    """Unfold a bond into a tree; shared sub-bonds are duplicated."""
    root = _bond_id(h, bond_id)
    memo: dict = {}

    def build(e: ElementId) -> DecompositionTree:
        if e.level == 0:
            return DecompositionTree(e)
        if e not in memo:
            b = h.bond(e)
            memo[e] = DecompositionTree(
                e, b.formation_state, tuple(build(m) for m in sorted(b.boundary))
            )
        return memo[e]

    return build(root)


def resynthesize(forest: Iterable[DecompositionTree]) -> Hyperstructure:
    """Rebuild a hyperstructure whose base is the union of all leaves.

    Nodes with the same label at the same level are merged; they must then
    agree on their state and children.
    """
    forest = list(forest)
    if not forest:
        raise MalformedTree("empty forest")
    base: set = set()
    bonds: dict = {}

    def visit(t: DecompositionTree) -> None:
        if t.node.level < 0:
            raise MalformedTree(f"negative level at {t.node}")
        if t.node.level == 0:
            if t.children:
                raise MalformedTree(f"leaf {t.node} has children")
            base.add(t.node.label)
            return
        if not t.children:
            raise MalformedTree(f"bond {t.node} has no children")
        for c in t.children:
            if c.node.level != t.node.level - 1:
                raise MalformedTree(f"{c.node} cannot be a child of {t.node}")
            visit(c)
        bond = Bond(t.node, frozenset(c.node for c in t.children), t.state)
        prior = bonds.get(t.node)
        if prior is not None and prior != bond:
            raise MalformedTree(f"conflicting definitions of {t.node}")
        bonds[t.node] = bond

    for t in forest:
        visit(t)
    order = max(t.node.level for t in forest)
    h = Hyperstructure.from_parts(order, sorted(base), bonds.values())
    report = h.validate()
    if report:
        raise MalformedTree(f"resynthesized structure is invalid: {report[0]}")
    return h


def trees_isomorphic(a: DecompositionTree, b: DecompositionTree) -> bool:
    """Label-preserving isomorphism; children are compared as multisets."""
    return _tree_key(a) == _tree_key(b)


def _tree_key(t: DecompositionTree):
    return (t.node.level, t.node.label, repr(t.state), tuple(sorted(_tree_key(c) for c in t.children)))
