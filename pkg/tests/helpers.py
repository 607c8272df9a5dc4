"""Random structure generators and brute-force oracles shared by the tests."""

import itertools
import math
import random
from dataclasses import replace

from hyperstructures.cluster import in_cluster_chain
from hyperstructures.core import (
    DANGLING,
    DUPLICATE,
    EMPTY,
    IDENTITY,
    LEVEL,
    STATE,
    ElementId,
    Hyperstructure,
)
from hyperstructures.errors import MalformedChain
from hyperstructures.transfer import CompositionChain, cluster_by_preimage, from_composition

STATES = ("a", "b", "c", None)


def random_hyperstructure(rng: random.Random, max_order=4, max_elements=50, sections=True):
    """Valid structure built only through the builder API."""
    order = rng.randint(0, max_order)
    h = Hyperstructure(order)
    n_base = rng.randint(1, min(12, max_elements))
    for i in range(n_base):
        h.add_base_element(f"x{i}")
    total = n_base
    for k in range(1, order + 1):
        below = sorted(h.level_elements(k - 1))
        n_bonds = rng.randint(1, max(1, min(6, len(below) + 1)))
        for j in range(n_bonds):
            if total >= max_elements:
                break
            size = rng.randint(1, min(4, len(below)))
            binds = rng.sample(below, size)
            state = rng.choice(STATES)
            entry = h.state_entry(k - 1, binds)
            if state is not None and (entry is not None or rng.random() < 0.5):
                h.assign_state(k - 1, binds, state)
                if rng.random() < 0.5:
                    h.assign_state(k - 1, binds, rng.choice(STATES[:3]))
            label = f"L{k}n{j}"
            h.add_bond(k, binds, state, label)
            total += 1
            if sections and size == 1 and rng.random() < 0.5:
                h.set_identity_section(k - 1, binds[0], ElementId(label, k))
    return h


def random_chain(rng: random.Random, max_spaces=4, max_size=6):
    n = rng.randint(1, max_spaces)
    spaces = [[f"s{i}_{j}" for j in range(rng.randint(1, max_size))] for i in range(n)]
    maps = [{x: rng.choice(spaces[i]) for x in spaces[i + 1]} for i in range(n - 1)]
    return CompositionChain(spaces, maps)


def bfs_support(h, bond_id):
    """Naive breadth-first expansion down to level 0, no memoization."""
    seen, queue, out = set(), [bond_id], set()
    while queue:
        e = queue.pop(0)
        if e.level == 0:
            out.add(e)
            continue
        for m in h.boundary(e):
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return out


def all_chains(h, max_len=None):
    """Every sequence of bonds (b0 at level 1, b1 at level 2, ...), linked or not."""
    top = h.order if max_len is None else min(h.order, max_len)
    for m in range(1, top + 1):
        levels = [sorted(h.level_elements(k)) for k in range(1, m + 1)]
        yield from itertools.product(*levels)


def _parts(h):
    return dict(
        order=h.order,
        base=list(h.base),
        bonds=list(h.bonds),
        states={k: set(v) for k, v in h.states.items()},
        identity_sections=h.identity_sections,
    )


def inject(kind, h, rng):
    """Return a broken copy of ``h`` exhibiting exactly one violation class."""
    parts = _parts(h)
    sectioned = set(parts["identity_sections"].values())
    free = [b for b in parts["bonds"] if b.id not in sectioned]
    if kind == DUPLICATE:
        parts["bonds"].append(rng.choice(parts["bonds"]))
    elif kind == EMPTY:
        i = parts["bonds"].index(rng.choice(free))
        parts["bonds"][i] = replace(parts["bonds"][i], boundary=frozenset())
    elif kind == DANGLING:
        b = rng.choice(free)
        i = parts["bonds"].index(b)
        ghost = ElementId("ghost", b.level - 1)
        parts["bonds"][i] = replace(b, boundary=b.boundary | {ghost})
    elif kind == LEVEL:
        b = rng.choice(free)
        i = parts["bonds"].index(b)
        wrong = rng.choice(sorted(h.level_elements(b.level)))
        parts["bonds"][i] = replace(b, boundary=b.boundary | {wrong})
    elif kind == STATE:
        b = rng.choice(parts["bonds"])
        i = parts["bonds"].index(b)
        parts["bonds"][i] = replace(b, formation_state="never-assigned")
        parts["states"].setdefault((b.level - 1, b.boundary), set()).add("a")
    elif kind == IDENTITY:
        b = rng.choice(parts["bonds"])
        candidates = sorted(h.level_elements(b.level - 1) - b.boundary) or sorted(b.boundary)
        x = rng.choice(candidates)
        if b.boundary == {x}:
            parts["identity_sections"][x] = ElementId("absent", b.level)
        else:
            parts["identity_sections"][x] = b.id
    return Hyperstructure.from_parts(**parts)


def structure_with_bonds(rng):
    while True:
        h = random_hyperstructure(rng, max_order=4, max_elements=50)
        if h.order >= 1 and any(b.id not in set(h.identity_sections.values()) for b in h.bonds):
            return h


def _apply_maps(c, z, targets):
    """Direct oracle: walk the maps one at a time."""
    x = z
    for step, s in enumerate(targets):
        x = c.maps[len(c.spaces) - 2 - step][x]
        if x != s:
            return False
    return True


def assert_composition_equivalence(c):
    h = from_composition(c)
    n = c.length
    for z in c.spaces[-1]:
        for m in range(1, n):
            for targets in itertools.product(*(c.spaces[n - 2 - s] for s in range(m))):
                expected = cluster_by_preimage(c, z, list(targets))
                assert expected == _apply_maps(c, z, targets)
                chain_ids = [ElementId(t, s + 1) for s, t in enumerate(targets)]
                if not all(h.has_element(e) for e in chain_ids):
                    assert expected is False
                    continue
                try:
                    got = in_cluster_chain(h, z, chain_ids)
                except MalformedChain:
                    assert expected is False
                    continue
                assert got == expected
    assert h.validate() == []


# plain-Python statistics oracles (no numpy)

def py_mean(xs):
    return math.fsum(xs) / len(xs)


def py_std(xs):
    m = py_mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))


def py_pearson(xs, ys):
    mx, my = py_mean(xs), py_mean(ys)
    return math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (len(xs) * py_std(xs) * py_std(ys))


def py_triple(xs, ys, zs):
    mx, my, mz = py_mean(xs), py_mean(ys), py_mean(zs)
    num = math.fsum((x - mx) * (y - my) * (z - mz) for x, y, z in zip(xs, ys, zs))
    return num / (len(xs) * py_std(xs) * py_std(ys) * py_std(zs))
