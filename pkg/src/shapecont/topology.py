"""Finite topologies on shapes.

A topology for a shape ``S`` is a finite family of parts of ``S`` that holds
the empty shape and ``S`` and is closed under sum and product.  Opens are
stored as a canonically sorted tuple so two topologies with the same parts
compare equal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .shapes import Shape, ShapeError, part_of, product, sum_, total

DEFAULT_MAX_OPENS = 4096
MAX_OPENS_ENV = "SHAPECONT_MAX_OPENS"


class TopologyError(ShapeError):
    pass


class TopologyOverflow(TopologyError):
    """Closure grew beyond the configured cap."""


def max_opens_default() -> int:
    raw = os.environ.get(MAX_OPENS_ENV)
    if raw is None:
        return DEFAULT_MAX_OPENS
    try:
        value = int(raw)
    except ValueError:
        raise TopologyError(f"{MAX_OPENS_ENV} must be an integer, got {raw!r}") from None
    if value < 2:
        raise TopologyError(f"{MAX_OPENS_ENV} must be at least 2")
    return value


def _sorted(shapes) -> tuple:
    return tuple(sorted(set(shapes), key=Shape.sort_key))


@dataclass(frozen=True)
class Topology:
    universe: Shape
    opens: tuple

    def __contains__(self, part: Shape) -> bool:
        return part in self._open_set

    def __len__(self):
        return len(self.opens)

    def __iter__(self):
        return iter(self.opens)

    @cached_property
    def _open_set(self) -> frozenset:
        return frozenset(self.opens)

    @property
    def empty(self) -> Shape:
        return Shape.empty(self.universe.kind)

    @classmethod
    def indiscrete(cls, universe: Shape) -> "Topology":
        return cls(universe, _sorted([Shape.empty(universe.kind), universe]))

    @classmethod
    def from_opens(cls, universe: Shape, opens: Iterable[Shape]) -> "Topology":
        """Wrap an explicit family, checking the topology axioms.

        Unlike :func:`generate` nothing is added: a family that is not
        already closed is rejected.
        """
        family = set(opens) | {Shape.empty(universe.kind), universe}
        for part in family:
            if not part_of(part, universe):
                raise TopologyError(f"open part is not a part of the universe: {part!r}")
        members = sorted(family, key=Shape.sort_key)
        for i, x in enumerate(members):
            for y in members[i + 1:]:
                for op, name in ((sum_, "sum"), (product, "product")):
                    z = op(x, y)
                    if z not in family:
                        raise TopologyError(f"family is not closed under {name}: {z!r} is missing")
        return cls(universe, tuple(members))

    def is_open(self, part: Shape) -> bool:
        return part in self._open_set

    def refine(self, new_parts: Iterable[Shape], max_opens: Optional[int] = None) -> "Topology":
        return refine(self, new_parts, max_opens)

    def reduced_basis(self) -> "ReducedBasis":
        return reduced_basis(self)

    def is_boolean(self) -> bool:
        return is_boolean(self)

    def lattice(self) -> "OpenLattice":
        return OpenLattice.of(self)

    def restricted(self, part: Shape) -> list:
        """The opens cut down to *part* (products with it), deduplicated."""
        return list(_sorted(product(u, part) for u in self.opens))


def generate(universe: Shape, subbasis: Iterable[Shape], max_opens: Optional[int] = None) -> Topology:
    """Smallest topology on *universe* containing every part in *subbasis*."""
    cap = max_opens if max_opens is not None else max_opens_default()
    seeds = []
    for part in subbasis:
        if not part_of(part, universe):
            raise TopologyError(f"subbasis part is not embedded in the universe: {part!r}")
        seeds.append(part)
    found: set[Shape] = set()
    members: list[Shape] = []
    queue = _sorted([Shape.empty(universe.kind), universe, *seeds])
    queue = list(queue)
    while queue:
        x = queue.pop(0)
        if x in found:
            continue
        fresh = []
        for y in members:
            for z in (sum_(x, y), product(x, y)):
                if z not in found and z != x:
                    fresh.append(z)
        found.add(x)
        members.append(x)
        if len(found) > cap:
            raise TopologyOverflow(
                f"topology on a {len(universe)}-element shape exceeds {cap} opens"
            )
        queue.extend(z for z in _sorted(fresh) if z not in found)
    return Topology(universe, _sorted(members))


def refine(t: Topology, new_parts: Iterable[Shape], max_opens: Optional[int] = None) -> Topology:
    new_parts = [p for p in new_parts if p not in t]
    if not new_parts:
        return t
    return generate(t.universe, [*t.opens, *new_parts], max_opens)


@dataclass(frozen=True)
class ReducedBasis:
    topology: Topology
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def reduced_basis(t: Topology) -> ReducedBasis:
    """Nonzero opens that are not the sum of the opens strictly inside them."""
    kind = t.universe.kind
    out = []
    for u in t.opens:
        if not u:
            continue
        below = [v for v in t.opens if v != u and part_of(v, u)]
        if total(below, kind) != u:
            out.append(u)
    return ReducedBasis(t, _sorted(out))


def is_boolean(t: Topology) -> bool:
    return all(complement_in(t, u) is not None for u in t.opens)


def complement_in(t: Topology, u: Shape) -> Optional[Shape]:
    zero = t.empty
    for v in t.opens:
        if sum_(u, v) == t.universe and product(u, v) == zero:
            return v
    return None


@dataclass(frozen=True)
class OpenLattice:
    """Order, join and meet tables over the opens of a topology, by index."""

    topology: Topology
    order: tuple   # order[i][j] is True when opens[i] <= opens[j]
    joins: tuple
    meets: tuple

    @classmethod
    def of(cls, t: Topology) -> "OpenLattice":
        index = {u: i for i, u in enumerate(t.opens)}
        n = len(t.opens)
        order = tuple(tuple(part_of(t.opens[i], t.opens[j]) for j in range(n)) for i in range(n))
        joins = tuple(tuple(index[sum_(t.opens[i], t.opens[j])] for j in range(n)) for i in range(n))
        meets = tuple(tuple(index[product(t.opens[i], t.opens[j])] for j in range(n)) for i in range(n))
        return cls(t, order, joins, meets)

    @property
    def top(self) -> int:
        return self.topology.opens.index(self.topology.universe)

    @property
    def bottom(self) -> int:
        return self.topology.opens.index(self.topology.empty)
