"""Core data model: critical points, space addresses, and broken points.

A *flow system* describes finitely many critical points joined by flow
lines.  The space of flow lines between two critical points, compactified
by broken flow lines, is identified combinatorially by a
:class:`ModuliAddress`: the pair of endpoints plus the chain of
endpoint pairs of every space it was recursively built over.

Points of such a space are either :class:`Primitive` (a single critical
point) or :class:`Broken` (an ordered tuple of pieces, one per factor of
a product stratum on the boundary).  Broken points are glued along
matching endpoints; flattening erases the grouping and yields the
primitive pieces in gluing order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

__all__ = [
    "CritPoint",
    "History",
    "ModuliAddress",
    "Point",
    "Primitive",
    "Broken",
    "Cell",
    "NormalCell",
    "flatten_point",
    "breaking_key",
    "is_stationary",
    "point_value",
    "point_key",
    "address_key",
    "cell_key",
    "stationary_address",
    "stationary_point",
    "ambient_of_point",
]


@dataclass(frozen=True)
class History:
    """Aligned source/target chains recorded below a space.

    Entry ``j`` holds the endpoint pair of the level-``j`` ancestor space;
    entries are stored bottom-up (index 0 is the base-most pair).
    """

    sources: tuple["Point", ...]
    targets: tuple["Point", ...]

    def __post_init__(self) -> None:
        if len(self.sources) != len(self.targets):
            raise ValueError(
                "history sources/targets must align: "
                f"{len(self.sources)} != {len(self.targets)}"
            )

    @staticmethod
    def from_pairs(pairs: tuple[tuple["Point", "Point"], ...]) -> "History":
        return History(
            tuple(p[0] for p in pairs),
            tuple(p[1] for p in pairs),
        )

    @property
    def pairs(self) -> tuple[tuple["Point", "Point"], ...]:
        return tuple(zip(self.sources, self.targets))

    def pair(self, j: int) -> tuple["Point", "Point"]:
        return (self.sources[j], self.targets[j])

    def __len__(self) -> int:
        return len(self.sources)

    def __iter__(self) -> Iterator[tuple["Point", "Point"]]:
        return iter(self.pairs)


EMPTY_HISTORY = History((), ())


@dataclass(frozen=True)
class ModuliAddress:
    """Identity of one compactified space of flow lines.

    ``source``/``target`` are the endpoints of the flow lines the space
    parametrizes; ``history`` records the endpoint pairs of every space
    below it.  The level is one more than the history length: level-1
    spaces sit over the base flow system, level-2 spaces over level-1
    spaces, and so on.  A space with ``source == target`` is *stationary*:
    it consists of a single constant flow line.
    """

    source: "Point"
    target: "Point"
    history: History = EMPTY_HISTORY

    @property
    def level(self) -> int:
        return 1 + len(self.history)


@dataclass(frozen=True)
class CritPoint:
    """A primitive critical point.

    ``home`` is ``None`` for base critical points and the address of the
    space the point lives on otherwise.  ``value`` is the exact height
    assigned to the point by the level's Morse data; it is positive unless
    the home space is stationary, in which case it is zero.
    """

    id: str
    index: int
    value: Fraction
    home: ModuliAddress | None = None

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"critical point {self.id!r}: index must be >= 0")
        if self.home is not None and is_stationary(self.home):
            if self.value != 0:
                raise ValueError(
                    f"critical point {self.id!r}: stationary points have value 0"
                )
        elif self.value <= 0:
            raise ValueError(
                f"critical point {self.id!r}: value must be positive, got {self.value}"
            )


@dataclass(frozen=True)
class Primitive:
    """A point of a space that is a single critical point."""

    crit: CritPoint


@dataclass(frozen=True)
class Broken:
    """An ordered tuple of points glued along matching endpoints.

    The pieces are listed in gluing order: the piece whose source is the
    source of the ambient space comes first.  Pieces may themselves be
    broken; flattening erases the nesting.
    """

    pieces: tuple["Point", ...]

    def __post_init__(self) -> None:
        if len(self.pieces) < 2:
            raise ValueError("a broken point needs at least two pieces")


Point = Union[Primitive, Broken]


@dataclass(frozen=True)
class Cell:
    """A cell of the globular set: a critical point on a named space.

    ``space`` is ``None`` exactly for level-0 cells (base critical
    points); then ``top`` is the primitive base point itself.
    """

    top: "Point"
    space: ModuliAddress | None

    @property
    def level(self) -> int:
        return 0 if self.space is None else self.space.level


@dataclass(frozen=True)
class NormalCell:
    """A cell in canonical form, produced by the normalizer.

    Two cells represent the same cell up to the canonical identifications
    (re-association of gluing, deletion of constant pieces, collapse of
    repeated stationary passage) exactly when their normal forms are
    equal.
    """

    cell: Cell

    @property
    def top(self) -> "Point":
        return self.cell.top

    @property
    def space(self) -> ModuliAddress | None:
        return self.cell.space

    @property
    def level(self) -> int:
        return self.cell.level


def flatten_point(p: Point) -> tuple[Primitive, ...]:
    """Erase nested grouping of a broken point.

    Returns the primitive pieces in gluing order.  A primitive point
    yields the one-element tuple.
    """

    if isinstance(p, Primitive):
        return (p,)
    if isinstance(p, Broken):
        out: list[Primitive] = []
        for piece in p.pieces:
            out.extend(flatten_point(piece))
        return tuple(out)
    raise ValueError(f"not a point: {p!r}")


def point_value(p: Point) -> Fraction:
    """Exact height of a point: its own value, or the sum over pieces."""

    if isinstance(p, Primitive):
        return p.crit.value
    return sum((point_value(q) for q in p.pieces), Fraction(0))


def point_key(p: Point) -> str:
    """Deterministic canonical string for a point."""

    if isinstance(p, Primitive):
        return p.crit.id
    return "(" + ",".join(point_key(q) for q in p.pieces) + ")"


def address_key(a: ModuliAddress) -> str:
    """Deterministic canonical string for a space address.

    History entries are shown top-down (deepest ancestor pair last).
    """

    core = f"{point_key(a.source)}>{point_key(a.target)}"
    if len(a.history) == 0:
        return f"M({core})"
    hist = ";".join(
        f"{point_key(s)}>{point_key(t)}" for (s, t) in reversed(a.history.pairs)
    )
    return f"M({core}|{hist})"


def cell_key(c: Cell | NormalCell) -> str:
    """Deterministic canonical string for a cell."""

    if isinstance(c, NormalCell):
        c = c.cell
    if c.space is None:
        return point_key(c.top)
    return f"{point_key(c.top)} @ {address_key(c.space)}"


def _spans(p: Primitive) -> tuple[tuple["Point", "Point"], ...]:
    """Endpoint pairs of the piece's home chain, bottom-up, top pair last."""

    home = p.crit.home
    if home is None:
        return ()
    return home.history.pairs + ((home.source, home.target),)


def breaking_key(p: Primitive) -> tuple:
    """Sort key that orders glued pieces in flow order.

    The key lists, per level from the base up, the (negated) heights of
    the piece's home endpoints: heights strictly decrease along the flow,
    so ascending key order is flow order.  Pieces with the same endpoint
    chain at every level tie-break on their canonical string, which keeps
    the order total and deterministic.
    """

    if not isinstance(p, Primitive):
        raise ValueError(f"breaking_key is defined on primitive pieces, got {p!r}")
    levels = tuple(
        (j, -point_value(s), -point_value(t), point_key(s), point_key(t))
        for j, (s, t) in enumerate(_spans(p))
    )
    return (levels, point_key(p))


def is_stationary(obj: Cell | NormalCell | ModuliAddress | Point) -> bool:
    """Whether the object sits over a constant flow line.

    Addresses are stationary when source equals target; cells when their
    space is; primitive points when their home space is.  Base cells and
    broken points are never stationary.
    """

    if isinstance(obj, NormalCell):
        obj = obj.cell
    if isinstance(obj, Cell):
        return obj.space is not None and is_stationary(obj.space)
    if isinstance(obj, ModuliAddress):
        return obj.source == obj.target
    if isinstance(obj, Primitive):
        return obj.crit.home is not None and is_stationary(obj.crit.home)
    if isinstance(obj, Broken):
        return False
    raise ValueError(f"cannot decide stationarity of {obj!r}")


def ambient_of_point(p: Point) -> ModuliAddress | None:
    """Address of the space a point naturally lives on.

    For a primitive point this is its home.  For a broken point it is the
    space the glued configuration bounds: endpoints from the outermost
    pieces, history shared by the pieces.  Returns ``None`` for base
    points (no home).
    """

    if isinstance(p, Primitive):
        return p.crit.home
    prims = flatten_point(p)
    first = prims[0].crit.home
    last = prims[-1].crit.home
    if first is None or last is None:
        raise ValueError(
            f"broken point {point_key(p)} has base pieces and no ambient space"
        )
    return ModuliAddress(first.source, last.target, first.history)


def stationary_address(at: Point, ambient: ModuliAddress | None) -> ModuliAddress:
    """Address of the stationary space at a point of an ambient space.

    The new space sits one level above the ambient one: its history is
    the ambient's history with the ambient's own endpoint pair appended.
    """

    if ambient is None:
        return ModuliAddress(at, at, EMPTY_HISTORY)
    hist = History.from_pairs(ambient.history.pairs + ((ambient.source, ambient.target),))
    return ModuliAddress(at, at, hist)


def stationary_point(at: Point, ambient: ModuliAddress | None) -> Primitive:
    """The canonical point of the stationary space at ``at``."""

    home = stationary_address(at, ambient)
    return Primitive(
        CritPoint(id=f"1({point_key(at)})", index=0, value=Fraction(0), home=home)
    )
