"""Cells, boundaries, composition, and the canonical normal form.

The built tower yields one cell per critical point per space: level-0
cells are the base critical points, level-l cells the critical points of
the level-l spaces.  Source and target of a cell read off the endpoint
pair one level down; gluing two cells along a shared level-p boundary
concatenates their points and pairs their addresses entrywise above p.

Raw composites are trees; two raw cells represent the same cell exactly
when their normal forms agree.  The normalizer erases grouping, deletes
constant pieces, collapses repeated constant passage to a single one,
and sorts glued pieces into flow order.
"""

from __future__ import annotations

from functools import lru_cache

from .core import (
    Broken,
    Cell,
    History,
    ModuliAddress,
    NormalCell,
    Point,
    Primitive,
    ambient_of_point,
    breaking_key,
    cell_key,
    flatten_point,
    is_stationary,
    point_key,
    stationary_point,
)
from .tower import Tower

__all__ = [
    "cells",
    "extended_cells",
    "source",
    "target",
    "identity",
    "composable",
    "compose",
    "normalize",
    "normalize_point",
    "GlobularSet",
]


def cells(tower: Tower, level: int) -> tuple[Cell, ...]:
    """The cells of one level, in canonical order.

    Level 0 lists the base critical points; level l <= max_level lists
    one cell per critical point per level-l space.
    """

    if level == 0:
        return tuple(
            Cell(Primitive(p), None)
            for p in sorted(tower.base.points, key=lambda p: p.id)
        )
    out = [
        Cell(entry.point, sd.address)
        for sd in tower.spaces(level)
        for entry in sd.morse
    ]
    return tuple(sorted(out, key=cell_key))


def extended_cells(tower: Tower, level: int) -> tuple[Cell, ...]:
    """Cells of one level together with iterated identities from below.

    Composites of tower cells normalize into this family: gluing two
    cells can land on an identity over a lower cell (a corner passed
    through constantly), which the level's own list omits.
    """

    out = list(cells(tower, level))
    if level >= 1:
        out.extend(identity(c) for c in extended_cells(tower, level - 1))
    return tuple(sorted(out, key=cell_key))


def source(cell: Cell, tower: Tower | None = None) -> Cell:
    """The cell one level down at the source side."""

    if cell.space is None:
        raise ValueError("a level-0 cell has no source")
    sp = cell.space
    if sp.level == 1:
        return Cell(sp.source, None)
    down = ModuliAddress(
        sp.history.sources[-1],
        sp.history.targets[-1],
        History.from_pairs(sp.history.pairs[:-1]),
    )
    return Cell(sp.source, down)


def target(cell: Cell, tower: Tower | None = None) -> Cell:
    """The cell one level down at the target side."""

    if cell.space is None:
        raise ValueError("a level-0 cell has no target")
    sp = cell.space
    if sp.level == 1:
        return Cell(sp.target, None)
    down = ModuliAddress(
        sp.history.sources[-1],
        sp.history.targets[-1],
        History.from_pairs(sp.history.pairs[:-1]),
    )
    return Cell(sp.target, down)


def identity(cell: Cell) -> Cell:
    """The constant cell one level up: the stationary space at the point.

    Its source and target are the given cell itself.
    """

    pt = stationary_point(cell.top, cell.space)
    return Cell(pt, pt.crit.home)


def composable(p: int, after: Cell, first: Cell) -> bool:
    """Whether two same-level cells glue along their level-p boundary.

    ``first`` runs first along the flow; its iterated target must be the
    iterated source of ``after``, up to normal form.
    """

    level = after.level
    if first.level != level or not 0 <= p < level:
        return False
    lhs, rhs = after, first
    for _ in range(level - p):
        lhs, rhs = source(lhs), target(rhs)
    return normalize(lhs) == normalize(rhs)


def compose(p: int, after: Cell, first: Cell) -> Cell:
    """Glue two cells along their shared level-p boundary.

    The result's point is the broken point (first, after) — the piece
    traversed first comes first.  Addresses pair entrywise above level
    p, join at level p, and share the data below.  Raises if the pair
    does not glue.
    """

    level = after.level
    if not composable(p, after, first):
        a = cell_key(after)
        b = cell_key(first)
        raise ValueError(
            f"cells do not glue along level {p}: the level-{p} source of {a} "
            f"differs from the level-{p} target of {b}"
        )
    top = Broken((first.top, after.top))
    asp, csp = first.space, after.space
    assert asp is not None and csp is not None
    if p == level - 1:
        space = ModuliAddress(asp.source, csp.target, asp.history)
        return Cell(top, space)
    pairs: list[tuple[Point, Point]] = []
    for j in range(len(asp.history)):
        a_s, a_t = asp.history.pair(j)
        c_s, c_t = csp.history.pair(j)
        if j < p:
            pairs.append((a_s, a_t))
        elif j == p:
            pairs.append((a_s, c_t))
        else:
            pairs.append((Broken((a_s, c_s)), Broken((a_t, c_t))))
    space = ModuliAddress(
        Broken((asp.source, csp.source)),
        Broken((asp.target, csp.target)),
        History.from_pairs(tuple(pairs)),
    )
    return Cell(top, space)


def _is_stationary_prim(q: Primitive) -> bool:
    return q.crit.home is not None and is_stationary(q.crit.home)


def _stationary_over(base: Point) -> Primitive:
    """The canonical constant point over an (already canonical) point."""

    return stationary_point(base, ambient_of_point(base))


@lru_cache(maxsize=None)
def normalize_point(pt: Point) -> Point:
    """Canonical form of a point.

    Pieces are put in canonical form first, then merged: grouping is
    erased, constant pieces next to moving ones are deleted, and the
    moving pieces are sorted into flow order.  A configuration whose
    pieces are all constant is itself constant — over the glue of their
    supports, one level down, where repeated passage through the same
    support counts once.  Constant points rebuild over their canonical
    support, so the level of the input is always preserved.
    """

    if isinstance(pt, Primitive):
        if not _is_stationary_prim(pt):
            return pt
        return _stationary_over(normalize_point(pt.crit.home.source))
    flat: list[Primitive] = []
    for piece in pt.pieces:
        flat.extend(flatten_point(normalize_point(piece)))
    live = [q for q in flat if not _is_stationary_prim(q)]
    if live:
        ordered = sorted(live, key=breaking_key)
        return ordered[0] if len(ordered) == 1 else Broken(tuple(ordered))
    supports = [q.crit.home.source for q in flat]
    dedup = [supports[0]]
    for s in supports[1:]:
        if s != dedup[-1]:
            dedup.append(s)
    base = dedup[0] if len(dedup) == 1 else normalize_point(Broken(tuple(dedup)))
    return _stationary_over(base)


def _normalize_address(addr: ModuliAddress | None) -> ModuliAddress | None:
    if addr is None:
        return None
    pairs = tuple(
        (normalize_point(s), normalize_point(t)) for s, t in addr.history.pairs
    )
    return ModuliAddress(
        normalize_point(addr.source),
        normalize_point(addr.target),
        History.from_pairs(pairs),
    )


@lru_cache(maxsize=None)
def normalize(cell: Cell | NormalCell, tower: Tower | None = None) -> NormalCell:
    """Canonical form of a cell: point and address normalized alike.

    Levels are preserved; two cells represent the same cell exactly when
    their normal forms are equal.
    """

    if isinstance(cell, NormalCell):
        cell = cell.cell
    return NormalCell(Cell(normalize_point(cell.top), _normalize_address(cell.space)))


class GlobularSet:
    """The levelwise cells with their boundary maps, as checkable data.

    Sources and targets of built cells are materialized as finite maps
    (falling back to the structural reading off the address for cells
    outside the tower, such as raw composites).  The maps, the identity
    assignment, and the composition table can each be overridden entry
    by entry, so that every law the checker verifies can be broken by a
    single targeted mutation.
    """

    def __init__(
        self,
        tower: Tower,
        *,
        source_over: dict[str, Cell] | None = None,
        target_over: dict[str, Cell] | None = None,
        identity_over: dict[str, Cell] | None = None,
        compose_over: dict[tuple[int, str, str], Cell] | None = None,
    ) -> None:
        self.tower = tower
        self.n = tower.max_level
        self._source_over = dict(source_over or {})
        self._target_over = dict(target_over or {})
        self._identity_over = dict(identity_over or {})
        self._compose_over = dict(compose_over or {})
        self._cells = {l: cells(tower, l) for l in range(self.n + 1)}
        self._smap = {}
        self._tmap = {}
        for l in range(1, self.n + 1):
            for c in self._cells[l]:
                self._smap[c] = source(c)
                self._tmap[c] = target(c)
        self._pairs_memo: dict[tuple[int, int], tuple[tuple[Cell, Cell], ...]] = {}

    def _key(self, cell: Cell) -> str:
        return cell_key(normalize(cell))

    def cells(self, level: int) -> tuple[Cell, ...]:
        if not 0 <= level <= self.n:
            raise ValueError(f"level {level} out of range 0..{self.n}")
        return self._cells[level]

    def s(self, cell: Cell) -> Cell:
        if self._source_over:
            k = self._key(cell)
            if k in self._source_over:
                return self._source_over[k]
        if cell in self._smap:
            return self._smap[cell]
        return source(cell)

    def t(self, cell: Cell) -> Cell:
        if self._target_over:
            k = self._key(cell)
            if k in self._target_over:
                return self._target_over[k]
        if cell in self._tmap:
            return self._tmap[cell]
        return target(cell)

    def identity(self, cell: Cell) -> Cell:
        if self._identity_over:
            k = self._key(cell)
            if k in self._identity_over:
                return self._identity_over[k]
        return identity(cell)

    def boundary_key(self, q: int, cell: Cell, side: str) -> str:
        """Canonical key of the iterated level-q source or target."""

        step = self.s if side == "s" else self.t
        x = cell
        for _ in range(cell.level - q):
            x = step(x)
        return self._key(x)

    def composable(self, p: int, after: Cell, first: Cell) -> bool:
        level = after.level
        if first.level != level or not 0 <= p < level:
            return False
        return self.boundary_key(p, after, "s") == self.boundary_key(p, first, "t")

    def composable_pairs(self, level: int, p: int) -> tuple[tuple[Cell, Cell], ...]:
        """All ordered pairs of level cells gluing along level p, memoized."""

        memo_key = (level, p)
        if memo_key not in self._pairs_memo:
            cs = self.cells(level)
            skey = {c: self.boundary_key(p, c, "s") for c in cs}
            tkey = {c: self.boundary_key(p, c, "t") for c in cs}
            self._pairs_memo[memo_key] = tuple(
                (c, a) for c in cs for a in cs if skey[c] == tkey[a]
            )
        return self._pairs_memo[memo_key]

    def compose(self, p: int, after: Cell, first: Cell) -> Cell:
        if self._compose_over:
            k = (p, self._key(after), self._key(first))
            if k in self._compose_over:
                return self._compose_over[k]
        return compose(p, after, first)

    def normalize(self, cell: Cell) -> NormalCell:
        return normalize(cell)

    def _mutated(self, **updates) -> "GlobularSet":
        kw = dict(
            source_over=self._source_over,
            target_over=self._target_over,
            identity_over=self._identity_over,
            compose_over=self._compose_over,
        )
        kw.update(updates)
        return GlobularSet(self.tower, **kw)

    def with_source(self, cell: Cell, new: Cell) -> "GlobularSet":
        return self._mutated(
            source_over={**self._source_over, self._key(cell): new}
        )

    def with_target(self, cell: Cell, new: Cell) -> "GlobularSet":
        return self._mutated(
            target_over={**self._target_over, self._key(cell): new}
        )

    def with_identity(self, cell: Cell, new: Cell) -> "GlobularSet":
        return self._mutated(
            identity_over={**self._identity_over, self._key(cell): new}
        )

    def with_compose(self, p: int, after: Cell, first: Cell, new: Cell) -> "GlobularSet":
        key = (p, self._key(after), self._key(first))
        return self._mutated(compose_over={**self._compose_over, key: new})
