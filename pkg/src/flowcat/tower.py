"""Iterated construction of compactified spaces of flow lines.

Starting from a flow system, each round equips every current space with
Morse data (exact heights and stratum-intrinsic indices for its critical
points) and derives, for every ordered pair of critical points, the
components of the next space of flow lines between them.  Points whose
pairs all derive to nothing get a stationary (one-point) space, so every
critical point keeps a space over it.  The build terminates when a round
produces only stationary spaces; the number of rounds is bounded by the
largest base index plus one.

Heights are exact rationals chosen so that (a) they strictly decrease
along every flow line, (b) along a chain x > y > z every height on the
space (x,y) exceeds every height on (y,z), and (c) any two sums over
distinct sets of primitive heights differ — each primitive height gets a
distinct dyadic tag, so a sum determines its set of summands.  Property
(c) orients every interval unambiguously: its endpoint heights are sums
over different broken configurations and therefore never tie.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    CritPoint,
    History,
    ModuliAddress,
    Point,
    Primitive,
    Broken,
    address_key,
    flatten_point,
    is_stationary,
    point_key,
    point_value,
    stationary_address,
    stationary_point,
)
from .stratification import (
    CIRCLE,
    Component,
    Endpoint,
    FlowSystem,
    INTERVAL,
    PieceRef,
    POINT,
    Shape,
    Stratification,
    Stratum,
    _chains,
    _stratify,
    boundary_strata,
    sphere_like,
    validate_flow_system,
)

__all__ = [
    "DeclaredPoint",
    "DeclaredModuli",
    "ComponentDecl",
    "Declarations",
    "MorseEntry",
    "MorseData",
    "SpaceData",
    "Tower",
    "LevelValues",
    "InvalidFlowSystemError",
    "MissingDeclarationError",
    "BuildError",
    "assign_values",
    "product_critical",
    "critical_points",
    "derive_moduli",
    "build_tower",
]


class BuildError(ValueError):
    """The tower cannot be built from the given data."""


class InvalidFlowSystemError(BuildError):
    """The base flow system breaks one or more laws."""

    def __init__(self, violations) -> None:
        self.violations = tuple(violations)
        lines = "\n".join(str(v) for v in self.violations)
        super().__init__(f"invalid flow system:\n{lines}")


class MissingDeclarationError(BuildError):
    """A component needs interior data that no declaration supplies."""

    def __init__(self, address: str, component: str, detail: str) -> None:
        self.address = address
        self.component = component
        super().__init__(
            f"component {component!r} of {address} needs a declaration: {detail}"
        )


@dataclass(frozen=True)
class DeclaredPoint:
    """One declared interior critical point: a name and its index."""

    name: str
    index: int


@dataclass(frozen=True)
class DeclaredModuli:
    """Declared components of the space between two declared points."""

    source: str
    target: str
    components: tuple[tuple[str, Shape], ...]


@dataclass(frozen=True)
class ComponentDecl:
    """Interior data declared for one component of one space."""

    points: tuple[DeclaredPoint, ...] = ()
    moduli: tuple[DeclaredModuli, ...] = ()


@dataclass(frozen=True)
class Declarations:
    """Named interior data, keyed by (canonical address, component id)."""

    entries: tuple[tuple[str, str, ComponentDecl], ...] = ()

    def get(self, addr_key: str, comp_id: str) -> ComponentDecl | None:
        for a, c, d in self.entries:
            if (a, c) == (addr_key, comp_id):
                return d
        return None

    @staticmethod
    def build(items: dict[tuple[str, str], ComponentDecl]) -> "Declarations":
        return Declarations(tuple((a, c, d) for (a, c), d in sorted(items.items())))


@dataclass(frozen=True)
class MorseEntry:
    """One critical point of the height function on one space.

    ``component`` names the component the point lies on (or whose
    boundary it lies on); ``role`` records how it arose: the point of a
    0-dimensional component, an interval endpoint (``end_max`` or
    ``end_min``), a ``declared`` interior point, or the point of a
    ``stationary`` space.
    """

    point: Point
    index: int
    value: Fraction
    component: str = ""
    role: str = ""


@dataclass(frozen=True)
class MorseData:
    """All critical points of one space, highest first."""

    entries: tuple[MorseEntry, ...]

    def by_key(self, key: str) -> MorseEntry:
        for e in self.entries:
            if point_key(e.point) == key:
                return e
        raise KeyError(f"no critical point {key!r} on this space")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SpaceData:
    """One built space: its components, strata, Morse data, and the
    components derived for every ordered pair of its critical points."""

    address: ModuliAddress
    components: tuple[Component, ...]
    stratification: Stratification
    morse: MorseData
    derived: tuple[tuple[str, str, tuple[Component, ...]], ...] = ()

    @property
    def key(self) -> str:
        return address_key(self.address)

    @property
    def stationary(self) -> bool:
        return is_stationary(self.address)

    def derived_components(self, p_key: str, q_key: str) -> tuple[Component, ...]:
        for a, b, comps in self.derived:
            if (a, b) == (p_key, q_key):
                return comps
        return ()


@dataclass(frozen=True)
class Tower:
    """The full iterated construction over one flow system."""

    base: FlowSystem
    declarations: Declarations
    levels: tuple[tuple[SpaceData, ...], ...]
    complete: bool

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def spaces(self, level: int) -> tuple[SpaceData, ...]:
        if not 1 <= level <= self.max_level:
            raise ValueError(
                f"level {level} out of range: tower has levels 1..{self.max_level}"
            )
        return self.levels[level - 1]

    def space(self, level: int, addr_key: str) -> SpaceData:
        for sd in self.spaces(level):
            if sd.key == addr_key:
                return sd
        raise KeyError(f"no space {addr_key} at level {level}")


@dataclass(frozen=True)
class LevelValues:
    """Heights assigned across one round of spaces.

    ``slots`` orders the nonstationary spaces (chains force a space's
    slot above its successors'); ``comp_values`` holds the height of each
    0-dimensional component's point; ``point_values`` the heights of
    declared interior points.  Every value carries a distinct dyadic tag,
    making sums over distinct sets of values pairwise distinct.
    """

    slots: dict[str, int]
    comp_values: dict[tuple[str, str], Fraction]
    point_values: dict[tuple[str, str, str], Fraction]


def _space_ranks(keys: list[str], edges: set[tuple[str, str]]) -> dict[str, int]:
    """Longest-chain rank: a space outranks every space it must exceed."""

    succs: dict[str, set[str]] = {k: set() for k in keys}
    for hi, lo in edges:
        succs[hi].add(lo)
    ranks: dict[str, int] = {}

    def rank(k: str, seen: tuple[str, ...] = ()) -> int:
        if k in ranks:
            return ranks[k]
        if k in seen:
            raise BuildError(f"cyclic chain constraints through {k}")
        r = 1 + max((rank(s, seen + (k,)) for s in succs[k]), default=0)
        ranks[k] = r
        return r

    for k in sorted(keys):
        rank(k)
    return ranks


def assign_values(
    spaces: list[tuple[str, tuple[Component, ...], list[tuple[str, list[str]]]]],
    edges: set[tuple[str, str]],
) -> LevelValues:
    """Assign exact heights to one round of nonstationary spaces.

    ``spaces`` lists ``(addr_key, components, declared)`` where
    ``declared`` gives, per component, the interior point names in
    height order (highest first).  ``edges`` holds ``(hi, lo)`` address
    pairs from chains: every height on ``hi`` must exceed every height
    on ``lo``.

    Each space gets an integer slot respecting the edges; the point of a
    0-dimensional component gets ``slot + tag``, declared points get
    ``slot + position + tag``, where the tags are distinct dyadic
    fractions below 1/2 allocated in deterministic order.
    """

    keys = [k for k, _, _ in spaces]
    ranks = _space_ranks(keys, edges)
    order = sorted(keys, key=lambda k: (ranks[k], k))
    slots = {k: n + 1 for n, k in enumerate(order)}

    comp_values: dict[tuple[str, str], Fraction] = {}
    point_values: dict[tuple[str, str, str], Fraction] = {}
    counter = 0

    def tag() -> Fraction:
        nonlocal counter
        counter += 1
        return Fraction(1, 2 ** (counter + 1))

    by_key = {k: (comps, declared) for k, comps, declared in spaces}
    for k in order:
        comps, declared = by_key[k]
        declared_map = dict(declared)
        for comp in sorted(comps, key=lambda c: c.id):
            if comp.dim == 0:
                comp_values[(k, comp.id)] = slots[k] + tag()
            for m, name in enumerate(declared_map.get(comp.id, [])):
                count = len(declared_map[comp.id])
                point_values[(k, comp.id, name)] = slots[k] + (count - m) + tag()
    return LevelValues(slots=slots, comp_values=comp_values, point_values=point_values)


def product_critical(factors: list[MorseEntry]) -> MorseEntry:
    """Combine critical points of the factors of a product stratum.

    Height and index add across factors.  Stationary factors contribute
    nothing and are absorbed: the combined point is identified with the
    product of the nonstationary factors.
    """

    if not factors:
        raise ValueError("product_critical needs at least one factor")
    live = [f for f in factors if not is_stationary(f.point)]
    if not live:
        return factors[0]
    if len(live) == 1:
        return live[0]
    pieces: list[Point] = [f.point for f in live]
    return MorseEntry(
        point=Broken(tuple(pieces)),
        index=sum(f.index for f in live),
        value=sum((f.value for f in live), Fraction(0)),
        component="",
        role="corner",
    )


def _declared_points(
    decls: Declarations, addr_key_str: str, comp: Component
) -> tuple[DeclaredPoint, ...]:
    """Declared interior points of a component, highest first.

    Closed positive-dimensional shapes require exactly two points with
    the extreme indices; a missing or malformed declaration is an error
    naming the space and component.
    """

    decl = decls.get(addr_key_str, comp.id)
    pts = decl.points if decl else ()
    if comp.shape.kind in ("circle", "sphere"):
        want_top = comp.dim if comp.shape.kind == "sphere" else 1
        if not pts:
            raise MissingDeclarationError(
                addr_key_str,
                comp.id,
                f"a closed {comp.dim}-dimensional component needs two declared "
                f"critical points (indices {want_top} and 0)",
            )
        if sorted(p.index for p in pts) != [0, want_top] or len(pts) != 2:
            raise BuildError(
                f"component {comp.id!r} of {addr_key_str}: a closed shape of "
                f"dimension {comp.dim} needs exactly two points with indices "
                f"{want_top} and 0, got {[(p.name, p.index) for p in pts]}"
            )
    for p in pts:
        if not 0 <= p.index <= comp.dim:
            raise BuildError(
                f"declared point {p.name!r} of {comp.id!r} of {addr_key_str}: "
                f"index {p.index} outside 0..{comp.dim}"
            )
    return tuple(sorted(pts, key=lambda p: (-p.index, p.name)))


def critical_points(
    address: ModuliAddress,
    components: tuple[Component, ...],
    values: LevelValues,
    registry: dict[tuple[str, str, str], MorseEntry],
    decls: Declarations,
) -> tuple[MorseEntry, ...]:
    """All critical points of the height function on one space.

    0-dimensional components contribute their point; intervals contribute
    their two endpoints (broken points, height the sum over pieces, index
    1 at the higher endpoint); closed or declared components contribute
    their declared interior points.  ``registry`` resolves endpoint
    references to the points of sibling 0-dimensional components.
    """

    akey = address_key(address)
    if is_stationary(address):
        raise ValueError("critical_points expects a nonstationary space")
    entries: list[MorseEntry] = []
    for comp in sorted(components, key=lambda c: c.id):
        if comp.dim == 0:
            pt = Primitive(
                CritPoint(
                    id=f"{point_key(address.source)}/{point_key(address.target)}:{comp.id}",
                    index=0,
                    value=values.comp_values[(akey, comp.id)],
                    home=address,
                )
            )
            entries.append(MorseEntry(pt, 0, pt.crit.value, comp.id, "point"))
            continue
        for dp in _declared_points(decls, akey, comp):
            val = values.point_values[(akey, comp.id, dp.name)]
            pt = Primitive(CritPoint(id=dp.name, index=dp.index, value=val, home=address))
            entries.append(MorseEntry(pt, dp.index, val, comp.id, "declared"))
        if comp.boundary:
            ends: list[MorseEntry] = []
            for end in comp.boundary:
                pieces = []
                for ref in end:
                    piece = registry.get((ref.source, ref.target, ref.component))
                    if piece is None:
                        raise BuildError(
                            f"endpoint of {comp.id!r} of {akey} references "
                            f"{ref.component!r} of ({ref.source},{ref.target}), "
                            "which has no point"
                        )
                    pieces.append(piece)
                combined = product_critical(pieces)
                ends.append(
                    MorseEntry(combined.point, 0, combined.value, comp.id, "corner")
                )
            if comp.shape == INTERVAL:
                hi, lo = sorted(ends, key=lambda e: -e.value)
                ends = [
                    MorseEntry(hi.point, 1, hi.value, comp.id, "end_max"),
                    MorseEntry(lo.point, 0, lo.value, comp.id, "end_min"),
                ]
            entries.extend(ends)
    entries.sort(key=lambda e: (-e.value, point_key(e.point)))
    return tuple(entries)


def _extended_address(p: Point, q: Point, ambient: ModuliAddress) -> ModuliAddress:
    """Address of the next space between two points of an ambient space."""

    hist = History.from_pairs(
        ambient.history.pairs + ((ambient.source, ambient.target),)
    )
    return ModuliAddress(p, q, hist)


def derive_moduli(
    space: SpaceData,
    p: MorseEntry,
    q: MorseEntry,
    decls: Declarations,
) -> tuple[Component, ...]:
    """Components of the next space between two critical points.

    Forced cases: the same point gives a stationary one-point space;
    points of different components give nothing; no flow runs against
    the height order; an interval flows from its higher endpoint to its
    lower through one point; the two poles of a circle are joined by two
    points, those of a k-sphere by a (k-1)-sphere shape.  Remaining
    pairs need declared components; a positive-dimensional pair without
    a declaration is an error naming the space and component.
    """

    akey = space.key
    pk, qk = point_key(p.point), point_key(q.point)
    new_addr = _extended_address(p.point, q.point, space.address)

    if pk == qk:
        return (
            Component(id="0", ambient=new_addr, shape=POINT, boundary=()),
        )
    if p.component != q.component or p.role == "stationary":
        return ()
    if p.value <= q.value or p.index <= q.index:
        return ()

    comp = next(c for c in space.components if c.id == p.component)
    decl = decls.get(akey, comp.id)
    if decl:
        for dm in decl.moduli:
            if (dm.source, dm.target) == (pk, qk):
                return tuple(
                    Component(id=cid, ambient=new_addr, shape=shape, boundary=())
                    for cid, shape in dm.components
                )

    def points(*ids: str) -> tuple[Component, ...]:
        return tuple(
            Component(id=cid, ambient=new_addr, shape=POINT, boundary=()) for cid in ids
        )

    if comp.shape == INTERVAL and {p.role, q.role} == {"end_max", "end_min"}:
        return points("0")
    if comp.shape == CIRCLE and p.role == q.role == "declared":
        return points("0", "1")
    if comp.shape.kind == "sphere" and p.role == q.role == "declared":
        k = comp.dim - 1
        if k == 0:
            return points("0", "1")
        shape = CIRCLE if k == 1 else sphere_like(k)
        return (Component(id="0", ambient=new_addr, shape=shape, boundary=()),)

    # Product rule: two broken points differing in exactly one piece flow
    # within that piece's component; desk-scale data never reaches this.
    pf, qf = p.point, q.point
    if isinstance(pf, Broken) and isinstance(qf, Broken):
        pp, qq = flatten_point(pf), flatten_point(qf)
        if len(pp) == len(qq):
            diff = [i for i in range(len(pp)) if pp[i] != qq[i]]
            if len(diff) == 1:
                raise MissingDeclarationError(
                    akey,
                    comp.id,
                    f"flow between corners {pk} and {qk} moves in one factor; "
                    "declare its components",
                )
    raise MissingDeclarationError(
        akey,
        comp.id,
        f"no forced rule for flow from {pk} to {qk}; declare its components",
    )


def _level_strata(
    address: ModuliAddress,
    parent_derived: dict[tuple[str, str], tuple[Component, ...]],
) -> Stratification:
    """Stratification of a derived space from its parent's pair table."""

    src, tgt = point_key(address.source), point_key(address.target)
    succ: dict[str, list[str]] = {}
    for (a, b), comps in parent_derived.items():
        if comps and a != b:
            succ.setdefault(a, []).append(b)

    chains: list[tuple[str, ...]] = []

    def walk(at: str, mids: tuple[str, ...]) -> None:
        if parent_derived.get((at, tgt)):
            chains.append(mids)
        for nxt in sorted(succ.get(at, [])):
            if nxt != tgt and nxt != src and nxt not in mids:
                walk(nxt, mids + (nxt,))

    walk(src, ())
    comps_of = {
        (a, b): comps for (a, b), comps in parent_derived.items() if a != b and comps
    }
    return _stratify(src, tgt, sorted(chains, key=lambda m: (len(m), m)), comps_of)


def _stationary_space(at: Point, ambient: ModuliAddress | None) -> SpaceData:
    """The one-point space over a critical point, with its Morse datum."""

    pt = stationary_point(at, ambient)
    addr = pt.crit.home
    comp = Component(id="0", ambient=addr, shape=POINT, boundary=())
    stratum = Stratum(
        source=point_key(addr.source),
        target=point_key(addr.target),
        intermediates=(),
        factors=(PieceRef(point_key(addr.source), point_key(addr.target), "0"),),
        dim=0,
    )
    entry = MorseEntry(pt, 0, Fraction(0), "0", "stationary")
    return SpaceData(
        address=addr,
        components=(comp,),
        stratification=Stratification((stratum,), ()),
        morse=MorseData((entry,)),
        derived=(),
    )


@dataclass(frozen=True)
class _Seed:
    """One space scheduled for the next round of the build."""

    address: ModuliAddress
    components: tuple[Component, ...]
    # the parent space's pair table, for stratifying this space (None at level 1)
    parent_table: tuple[tuple[str, str, tuple[Component, ...]], ...] | None = None


def build_tower(
    fs: FlowSystem,
    decls: Declarations | None = None,
    max_level: int | None = None,
) -> Tower:
    """Run the iterated construction until only stationary spaces remain.

    Raises :class:`InvalidFlowSystemError` on bad base data and
    :class:`MissingDeclarationError` where interior data is needed but
    not declared.  ``max_level`` optionally truncates the build; a
    complete build needs at most ``max base index + 1`` rounds.
    """

    decls = decls or Declarations()
    violations = validate_flow_system(fs)
    if violations:
        raise InvalidFlowSystemError(violations)

    hard_cap = fs.max_index + 1
    levels: list[tuple[SpaceData, ...]] = []

    # Seeds for level 1: the given pairs, plus tails for isolated points.
    seeds: list[_Seed] = []
    participating: set[str] = set()
    for s, t, comps in fs.pairs:
        if comps:
            seeds.append(_Seed(fs.address(s, t), comps))
            participating.update((s, t))
    tails: list[tuple[Point, ModuliAddress | None]] = [
        (Primitive(p), None) for p in fs.points if p.id not in participating
    ]
    ids = sorted(p.id for p in fs.points)
    chain_edges: set[tuple[str, str]] = set()
    for x in ids:
        for m in ids:
            for z in ids:
                if len({x, m, z}) == 3 and fs.connected(x, m) and fs.connected(m, z):
                    chain_edges.add(
                        (address_key(fs.address(x, m)), address_key(fs.address(m, z)))
                    )

    level = 0
    while True:
        level += 1
        if level > hard_cap + 1:
            raise BuildError(
                f"construction failed to terminate within {hard_cap} rounds"
            )

        # Heights for the round: slots from chain constraints, then one
        # dyadic tag per primitive height in deterministic order.
        value_spec = []
        for seed in seeds:
            akey = address_key(seed.address)
            declared = []
            for comp in sorted(seed.components, key=lambda c: c.id):
                if comp.dim >= 1:
                    names = [dp.name for dp in _declared_points(decls, akey, comp)]
                    declared.append((comp.id, names))
            value_spec.append((akey, seed.components, declared))
        values = assign_values(value_spec, chain_edges)

        # Register the points of 0-dimensional components first, so that
        # interval endpoints can be resolved across sibling spaces.
        registry: dict[tuple[str, str, str], MorseEntry] = {}
        for seed in seeds:
            akey = address_key(seed.address)
            src, tgt = point_key(seed.address.source), point_key(seed.address.target)
            for comp in sorted(seed.components, key=lambda c: c.id):
                if comp.dim == 0:
                    pt = Primitive(
                        CritPoint(
                            id=f"{src}/{tgt}:{comp.id}",
                            index=0,
                            value=values.comp_values[(akey, comp.id)],
                            home=seed.address,
                        )
                    )
                    registry[(src, tgt, comp.id)] = MorseEntry(
                        pt, 0, pt.crit.value, comp.id, "point"
                    )

        built: list[SpaceData] = []
        for seed in seeds:
            if seed.parent_table is None:
                strat = boundary_strata(
                    fs,
                    point_key(seed.address.source),
                    point_key(seed.address.target),
                )
            else:
                strat = _level_strata(seed.address, dict(
                    ((a, b), comps) for a, b, comps in seed.parent_table
                ))
            entries = critical_points(
                seed.address, seed.components, values, registry, decls
            )
            built.append(
                SpaceData(
                    address=seed.address,
                    components=seed.components,
                    stratification=strat,
                    morse=MorseData(entries),
                    derived=(),
                )
            )
        for at, ambient in tails:
            built.append(_stationary_space(at, ambient))

        # Derive next-round components for every ordered pair of critical
        # points; points taking part in no nonempty pair get a tail.
        next_seeds: list[_Seed] = []
        next_tails: list[tuple[Point, ModuliAddress | None]] = []
        next_edges: set[tuple[str, str]] = set()
        finished: list[SpaceData] = []
        for data in built:
            if data.stationary:
                finished.append(data)
                next_tails.append((data.morse.entries[0].point, data.address))
                continue
            table: dict[tuple[str, str], tuple[Component, ...]] = {}
            point_of = {point_key(e.point): e.point for e in data.morse}
            for p in data.morse:
                for q in data.morse:
                    if p is q:
                        continue
                    comps = derive_moduli(data, p, q, decls)
                    if comps:
                        table[(point_key(p.point), point_key(q.point))] = comps
            used = {k for pair in table for k in pair}
            for p in data.morse:
                if point_key(p.point) not in used:
                    next_tails.append((p.point, data.address))
            derived = tuple((a, b, comps) for (a, b), comps in sorted(table.items()))
            for (a, b), comps in sorted(table.items()):
                next_seeds.append(
                    _Seed(
                        _extended_address(point_of[a], point_of[b], data.address),
                        comps,
                        derived,
                    )
                )
            for (a, b) in table:
                for (b2, c) in table:
                    if b == b2 and len({a, b, c}) == 3:
                        next_edges.add(
                            (
                                address_key(
                                    _extended_address(point_of[a], point_of[b], data.address)
                                ),
                                address_key(
                                    _extended_address(point_of[b], point_of[c], data.address)
                                ),
                            )
                        )
            finished.append(
                SpaceData(
                    address=data.address,
                    components=data.components,
                    stratification=data.stratification,
                    morse=data.morse,
                    derived=derived,
                )
            )

        finished.sort(key=lambda d: d.key)
        levels.append(tuple(finished))

        all_stationary = all(d.stationary for d in finished)
        if all_stationary or (max_level is not None and level == max_level):
            return Tower(
                base=fs,
                declarations=decls,
                levels=tuple(levels),
                complete=all_stationary,
            )

        seeds = sorted(next_seeds, key=lambda sd: address_key(sd.address))
        tails = next_tails
        chain_edges = next_edges
