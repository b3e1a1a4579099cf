"""Flow systems, component shapes, and boundary stratification.

A :class:`FlowSystem` is the finite input datum: base critical points
with indices, and for selected ordered pairs the components of the
compactified space of flow lines between them.  Component shapes are
combinatorial stand-ins for the topology; each carries a dimension and,
for intervals, the two boundary configurations (broken flow lines).

The boundary of a compactified space is stratified by how far flow lines
break: one stratum per chain of intermediate critical points per choice
of factor component.  The validator checks the laws that make such data
consistent: index monotonicity, the dimension formula, and the exact
matching between broken configurations and interval endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (
    CritPoint,
    ModuliAddress,
    Point,
    Primitive,
    flatten_point,
)

__all__ = [
    "Shape",
    "POINT",
    "INTERVAL",
    "CIRCLE",
    "sphere_like",
    "declared_shape",
    "parse_shape",
    "shape_label",
    "PieceRef",
    "Component",
    "Stratum",
    "Stratification",
    "FlowSystem",
    "flow_system",
    "Violation",
    "moduli_dimension",
    "boundary_strata",
    "depth",
    "validate_flow_system",
]


@dataclass(frozen=True)
class Shape:
    """Topological type of one component of a compactified space.

    ``kind`` is one of ``point``, ``interval``, ``circle``, ``sphere``
    (a k-sphere, k >= 2), or ``declared`` (dimension known, interior
    structure supplied by declarations).
    """

    kind: str
    k: int = 0

    @property
    def dim(self) -> int:
        if self.kind == "point":
            return 0
        if self.kind in ("interval", "circle"):
            return 1
        return self.k

    @property
    def closed(self) -> bool:
        """Whether the shape has no boundary of its own."""

        return self.kind in ("point", "circle", "sphere")


POINT = Shape("point")
INTERVAL = Shape("interval")
CIRCLE = Shape("circle")


def sphere_like(k: int) -> Shape:
    """The k-sphere shape for k >= 2 (lower k have their own names)."""

    if k < 2:
        raise ValueError(
            f"sphere_like({k}): use CIRCLE for k=1 and two POINT components for k=0"
        )
    return Shape("sphere", k)


def declared_shape(dim: int) -> Shape:
    if dim < 0:
        raise ValueError(f"declared_shape({dim}): dimension must be >= 0")
    return Shape("declared", dim)


_SHAPE_WORDS = {"Point": POINT, "Interval": INTERVAL, "Circle": CIRCLE}


def parse_shape(text: str) -> Shape:
    """Parse a shape label: Point | Interval | Circle | SphereLike k | Declared d."""

    words = text.split()
    if len(words) == 1 and words[0] in _SHAPE_WORDS:
        return _SHAPE_WORDS[words[0]]
    if len(words) == 2 and words[0] == "SphereLike":
        return sphere_like(int(words[1]))
    if len(words) == 2 and words[0] == "Declared":
        return declared_shape(int(words[1]))
    raise ValueError(f"unknown shape {text!r}")


def shape_label(shape: Shape) -> str:
    if shape.kind == "point":
        return "Point"
    if shape.kind == "interval":
        return "Interval"
    if shape.kind == "circle":
        return "Circle"
    if shape.kind == "sphere":
        return f"SphereLike {shape.k}"
    return f"Declared {shape.k}"


@dataclass(frozen=True, order=True)
class PieceRef:
    """Reference to one factor component of a broken configuration.

    Names the component ``component`` of the space between the critical
    points keyed ``source`` and ``target`` (canonical point strings at
    the level the reference lives on).
    """

    source: str
    target: str
    component: str


# One boundary configuration: the chain of factor components it breaks into.
Endpoint = tuple[PieceRef, ...]


@dataclass(frozen=True)
class Component:
    """One connected component of a compactified space.

    ``boundary`` lists the component's 0-dimensional boundary
    configurations (for an interval: exactly two), each as the tuple of
    factor components of the broken flow line it represents.
    """

    id: str
    ambient: ModuliAddress
    shape: Shape
    boundary: tuple[Endpoint, ...] = ()

    @property
    def dim(self) -> int:
        return self.shape.dim


@dataclass(frozen=True)
class Stratum:
    """One stratum of a compactified space.

    The open stratum of a component has no intermediates and its single
    factor is the component itself.  A boundary stratum breaks at the
    listed intermediate critical points, with one factor component per
    segment of the chain.
    """

    source: str
    target: str
    intermediates: tuple[str, ...]
    factors: tuple[PieceRef, ...]
    dim: int

    @property
    def depth(self) -> int:
        return len(self.intermediates)


@dataclass(frozen=True)
class Stratification:
    """All strata of one space plus the face relation between them.

    ``closure`` holds index pairs ``(i, j)`` meaning stratum ``i`` lies
    in the closure of stratum ``j``.
    """

    strata: tuple[Stratum, ...]
    closure: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FlowSystem:
    """Finite flow data: base critical points and level-1 components.

    ``pairs`` maps each directly connected ordered pair of base points to
    the components of the space of flow lines between them, in a fixed
    deterministic order.
    """

    points: tuple[CritPoint, ...]
    pairs: tuple[tuple[str, str, tuple[Component, ...]], ...]

    def point(self, pt_id: str) -> CritPoint:
        for p in self.points:
            if p.id == pt_id:
                return p
        raise KeyError(f"no critical point {pt_id!r}")

    def has_point(self, pt_id: str) -> bool:
        return any(p.id == pt_id for p in self.points)

    def components(self, source: str, target: str) -> tuple[Component, ...]:
        for s, t, comps in self.pairs:
            if (s, t) == (source, target):
                return comps
        return ()

    def connected(self, source: str, target: str) -> bool:
        return bool(self.components(source, target))

    def successors(self, source: str) -> tuple[str, ...]:
        return tuple(t for s, t, comps in self.pairs if s == source and comps)

    def address(self, source: str, target: str) -> ModuliAddress:
        return ModuliAddress(
            Primitive(self.point(source)), Primitive(self.point(target))
        )

    @property
    def max_index(self) -> int:
        return max((p.index for p in self.points), default=0)


def _base_ranks(
    ids: tuple[str, ...], edges: dict[str, set[str]]
) -> dict[str, int]:
    """Longest-path rank against flow direction; sinks get rank 1.

    Tolerates cycles (invalid input the validator will report): nodes on
    a cycle get one more than the largest acyclic rank.
    """

    ranks: dict[str, int] = {}
    remaining = set(ids)
    changed = True
    while changed:
        changed = False
        for v in sorted(remaining):
            succs = edges.get(v, set()) & remaining
            if not succs:
                ranks[v] = 1 + max(
                    (ranks[w] for w in edges.get(v, set()) if w in ranks), default=0
                )
                remaining.discard(v)
                changed = True
    fallback = 1 + max(ranks.values(), default=0)
    for v in sorted(remaining):
        ranks[v] = fallback
    return ranks


def flow_system(
    points: list[tuple[str, int]],
    moduli: dict[tuple[str, str], list[tuple[str, Shape, tuple[Endpoint, ...]]]],
) -> FlowSystem:
    """Build a flow system from raw data, assigning base heights.

    ``points`` lists ``(id, index)``; ``moduli`` maps ordered pairs to
    component specs ``(component_id, shape, boundary)``.  Heights strictly
    decrease along the flow and are pairwise distinct: each point gets its
    longest-chain rank plus a dyadic offset by rank-then-id order.
    """

    ids = tuple(pid for pid, _ in points)
    edges: dict[str, set[str]] = {}
    for (s, t), comps in moduli.items():
        if comps:
            edges.setdefault(s, set()).add(t)
    ranks = _base_ranks(ids, edges)
    order = sorted(ids, key=lambda i: (ranks.get(i, 0), i))
    ordinal = {pid: n for n, pid in enumerate(order)}
    index_of = dict(points)
    crit = tuple(
        CritPoint(
            id=pid,
            index=index_of[pid],
            value=Fraction(ranks[pid]) + Fraction(1, 2 ** (ordinal[pid] + 1)),
        )
        for pid, _ in points
    )
    by_id = {p.id: p for p in crit}

    def addr(s: str, t: str) -> ModuliAddress:
        return ModuliAddress(Primitive(by_id[s]), Primitive(by_id[t]))

    pairs = tuple(
        (
            s,
            t,
            tuple(
                Component(id=cid, ambient=addr(s, t), shape=shape, boundary=boundary)
                for cid, shape, boundary in comps
            ),
        )
        for (s, t), comps in sorted(moduli.items())
    )
    return FlowSystem(points=crit, pairs=pairs)


@dataclass(frozen=True)
class Violation:
    """One law the flow data breaks, with the ids involved."""

    code: str
    message: str
    subjects: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def moduli_dimension(fs: FlowSystem, source: str, target: str) -> int:
    """Dimension of the compactified space between two base points.

    Defined as index difference minus one; requires the pair to be
    directly connected.
    """

    if not fs.connected(source, target):
        raise ValueError(f"no flow lines from {source!r} to {target!r}")
    return fs.point(source).index - fs.point(target).index - 1


def _chains(fs: FlowSystem, source: str, target: str) -> list[tuple[str, ...]]:
    """All chains of intermediate points from source to target.

    Every consecutive pair along a chain must be directly connected.
    Returns tuples of intermediates (possibly empty), shortest first.
    """

    out: list[tuple[str, ...]] = []

    def walk(at: str, mids: tuple[str, ...]) -> None:
        if fs.connected(at, target):
            out.append(mids)
        for nxt in fs.successors(at):
            if nxt != target and nxt != source and nxt not in mids:
                walk(nxt, mids + (nxt,))

    walk(source, ())
    return sorted(out, key=lambda m: (len(m), m))


def _refines(
    sub: Stratum, sup: Stratum, comp_of: dict[tuple[str, str, str], Component]
) -> bool:
    """Whether ``sub`` lies in the closure of ``sup``.

    The intermediates of ``sup`` must appear, in order, among those of
    ``sub``; over each single factor of ``sup``, the induced segment of
    ``sub`` must either be the same component or one of its boundary
    configurations.
    """

    sup_chain = (sup.source,) + sup.intermediates + (sup.target,)
    sub_chain = (sub.source,) + sub.intermediates + (sub.target,)
    if sub == sup:
        return False
    # locate sup's chain inside sub's chain
    positions = []
    start = 0
    for pt in sup_chain:
        try:
            pos = sub_chain.index(pt, start)
        except ValueError:
            return False
        positions.append(pos)
        start = pos + 1
    if positions[0] != 0 or positions[-1] != len(sub_chain) - 1:
        return False
    for k in range(len(sup.factors)):
        lo, hi = positions[k], positions[k + 1]
        segment = sub.factors[lo:hi]
        sup_factor = sup.factors[k]
        if len(segment) == 1 and segment[0] == sup_factor:
            continue
        comp = comp_of.get((sup_factor.source, sup_factor.target, sup_factor.component))
        if comp is None or segment not in comp.boundary:
            return False
    return True


def _stratify(
    source: str,
    target: str,
    chains: list[tuple[str, ...]],
    comps_of: dict[tuple[str, str], tuple[Component, ...]],
) -> Stratification:
    """Enumerate strata (all chains, all factor choices) with closure."""

    comp_of = {(s, t, c.id): c for (s, t), cs in comps_of.items() for c in cs}
    strata: list[Stratum] = []
    for mids in chains:
        chain = (source,) + mids + (target,)
        segs = list(zip(chain, chain[1:]))
        choices: list[tuple[PieceRef, ...]] = [()]
        for s, t in segs:
            comps = comps_of.get((s, t), ())
            choices = [
                chosen + (PieceRef(s, t, c.id),) for chosen in choices for c in comps
            ]
        for factors in choices:
            dim = sum(
                comp_of[(r.source, r.target, r.component)].dim for r in factors
            )
            strata.append(
                Stratum(
                    source=source,
                    target=target,
                    intermediates=mids,
                    factors=factors,
                    dim=dim,
                )
            )
    strata.sort(key=lambda s: (len(s.intermediates), s.intermediates, tuple(
        (r.source, r.target, r.component) for r in s.factors
    )))
    closure = tuple(
        (i, j)
        for i, sub in enumerate(strata)
        for j, sup in enumerate(strata)
        if _refines(sub, sup, comp_of)
    )
    return Stratification(strata=tuple(strata), closure=closure)


def boundary_strata(fs: FlowSystem, source: str, target: str) -> Stratification:
    """All strata of the space between two base points, with closure.

    One open stratum per component (empty chain), plus one stratum per
    chain of intermediates per choice of factor components.
    """

    if not fs.connected(source, target):
        raise ValueError(f"no flow lines from {source!r} to {target!r}")
    chains = _chains(fs, source, target)
    comps_of = {(s, t): cs for s, t, cs in fs.pairs}
    return _stratify(source, target, chains, comps_of)


def depth(p: Point) -> int:
    """How deep in the boundary a point sits: its number of breaks.

    A point glued from d+1 pieces lies on exactly d+1 closed faces and in
    the depth-d part of the stratification.
    """

    return len(flatten_point(p)) - 1


_ID_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+-")


def validate_flow_system(fs: FlowSystem) -> tuple[Violation, ...]:
    """Check every law of the flow data, reporting all violations.

    Covers: well-formed unique ids, index monotonicity along connections
    (hence acyclicity), the dimension formula per component, interval
    endpoints being well-formed broken configurations, the exact matching
    of broken configurations to interval endpoints, and the face-of-face
    condition on the resulting strata.
    """

    out: list[Violation] = []
    seen: set[str] = set()
    for p in fs.points:
        if p.id in seen:
            out.append(Violation("dup-point", f"duplicate critical point id {p.id!r}", (p.id,)))
        seen.add(p.id)
        if not p.id or not set(p.id) <= _ID_OK:
            out.append(
                Violation(
                    "bad-id",
                    f"critical point id {p.id!r} has characters outside [A-Za-z0-9_.+-]",
                    (p.id,),
                )
            )
        if p.index < 0:
            out.append(Violation("bad-index", f"{p.id!r} has negative index", (p.id,)))

    pair_seen: set[tuple[str, str]] = set()
    for s, t, comps in fs.pairs:
        subj = (s, t)
        if (s, t) in pair_seen:
            out.append(Violation("dup-pair", f"pair ({s},{t}) listed twice", subj))
        pair_seen.add((s, t))
        for e in (s, t):
            if not fs.has_point(e):
                out.append(Violation("unknown-point", f"pair ({s},{t}) names unknown point {e!r}", subj))
        if not all(fs.has_point(e) for e in (s, t)):
            continue
        if s == t:
            out.append(Violation("self-pair", f"pair ({s},{t}): stationary spaces are implicit, not input", subj))
            continue
        if not comps:
            continue
        si, ti = fs.point(s).index, fs.point(t).index
        if si <= ti:
            out.append(
                Violation(
                    "index-order",
                    f"flow from {s!r} (index {si}) to {t!r} (index {ti}) must strictly drop index",
                    subj,
                )
            )
            continue
        dim = si - ti - 1
        cids: set[str] = set()
        for c in comps:
            if c.id in cids:
                out.append(Violation("dup-component", f"pair ({s},{t}): duplicate component id {c.id!r}", subj + (c.id,)))
            cids.add(c.id)
            if c.dim != dim:
                out.append(
                    Violation(
                        "dimension",
                        f"component {c.id!r} of ({s},{t}) has dimension {c.dim}, "
                        f"but index difference gives {dim}",
                        subj + (c.id,),
                    )
                )
            if c.shape.closed and c.boundary:
                out.append(
                    Violation(
                        "closed-boundary",
                        f"component {c.id!r} of ({s},{t}) is closed but lists boundary",
                        subj + (c.id,),
                    )
                )
            if c.shape == INTERVAL and len(c.boundary) != 2:
                out.append(
                    Violation(
                        "interval-ends",
                        f"interval {c.id!r} of ({s},{t}) needs exactly 2 endpoints, has {len(c.boundary)}",
                        subj + (c.id,),
                    )
                )
            if c.shape == INTERVAL and len(c.boundary) == 2 and c.boundary[0] == c.boundary[1]:
                out.append(
                    Violation(
                        "interval-ends",
                        f"interval {c.id!r} of ({s},{t}) has two equal endpoints",
                        subj + (c.id,),
                    )
                )
            for end in c.boundary:
                if len(end) < 2:
                    out.append(
                        Violation(
                            "endpoint-shape",
                            f"endpoint of {c.id!r} of ({s},{t}) must break into >= 2 pieces",
                            subj + (c.id,),
                        )
                    )
                    continue
                ok = end[0].source == s and end[-1].target == t and all(
                    a.target == b.source for a, b in zip(end, end[1:])
                )
                if not ok:
                    out.append(
                        Violation(
                            "endpoint-chain",
                            f"endpoint of {c.id!r} of ({s},{t}) is not a chain from {s!r} to {t!r}",
                            subj + (c.id,),
                        )
                    )
                    continue
                for r in end:
                    rc = next(
                        (cc for cc in fs.components(r.source, r.target) if cc.id == r.component),
                        None,
                    )
                    if rc is None:
                        out.append(
                            Violation(
                                "endpoint-ref",
                                f"endpoint of {c.id!r} of ({s},{t}) references missing "
                                f"component {r.component!r} of ({r.source},{r.target})",
                                subj + (c.id,),
                            )
                        )
                    elif rc.dim != 0:
                        out.append(
                            Violation(
                                "endpoint-dim",
                                f"endpoint piece {r.component!r} of ({r.source},{r.target}) "
                                "must be 0-dimensional",
                                subj + (c.id,),
                            )
                        )

    # Broken configurations must match interval endpoints exactly.
    if not any(v.code in ("index-order", "unknown-point", "self-pair") for v in out):
        ids = sorted(p.id for p in fs.points)
        for x in ids:
            for z in ids:
                if x == z:
                    continue
                mids = [m for m in _chains(fs, x, z) if len(m) == 1]
                configs: set[Endpoint] = set()
                for (m,) in mids:
                    for c1 in fs.components(x, m):
                        if c1.dim != 0:
                            continue
                        for c2 in fs.components(m, z):
                            if c2.dim != 0:
                                continue
                            configs.add((PieceRef(x, m, c1.id), PieceRef(m, z, c2.id)))
                used: list[Endpoint] = []
                for c in fs.components(x, z):
                    for end in c.boundary:
                        if len(end) == 2:
                            used.append(end)
                if configs and not fs.connected(x, z):
                    out.append(
                        Violation(
                            "missing-space",
                            f"flow lines break from {x!r} to {z!r} but no space ({x},{z}) is given",
                            (x, z),
                        )
                    )
                    continue
                if fs.connected(x, z) and fs.point(x).index - fs.point(z).index - 1 == 1:
                    for cfg in sorted(configs - set(used)):
                        out.append(
                            Violation(
                                "uncovered-breaking",
                                f"broken configuration {_end_str(cfg)} of ({x},{z}) "
                                "is no interval endpoint",
                                (x, z),
                            )
                        )
                    for cfg in sorted(set(used) - configs):
                        out.append(
                            Violation(
                                "phantom-endpoint",
                                f"interval endpoint {_end_str(cfg)} of ({x},{z}) "
                                "matches no broken configuration",
                                (x, z),
                            )
                        )
                    for cfg in sorted(configs):
                        if used.count(cfg) > 1:
                            out.append(
                                Violation(
                                    "reused-breaking",
                                    f"broken configuration {_end_str(cfg)} of ({x},{z}) "
                                    "is an endpoint of more than one interval",
                                    (x, z),
                                )
                            )

        # Face-of-face: every double break refines through a single break.
        for x in ids:
            for z in ids:
                if x == z or not fs.connected(x, z):
                    continue
                strat = boundary_strata(fs, x, z)
                for sub in strat.strata:
                    if sub.depth < 2:
                        continue
                    for drop in range(sub.depth):
                        mids = sub.intermediates[:drop] + sub.intermediates[drop + 1 :]
                        found = any(
                            sup.intermediates == mids
                            and _refines(sub, sup, _comp_map(fs))
                            for sup in strat.strata
                        )
                        if not found:
                            out.append(
                                Violation(
                                    "face-of-face",
                                    f"stratum of ({x},{z}) broken at {sub.intermediates} does not "
                                    f"lie in the closure of a stratum broken at {mids}",
                                    (x, z),
                                )
                            )
    return tuple(out)


def _comp_map(fs: FlowSystem) -> dict[tuple[str, str, str], Component]:
    return {(s, t, c.id): c for s, t, cs in fs.pairs for c in cs}


def _end_str(end: Endpoint) -> str:
    return "(" + ",".join(f"{r.component}@{r.source}>{r.target}" for r in end) + ")"
